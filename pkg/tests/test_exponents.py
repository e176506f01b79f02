import numpy as np
import pytest

from gradabs.exponents import (EQUALITY_TOL, InvalidParams, ProblemParams,
                               Regime, alpha_p, beta_pq, classify_regime,
                               compute_exponents, gamma_cap, predicted_laws,
                               q_star)


def test_worked_examples_exact():
    ex = compute_exponents(ProblemParams(3.0, 2.0, 1))
    assert ex.alpha_p == pytest.approx(0.5, abs=1e-15)
    assert ex.beta_pq == pytest.approx(0.5, abs=1e-15)
    assert ex.q_star == pytest.approx(2.5, abs=1e-15)
    assert ex.xi == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert ex.eta == pytest.approx(0.25, abs=1e-15)

    ex2 = compute_exponents(ProblemParams(3.0, 2.0, 2))
    assert ex2.alpha_p == pytest.approx(9.0 / 17.0, abs=1e-15)
    assert ex2.q_star == pytest.approx(7.0 / 3.0, abs=1e-15)
    assert ex2.xi == pytest.approx(0.25, abs=1e-15)
    assert ex2.eta == pytest.approx(0.2, abs=1e-15)

    mid = compute_exponents(ProblemParams(3.0, 2.25, 1))
    assert mid.A_support == pytest.approx(1.0 / 6.0, abs=1e-15)
    assert mid.B_l1 == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_support_exponents_absent_outside_intermediate_regime():
    for q in (1.5, 2.0, 2.5, 3.0):
        ex = compute_exponents(ProblemParams(3.0, q, 1))
        assert ex.A_support is None
        assert ex.B_l1 is None


def test_regime_examples():
    assert classify_regime(ProblemParams(3.0, 1.5, 1)) is Regime.ABSORPTION_DOMINATED
    assert classify_regime(ProblemParams(3.0, 2.0, 1)) is Regime.CRITICAL_ABSORPTION
    assert classify_regime(ProblemParams(3.0, 2.25, 1)) is Regime.INTERMEDIATE
    assert classify_regime(ProblemParams(3.0, 2.5, 1)) is Regime.CRITICAL_MASS
    assert classify_regime(ProblemParams(3.0, 3.0, 1)) is Regime.DIFFUSION_DOMINATED


def test_regimes_partition_q_axis():
    rng = np.random.default_rng(3)
    for _ in range(200):
        p = rng.uniform(2.05, 6.0)
        q = rng.uniform(1.01, p + 2.0)
        r = classify_regime(ProblemParams(float(p), float(q), 1))
        qs = q_star(p, 1)
        if abs(q - (p - 1.0)) <= EQUALITY_TOL:
            assert r is Regime.CRITICAL_ABSORPTION
        elif abs(q - qs) <= EQUALITY_TOL:
            assert r is Regime.CRITICAL_MASS
        elif q < p - 1.0:
            assert r is Regime.ABSORPTION_DOMINATED
        elif q < qs:
            assert r is Regime.INTERMEDIATE
        else:
            assert r is Regime.DIFFUSION_DOMINATED


def test_exponent_bounds_on_grid():
    for p in np.linspace(2.1, 6.0, 12):
        for N in range(1, 6):
            a = alpha_p(p, N)
            assert 0.0 < a < 1.0
            qs = q_star(p, N)
            assert p - 1.0 < qs < p
            for q in np.linspace(1.1, 5.0, 9):
                b = beta_pq(p, q, N)
                assert 0.0 < b < 1.0
                assert b >= a and b >= (q - 1.0) / q


def test_alpha_increasing_in_p():
    for N in range(1, 6):
        vals = [alpha_p(p, N) for p in np.linspace(2.1, 6.0, 40)]
        assert all(b > a for a, b in zip(vals, vals[1:]))


def test_intermediate_identities():
    # A + q xi (p-2) B / p = (1 - N xi (p-2)) / p and 1 - A/xi = (q-1) B
    rng = np.random.default_rng(11)
    for _ in range(200):
        p = rng.uniform(2.1, 6.0)
        N = int(rng.integers(1, 5))
        lo, hi = p - 1.0, q_star(p, N)
        q = rng.uniform(lo + 0.02 * (hi - lo), hi - 0.02 * (hi - lo))
        ex = compute_exponents(ProblemParams(float(p), float(q), N))
        A, B, xi = ex.A_support, ex.B_l1, ex.xi
        assert abs(A + q * xi * (p - 2.0) * B / p
                   - (1.0 - N * xi * (p - 2.0)) / p) <= 1e-12
        assert abs(1.0 - A / xi - (q - 1.0) * B) <= 1e-12


def test_param_validation():
    with pytest.raises(InvalidParams):
        ProblemParams(2.0, 2.0, 1)
    with pytest.raises(InvalidParams):
        ProblemParams(3.0, 1.0, 1)
    with pytest.raises(InvalidParams):
        ProblemParams(3.0, 2.0, 0)
    with pytest.raises(InvalidParams):
        ProblemParams(3.0, 2.0, 1, eps=0.6)
    with pytest.raises(InvalidParams):
        ProblemParams(3.0, 2.0, 1, gamma=0.8)  # above the 3/4 cap
    with pytest.raises(InvalidParams):
        ProblemParams(3.0, 2.0, 1, gamma=0.0)


def test_gamma_default_is_cap():
    params = ProblemParams(3.0, 2.0, 1)
    assert params.gamma == gamma_cap(3.0, 2.0, 1) == 0.75
    assert params.floor == pytest.approx(1e-3 ** 0.75)
    # small q caps gamma at q
    assert ProblemParams(3.0, 1.02, 1).gamma == pytest.approx(
        min(0.75, 2.0 * beta_pq(3.0, 1.02, 1), 1.02))


def test_predicted_laws_examples():
    laws = predicted_laws(ProblemParams(3.0, 1.6, 1))
    assert laws.sup_exponents[0] == pytest.approx(-1.0 / 2.2)
    assert laws.grad_exponents[0] == pytest.approx(-2.0 / 2.2)
    assert laws.support.kind == "bounded"
    assert laws.l1.kind == "power"
    assert laws.l1.exponent == pytest.approx(-1.0 / 0.6)

    laws = predicted_laws(ProblemParams(3.0, 3.0, 1))
    assert laws.sup_exponents[0] == pytest.approx(-0.25)
    assert laws.support.kind == "power"
    assert laws.support.exponent == pytest.approx(0.25)
    assert laws.l1.kind == "positive_limit"

    laws = predicted_laws(ProblemParams(3.0, 2.0, 1))
    assert laws.support.kind == "log"
    assert laws.l1.kind == "power_log"


def test_predicted_laws_critical_mass_reports_both_branches():
    laws = predicted_laws(ProblemParams(3.0, 2.5, 1))
    assert laws.critical_mass
    assert len(laws.sup_exponents) == 2
    # xi and eta coincide exactly at the critical exponent
    assert laws.sup_exponents[0] == pytest.approx(laws.sup_exponents[1])
    assert laws.l1.kind == "inverse_log_power"


def test_law_selection_consistent_with_regime():
    table = {
        Regime.ABSORPTION_DOMINATED: ("bounded", "power"),
        Regime.CRITICAL_ABSORPTION: ("log", "power_log"),
        Regime.INTERMEDIATE: ("power", "power"),
        Regime.CRITICAL_MASS: ("power", "inverse_log_power"),
        Regime.DIFFUSION_DOMINATED: ("power", "positive_limit"),
    }
    rng = np.random.default_rng(5)
    for _ in range(100):
        p = rng.uniform(2.1, 5.0)
        q = rng.uniform(1.05, p + 1.0)
        params = ProblemParams(float(p), float(q), 1)
        laws = predicted_laws(params)
        support_kind, l1_kind = table[laws.regime]
        assert laws.support.kind == support_kind
        assert laws.l1.kind == l1_kind
