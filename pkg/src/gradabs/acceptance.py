"""The acceptance battery: twelve scripted checks covering exponent
arithmetic, solver fidelity against the self-similar benchmark, decay and
support laws in every regime, dead-core persistence, the discrete
comparison principle, mass balance, and the proof-machinery scans.

Simulation products are cached so criteria sharing a run pay for it once.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import bernstein, fit, model, observe, solver
from .exponents import (ProblemParams, alpha_p, compute_exponents, q_star,
                        xi_exponent)


@dataclass(frozen=True)
class CriterionResult:
    name: str
    passed: bool
    details: str
    seconds: float

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.details} ({self.seconds:.1f}s)"


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


class AcceptanceLab:
    """Shared simulation cache plus one method per criterion."""

    # absorption-on runs; q=1.5 uses a smaller eps so the late-time
    # absorption term is not flattened by the regularization
    RUNS = {
        "q16": solver.RunConfig(3.0, 1.6, 1, geometry="radial", h=0.01,
                                L=6.0, t_end=256.0),
        "q25": solver.RunConfig(3.0, 2.5, 1, geometry="radial", h=0.01,
                                L=12.0, t_end=50.0, record_start=0.5),
        "q30": solver.RunConfig(3.0, 3.0, 1, geometry="radial", h=0.01,
                                L=14.0, t_end=256.0),
        "q15": solver.RunConfig(3.0, 1.5, 1, eps=1e-5, geometry="radial",
                                h=0.01, L=5.0, t_end=256.0),
        # amplitude scaling u -> lam u, x -> lam^(-1/3) x, t -> lam^(-2) t
        # maps solutions to solutions at (p, q) = (3, 2.25), so a tall bump
        # observes much later self-similar times inside the same fit window
        "q225": solver.RunConfig(3.0, 2.25, 1, geometry="radial", h=0.01,
                                 L=14.0, t_end=256.0,
                                 profile="bump:R0=1,H=16,m=2"),
        "deadcore": solver.RunConfig(3.0, 1.5, 1, eps=1e-5, geometry="radial",
                                     h=0.01, L=9.0, t_end=256.0,
                                     profile="annulus:R0=4,R1=6,H=1"),
    }

    def __init__(self):
        self._cache = {}

    # -- cached runs ---------------------------------------------------------

    def _bb_config(self, h, t_end, L):
        return solver.RunConfig(3.0, 2.0, 1, geometry="radial", h=h, L=L,
                                t_end=t_end, profile="barenblatt:t0=1",
                                absorption=False, record_start=1.0)

    def bb_short(self, h):
        key = ("bb_short", h)
        if key not in self._cache:
            self._cache[key] = solver.run(self._bb_config(h, 2.0, 6.0))
        return self._cache[key]

    def bb_long(self):
        if "bb_long" not in self._cache:
            self._cache["bb_long"] = solver.run(self._bb_config(0.005, 256.0, 17.0))
        return self._cache["bb_long"]

    def absorption_run(self, name):
        key = ("run", name)
        if key not in self._cache:
            config = self.RUNS[name]
            if name == "deadcore":
                core = []

                def probe(state):
                    mask = np.abs(state.grid.centers()) <= 1.0
                    core.append(float(np.max(state.values[mask]) - state.floor))

                state, series = solver.run(config, on_record=probe)
                self._cache[key] = (state, series, core)
            else:
                state, series = solver.run(config)
                self._cache[key] = (state, series, None)
        return self._cache[key]

    # -- criteria ------------------------------------------------------------

    def check_exponents(self):
        checks = []
        ex = compute_exponents(ProblemParams(3.0, 2.0, 1))
        for got, want in ((ex.alpha_p, 0.5), (ex.beta_pq, 0.5),
                          (ex.q_star, 2.5), (ex.xi, 1.0 / 3.0), (ex.eta, 0.25)):
            checks.append(abs(got - want) <= 1e-15)
        checks.append(abs(compute_exponents(ProblemParams(3.0, 2.0, 2)).alpha_p
                          - 9.0 / 17.0) <= 1e-15)
        worst = 0.0
        for p in np.linspace(2.2, 5.0, 20):
            qs = q_star(p, 1)
            for frac in np.linspace(0.05, 0.95, 20):
                q = (p - 1.0) + frac * (qs - (p - 1.0))
                e = compute_exponents(ProblemParams(float(p), float(q), 1))
                A, B = e.A_support, e.B_l1
                xi = e.xi
                id1 = A + q * xi * (p - 2.0) * B / p - (1.0 - xi * (p - 2.0)) / p
                id2 = 1.0 - A / xi - (q - 1.0) * B
                worst = max(worst, abs(id1), abs(id2))
        checks.append(worst <= 1e-12)
        return all(checks), f"examples exact, identity defect {worst:.2e}"

    def check_barenblatt(self):
        exact = model.BarenblattSolution(3.0, 1)

        def sup_error(h):
            state, _ = self.bb_short(h)
            r = state.grid.centers()
            err = np.abs(state.values - state.floor - exact.value(2.0, r))
            return float(err.max()) / float(exact.sup_norm(2.0))

        e1, e2 = sup_error(0.005), sup_error(0.0025)
        ratio = e1 / e2
        _, series = self.bb_long()
        res = fit.fit_power(series.t, series.column("sup_excess"), (1.0, 16.0))
        dev = abs(res.exponent + 0.25)
        ok = e1 <= 0.02 and ratio >= 1.7 and dev <= 0.02
        return ok, (f"sup err {e1:.4f} (<=0.02), h-refinement ratio {ratio:.2f} "
                    f"(>=1.7), decay exponent {res.exponent:.4f} (within 0.02 of -0.25)")

    def check_pure_diffusion_support(self):
        _, series = self.bb_long()
        res = fit.fit_power(series.t, series.column("rho"),
                            fit.default_window(series.t))
        dev = abs(res.exponent - 0.25)
        return dev <= 0.05, f"support growth exponent {res.exponent:.4f} (within 0.05 of 0.25)"

    def check_subcritical_decay(self):
        _, series, _ = self.absorption_run("q16")
        res = fit.fit_power(series.t, series.column("sup_excess"),
                            fit.default_window(series.t))
        bound = -xi_exponent(1.6, 1) + 0.08
        return res.exponent <= bound, (
            f"sup decay exponent {res.exponent:.4f} <= {bound:.4f}")

    def check_radial_gradient_constant(self):
        _, series, _ = self.absorption_run("q25")
        q = 2.5
        t = series.t
        mask = (t >= 0.5) & (t <= 50.0)
        scaled = series.column("grad_beta")[mask] * t[mask] ** (1.0 / q)
        worst = float(scaled.max())
        bound = 1.10 * (q - 1.0) ** ((q - 1.0) / q) / q
        return worst <= bound, (
            f"max grad_beta * t^(1/q) = {worst:.4f} <= {bound:.4f}")

    def check_l1_dichotomy(self):
        _, s30, _ = self.absorption_run("q30")
        plat = fit.plateau_test(s30.t, s30.column("l1_excess"),
                                (64.0, 256.0), rel_tol=0.05)
        l1 = s30.column("l1_excess")
        level_ok = l1[-1] >= 0.2 * l1[0]
        _, s15, _ = self.absorption_run("q15")
        res = fit.fit_power(s15.t, s15.column("l1_excess"),
                            fit.default_window(s15.t))
        decay_ok = res.exponent <= -2.0 + 0.3
        ok = bool(plat.passed) and level_ok and decay_ok
        return ok, (f"q=3 plateau {'ok' if plat.passed else 'FAIL'}, level "
                    f"{l1[-1] / l1[0]:.3f} of initial (>=0.2); q=1.5 L1 exponent "
                    f"{res.exponent:.3f} (<= -1.7)")

    def check_localization(self):
        _, series, _ = self.absorption_run("q15")
        t = series.t
        rho = series.column("rho")
        r8 = float(rho[np.argmin(np.abs(t - 8.0))])
        growth = float(rho[-1]) - r8
        cap = 3.0 * self.RUNS["q15"].h
        return growth <= cap, f"rho(256) - rho(8) = {growth:.4f} <= {cap:.4f}"

    def check_intermediate_support(self):
        _, series, _ = self.absorption_run("q225")
        window = (16.0, 256.0)
        res_rho = fit.fit_power(series.t, series.column("rho"), window)
        res_l1 = fit.fit_power(series.t, series.column("l1_excess"), window)
        rho_ok = res_rho.exponent <= 1.0 / 6.0 + 0.05
        l1_ok = res_l1.exponent <= -1.0 / 3.0 + 0.1
        return rho_ok and l1_ok, (
            f"rho exponent {res_rho.exponent:.4f} (<= {1/6 + 0.05:.4f}), "
            f"L1 exponent {res_l1.exponent:.4f} (<= {-1/3 + 0.1:.4f})")

    def check_deadcore(self):
        _, _, core = self.absorption_run("deadcore")
        worst = max(core)
        floor = self.RUNS["deadcore"].params().floor
        return worst <= 10.0 * floor, (
            f"max core excess {worst:.3e} <= 10 x floor = {10.0 * floor:.3e}")

    def check_comparison(self):
        config = solver.RunConfig(3.0, 2.0, 1, geometry="radial", h=0.01,
                                  L=6.0, t_end=2.0)
        low = model.Bump(R0=1.0, H=1.0, m=2.0)
        high = model.Bump(R0=1.0, H=1.5, m=2.0)
        rep_scale = solver.comparison_run(low, high, config)
        rep_absorb = solver.comparison_run(low, low, config,
                                           absorption_a=True, absorption_b=False)
        v1, v2 = rep_scale["max_violation"], rep_absorb["max_violation"]
        return v1 <= 1e-12 and v2 <= 1e-12, (
            f"ordering violations {v1:.2e} (scaled pair), {v2:.2e} "
            f"(absorption on/off), both <= 1e-12")

    def check_mass_balance(self):
        worst_name, worst = "", 0.0
        for name in self.RUNS:
            _, series, _ = self.absorption_run(name)
            res = observe.mass_balance_residual(series)
            if res > worst:
                worst_name, worst = name, res
        return worst <= 1e-3, f"worst residual {worst:.2e} ({worst_name}), <= 1e-3"

    def check_bernstein(self):
        msgs, ok = [], True
        for q in (1.1, 1.5, 2.0, 2.5, 3.0, 4.0):
            rep = bernstein.check_b22(q)
            ok &= rep.passed
            msgs.append(f"b22(q={q}) margin {rep.worst_margin:.2e}")
        alpha = alpha_p(3.0, 1)
        mus = []
        for eps in (1e-1, 1e-2, 1e-3):
            mus.append(bernstein.search_mu(1.0, eps, 0.75, alpha))
        msgs.append(f"mu found: {mus}")
        # supersolution margins: zero at equality, positive at the two
        # working scalings with the damping bounded by the eps defect
        eq = bernstein.verify_power_supersolution(1.0, 0.0, 2.5, 2.0 / 3.0,
                                                  (2.0 / 3.0) ** (2.0 / 3.0), 1.0)
        ok &= abs(eq.worst_margin) <= 1e-12
        d = bernstein.omega_eps(ProblemParams(3.0, 2.0, 1, eps=1e-3, gamma=0.75))
        T = d ** -0.5
        for m, sigma in ((2.5, 2.0 / 3.0), (2.0, 1.0)):  # p=3 and q=2 scalings
            theta = (2.0 * (sigma + d * T)) ** (1.0 / (m - 1.0))
            rep = bernstein.verify_power_supersolution(1.0, d, m, sigma, theta, T)
            ok &= rep.passed and rep.worst_margin > 0.0
            msgs.append(f"S(m={m}) margin {rep.worst_margin:.3f}")
        # closed-form derivatives against centered finite differences
        rng = np.random.default_rng(7)
        worst_fd = 0.0
        for phi, lo, hi in ((bernstein.Phi1(2.0, 0.5), 0.02, 1.9),
                            (bernstein.Phi2(0.6), 0.05, 5.0)):
            v = rng.uniform(lo, hi, 50)
            dh = 1e-6 * (hi - lo)
            d1, d2, d3 = phi.derivatives(v)
            p1 = lambda x: phi.derivatives(x)[0]
            fd1 = (p1(v + dh) - p1(v - dh)) / (2.0 * dh)
            worst_fd = max(worst_fd, float(np.max(np.abs(fd1 - d2) / np.abs(d2))))
        ok &= worst_fd <= 1e-6
        msgs.append(f"derivative FD defect {worst_fd:.1e}")
        return bool(ok), "; ".join(msgs)

    CRITERIA = {
        "exponents": check_exponents,
        "barenblatt": check_barenblatt,
        "pure-diffusion-support": check_pure_diffusion_support,
        "subcritical-decay": check_subcritical_decay,
        "radial-gradient-constant": check_radial_gradient_constant,
        "l1-dichotomy": check_l1_dichotomy,
        "localization": check_localization,
        "intermediate-support": check_intermediate_support,
        "deadcore": check_deadcore,
        "comparison": check_comparison,
        "mass-balance": check_mass_balance,
        "bernstein": check_bernstein,
    }

    def run_criterion(self, name) -> CriterionResult:
        start = time.perf_counter()
        try:
            passed, details = self.CRITERIA[name](self)
        except (solver.NumericalError, fit.FitError) as exc:
            passed, details = False, f"{type(exc).__name__}: {exc}"
        return CriterionResult(name, bool(passed), details,
                               time.perf_counter() - start)

    def run_all(self, only=None):
        names = [n for n in self.CRITERIA if only is None or n in only]
        return [self.run_criterion(n) for n in names]
