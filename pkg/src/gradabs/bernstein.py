"""Closed-form evaluators and brute-force checkers for the gradient-bound
machinery: the remainder terms R1, R2 and the radial variant R1^r produced
by the Bernstein substitution w = |grad(phi^{-1}(u))|^2, the two working
substitutions phi1/phi2 with their sign properties, the Young-inequality
bound on the absorption bracket, and the power-law supersolution reduction.

Unnamed constants of the underlying estimates are never hardcoded; the
checkers report empirical worst margins instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exponents import InvalidParams, ProblemParams, alpha_p, beta_pq

MARGIN_SLACK = 1e-12


# ---------------------------------------------------------------------------
# substitution functions phi with closed-form derivatives


@dataclass(frozen=True)
class Identity:
    """phi(r) = r; both remainder terms vanish identically."""

    def derivatives(self, v):
        v = np.asarray(v, dtype=float)
        one = np.ones_like(v)
        zero = np.zeros_like(v)
        return one, zero, zero

    def ratio(self, v):
        return np.zeros_like(np.asarray(v, dtype=float))

    def ratio_prime(self, v):
        return np.zeros_like(np.asarray(v, dtype=float))

    def check_domain(self, v):
        pass


@dataclass(frozen=True)
class Phi1:
    """phi(r) = (2 K r - r^2)^(1/alpha) on (0, K]; the perturbed power
    substitution behind the t^{-1/p} composite gradient bound."""

    K: float
    alpha: float

    def __post_init__(self):
        if not (self.K > 0.0 and 0.0 < self.alpha < 1.0):
            raise InvalidParams(f"Phi1 needs K > 0 and alpha in (0,1)")

    def check_domain(self, v):
        v = np.asarray(v, dtype=float)
        if np.any(v <= 0.0) or np.any(v > self.K):
            raise InvalidParams(f"Phi1 argument outside (0, K={self.K}]")

    def derivatives(self, v):
        """(phi', phi'', phi''') at v, via s = 2Kv - v^2."""
        self.check_domain(v)
        v = np.asarray(v, dtype=float)
        ia = 1.0 / self.alpha
        s = 2.0 * self.K * v - v * v
        sp = 2.0 * (self.K - v)
        d1 = ia * s ** (ia - 1.0) * sp
        d2 = ia * ((ia - 1.0) * s ** (ia - 2.0) * sp * sp
                   - 2.0 * s ** (ia - 1.0))
        d3 = ia * ((ia - 1.0) * (ia - 2.0) * s ** (ia - 3.0) * sp ** 3
                   - 6.0 * (ia - 1.0) * s ** (ia - 2.0) * sp)
        return d1, d2, d3

    def ratio(self, v):
        """phi''/phi' = (1/alpha - 1) s'/s - 1/(K - v)."""
        self.check_domain(v)
        v = np.asarray(v, dtype=float)
        s = 2.0 * self.K * v - v * v
        return (1.0 / self.alpha - 1.0) * 2.0 * (self.K - v) / s - 1.0 / (self.K - v)

    def ratio_prime(self, v):
        self.check_domain(v)
        v = np.asarray(v, dtype=float)
        s = 2.0 * self.K * v - v * v
        sp = 2.0 * (self.K - v)
        return (1.0 / self.alpha - 1.0) * (-2.0 * s - sp * sp) / (s * s) \
            - 1.0 / (self.K - v) ** 2


@dataclass(frozen=True)
class Phi2:
    """phi(r) = beta r^(1/beta); the substitution behind the t^{-1/q}
    composite gradient bound."""

    beta: float

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise InvalidParams("Phi2 needs beta in (0, 1)")

    def check_domain(self, v):
        if np.any(np.asarray(v) <= 0.0):
            raise InvalidParams("Phi2 argument must be positive")

    def derivatives(self, v):
        self.check_domain(v)
        v = np.asarray(v, dtype=float)
        ib = 1.0 / self.beta
        d1 = v ** (ib - 1.0)
        d2 = (ib - 1.0) * v ** (ib - 2.0)
        d3 = (ib - 1.0) * (ib - 2.0) * v ** (ib - 3.0)
        return d1, d2, d3

    def ratio(self, v):
        self.check_domain(v)
        return (1.0 / self.beta - 1.0) / np.asarray(v, dtype=float)

    def ratio_prime(self, v):
        self.check_domain(v)
        v = np.asarray(v, dtype=float)
        return -(1.0 / self.beta - 1.0) / (v * v)


# ---------------------------------------------------------------------------
# remainder-term evaluators


@dataclass(frozen=True)
class BernsteinInputs:
    """Free-standing evaluation point: g = (|grad u|^2 + eps^2)^(1/2),
    w = |grad v|^2, v = phi^{-1}(u).  Consistency g^2 = phi'(v)^2 w + eps^2
    holds for field-derived points but is not enforced here."""

    g: float
    w: float
    v: float
    params: ProblemParams

    def __post_init__(self):
        if np.any(np.asarray(self.g) < self.params.eps):
            raise InvalidParams("g must satisfy g >= eps")
        if np.any(np.asarray(self.w) < 0.0):
            raise InvalidParams("w must be non-negative")


def r2_value(inputs: BernsteinInputs, phi):
    """(phi''/phi'^2)(v) [(q-1) g^q + eps^q - q eps^2 g^{q-2}]."""
    q, eps = inputs.params.q, inputs.params.eps
    g, v = inputs.g, inputs.v
    d1, d2, _ = phi.derivatives(v)
    bracket = (q - 1.0) * g ** q + eps ** q - q * eps * eps * g ** (q - 2.0)
    return d2 / (d1 * d1) * bracket


def r11_value(inputs: BernsteinInputs, phi):
    """The eps^2-weighted remainder of the diffusive term."""
    p, N = inputs.params.p, inputs.params.N
    eps = inputs.params.eps
    g, v = inputs.g, inputs.v
    rat = phi.ratio(v)
    ratp = phi.ratio_prime(v)
    c1 = (p - 2.0) * (p * (N + 3.0) - 2.0 * (N + 1.0)) / 4.0
    c2 = (p - 2.0) * (p * (N + 3.0) - 2.0 * (N + 7.0)) / 4.0
    return ((p - 2.0) * ratp * g ** (p - 4.0)
            + c1 * rat * rat * g ** (p - 4.0)
            + c2 * rat * rat * (g * g - eps * eps) * g ** (p - 6.0))


def r1_value(inputs: BernsteinInputs, phi):
    """Diffusive remainder in composite form:
    -(p-1) g^{p-2} [(phi''/phi')' + alpha/(1-alpha) (phi''/phi')^2]
    + eps^2 R11."""
    p, N = inputs.params.p, inputs.params.N
    eps = inputs.params.eps
    g, v = inputs.g, inputs.v
    a = alpha_p(p, N)
    rat = phi.ratio(v)
    ratp = phi.ratio_prime(v)
    lead = -(p - 1.0) * g ** (p - 2.0) * (ratp + a / (1.0 - a) * rat * rat)
    return lead + eps * eps * r11_value(inputs, phi)


def r1_radial_value(inputs: BernsteinInputs, phi):
    """Radial variant for non-increasing radially symmetric fields:
    -a (phi''/phi')' - 4 a'' (phi' phi'')^2 w^2 - 2 a' w (2 phi''^2 +
    phi' phi'''), with a = a_eps at |grad u|^2 = g^2 - eps^2.  Coincides
    with r1_value when N = 1."""
    p = inputs.params.p
    eps = inputs.params.eps
    g, w, v = inputs.g, inputs.w, inputs.v
    d1, d2, d3 = phi.derivatives(v)
    ratp = phi.ratio_prime(v)
    # a(xi) = (eps^2 + xi)^((p-2)/2) at xi = g^2 - eps^2, so eps^2+xi = g^2
    a = g ** (p - 2.0)
    ap = 0.5 * (p - 2.0) * g ** (p - 4.0)
    app = 0.25 * (p - 2.0) * (p - 4.0) * g ** (p - 6.0)
    return (-a * ratp
            - 4.0 * app * (d1 * d2) ** 2 * w * w
            - 2.0 * ap * w * (2.0 * d2 * d2 + d1 * d3))


# ---------------------------------------------------------------------------
# brute-force inequality checkers


@dataclass(frozen=True)
class ProofCheckReport:
    name: str
    grid_desc: str
    worst_margin: float
    passed: bool
    worst_point: tuple

    @classmethod
    def from_scan(cls, name, grid_desc, margins, points):
        i = int(np.argmin(margins))
        worst = float(margins[i])
        return cls(name, grid_desc, worst, worst >= -MARGIN_SLACK,
                   tuple(np.atleast_1d(points[i]).tolist()))

    def merge(self, other):
        """Combine partitioned scans by the worse margin."""
        a, b = (self, other) if self.worst_margin <= other.worst_margin else (other, self)
        return ProofCheckReport(self.name, f"{self.grid_desc} + {other.grid_desc}",
                                a.worst_margin, a.passed and b.passed, a.worst_point)


def c14_constant(q):
    """The explicit constant of the absorption-bracket bound: the two
    proof cases q > 2 and q in (1, 2]."""
    if q > 2.0:
        return 2.0 * (q - 2.0) ** (0.5 * (q - 2.0))
    return q - 1.0


def check_b22(q, eps_grid=None, g_grid=None) -> ProofCheckReport:
    """Scan of (q-1) g^q + eps^q - q eps^2 g^{q-2}
    >= (q-1-eps) g^q - C14 (eps^{(q+2)/2} + eps^q) over g >= eps."""
    if not q > 1.0:
        raise InvalidParams("need q > 1")
    if eps_grid is None:
        eps_grid = np.geomspace(1e-6, min(0.98 * (q - 1.0), 0.49), 40)
    eps_grid = np.asarray(eps_grid, dtype=float)
    if np.any(eps_grid <= 0.0) or np.any(eps_grid >= min(q - 1.0, 0.5)):
        raise InvalidParams("eps grid must lie in (0, min(q-1, 1/2))")
    c14 = c14_constant(q)
    margins, points = [], []
    for eps in eps_grid:
        g = np.geomspace(eps, 1e3, 100) if g_grid is None else np.asarray(g_grid, float)
        if np.any(g < eps):
            raise InvalidParams("g grid must satisfy g >= eps")
        lhs = (q - 1.0) * g ** q + eps ** q - q * eps * eps * g ** (q - 2.0)
        rhs = (q - 1.0 - eps) * g ** q - c14 * (eps ** (0.5 * (q + 2.0)) + eps ** q)
        m = lhs - rhs
        i = int(np.argmin(m))
        margins.append(float(m[i]))
        points.append((float(eps), float(g[i])))
    desc = f"q={q}, {eps_grid.size} eps values x 100 g values"
    return ProofCheckReport.from_scan("b22-absorption-bracket", desc,
                                      np.asarray(margins), points)


def phi1_v_range(mu, M, eps, gamma, alpha):
    """Admissible v interval for the Phi1 substitution:
    [eps^(gamma alpha) / (2K), M^(alpha/2)] with K = sqrt(1+mu) M^alpha."""
    K = math.sqrt(1.0 + mu) * M ** alpha
    lo = eps ** (gamma * alpha) / (2.0 * K)
    hi = M ** (0.5 * alpha)
    return K, lo, hi


def check_phi1_properties(mu, M, eps, gamma, alpha, v_samples=None) -> ProofCheckReport:
    """Sign conditions on phi1: (phi''/phi')' <= 0, phi''/phi' >= 0, and
    the quantitative bound
    (phi''/phi')' + alpha/(1-alpha) (phi''/phi')^2 <= -((1+alpha)/(2 alpha))/(K v)
    on the admissible v interval."""
    K, lo, hi = phi1_v_range(mu, M, eps, gamma, alpha)
    if not lo < hi <= K:
        raise InvalidParams(f"empty or out-of-domain v range [{lo}, {hi}] for K={K}")
    if v_samples is None:
        v_samples = np.geomspace(lo, hi, 200)
    v = np.asarray(v_samples, dtype=float)
    if np.any(v < lo * (1.0 - 1e-12)) or np.any(v > hi * (1.0 + 1e-12)):
        raise InvalidParams("v samples outside the admissible interval")
    phi = Phi1(K, alpha)
    rat = phi.ratio(v)
    ratp = phi.ratio_prime(v)
    m_concave = -ratp
    m_sign = rat
    m_quant = -(ratp + alpha / (1.0 - alpha) * rat * rat) \
        - (1.0 + alpha) / (2.0 * alpha) / (K * v)
    margins = np.concatenate([m_concave, m_sign, m_quant])
    points = [(float(x),) for x in np.concatenate([v, v, v])]
    desc = f"mu={mu}, M={M}, eps={eps}, gamma={gamma}, alpha={alpha}, {v.size} v samples"
    return ProofCheckReport.from_scan("phi1-properties", desc, margins, points)


def search_mu(M, eps, gamma, alpha, v_samples=None, max_power=20):
    """Smallest mu in {1, 2, 4, ..., 2^max_power} making all three phi1
    properties hold on the admissible interval."""
    for k in range(max_power + 1):
        mu = float(2 ** k)
        report = check_phi1_properties(mu, M, eps, gamma, alpha, v_samples)
        if report.passed:
            return mu
    raise InvalidParams(
        f"no mu <= 2^{max_power} satisfies the phi1 properties for "
        f"(M={M}, eps={eps}, gamma={gamma}, alpha={alpha})"
    )


def omega_eps(params: ProblemParams):
    """Regularization defect eps^{(2 beta - gamma)/beta} + eps^{(q+2-2 gamma)/2}
    + eps^{q - gamma}; tends to 0 with eps."""
    beta = beta_pq(params.p, params.q, params.N)
    eps, q, gamma = params.eps, params.q, params.gamma
    return (eps ** ((2.0 * beta - gamma) / beta)
            + eps ** (0.5 * (q + 2.0 - 2.0 * gamma))
            + eps ** (q - gamma))


def verify_power_supersolution(c, d, m, sigma, theta, T) -> ProofCheckReport:
    """For S(t) = theta t^{-sigma} with the scale-consistency sigma (m-1) = 1,
    S' + c S^m - d S >= 0 on (0, T] reduces to c theta^{m-1} >= sigma + d T;
    the report carries the margin c theta^{m-1} - sigma - d T."""
    if not (c > 0.0 and d >= 0.0 and m > 1.0 and sigma > 0.0
            and theta > 0.0 and T > 0.0):
        raise InvalidParams("need c > 0, d >= 0, m > 1, sigma > 0, theta > 0, T > 0")
    if abs(sigma * (m - 1.0) - 1.0) > 1e-12:
        raise InvalidParams(
            f"candidate is not scale-consistent: sigma (m-1) = {sigma * (m - 1.0)} != 1"
        )
    margin = c * theta ** (m - 1.0) - sigma - d * T
    desc = f"c={c}, d={d}, m={m}, sigma={sigma}, theta={theta}, T={T}"
    return ProofCheckReport("power-supersolution", desc, float(margin),
                            margin >= -MARGIN_SLACK, (float(theta),))
