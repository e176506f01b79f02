"""Observables of a discrete solution state: excess norms, composite
gradient sup norms, support radius, and the mass-balance residual of a
recorded time series."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .exponents import InvalidParams, alpha_p, beta_pq

CSV_COLUMNS = ("t", "sup_excess", "l1_excess", "grad_sup", "grad_alpha",
               "grad_beta", "rho", "absorbed", "boundary_out")


def default_thetas(params):
    """Composite exponents recorded by default: (alpha_p, beta_pq)."""
    return (alpha_p(params.p, params.N), beta_pq(params.p, params.q, params.N))


@dataclass
class Observables:
    t: float
    sup_excess: float
    l1_excess: float
    grad_sup: float
    grad_power_sup: dict
    rho: float
    absorbed: float
    boundary_out: float


def grad_power_sup(values, h, theta):
    """Max over faces of |((u_{i+1})^theta - (u_i)^theta)/h| on the raw
    (floored, hence positive) field."""
    if not 0.0 < theta <= 1.0:
        raise InvalidParams(f"composite exponent must lie in (0, 1], got {theta}")
    if theta == 1.0:
        powered = values
    else:
        powered = values ** theta
    return float(np.max(np.abs(np.diff(powered)))) / h


def observe(state, theta_list, rel_tol=1e-6, ref_sup=None) -> Observables:
    u = state.values
    floor = state.floor
    excess = u - floor
    sup_excess = float(excess.max())
    l1 = float(excess @ state.grid.cell_measures())
    powers = {theta: grad_power_sup(u, state.grid.h, theta) for theta in theta_list}
    rho = support_radius(state, rel_tol, ref_sup=ref_sup)
    return Observables(
        t=state.time,
        sup_excess=sup_excess,
        l1_excess=l1,
        grad_sup=grad_power_sup(u, state.grid.h, 1.0),
        grad_power_sup=powers,
        rho=rho,
        absorbed=state.absorbed_mass,
        boundary_out=state.boundary_out,
    )


def support_radius(state, rel_tol=1e-6, ref_sup=None):
    """Largest |cell center| whose excess exceeds rel_tol times the
    reference peak, plus h/2; zero if the excess is below threshold
    everywhere."""
    if not 0.0 < rel_tol < 1.0:
        raise InvalidParams(f"rel_tol must lie in (0, 1), got {rel_tol}")
    excess = state.values - state.floor
    if ref_sup is None:
        ref_sup = float(excess.max())
    if ref_sup <= 0.0:
        return 0.0
    above = excess > rel_tol * ref_sup
    if not above.any():
        return 0.0
    centers = np.abs(state.grid.centers())
    return float(centers[above].max()) + 0.5 * state.grid.h


@dataclass
class TimeSeries:
    """Column-oriented record of observables at strictly increasing times."""

    columns: dict = field(default_factory=lambda: {c: [] for c in CSV_COLUMNS})

    def __len__(self):
        return len(self.columns["t"])

    def append(self, obs: Observables, thetas):
        t = self.columns["t"]
        if t and obs.t <= t[-1]:
            raise InvalidParams(f"recording times must increase: {obs.t} after {t[-1]}")
        sup = self.columns["sup_excess"]
        if sup and obs.sup_excess > sup[-1] + 1e-12 * max(1.0, sup[-1]):
            raise InvalidParams(
                f"sup_excess increased from {sup[-1]} to {obs.sup_excess} at t={obs.t}"
            )
        alpha, beta = thetas
        row = {
            "t": obs.t,
            "sup_excess": obs.sup_excess,
            "l1_excess": obs.l1_excess,
            "grad_sup": obs.grad_sup,
            "grad_alpha": obs.grad_power_sup[alpha],
            "grad_beta": obs.grad_power_sup[beta],
            "rho": obs.rho,
            "absorbed": obs.absorbed,
            "boundary_out": obs.boundary_out,
        }
        for key, val in row.items():
            self.columns[key].append(float(val))

    def column(self, name):
        return np.asarray(self.columns[name], dtype=float)

    @property
    def t(self):
        return self.column("t")

    def to_csv(self):
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for i in range(len(self)):
            buf.write(",".join(f"{self.columns[c][i]:.17g}" for c in CSV_COLUMNS))
            buf.write("\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or tuple(lines[0].split(",")) != CSV_COLUMNS:
            raise InvalidParams("bad series header")
        series = cls()
        for line in lines[1:]:
            vals = [float(x) for x in line.split(",")]
            if len(vals) != len(CSV_COLUMNS):
                raise InvalidParams(f"bad series row: {line!r}")
            for col, val in zip(CSV_COLUMNS, vals):
                series.columns[col].append(val)
        return series


def mass_balance_residual(series: TimeSeries):
    """Max relative defect of l1_excess(t) + absorbed(t) + boundary_out(t)
    against the initial excess mass; zero by convention for zero data."""
    l1 = series.column("l1_excess")
    if len(l1) == 0 or l1[0] == 0.0:
        return 0.0
    total = l1 + series.column("absorbed") + series.column("boundary_out")
    return float(np.max(np.abs(total - l1[0]))) / l1[0]
