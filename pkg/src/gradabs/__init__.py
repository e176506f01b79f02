"""Numerical laboratory for the degenerate diffusion equation with
gradient absorption: exponent arithmetic, a regularized explicit solver,
observable extraction, decay-law fitting, and proof-machinery checks."""

from .exponents import (ExponentSet, InvalidParams, Law, PredictedLaws,
                        ProblemParams, Regime, classify_regime,
                        compute_exponents, predicted_laws)
from .model import (BarenblattAt, BarenblattSolution, Bump, DeadCoreAnnulus,
                    a_eps, b_eps, barenblatt_value, gamma_p_constant,
                    parse_profile)
from .solver import (ConfigError, Grid, RunConfig, State, comparison_run,
                     initial_state, parse_config, run, stable_dt, step)
from .observe import TimeSeries, mass_balance_residual, support_radius
from .fit import (FitResult, Verdict, fit_log_growth, fit_power, plateau_test,
                  verdict)

__version__ = "0.1.0"
