"""Log-periodic dynamics of a variable-mass spring and its market analogue.

A spring gaining mass linearly in time (with stiffness falling as 1/t)
oscillates uniformly in ln t.  The same second-order equation governs the
price of a storable commodity under time-dependent linear demand and
supply curves, so prices and stock levels can exhibit the same
log-periodic oscillations.  The package provides the closed forms, an
adaptive integrator, the coefficient construction and verification for
the market model, a log-periodic curve fitter, and the Tsallis-entropy
correspondences, plus a CLI (``logspring``).

The numerical hot kernels run from a compiled extension when available
and fall back to pure NumPy otherwise; see ``logspring.backend_name``.
"""

from ._backend import BACKEND as backend_name
from .econ import (Coefficient, EconConfig, EconState, MechanicalMapping,
                   PriceOdeReport, construct_coefficients,
                   initial_from_oscillation, to_mechanical, verify_price_ode)
from .fitter import (ENVELOPES, LogPeriodicFit, TimeSeries, fit,
                     log_time_periodogram)
from .integrator import (MassStiffnessSchedule, OdeSolution, integrate_econ,
                         integrate_spring_general, integrate_spring_reduced)
from .oscillator import (ExtremumTimes, SpringConfig, SpringState,
                         extremum_times, mass_consistency_residual,
                         universal_residual)
from .tsallis import (ProbabilityFactorization, ThermoReport,
                      demand_correspondence_lhs, entropic_term,
                      force_correspondence_lhs, shannon_entropy,
                      tsallis_entropy, thermo)

__version__ = "0.1.0"

__all__ = [
    "backend_name",
    "Coefficient",
    "EconConfig",
    "EconState",
    "MechanicalMapping",
    "PriceOdeReport",
    "construct_coefficients",
    "initial_from_oscillation",
    "to_mechanical",
    "verify_price_ode",
    "ENVELOPES",
    "LogPeriodicFit",
    "TimeSeries",
    "fit",
    "log_time_periodogram",
    "MassStiffnessSchedule",
    "OdeSolution",
    "integrate_econ",
    "integrate_spring_general",
    "integrate_spring_reduced",
    "ExtremumTimes",
    "SpringConfig",
    "SpringState",
    "extremum_times",
    "mass_consistency_residual",
    "universal_residual",
    "ProbabilityFactorization",
    "ThermoReport",
    "demand_correspondence_lhs",
    "entropic_term",
    "force_correspondence_lhs",
    "shannon_entropy",
    "tsallis_entropy",
    "thermo",
    "__version__",
]
