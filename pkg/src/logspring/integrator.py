"""Adaptive numerical integration of the spring and price/stock systems.

One Dormand-Prince 5(4) engine with PI step-size control serves three
systems: the reduced variable-mass spring, a spring with user-supplied
mass/stiffness schedules, and the demand/supply price dynamics.  Steps are
capped at a fixed fraction of the current time because all coefficients
vary on the scale of t itself; t = 0 is outside every admissible window.

Integration is deterministic: identical inputs produce bit-identical
solutions on a fixed platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from ._backend import kernels
from ._kernels_py import rk45_generic
from .errors import DomainError, ScheduleError, WindowError
from .oscillator import SpringConfig

__all__ = [
    "OdeSolution",
    "MassStiffnessSchedule",
    "integrate_spring_reduced",
    "integrate_spring_general",
    "integrate_econ",
]

MIN_TOL = 1e-13
MAX_TOL = 1e-3
POINTS_PER_DECADE = 64

# The controller runs a fixed factor below the requested tolerance so that
# delivered errors, including dense-output evaluation between steps, stay
# under the requested bound rather than merely near it.
TOL_SAFETY = 1.0 / 16.0
MIN_INTERNAL_TOL = 1e-14


def _internal_tol(tol: float) -> float:
    return max(tol * TOL_SAFETY, MIN_INTERNAL_TOL)


@dataclass(frozen=True)
class OdeSolution:
    """Sampled trajectory of a two-component system.

    ``times`` holds every accepted step plus enough log-spaced fill for at
    least POINTS_PER_DECADE samples per decade; ``states`` are the matching
    state vectors.  ``sample`` evaluates the continuous extension (the
    quartic dense-output polynomial of each accepted step) on any grid
    inside the integration window.
    """

    times: np.ndarray
    states: np.ndarray
    accepted_steps: int
    rejected_steps: int
    tolerance: float
    _node_t: np.ndarray = field(repr=False)
    _node_y: np.ndarray = field(repr=False)
    _seg_coef: np.ndarray = field(repr=False)

    def sample(self, ts) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if np.any(ts < self._node_t[0]) or np.any(ts > self._node_t[-1]):
            raise DomainError("sample times fall outside the integrated window")
        return _dense_eval(self._node_t, self._node_y, self._seg_coef, ts)


def _dense_eval(node_t, node_y, seg_coef, ts):
    idx = np.clip(np.searchsorted(node_t, ts, side="right") - 1, 0, len(node_t) - 2)
    x = (ts - node_t[idx]) / (node_t[idx + 1] - node_t[idx])
    powers = np.stack([x, x * x, x ** 3, x ** 4], axis=1)
    return node_y[idx] + np.einsum("mcj,mj->mc", seg_coef[idx], powers)


def _check_window(t_start, t_end):
    if t_start is None or t_end is None:
        raise DomainError("t_start and t_end are required")
    t_start = float(t_start)
    t_end = float(t_end)
    if not (0.0 < t_start < t_end) or not math.isfinite(t_end):
        raise DomainError(f"need 0 < t_start < t_end, got ({t_start!r}, {t_end!r})")
    return t_start, t_end


def _check_tol(tol):
    tol = float(tol)
    if not (MIN_TOL <= tol <= MAX_TOL):
        raise DomainError(f"tol must lie in [{MIN_TOL}, {MAX_TOL}], got {tol!r}")
    return tol


def _build_solution(node_t, node_y, seg_coef, n_acc, n_rej, tol) -> OdeSolution:
    t_start, t_end = node_t[0], node_t[-1]
    decades = math.log10(t_end / t_start)
    n_fill = max(2, int(math.ceil(POINTS_PER_DECADE * decades)) + 1)
    fill = np.geomspace(t_start, t_end, n_fill)
    times = np.union1d(node_t, fill)
    states = _dense_eval(node_t, node_y, seg_coef, times)
    return OdeSolution(
        times=times,
        states=states,
        accepted_steps=int(n_acc),
        rejected_steps=int(n_rej),
        tolerance=float(tol),
        _node_t=node_t,
        _node_y=node_y,
        _seg_coef=seg_coef,
    )


def integrate_spring_reduced(
    config: SpringConfig,
    initial: Optional[Sequence[float]] = None,
    t_start: float = None,
    t_end: float = None,
    tol: float = 1e-10,
) -> OdeSolution:
    """Integrate x' = v, v' = -v/t - (theta/t)^2 x.

    ``initial`` is the (x, v) pair at t_start; by default it is taken from
    the closed-form position and velocity of ``config``, which makes the
    whole trajectory directly comparable to the analytic solution.
    """
    t_start, t_end = _check_window(t_start, t_end)
    tol = _check_tol(tol)
    if initial is None:
        initial = (config.position(t_start), config.velocity(t_start))
    x0, v0 = (float(initial[0]), float(initial[1]))
    if not (math.isfinite(x0) and math.isfinite(v0)):
        raise DomainError("initial state must be finite")
    node_t, node_y, seg_coef, n_acc, n_rej = kernels.rk45_spring_reduced(
        config.theta, x0, v0, t_start, t_end, _internal_tol(tol))
    return _build_solution(node_t, node_y, seg_coef, n_acc, n_rej, tol)


@dataclass(frozen=True)
class MassStiffnessSchedule:
    """Free mass/stiffness schedules m(t), m'(t), k(t) on a declared window.

    Construction probes 16 log-spaced points of the window: both m and k
    must be positive there and mass_rate must agree with a central
    difference of mass to a relative error of 1e-6 (scale taken as
    max(|m'|, m/t) so exactly-constant schedules are accepted).
    """

    mass: Callable[[float], float]
    mass_rate: Callable[[float], float]
    stiffness: Callable[[float], float]
    window: Tuple[float, float]

    def __post_init__(self):
        lo, hi = float(self.window[0]), float(self.window[1])
        if not (0.0 < lo < hi):
            raise ScheduleError(f"window must satisfy 0 < lo < hi, got ({lo!r}, {hi!r})")
        object.__setattr__(self, "window", (lo, hi))
        for t in np.geomspace(lo, hi, 16):
            m = float(self.mass(t))
            k = float(self.stiffness(t))
            if not (m > 0.0 and math.isfinite(m)):
                raise ScheduleError(f"mass must be positive on the window; m({t!r}) = {m!r}")
            if not (k > 0.0 and math.isfinite(k)):
                raise ScheduleError(f"stiffness must be positive on the window; k({t!r}) = {k!r}")
            h = 1e-6 * t
            fd = (float(self.mass(t + h)) - float(self.mass(t - h))) / (2.0 * h)
            rate = float(self.mass_rate(t))
            scale = max(abs(rate), m / t)
            if abs(fd - rate) > 1e-6 * scale:
                raise ScheduleError(
                    f"mass_rate disagrees with d(mass)/dt at t = {t!r}: {rate!r} vs {fd!r}")

    @classmethod
    def from_spring(cls, config: SpringConfig, window: Tuple[float, float]
                    ) -> "MassStiffnessSchedule":
        """Linear-mass, inverse-time-stiffness schedules of ``config``."""
        m0, t0, k0 = config.m0, config.t0, config.k0
        return cls(
            mass=lambda t: m0 * (t / t0),
            mass_rate=lambda t: m0 / t0,
            stiffness=lambda t: k0 * (t0 / t),
            window=window,
        )


def integrate_spring_general(
    schedule: MassStiffnessSchedule,
    initial: Sequence[float],
    t_start: float,
    t_end: float,
    tol: float = 1e-10,
) -> OdeSolution:
    """Integrate m(t) x'' + m'(t) x' = -k(t) x with free schedules.

    The momentum-change term is evaluated through the chain rule as
    m'(t) * v, which stays finite at turning points where dm/dx alone
    would be undefined.
    """
    t_start, t_end = _check_window(t_start, t_end)
    tol = _check_tol(tol)
    lo, hi = schedule.window
    if not (lo <= t_start and t_end <= hi):
        raise ScheduleError(
            f"integration window [{t_start!r}, {t_end!r}] exceeds the schedule window {schedule.window!r}")
    mass, mass_rate, stiffness = schedule.mass, schedule.mass_rate, schedule.stiffness

    def rhs(t, y):
        m = mass(t)
        if not (m > 0.0):
            raise ScheduleError(f"mass became nonpositive at t = {t!r}")
        k = stiffness(t)
        if not (k > 0.0):
            raise ScheduleError(f"stiffness became nonpositive at t = {t!r}")
        return np.array([y[1], -(mass_rate(t) * y[1] + k * y[0]) / m])

    y0 = np.array([float(initial[0]), float(initial[1])])
    node_t, node_y, seg_coef, n_acc, n_rej = rk45_generic(rhs, t_start, y0, t_end,
                                                          _internal_tol(tol))
    return _build_solution(node_t, node_y, seg_coef, n_acc, n_rej, tol)


def integrate_econ(
    econ,
    initial: Optional[Sequence[float]] = None,
    t_start: float = None,
    t_end: float = None,
    tol: float = 1e-10,
) -> OdeSolution:
    """Integrate the coupled price/stock system.

    State is (P, S) with
        dS/dt = Q(P) - D(P) = beta_o(t) * (P - P*)
        dP/dt = -gamma * dS/dt + lambda * (S_o(P) - S),
    where S_o(P) = ell0 + ell * D(P).  The default initial state is the
    equilibrium (P*, S*), which the integrator must hold exactly.
    """
    t_start, t_end = _check_window(t_start, t_end)
    tol = _check_tol(tol)
    if econ.window is not None:
        lo, hi = econ.window
        if not (lo < t_start and t_end < hi):
            raise WindowError(
                f"integration window [{t_start!r}, {t_end!r}] exceeds the declared validity window {econ.window!r}")
    if initial is None:
        initial = (econ.p_star, econ.s_star)
    p0, s0 = float(initial[0]), float(initial[1])
    if not (math.isfinite(p0) and math.isfinite(s0)):
        raise DomainError("initial state must be finite")

    gamma, lam = econ.gamma, econ.lam
    ell0, ell = econ.ell0, econ.ell
    p_star, d_star = econ.p_star, econ.d_star
    d_o, q_o = econ.d_o, econ.q_o

    def rhs(t, y):
        dp_dev = y[0] - p_star
        d_slope = d_o(t)
        beta = q_o(t) - d_slope
        stock_rate = beta * dp_dev
        demand = d_star + d_slope * dp_dev
        price_rate = -gamma * stock_rate + lam * (ell0 + ell * demand - y[1])
        return np.array([price_rate, stock_rate])

    node_t, node_y, seg_coef, n_acc, n_rej = rk45_generic(
        rhs, t_start, np.array([p0, s0]), t_end, _internal_tol(tol))
    return _build_solution(node_t, node_y, seg_coef, n_acc, n_rej, tol)
