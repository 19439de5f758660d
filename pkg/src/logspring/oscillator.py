"""Closed-form dynamics of a spring whose mass grows linearly in time.

With mass m(t) = m0*(t/t0) and stiffness k(t) = k0*(t0/t), the angular
frequency omega(t) = sqrt(k/m) equals theta/t, where

    theta = sqrt(k0/m0) * t0

is a dimensionless constant.  The displacement then oscillates uniformly
in ln t,

    x(t) = x0*sin(theta*ln(t/t0)) + x1*cos(theta*ln(t/t0)),

so peaks are geometrically spaced in t.  This module evaluates that
solution and its analytic invariants; it is the ground-truth oracle for
the numerical integrator and the curve fitter.

Everything here is a pure function of immutable inputs and safe to share
between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import DomainError, PreconditionError, QuadratureError

__all__ = [
    "SpringConfig",
    "SpringState",
    "ExtremumTimes",
    "universal_residual",
    "mass_consistency_residual",
    "extremum_times",
]


def _check_times(t):
    """Validate scalar-or-array time; return float64 array plus scalar flag."""
    arr = np.asarray(t, dtype=float)
    if arr.size == 0 or not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError(f"time values must be positive and finite, got {t!r}")
    return arr, np.isscalar(t) or arr.ndim == 0


def _ret(value, scalar):
    return float(value) if scalar else value


@dataclass(frozen=True)
class SpringConfig:
    """Parameters of the variable-mass spring.

    m0 and k0 are the mass and stiffness at the reference time t0 (all
    three positive); x0 and x1 are the sine and cosine displacement
    amplitudes.  The derived angle theta = sqrt(k0/m0)*t0 is computed once
    at construction because every formula downstream consumes theta rather
    than the raw triple.

    The closed forms are derived for t >= t0 but are smooth on all of
    (0, inf); evaluation is therefore allowed at any positive time.
    """

    m0: float
    t0: float
    k0: float
    x0: float = 0.0
    x1: float = 0.0
    theta: float = field(init=False)

    def __post_init__(self):
        for name in ("m0", "t0", "k0", "x0", "x1"):
            object.__setattr__(self, name, float(getattr(self, name)))
        for name in ("m0", "t0", "k0"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise DomainError(f"{name} must be positive and finite, got {v!r}")
        for name in ("x0", "x1"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        theta = math.sqrt(self.k0 / self.m0) * self.t0
        if not (math.isfinite(theta) and theta > 0.0):
            raise DomainError(f"derived angle must be positive and finite, got {theta!r}")
        object.__setattr__(self, "theta", theta)

    # ln(t/t0) evaluated as ln t - ln t0 to control cancellation for t near t0
    def log_time(self, t):
        arr, scalar = _check_times(t)
        return _ret(np.log(arr) - math.log(self.t0), scalar)

    def phase(self, t):
        """Oscillation phase theta*ln(t/t0)."""
        arr, scalar = _check_times(t)
        return _ret(self.theta * (np.log(arr) - math.log(self.t0)), scalar)

    def mass_at(self, t):
        """Instantaneous mass m0*(t/t0)."""
        arr, scalar = _check_times(t)
        return _ret(self.m0 * (arr / self.t0), scalar)

    def stiffness_at(self, t):
        """Instantaneous spring constant k0*(t0/t); k(t)*m(t) = k0*m0."""
        arr, scalar = _check_times(t)
        return _ret(self.k0 * (self.t0 / arr), scalar)

    def omega_at(self, t):
        """Instantaneous angular frequency sqrt(k/m) = theta/t."""
        arr, scalar = _check_times(t)
        return _ret(self.theta / arr, scalar)

    def position(self, t):
        """Displacement x0*sin(theta*ln(t/t0)) + x1*cos(theta*ln(t/t0))."""
        arr, scalar = _check_times(t)
        phi = self.theta * (np.log(arr) - math.log(self.t0))
        return _ret(self.x0 * np.sin(phi) + self.x1 * np.cos(phi), scalar)

    def velocity(self, t):
        """Time derivative of position.

        Equals (theta/t)*(x0*cos(phi) - x1*sin(phi)) with phi the phase;
        for x1 = 0 this is x0*omega(t)*cos(phi), a log-periodic oscillation
        with a 1/t amplitude profile.
        """
        arr, scalar = _check_times(t)
        phi = self.theta * (np.log(arr) - math.log(self.t0))
        return _ret((self.theta / arr) * (self.x0 * np.cos(phi) - self.x1 * np.sin(phi)), scalar)

    def acceleration(self, t):
        """Analytic second derivative, -v/t - (theta/t)^2 * x."""
        arr, scalar = _check_times(t)
        phi = self.theta * (np.log(arr) - math.log(self.t0))
        x = self.x0 * np.sin(phi) + self.x1 * np.cos(phi)
        v = (self.theta / arr) * (self.x0 * np.cos(phi) - self.x1 * np.sin(phi))
        return _ret(-v / arr - (self.theta / arr) ** 2 * x, scalar)

    def energy(self, t):
        """Total mechanical energy (1/2)k(t)x^2 + (1/2)m(t)v^2.

        For x1 = 0 this reduces to (1/2)k(t)x0^2, so E(t)*t is conserved.
        """
        arr, scalar = _check_times(t)
        phi = self.theta * (np.log(arr) - math.log(self.t0))
        x = self.x0 * np.sin(phi) + self.x1 * np.cos(phi)
        v = (self.theta / arr) * (self.x0 * np.cos(phi) - self.x1 * np.sin(phi))
        k = self.k0 * (self.t0 / arr)
        m = self.m0 * (arr / self.t0)
        return _ret(0.5 * k * x * x + 0.5 * m * v * v, scalar)

    def state_at(self, t: float) -> "SpringState":
        t = float(t)
        return SpringState(
            t=t,
            x=self.position(t),
            v=self.velocity(t),
            m=self.mass_at(t),
            k=self.stiffness_at(t),
            omega=self.omega_at(t),
            energy=self.energy(t),
        )


@dataclass(frozen=True)
class SpringState:
    """Snapshot of the spring at one instant."""

    t: float
    x: float
    v: float
    m: float
    k: float
    omega: float
    energy: float


@dataclass(frozen=True)
class ExtremumTimes:
    """Times of position extrema and velocity extrema, each increasing."""

    position: np.ndarray
    velocity: np.ndarray


def universal_residual(config: SpringConfig, t):
    """(x/x0)^2 + (v/(x0*omega))^2 - 1, zero along the x1 = 0 trajectory.

    Defined only for the pure-sine solution (x1 = 0, x0 != 0); the value is
    the algebraic identity sin^2 + cos^2 - 1 and must vanish to rounding.
    """
    if config.x1 != 0.0:
        raise PreconditionError("universal residual requires x1 = 0")
    if config.x0 == 0.0:
        raise PreconditionError("universal residual requires x0 != 0")
    arr, scalar = _check_times(t)
    x = config.position(arr)
    v = config.velocity(arr)
    omega = config.theta / arr
    r = (x / config.x0) ** 2 + (v / (config.x0 * omega)) ** 2 - 1.0
    return _ret(r, scalar)


def _arc_integral(lo: float, hi: float, amp: float, sing_lo: bool, sing_hi: bool):
    """Integral of dx / sqrt(amp^2 - x^2) over [lo, hi].

    Integrable inverse-square-root singularities at |x| = amp are handled
    with QUADPACK's algebraic-weight rule so turning-point arcs keep full
    accuracy.
    """
    if hi <= lo:
        return 0.0, 0.0
    if sing_lo and sing_hi:
        val, err = quad(lambda x: 1.0, lo, hi, weight="alg", wvar=(-0.5, -0.5),
                        epsabs=1e-13, epsrel=1e-12, limit=200)
    elif sing_hi:
        val, err = quad(lambda x: 1.0 / math.sqrt(amp + x), lo, hi,
                        weight="alg", wvar=(0.0, -0.5), epsabs=1e-13, epsrel=1e-12, limit=200)
    elif sing_lo:
        val, err = quad(lambda x: 1.0 / math.sqrt(amp - x), lo, hi,
                        weight="alg", wvar=(-0.5, 0.0), epsabs=1e-13, epsrel=1e-12, limit=200)
    else:
        val, err = quad(lambda x: 1.0 / math.sqrt((amp - x) * (amp + x)), lo, hi,
                        epsabs=1e-13, epsrel=1e-12, limit=200)
    return val, err


def mass_consistency_residual(config: SpringConfig, t: float) -> float:
    """Reconstruct ln(m(t)/m0) by quadrature along the trajectory.

    The growth of ln m equals (1/theta) * integral of dx/sqrt(x0^2 - x^2)
    accumulated along the x1 = 0 trajectory, with the arcsine branch
    unwound at every turning point (each half-swing contributes pi, not
    zero).  Turning times are located by root-finding on the velocity, and
    each monotone arc is integrated in x with singularity-aware quadrature.

    Returns the reconstruction minus ln(t/t0); the result must vanish
    within quadrature tolerance.
    """
    if config.x1 != 0.0:
        raise PreconditionError("mass-consistency check requires x1 = 0")
    if config.x0 == 0.0:
        raise PreconditionError("mass-consistency check requires x0 != 0")
    t = float(t)
    if not (t >= config.t0):
        raise DomainError(f"t must be >= t0, got {t!r}")
    if t == config.t0:
        return 0.0

    theta = config.theta
    t0 = config.t0
    amp = abs(config.x0)

    # Bracket velocity zeros on a log grid dense relative to the expected
    # half-swing spacing, then refine each with Brent's method.
    phase_span = theta * (math.log(t) - math.log(t0))
    n_grid = 32 * (2 + int(phase_span / math.pi))
    grid = np.exp(np.linspace(math.log(t0), math.log(t), n_grid))
    v_grid = config.velocity(grid)
    roots = []
    for a, b, va, vb in zip(grid[:-1], grid[1:], v_grid[:-1], v_grid[1:]):
        if va == 0.0 and a > t0:
            roots.append(a)
        elif va * vb < 0.0:
            roots.append(brentq(config.velocity, a, b, xtol=1e-300, rtol=1e-15))
    roots = [r for r in roots if t0 < r < t]

    # Arc endpoints in x; turning endpoints snapped to +-amp exactly.
    points = [(config.position(t0), False)]
    for r in roots:
        points.append((math.copysign(amp, config.position(r)), True))
    points.append((config.position(t), False))

    total = 0.0
    err_total = 0.0
    for (xa, sa), (xb, sb) in zip(points[:-1], points[1:]):
        lo, hi = (xa, xb) if xa <= xb else (xb, xa)
        s_lo, s_hi = ((sa, sb) if xa <= xb else (sb, sa))
        val, err = _arc_integral(lo, hi, amp, s_lo, s_hi)
        total += val
        err_total += err
    if err_total > 1e-9:
        raise QuadratureError(
            f"arc quadrature error estimate {err_total:.3e} too large near turning points")

    return total / theta - (math.log(t) - math.log(t0))


def extremum_times(config: SpringConfig, n_min: int, n_max: int) -> ExtremumTimes:
    """Indexed times of position extrema and velocity extrema (x1 = 0).

    Position extrema sit where the phase is an odd multiple of pi/2,
        t_n = t0 * exp((n + 1/2) * pi / theta),
    and velocity extrema where tan(phase) = -1/theta,
        t_n = t0 * exp((n*pi - arctan(1/theta)) / theta).
    Both families are geometric in t with ratio exp(pi/theta).  Each
    returned time is verified against the corresponding derivative-zero
    condition before being handed back.
    """
    if config.x1 != 0.0:
        raise PreconditionError("extremum times are defined for x1 = 0")
    if n_min > n_max:
        raise PreconditionError("n_min must not exceed n_max")
    theta = config.theta
    t0 = config.t0
    n = np.arange(int(n_min), int(n_max) + 1, dtype=float)
    pos = t0 * np.exp((n + 0.5) * math.pi / theta)
    vel = t0 * np.exp((n * math.pi - math.atan(1.0 / theta)) / theta)

    v_scale = abs(config.x0) * theta / pos
    if np.any(np.abs(config.velocity(pos)) > 1e-8 * v_scale + 1e-300):
        raise RuntimeError("position extremum failed the dx/dt = 0 check")
    a_scale = abs(config.x0) * (theta / vel) ** 2 * math.sqrt(1.0 + theta * theta)
    if np.any(np.abs(config.acceleration(vel)) > 1e-8 * a_scale + 1e-300):
        raise RuntimeError("velocity extremum failed the dv/dt = 0 check")
    return ExtremumTimes(position=pos, velocity=vel)
