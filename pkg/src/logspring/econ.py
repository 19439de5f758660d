"""Demand/supply price dynamics with time-dependent linear curves.

For one storable commodity with demand D(P) = d* + d_o(t)(P - P*) and
supply Q(P) = q* + q_o(t)(P - P*), stocks accumulate at dS/dt = Q - D and
the price adjusts against both the stock flow and the deviation from an
optimal stock level S_o(P) = ell0 + ell*D(P):

    dP/dt = -gamma * dS/dt + lambda * (S_o - S).

Eliminating S gives a damped-oscillator equation for P.  Matching its
damping coefficient to 1/t and its frequency coefficient to (theta/t)^2,
the coefficient slopes are forced algebraically:

    beta_o(t) = q_o - d_o = (1 + theta^2) / (lambda * t^2)
    d_o(t) = (gamma*beta_o(t) - 1/t) / (lambda*ell)
    q_o(t) = d_o(t) + beta_o(t)

so the price deviation oscillates log-periodically exactly like the
variable-mass spring.  The usual sign conditions d_o < 0 and q_o > 0 hold
only on the finite window (gamma*(1+theta^2)/lambda,
(gamma+lambda*ell)*(1+theta^2)/lambda); the window is computed and
enforced instead of extrapolated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import DomainError, MappingError, PreconditionError, WindowError

__all__ = [
    "Coefficient",
    "EconConfig",
    "EconState",
    "MechanicalMapping",
    "PriceOdeReport",
    "construct_coefficients",
    "verify_price_ode",
    "to_mechanical",
    "initial_from_oscillation",
]


class Coefficient:
    """Evaluable time coefficient with an optional analytic derivative.

    When no derivative is supplied, ``rate`` falls back to a central
    difference with step 1e-6 * t.  Instances are stateless and safe to
    call from multiple threads.
    """

    __slots__ = ("_fn", "_rate")

    def __init__(self, fn: Callable[[float], float],
                 rate: Optional[Callable[[float], float]] = None):
        self._fn = fn
        self._rate = rate

    def __call__(self, t: float) -> float:
        return self._fn(t)

    def rate(self, t: float) -> float:
        if self._rate is not None:
            return self._rate(t)
        h = 1e-6 * t
        return (self._fn(t + h) - self._fn(t - h)) / (2.0 * h)


def _as_coefficient(fn) -> Coefficient:
    return fn if isinstance(fn, Coefficient) else Coefficient(fn)


@dataclass(frozen=True)
class EconConfig:
    """Market parameters plus the time-dependent demand/supply slopes.

    gamma is the price response to the stock flow, lam the response to
    stock-level deviations, ell0/ell the affine optimal-stock law, p_star
    the equilibrium price and d_star the common equilibrium demand and
    supply (equilibrium forces d* = q*, so one field stores both).
    ``window`` is the open interval on which the slope sign conditions
    d_o < 0 < q_o are declared to hold; None means unrestricted times.
    ``theta`` is recorded when the coefficients come from
    ``construct_coefficients`` and is None for hand-built families.
    """

    gamma: float
    lam: float
    ell0: float
    ell: float
    p_star: float
    d_star: float
    d_o: Coefficient
    q_o: Coefficient
    window: Optional[Tuple[float, float]] = None
    theta: Optional[float] = None

    def __post_init__(self):
        for name in ("gamma", "lam", "ell0", "ell", "p_star", "d_star"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.gamma > 0.0):
            raise DomainError(f"gamma must be > 0, got {self.gamma!r}")
        if not (self.ell > 0.0):
            raise DomainError(f"ell must be > 0, got {self.ell!r}")
        if not (self.lam >= 0.0):
            raise DomainError(f"lambda must be >= 0, got {self.lam!r}")
        object.__setattr__(self, "d_o", _as_coefficient(self.d_o))
        object.__setattr__(self, "q_o", _as_coefficient(self.q_o))
        if self.window is not None:
            lo, hi = float(self.window[0]), float(self.window[1])
            if not (0.0 < lo < hi):
                raise DomainError(f"window must satisfy 0 < lo < hi, got {self.window!r}")
            object.__setattr__(self, "window", (lo, hi))

    @classmethod
    def log_periodic(cls, gamma: float, lam: float, ell: float, ell0: float,
                     p_star: float, d_star: float, theta: float) -> "EconConfig":
        """Config whose price deviation oscillates with angle theta."""
        d_o, q_o, window = construct_coefficients(gamma, lam, ell, theta)
        return cls(gamma=gamma, lam=lam, ell0=ell0, ell=ell, p_star=p_star,
                   d_star=d_star, d_o=d_o, q_o=q_o, window=window, theta=float(theta))

    # d* = q* at equilibrium, so the supply intercept is the same field
    @property
    def q_star(self) -> float:
        return self.d_star

    @property
    def s_star(self) -> float:
        """Equilibrium stock level ell0 + ell*d*."""
        return self.ell0 + self.ell * self.d_star

    def check_window(self, t: float) -> float:
        t = float(t)
        if not (t > 0.0 and math.isfinite(t)):
            raise DomainError(f"time must be positive and finite, got {t!r}")
        if self.window is not None and not (self.window[0] < t < self.window[1]):
            raise WindowError(f"t = {t!r} outside validity window {self.window!r}")
        return t

    def beta_o(self, t: float) -> float:
        """Slope difference q_o(t) - d_o(t); positive in the window."""
        return self.q_o(t) - self.d_o(t)

    def beta_o_rate(self, t: float) -> float:
        return self.q_o.rate(t) - self.d_o.rate(t)

    def demand(self, price: float, t: float) -> float:
        t = self.check_window(t)
        return self.d_star + self.d_o(t) * (price - self.p_star)

    def supply(self, price: float, t: float) -> float:
        t = self.check_window(t)
        return self.q_star + self.q_o(t) * (price - self.p_star)

    def stock_rate(self, price: float, t: float) -> float:
        """Rate of stock accumulation, supply minus demand."""
        return self.supply(price, t) - self.demand(price, t)

    def optimal_stock(self, price: float, t: float) -> float:
        return self.ell0 + self.ell * self.demand(price, t)

    def state(self, t: float, price: float, stock: float) -> "EconState":
        return EconState(
            t=float(t),
            price=float(price),
            stock=float(stock),
            optimal_stock=self.optimal_stock(price, t),
            demand=self.demand(price, t),
            supply=self.supply(price, t),
        )

    def to_dict(self) -> dict:
        """Serializable parameter record (constructed families only)."""
        if self.theta is None:
            raise PreconditionError(
                "only coefficient families built by construct_coefficients serialize")
        return {
            "gamma": self.gamma,
            "lambda": self.lam,
            "ell": self.ell,
            "ell0": self.ell0,
            "p_star": self.p_star,
            "d_star": self.d_star,
            "theta": self.theta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EconConfig":
        return cls.log_periodic(
            gamma=data["gamma"], lam=data["lambda"], ell=data["ell"],
            ell0=data["ell0"], p_star=data["p_star"], d_star=data["d_star"],
            theta=data["theta"])


@dataclass(frozen=True)
class EconState:
    """Market snapshot; optimal_stock = ell0 + ell*demand by construction."""

    t: float
    price: float
    stock: float
    optimal_stock: float
    demand: float
    supply: float


def construct_coefficients(gamma: float, lam: float, ell: float, theta: float
                           ) -> Tuple[Coefficient, Coefficient, Tuple[float, float]]:
    """The unique slope family that makes the price oscillate with angle theta.

    Requiring the damping coefficient gamma*beta_o - lambda*ell*d_o to equal
    1/t and the frequency coefficient to equal (theta/t)^2 forces

        beta_o(t) = (1 + theta^2) / (lambda * t^2),

    after which d_o and q_o follow from the two identities
    lambda*ell*d_o = gamma*beta_o - 1/t and
    lambda*ell*q_o = (gamma + lambda*ell)*beta_o - 1/t.

    Returns (d_o, q_o, window) where the open window
    (gamma*(1+theta^2)/lambda, (gamma+lambda*ell)*(1+theta^2)/lambda)
    is exactly where d_o < 0 and q_o > 0 both hold; d_o vanishes at the
    lower endpoint and q_o at the upper one.  The family is singular for
    lambda = 0, which is rejected.
    """
    gamma = float(gamma)
    lam = float(lam)
    ell = float(ell)
    theta = float(theta)
    if lam == 0.0:
        raise DomainError("the log-periodic coefficient family requires lambda > 0")
    for name, v in (("gamma", gamma), ("lambda", lam), ("ell", ell), ("theta", theta)):
        if not (v > 0.0 and math.isfinite(v)):
            raise DomainError(f"{name} must be > 0, got {v!r}")

    kappa = (1.0 + theta * theta) / lam  # beta_o(t) = kappa / t^2
    le = lam * ell
    ge = gamma + le

    d_o = Coefficient(
        lambda t: (gamma * kappa / (t * t) - 1.0 / t) / le,
        lambda t: (-2.0 * gamma * kappa / (t * t * t) + 1.0 / (t * t)) / le,
    )
    q_o = Coefficient(
        lambda t: (ge * kappa / (t * t) - 1.0 / t) / le,
        lambda t: (-2.0 * ge * kappa / (t * t * t) + 1.0 / (t * t)) / le,
    )
    window = (gamma * kappa, ge * kappa)
    return d_o, q_o, window


@dataclass(frozen=True)
class MechanicalMapping:
    """Oscillator-equivalent reading of an econ config at one time.

    The dictionary is: price deviation P - P* plays the displacement,
    the damping coefficient gamma*beta_o - lambda*ell*d_o plays 1/t, and
    the frequency coefficient gamma*q_o' - (gamma+lambda*ell)*d_o' +
    lambda*beta_o plays (theta/t)^2.  ``theta`` is extracted from the
    frequency coefficient and is t_ref-independent exactly when the
    coefficients come from construct_coefficients.
    """

    theta: float
    t_ref: float
    damping_coefficient: float
    frequency_coefficient: float


def _frequency_coefficient(econ: EconConfig, t: float) -> float:
    return (econ.gamma * econ.q_o.rate(t)
            - (econ.gamma + econ.lam * econ.ell) * econ.d_o.rate(t)
            + econ.lam * econ.beta_o(t))


def _damping_coefficient(econ: EconConfig, t: float) -> float:
    return econ.gamma * econ.beta_o(t) - econ.lam * econ.ell * econ.d_o(t)


def to_mechanical(econ: EconConfig, t_ref: float) -> MechanicalMapping:
    """Extract the oscillation angle theta = t*sqrt(frequency coefficient)."""
    t_ref = float(t_ref)
    if not (t_ref > 0.0 and math.isfinite(t_ref)):
        raise DomainError(f"t_ref must be positive and finite, got {t_ref!r}")
    freq = _frequency_coefficient(econ, t_ref)
    if not (freq > 0.0):
        raise MappingError(
            f"frequency coefficient {freq!r} at t = {t_ref!r} is not positive; "
            "no log-periodic regime")
    return MechanicalMapping(
        theta=t_ref * math.sqrt(freq),
        t_ref=t_ref,
        damping_coefficient=_damping_coefficient(econ, t_ref),
        frequency_coefficient=freq,
    )


@dataclass(frozen=True)
class PriceOdeReport:
    """Finite-difference residual of the second-order price equation."""

    max_scaled: float
    rms_scaled: float
    scale: float
    samples: int


RESAMPLE_PER_DECADE = 2048


def verify_price_ode(econ: EconConfig, solution) -> PriceOdeReport:
    """Check a trajectory against the eliminated second-order price ODE.

    Computes d2P/dt2 + [gamma*beta_o - lambda*ell*d_o] dP/dt +
    [gamma*q_o' - (gamma+lambda*ell)*d_o' + lambda*beta_o] (P - P*) with
    central finite differences.  If the solution exposes ``sample``, its
    continuous extension is resampled on a log-uniform grid fine enough
    for second-order difference accuracy; otherwise the raw (times,
    states) grid is used as given.  Residuals are scaled by the maximum of
    |frequency_coefficient * (P - P*)|, the size of the restoring term.
    """
    times = np.asarray(solution.times, dtype=float)
    states = np.asarray(solution.states, dtype=float)
    if hasattr(solution, "sample"):
        decades = math.log10(times[-1] / times[0])
        n = max(257, int(math.ceil(RESAMPLE_PER_DECADE * decades)) + 1)
        times = np.geomspace(times[0], times[-1], n)
        states = solution.sample(times)
    if len(times) < 5:
        raise PreconditionError("at least 5 samples are needed for the residual check")

    p = states[:, 0]
    t = times
    h1 = t[1:-1] - t[:-2]
    h2 = t[2:] - t[1:-1]
    denom = h1 * h2 * (h1 + h2)
    # difference-from-midpoint forms annihilate constants exactly
    left = p[:-2] - p[1:-1]
    right = p[2:] - p[1:-1]
    dp = (h1 * h1 * right - h2 * h2 * left) / denom
    d2p = 2.0 * (h2 * left + h1 * right) / denom

    t_mid = t[1:-1]
    c1 = np.array([_damping_coefficient(econ, ti) for ti in t_mid])
    c0 = np.array([_frequency_coefficient(econ, ti) for ti in t_mid])
    dev = p[1:-1] - econ.p_star
    residual = d2p + c1 * dp + c0 * dev

    scale = float(np.max(np.abs(c0 * dev)))
    if scale == 0.0:
        scale = 1.0  # equilibrium trajectory: report raw residuals
    return PriceOdeReport(
        max_scaled=float(np.max(np.abs(residual))) / scale,
        rms_scaled=float(math.sqrt(np.mean(residual ** 2))) / scale,
        scale=scale,
        samples=len(t_mid),
    )


def initial_from_oscillation(econ: EconConfig, osc, t_start: float
                             ) -> Tuple[float, float]:
    """(P, S) initial state that shadows a given oscillator trajectory.

    Inverting the price equation with the damping identity
    gamma*beta_o - lambda*ell*d_o = 1/t gives
        P = P* + x(t),   S = S* - (v(t) + x(t)/t) / lambda,
    so the simulated price deviation follows osc.position exactly when the
    coefficients come from construct_coefficients.  Requires lambda > 0.
    """
    if econ.lam <= 0.0:
        raise DomainError("the oscillation mapping requires lambda > 0")
    t_start = econ.check_window(t_start)
    x = osc.position(t_start)
    v = osc.velocity(t_start)
    return econ.p_star + x, econ.s_star - (v + x / t_start) / econ.lam
