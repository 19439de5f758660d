"""Thermodynamic functionals of factorized microstate probabilities.

For probabilities p_i = mu_i * nu_i (normalized to 1) the reduced
Helmholtz, internal-energy and entropy functionals are

    A / kT = sum p_i ln mu_i
    E / kT = -sum p_i ln nu_i
    S / k  = -sum p_i ln p_i

which satisfy A = E - T*S identically.  The Tsallis entropy
S_q = (1 - sum p_i^q)/(q - 1) generalizes the Shannon form (recovered as
q -> 1); its second entropic term sum p_i^q/(q - 1) corresponds, through
the spring/market dictionary, to the square of the demand (or supply)
deviation.  q may be any real number other than 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "ProbabilityFactorization",
    "ThermoReport",
    "thermo",
    "shannon_entropy",
    "tsallis_entropy",
    "entropic_term",
    "force_correspondence_lhs",
    "demand_correspondence_lhs",
]

NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class ProbabilityFactorization:
    """Microstate probabilities in multiplicative form p_i = mu_i * nu_i."""

    mu: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        nu = np.asarray(self.nu, dtype=float)
        if mu.ndim != 1 or nu.shape != mu.shape or mu.size == 0:
            raise DomainError("mu and nu must be equal-length 1-D arrays")
        if np.any(mu <= 0.0) or np.any(nu <= 0.0):
            raise DomainError("all factors must be strictly positive")
        p = mu * nu
        if abs(float(np.sum(p)) - 1.0) > NORMALIZATION_TOL:
            raise DomainError(
                f"probabilities must sum to 1 within {NORMALIZATION_TOL}, got {float(np.sum(p))!r}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "nu", nu)

    @property
    def p(self) -> np.ndarray:
        return self.mu * self.nu

    @property
    def size(self) -> int:
        return int(self.mu.size)


@dataclass(frozen=True)
class ThermoReport:
    """Reduced thermodynamic functionals; helmholtz = internal - entropy."""

    helmholtz_reduced: float
    internal_reduced: float
    entropy_reduced: float


def thermo(pf: ProbabilityFactorization) -> ThermoReport:
    p = pf.p
    return ThermoReport(
        helmholtz_reduced=float(np.dot(p, np.log(pf.mu))),
        internal_reduced=float(-np.dot(p, np.log(pf.nu))),
        entropy_reduced=float(-np.dot(p, np.log(p))),
    )


def _check_probs(p, q=None):
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0 or not np.all(np.isfinite(p)):
        raise DomainError("probability vector must be a finite 1-D array")
    if np.any(p < 0.0):
        raise DomainError("probabilities must be nonnegative")
    if abs(float(np.sum(p)) - 1.0) > NORMALIZATION_TOL:
        raise DomainError(f"probabilities must sum to 1, got {float(np.sum(p))!r}")
    if q is not None:
        q = float(q)
        if q == 1.0:
            raise DomainError("q = 1 is the Shannon limit; use shannon_entropy")
        if q <= 0.0 and np.any(p == 0.0):
            raise DomainError("q <= 0 is undefined for distributions with zero entries")
    return p, q


def _power_sum(p: np.ndarray, q: float) -> float:
    # 0^q := 0 for q > 0 (measure-zero states carry no weight)
    if q > 0.0:
        nz = p[p > 0.0]
        return float(np.sum(nz ** q))
    return float(np.sum(p ** q))


def shannon_entropy(p) -> float:
    """-sum p ln p with the 0*ln(0) = 0 convention, in units of k."""
    p, _ = _check_probs(p)
    nz = p[p > 0.0]
    return float(-np.dot(nz, np.log(nz)))


def tsallis_entropy(p, q: float) -> float:
    """(1 - sum p_i^q) / (q - 1), in units of k."""
    p, q = _check_probs(p, q)
    return (1.0 - _power_sum(p, q)) / (q - 1.0)


def entropic_term(p, q: float) -> float:
    """sum p_i^q / (q - 1); tsallis_entropy = 1/(q-1) - entropic_term."""
    p, q = _check_probs(p, q)
    return _power_sum(p, q) / (q - 1.0)


def force_correspondence_lhs(spring, t: float, x: float) -> float:
    """Restoring force -k(t)*x, the mechanical side of the force-entropy map."""
    return -spring.stiffness_at(t) * float(x)


def demand_correspondence_lhs(econ, spring, demand_value: float, t: float) -> float:
    """Demand-squared side of the entropic-term correspondence.

    Evaluates -(1/2) * [ (k0*t0/d_o(t)) * (gamma*beta_o(t) -
    lambda*ell*d_o(t)) * (D - d*) ]^2.  With coefficients from
    construct_coefficients the damping bracket equals 1/t and
    (D - d*)/d_o equals the price deviation x, so the value reduces to
    -(1/2) * (k0*t0*x/t)^2.  Always nonpositive; zero exactly at
    equilibrium demand.
    """
    t = econ.check_window(t)
    d_slope = econ.d_o(t)
    if d_slope == 0.0:
        raise DomainError(f"demand slope vanishes at t = {t!r} (window boundary)")
    bracket = econ.gamma * econ.beta_o(t) - econ.lam * econ.ell * d_slope
    term = (spring.k0 * spring.t0 / d_slope) * bracket * (float(demand_value) - econ.d_star)
    return -0.5 * term * term
