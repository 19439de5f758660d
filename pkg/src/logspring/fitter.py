"""Recovery of log-periodic model parameters from sampled time series.

The model is

    y(t) = C + env(t) * [A*sin(theta*ln((t+tc)/t_ref)) +
                         B*cos(theta*ln((t+tc)/t_ref))]

with envelope env either 1 (position-like series), theta/t (velocity-like
series) or 1/t^2 (stock-rate-like series).  For fixed (theta, tc) the
problem is linear in (A, B, C); theta is found by scanning a uniform grid
(the profiled objective is highly multimodal, log-periodicity aliases) and
then refined by golden-section search.  The reported coefficients come
from an orthogonal (SVD) solve at the final theta; the grid scan itself
runs on the normal-equation kernel and must agree with the orthogonal
reference to 1e-10.

Everything is deterministic: ties between equally good grid points go to
the smallest theta, and repeated runs are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ._backend import kernels
from .errors import DomainError, FitError, PreconditionError

__all__ = [
    "TimeSeries",
    "LogPeriodicFit",
    "ENVELOPES",
    "fit",
    "log_time_periodogram",
]

ENVELOPES = ("constant", "inverse_time", "inverse_time_squared")
MIN_SAMPLES = 8
MIN_GRID = 400
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TimeSeries:
    """Strictly increasing positive times paired with scalar samples."""

    times: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        y = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or y.shape != t.shape or t.size == 0:
            raise PreconditionError("times and values must be equal-length 1-D arrays")
        if not np.all(np.isfinite(t)) or not np.all(np.isfinite(y)):
            raise PreconditionError("times and values must be finite")
        if np.any(t <= 0.0):
            raise PreconditionError("all times must be positive")
        if np.any(np.diff(t) <= 0.0):
            raise PreconditionError("times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", y)

    def __len__(self) -> int:
        return int(self.times.size)


@dataclass(frozen=True)
class LogPeriodicFit:
    """Fitted log-periodic model; see the module docstring for the form."""

    amp_sin: float
    amp_cos: float
    theta: float
    t_ref: float
    t_shift: float
    offset: float
    envelope: str
    rms_residual: float
    theta_grid_resolution: float

    def predict(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        logt = np.log(ts + self.t_shift) - math.log(self.t_ref)
        env = _envelope_values(self.envelope, self.theta, ts)
        return self.offset + env * (self.amp_sin * np.sin(self.theta * logt)
                                    + self.amp_cos * np.cos(self.theta * logt))


def _envelope_base(envelope: str, t: np.ndarray) -> np.ndarray:
    # theta-independent part of the envelope, used inside the scan
    if envelope == "constant":
        return np.ones_like(t)
    if envelope == "inverse_time":
        return 1.0 / t
    if envelope == "inverse_time_squared":
        return 1.0 / (t * t)
    raise DomainError(f"unknown envelope {envelope!r}; choose from {ENVELOPES}")


def _envelope_values(envelope: str, theta: float, t: np.ndarray) -> np.ndarray:
    base = _envelope_base(envelope, t)
    if envelope == "inverse_time":
        return theta * base
    return base


def _golden_min(fun, lo: float, hi: float, width_tol: float) -> Tuple[float, float]:
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fun(c), fun(d)
    while (b - a) > width_tol:
        if fc < fd or (fc == fd and c < d):
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fun(d)
    return (c, fc) if (fc < fd or (fc == fd and c <= d)) else (d, fd)


def _tie_break_argmin(thetas: np.ndarray, ssr: np.ndarray) -> int:
    # smallest theta wins among values equal to the minimum within 1e-15
    j_best = int(np.argmin(ssr))
    tol = 1e-15 * max(1.0, abs(float(ssr[j_best])))
    for j in range(j_best + 1):
        if ssr[j] <= ssr[j_best] + tol:
            return j
    return j_best


def _scan_and_refine(logt, envbase, y, thetas):
    """Grid scan plus golden refinement; returns (theta, ssr)."""
    ssr = np.asarray(kernels.theta_scan(logt, envbase, y, thetas), dtype=float)
    if not np.any(np.isfinite(ssr)):
        raise FitError("degenerate design matrix: no candidate theta is solvable")
    j = _tie_break_argmin(thetas, ssr)
    theta_grid = float(thetas[j])
    ssr_grid = float(ssr[j])
    lo = float(thetas[max(0, j - 1)])
    hi = float(thetas[min(len(thetas) - 1, j + 1)])

    def objective(th):
        return kernels.solve_linear(logt, envbase, y, th)[3]

    # refine until the bracket is narrower than 1e-9 relative to theta
    theta_ref, ssr_ref = _golden_min(objective, lo, hi, 1e-9 * max(abs(lo), abs(hi)))
    if ssr_ref < ssr_grid or (ssr_ref == ssr_grid and theta_ref < theta_grid):
        return theta_ref, ssr_ref
    return theta_grid, ssr_grid


def fit(
    series: TimeSeries,
    theta_range: Tuple[float, float],
    envelope: str = "constant",
    fit_shift: bool = False,
    t_ref: Optional[float] = None,
    n_grid: int = 512,
) -> LogPeriodicFit:
    """Fit the log-periodic model to a time series.

    theta_range bounds the grid scan and must not contain 0; n_grid is the
    number of uniform grid points (at least 400 so the scan resolves the
    aliasing basins).  t_ref defaults to the first sample time and is
    never fitted.  With fit_shift the additive time shift tc is searched
    over [-0.5*t_min, 2*t_min] (values keeping t + tc positive), otherwise
    tc = 0.

    Raises FitError when the design matrix is degenerate and
    PreconditionError / DomainError for invalid inputs.
    """
    if len(series) < MIN_SAMPLES:
        raise PreconditionError(
            f"need at least {MIN_SAMPLES} samples to fit, got {len(series)}")
    lo, hi = float(theta_range[0]), float(theta_range[1])
    if not (0.0 < lo < hi) or not math.isfinite(hi):
        raise DomainError(f"theta_range must satisfy 0 < lo < hi, got {theta_range!r}")
    if envelope not in ENVELOPES:
        raise DomainError(f"unknown envelope {envelope!r}; choose from {ENVELOPES}")
    n_grid = int(n_grid)
    if n_grid < MIN_GRID:
        raise PreconditionError(f"n_grid must be at least {MIN_GRID}, got {n_grid}")

    t = series.times
    y = series.values
    t_ref = float(t[0]) if t_ref is None else float(t_ref)
    if not (t_ref > 0.0):
        raise DomainError(f"t_ref must be positive, got {t_ref!r}")
    log_t_ref = math.log(t_ref)
    envbase = _envelope_base(envelope, t)
    thetas = np.linspace(lo, hi, n_grid)

    def solve_at_shift(tc):
        logt = np.log(t + tc) - log_t_ref
        theta, ssr = _scan_and_refine(logt, envbase, y, thetas)
        return theta, ssr, logt

    if fit_shift:
        t_min = float(t[0])
        tc_lo, tc_hi = -0.5 * t_min, 2.0 * t_min
        coarse = np.linspace(tc_lo, tc_hi, 33)
        coarse_ssr = [solve_at_shift(tc)[1] for tc in coarse]
        jc = int(np.argmin(coarse_ssr))
        blo = float(coarse[max(0, jc - 1)])
        bhi = float(coarse[min(len(coarse) - 1, jc + 1)])
        tc_best, _ = _golden_min(lambda tc: solve_at_shift(tc)[1], blo, bhi,
                                 1e-9 * t_min)
        t_shift = float(tc_best)
    else:
        t_shift = 0.0

    theta, ssr, logt = solve_at_shift(t_shift)

    # final coefficients through an orthogonal decomposition (SVD lstsq)
    env = _envelope_values(envelope, theta, t)
    design = np.column_stack([env * np.sin(theta * logt),
                              env * np.cos(theta * logt),
                              np.ones_like(t)])
    beta, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 3:
        raise FitError("degenerate design matrix at the fitted theta")
    resid = y - design @ beta
    rms = math.sqrt(float(resid @ resid) / len(series))

    return LogPeriodicFit(
        amp_sin=float(beta[0]),
        amp_cos=float(beta[1]),
        theta=float(theta),
        t_ref=t_ref,
        t_shift=t_shift,
        offset=float(beta[2]),
        envelope=envelope,
        rms_residual=rms,
        theta_grid_resolution=(hi - lo) / (n_grid - 1),
    )


def log_time_periodogram(series: TimeSeries, theta_grid) -> np.ndarray:
    """Fraction of variance explained by the model at each candidate theta.

    For every theta the linear (A, B, C) subproblem is solved and the
    explained sum of squares over the total sum of squares is returned;
    values lie in [0, 1].  A constant series has no variance to explain
    and maps to all zeros.
    """
    if len(series) < MIN_SAMPLES:
        raise PreconditionError(
            f"need at least {MIN_SAMPLES} samples, got {len(series)}")
    grid = np.asarray(theta_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(grid <= 0.0):
        raise DomainError("theta grid must be 1-D and positive")
    if np.any(np.diff(grid) <= 0.0):
        raise DomainError("theta grid must be strictly increasing")

    t = series.times
    y = series.values
    tss = float(np.sum((y - np.mean(y)) ** 2))
    if tss == 0.0:
        return np.zeros_like(grid)
    logt = np.log(t) - math.log(float(t[0]))
    envbase = np.ones_like(t)
    ssr = np.asarray(kernels.theta_scan(logt, envbase, y, grid), dtype=float)
    power = (tss - ssr) / tss
    return np.clip(power, 0.0, 1.0)
