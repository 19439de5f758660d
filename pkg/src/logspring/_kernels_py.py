"""Pure NumPy implementation of the numerical hot kernels.

`_kernels_cy` is the compiled twin: same entry points, same tableau and
controller arithmetic, so the two backends agree to floating-point noise.
`logspring._backend` selects one of them at import time.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import StepSizeError

# Dormand-Prince 5(4) tableau.
C2, C3, C4, C5 = 0.2, 0.3, 0.8, 8.0 / 9.0
A21 = 0.2
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                           49.0 / 176.0, -5103.0 / 18656.0)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                          -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)

# Quartic dense-output weights (Shampine free interpolant for this pair):
# y(t + x*h) = y + h * (K^T P) @ [x, x^2, x^3, x^4], 5th-order accurate.
P_DENSE = np.array([
    [1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
     -12715105075.0 / 11282082432.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
     87487479700.0 / 32700410799.0],
    [0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
     -10690763975.0 / 1880347072.0],
    [0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
     701980252875.0 / 199316789632.0],
    [0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0,
     -1453857185.0 / 822651844.0],
    [0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0,
     69997945.0 / 29380423.0],
])

SAFETY = 0.9
EXPO1 = 0.2 - 0.04 * 0.75  # PI controller error exponent
PI_BETA = 0.04             # PI controller memory exponent
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
MAX_STEP_FRAC = 0.1        # step never exceeds this fraction of current t


def _soft_norm(z, sc):
    # rms of z/sc ignoring components with no scale yet (initial-step heuristic)
    mask = sc > 0.0
    if not np.any(mask):
        return 0.0
    r = np.zeros_like(z)
    r[mask] = z[mask] / sc[mask]
    return math.sqrt(float(np.mean(r * r)))


def _error_norm(err, sc):
    # rms of err/sc; 0/0 counts as zero, finite/0 forces rejection
    r = np.zeros_like(err)
    mask = sc > 0.0
    r[mask] = err[mask] / sc[mask]
    if np.any(~mask & (err != 0.0)):
        return math.inf
    return math.sqrt(float(np.mean(r * r)))


def _initial_step(f, t0, y0, f0, t_end, rtol, atol, max_step):
    span = t_end - t0
    sc = atol + rtol * np.abs(y0)
    d0 = _soft_norm(y0, sc)
    d1 = _soft_norm(f0, sc)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6 * span
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, max_step, span)
    y1 = y0 + h0 * f0
    f1 = np.asarray(f(t0 + h0, y1), dtype=float)
    d2 = _soft_norm(f1 - f0, sc) / h0
    m = max(d1, d2)
    if m <= 1e-15:
        h1 = max(1e-6 * span, h0 * 1e-3)
    else:
        h1 = (0.01 / m) ** 0.2
    return min(100.0 * h0, h1, max_step, span)


def rk45_generic(f, t_start, y0, t_end, rtol, atol=0.0):
    """Adaptive Dormand-Prince 5(4) integration of y' = f(t, y).

    Steps are error-controlled against atol + rtol*max(|y|, |y_new|) with
    the Hairer PI controller, never exceed MAX_STEP_FRAC of the current
    time, and the last step lands exactly on t_end.  Each accepted step
    also records the quartic dense-output coefficients.

    Returns (node_t, node_y, seg_coef, n_accepted, n_rejected) where
    seg_coef[i] is the (ndim, 4) polynomial of segment [t_i, t_{i+1}].
    """
    t = float(t_start)
    t_end = float(t_end)
    y = np.array(y0, dtype=float)
    fk = np.asarray(f(t, y), dtype=float)
    h = _initial_step(f, t, y, fk, t_end, rtol, atol, MAX_STEP_FRAC * t)

    node_t = [t]
    node_y = [y.copy()]
    seg_coef = []
    n_acc = 0
    n_rej = 0
    facold = 1e-4

    while t < t_end:
        h = min(h, MAX_STEP_FRAC * t)
        last = h >= t_end - t
        if last:
            h = t_end - t
        if h <= t * 1e-14:
            raise StepSizeError(f"step size underflow at t = {t!r} (h = {h!r})")

        k1 = fk
        k2 = np.asarray(f(t + C2 * h, y + h * (A21 * k1)), dtype=float)
        k3 = np.asarray(f(t + C3 * h, y + h * (A31 * k1 + A32 * k2)), dtype=float)
        k4 = np.asarray(f(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3)), dtype=float)
        k5 = np.asarray(f(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4)),
                        dtype=float)
        k6 = np.asarray(f(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5)),
                        dtype=float)
        y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        k7 = np.asarray(f(t + h, y_new), dtype=float)
        err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        en = _error_norm(err, sc)

        if en <= 1.0:
            t = t_end if last else t + h
            y = y_new
            stages = np.stack([k1, k2, k3, k4, k5, k6, k7])
            seg_coef.append(h * (stages.T @ P_DENSE))
            fk = k7
            node_t.append(t)
            node_y.append(y.copy())
            n_acc += 1
            if en == 0.0:
                factor = MAX_FACTOR
            else:
                fac11 = en ** EXPO1
                factor = min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * facold ** PI_BETA / fac11))
            facold = max(en, 1e-4)
            h = h * factor
        else:
            n_rej += 1
            fac11 = en ** EXPO1
            h = h * max(MIN_FACTOR, SAFETY / fac11)

    return (np.array(node_t), np.array(node_y), np.array(seg_coef), n_acc, n_rej)


def rk45_spring_reduced(theta, x, v, t_start, t_end, rtol, atol=0.0):
    """Reduced variable-mass spring: x' = v, v' = -v/t - (theta/t)^2 x."""
    theta = float(theta)

    def rhs(t, y):
        w = theta / t
        return np.array([y[1], -(y[1] / t) - w * w * y[0]])

    return rk45_generic(rhs, t_start, np.array([x, v], dtype=float), t_end, rtol, atol)


def solve_linear(logt, envbase, y, theta):
    """Least squares of y on [env*sin(theta*L), env*cos(theta*L), 1].

    Normal-equation solve (3x3) plus an explicit residual pass so the SSR
    does not suffer the y.y - b.Xty cancellation.  Returns (a, b, c, ssr);
    ssr is +inf when the Gram matrix is singular.
    """
    logt = np.asarray(logt, dtype=float)
    envbase = np.asarray(envbase, dtype=float)
    y = np.asarray(y, dtype=float)
    s = envbase * np.sin(theta * logt)
    c = envbase * np.cos(theta * logt)
    n = logt.shape[0]
    g = np.empty((3, 3))
    g[0, 0] = s @ s
    g[0, 1] = g[1, 0] = s @ c
    g[0, 2] = g[2, 0] = s.sum()
    g[1, 1] = c @ c
    g[1, 2] = g[2, 1] = c.sum()
    g[2, 2] = n
    rhs = np.array([s @ y, c @ y, y.sum()])
    try:
        beta = np.linalg.solve(g, rhs)
    except np.linalg.LinAlgError:
        return math.nan, math.nan, math.nan, math.inf
    r = y - beta[0] * s - beta[1] * c - beta[2]
    return float(beta[0]), float(beta[1]), float(beta[2]), float(r @ r)


def theta_scan(logt, envbase, y, thetas):
    """Profiled sum of squared residuals for each candidate theta."""
    thetas = np.asarray(thetas, dtype=float)
    out = np.empty(thetas.shape[0])
    for j, th in enumerate(thetas):
        out[j] = solve_linear(logt, envbase, y, th)[3]
    return out
