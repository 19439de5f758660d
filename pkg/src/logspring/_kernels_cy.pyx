# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the hot kernels in ``_kernels_py``.

Same Dormand-Prince tableau, same PI controller constants, same operation
order per state component; results agree with the pure backend to
floating-point noise.
"""

import numpy as np

from libc.math cimport cos, fabs, pow, sin, sqrt

from .errors import StepSizeError

cdef double C2 = 0.2
cdef double C3 = 0.3
cdef double C4 = 0.8
cdef double C5 = 8.0 / 9.0
cdef double A21 = 0.2
cdef double A31 = 3.0 / 40.0
cdef double A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0
cdef double A42 = -56.0 / 15.0
cdef double A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0
cdef double A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0
cdef double A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0
cdef double A62 = -355.0 / 33.0
cdef double A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0
cdef double A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0
cdef double B3 = 500.0 / 1113.0
cdef double B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0
cdef double B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0
cdef double E3 = -71.0 / 16695.0
cdef double E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0
cdef double E6 = 22.0 / 525.0
cdef double E7 = -1.0 / 40.0

cdef double SAFETY = 0.9
cdef double EXPO1 = 0.2 - 0.04 * 0.75
cdef double PI_BETA = 0.04
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 10.0
cdef double MAX_STEP_FRAC = 0.1

# quartic dense-output weights (row for stage 2 is zero and is skipped)
cdef double P11 = 1.0
cdef double P12 = -8048581381.0 / 2820520608.0
cdef double P13 = 8663915743.0 / 2820520608.0
cdef double P14 = -12715105075.0 / 11282082432.0
cdef double P32 = 131558114200.0 / 32700410799.0
cdef double P33 = -68118460800.0 / 10900136933.0
cdef double P34 = 87487479700.0 / 32700410799.0
cdef double P42 = -1754552775.0 / 470086768.0
cdef double P43 = 14199869525.0 / 1410260304.0
cdef double P44 = -10690763975.0 / 1880347072.0
cdef double P52 = 127303824393.0 / 49829197408.0
cdef double P53 = -318862633887.0 / 49829197408.0
cdef double P54 = 701980252875.0 / 199316789632.0
cdef double P62 = -282668133.0 / 205662961.0
cdef double P63 = 2019193451.0 / 616988883.0
cdef double P64 = -1453857185.0 / 822651844.0
cdef double P72 = 40617522.0 / 29380423.0
cdef double P73 = -110615467.0 / 29380423.0
cdef double P74 = 69997945.0 / 29380423.0

cdef double INF = float("inf")


cdef inline void _rhs_spring(double theta, double t, double x, double v,
                             double* fx, double* fv) nogil:
    cdef double w = theta / t
    fx[0] = v
    fv[0] = -(v / t) - w * w * x


cdef inline double _err_norm2(double ex, double ev, double sx, double sv):
    # rms over the two components; 0/0 -> 0, finite/0 -> inf
    cdef double rx, rv
    if sx > 0.0:
        rx = ex / sx
    elif ex != 0.0:
        return INF
    else:
        rx = 0.0
    if sv > 0.0:
        rv = ev / sv
    elif ev != 0.0:
        return INF
    else:
        rv = 0.0
    return sqrt((rx * rx + rv * rv) / 2.0)


cdef inline double _soft_norm2(double zx, double zv, double sx, double sv):
    cdef double rx = 0.0
    cdef double rv = 0.0
    cdef int n = 0
    if sx > 0.0:
        rx = zx / sx
        n += 1
    if sv > 0.0:
        rv = zv / sv
        n += 1
    if n == 0:
        return 0.0
    return sqrt((rx * rx + rv * rv) / 2.0)


def rk45_spring_reduced(double theta, double x, double v,
                        double t_start, double t_end, double rtol, double atol=0.0):
    """Scalar-specialized adaptive integration of the reduced spring."""
    cdef double t = t_start
    cdef double fx, fv, h, h0, h1, d0, d1, d2, m
    cdef double y1x, y1v, f1x, f1v
    cdef double k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v, k5x, k5v, k6x, k6v, k7x, k7v
    cdef double xn, vn, ex, ev, sx, sv, en, fac11, factor
    cdef double max_step, span
    cdef double facold = 1e-4
    cdef Py_ssize_t n_acc = 0, n_rej = 0
    cdef bint last

    _rhs_spring(theta, t, x, v, &fx, &fv)

    # initial step size (same heuristic as the pure backend)
    span = t_end - t
    max_step = MAX_STEP_FRAC * t
    sx = atol + rtol * fabs(x)
    sv = atol + rtol * fabs(v)
    d0 = _soft_norm2(x, v, sx, sv)
    d1 = _soft_norm2(fx, fv, sx, sv)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6 * span
    else:
        h0 = 0.01 * d0 / d1
    if h0 > max_step:
        h0 = max_step
    if h0 > span:
        h0 = span
    y1x = x + h0 * fx
    y1v = v + h0 * fv
    _rhs_spring(theta, t + h0, y1x, y1v, &f1x, &f1v)
    d2 = _soft_norm2(f1x - fx, f1v - fv, sx, sv) / h0
    m = d1 if d1 > d2 else d2
    if m <= 1e-15:
        h1 = 1e-6 * span
        if h0 * 1e-3 > h1:
            h1 = h0 * 1e-3
    else:
        h1 = pow(0.01 / m, 0.2)
    h = 100.0 * h0
    if h1 < h:
        h = h1
    if max_step < h:
        h = max_step
    if span < h:
        h = span

    cdef Py_ssize_t cap = 1024
    node_t_arr = np.empty(cap)
    node_y_arr = np.empty((cap, 2))
    seg_arr = np.empty((cap, 2, 4))
    cdef double[::1] nt = node_t_arr
    cdef double[:, ::1] ny = node_y_arr
    cdef double[:, :, ::1] sq = seg_arr
    cdef Py_ssize_t used = 0

    nt[used] = t
    ny[used, 0] = x
    ny[used, 1] = v
    used += 1

    while t < t_end:
        if h > MAX_STEP_FRAC * t:
            h = MAX_STEP_FRAC * t
        last = h >= t_end - t
        if last:
            h = t_end - t
        if h <= t * 1e-14:
            raise StepSizeError(f"step size underflow at t = {t!r} (h = {h!r})")

        k1x = fx
        k1v = fv
        _rhs_spring(theta, t + C2 * h, x + h * (A21 * k1x), v + h * (A21 * k1v), &k2x, &k2v)
        _rhs_spring(theta, t + C3 * h,
                    x + h * (A31 * k1x + A32 * k2x),
                    v + h * (A31 * k1v + A32 * k2v), &k3x, &k3v)
        _rhs_spring(theta, t + C4 * h,
                    x + h * (A41 * k1x + A42 * k2x + A43 * k3x),
                    v + h * (A41 * k1v + A42 * k2v + A43 * k3v), &k4x, &k4v)
        _rhs_spring(theta, t + C5 * h,
                    x + h * (A51 * k1x + A52 * k2x + A53 * k3x + A54 * k4x),
                    v + h * (A51 * k1v + A52 * k2v + A53 * k3v + A54 * k4v), &k5x, &k5v)
        _rhs_spring(theta, t + h,
                    x + h * (A61 * k1x + A62 * k2x + A63 * k3x + A64 * k4x + A65 * k5x),
                    v + h * (A61 * k1v + A62 * k2v + A63 * k3v + A64 * k4v + A65 * k5v),
                    &k6x, &k6v)
        xn = x + h * (B1 * k1x + B3 * k3x + B4 * k4x + B5 * k5x + B6 * k6x)
        vn = v + h * (B1 * k1v + B3 * k3v + B4 * k4v + B5 * k5v + B6 * k6v)
        _rhs_spring(theta, t + h, xn, vn, &k7x, &k7v)
        ex = h * (E1 * k1x + E3 * k3x + E4 * k4x + E5 * k5x + E6 * k6x + E7 * k7x)
        ev = h * (E1 * k1v + E3 * k3v + E4 * k4v + E5 * k5v + E6 * k6v + E7 * k7v)
        sx = atol + rtol * (fabs(x) if fabs(x) > fabs(xn) else fabs(xn))
        sv = atol + rtol * (fabs(v) if fabs(v) > fabs(vn) else fabs(vn))
        en = _err_norm2(ex, ev, sx, sv)

        if en <= 1.0:
            t = t_end if last else t + h
            x = xn
            v = vn
            fx = k7x
            fv = k7v
            if used == cap:
                cap *= 2
                new_t = np.empty(cap)
                new_y = np.empty((cap, 2))
                new_s = np.empty((cap, 2, 4))
                new_t[:used] = node_t_arr[:used]
                new_y[:used] = node_y_arr[:used]
                new_s[:used] = seg_arr[:used]
                node_t_arr, node_y_arr, seg_arr = new_t, new_y, new_s
                nt = node_t_arr
                ny = node_y_arr
                sq = seg_arr
            # dense-output polynomial of the segment just completed
            sq[used - 1, 0, 0] = h * (k1x * P11)
            sq[used - 1, 0, 1] = h * (k1x * P12 + k3x * P32 + k4x * P42
                                      + k5x * P52 + k6x * P62 + k7x * P72)
            sq[used - 1, 0, 2] = h * (k1x * P13 + k3x * P33 + k4x * P43
                                      + k5x * P53 + k6x * P63 + k7x * P73)
            sq[used - 1, 0, 3] = h * (k1x * P14 + k3x * P34 + k4x * P44
                                      + k5x * P54 + k6x * P64 + k7x * P74)
            sq[used - 1, 1, 0] = h * (k1v * P11)
            sq[used - 1, 1, 1] = h * (k1v * P12 + k3v * P32 + k4v * P42
                                      + k5v * P52 + k6v * P62 + k7v * P72)
            sq[used - 1, 1, 2] = h * (k1v * P13 + k3v * P33 + k4v * P43
                                      + k5v * P53 + k6v * P63 + k7v * P73)
            sq[used - 1, 1, 3] = h * (k1v * P14 + k3v * P34 + k4v * P44
                                      + k5v * P54 + k6v * P64 + k7v * P74)
            nt[used] = t
            ny[used, 0] = x
            ny[used, 1] = v
            used += 1
            n_acc += 1
            if en == 0.0:
                factor = MAX_FACTOR
            else:
                fac11 = pow(en, EXPO1)
                factor = SAFETY * pow(facold, PI_BETA) / fac11
                if factor > MAX_FACTOR:
                    factor = MAX_FACTOR
                elif factor < MIN_FACTOR:
                    factor = MIN_FACTOR
            facold = en if en > 1e-4 else 1e-4
            h = h * factor
        else:
            n_rej += 1
            fac11 = pow(en, EXPO1)
            factor = SAFETY / fac11
            if factor < MIN_FACTOR:
                factor = MIN_FACTOR
            h = h * factor

    return (node_t_arr[:used].copy(), node_y_arr[:used].copy(),
            seg_arr[:used - 1].copy(), int(n_acc), int(n_rej))


def solve_linear(logt, envbase, y, double theta):
    """Profiled linear subproblem at one theta; see the pure twin."""
    cdef double[::1] L = np.ascontiguousarray(logt, dtype=np.float64)
    cdef double[::1] env = np.ascontiguousarray(envbase, dtype=np.float64)
    cdef double[::1] yy = np.ascontiguousarray(y, dtype=np.float64)
    cdef double a = 0.0, b = 0.0, c = 0.0, ssr = 0.0
    cdef int ok = _solve_one(L, env, yy, theta, &a, &b, &c, &ssr)
    if not ok:
        return float("nan"), float("nan"), float("nan"), INF
    return a, b, c, ssr


cdef int _solve_one(double[::1] L, double[::1] env, double[::1] yy, double theta,
                    double* out_a, double* out_b, double* out_c, double* out_ssr):
    cdef Py_ssize_t n = L.shape[0]
    cdef Py_ssize_t i
    cdef double si, ci, arg
    cdef double gss = 0.0, gsc = 0.0, gso = 0.0, gcc = 0.0, gco = 0.0
    cdef double rs = 0.0, rc = 0.0, ro = 0.0
    for i in range(n):
        arg = theta * L[i]
        si = env[i] * sin(arg)
        ci = env[i] * cos(arg)
        gss += si * si
        gsc += si * ci
        gso += si
        gcc += ci * ci
        gco += ci
        rs += si * yy[i]
        rc += ci * yy[i]
        ro += yy[i]

    # 3x3 normal equations, Gaussian elimination with partial pivoting
    cdef double m[3][4]
    m[0][0] = gss; m[0][1] = gsc; m[0][2] = gso; m[0][3] = rs
    m[1][0] = gsc; m[1][1] = gcc; m[1][2] = gco; m[1][3] = rc
    m[2][0] = gso; m[2][1] = gco; m[2][2] = <double> n; m[2][3] = ro

    cdef Py_ssize_t col, row, piv, j
    cdef double best, f, tmp
    for col in range(3):
        piv = col
        best = fabs(m[col][col])
        for row in range(col + 1, 3):
            if fabs(m[row][col]) > best:
                best = fabs(m[row][col])
                piv = row
        if best == 0.0:
            return 0
        if piv != col:
            for j in range(4):
                tmp = m[col][j]
                m[col][j] = m[piv][j]
                m[piv][j] = tmp
        for row in range(col + 1, 3):
            f = m[row][col] / m[col][col]
            for j in range(col, 4):
                m[row][j] -= f * m[col][j]

    cdef double beta[3]
    for col in range(2, -1, -1):
        tmp = m[col][3]
        for j in range(col + 1, 3):
            tmp -= m[col][j] * beta[j]
        beta[col] = tmp / m[col][col]

    # explicit residual pass avoids the y.y - beta.Xty cancellation
    cdef double ssr = 0.0, r
    for i in range(n):
        arg = theta * L[i]
        si = env[i] * sin(arg)
        ci = env[i] * cos(arg)
        r = yy[i] - beta[0] * si - beta[1] * ci - beta[2]
        ssr += r * r
    out_a[0] = beta[0]
    out_b[0] = beta[1]
    out_c[0] = beta[2]
    out_ssr[0] = ssr
    return 1


def theta_scan(logt, envbase, y, thetas):
    """Profiled SSR for each candidate theta (tight C loop)."""
    cdef double[::1] L = np.ascontiguousarray(logt, dtype=np.float64)
    cdef double[::1] env = np.ascontiguousarray(envbase, dtype=np.float64)
    cdef double[::1] yy = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[::1] th = np.ascontiguousarray(thetas, dtype=np.float64)
    out_arr = np.empty(th.shape[0])
    cdef double[::1] out = out_arr
    cdef Py_ssize_t j
    cdef double a, b, c, ssr
    for j in range(th.shape[0]):
        if _solve_one(L, env, yy, th[j], &a, &b, &c, &ssr):
            out[j] = ssr
        else:
            out[j] = INF
    return out_arr
