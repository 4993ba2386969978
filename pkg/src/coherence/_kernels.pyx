# Compiled counterparts of _pykernels: simplex projection, separable loss
# evaluation and the projected-gradient loop. Keep the two files in step.
from libc.math cimport log, fabs, INFINITY, isfinite
from libc.stdlib cimport malloc, free, qsort

import numpy as np

cdef enum:
    KL = 0
    KL_T = 1
    SQ = 2
    HALF_KL = 3
    HALF_KL_T = 4

cdef double P_LO = 1e-300
cdef double P_HI = 1.0 - 1.1102230246251565e-16
cdef double ARMIJO = 1e-4
cdef double STEP_MIN = 1e-12
cdef double STEP_MAX = 1e12
cdef double FLAT_RTOL = 1e-13
cdef double MIN_LAMBDA = 1e-20


cdef int _cmp_desc(const void *a, const void *b) noexcept nogil:
    cdef double x = (<double *> a)[0]
    cdef double y = (<double *> b)[0]
    if x < y:
        return 1
    if x > y:
        return -1
    return 0


cdef void _project(const double *y, double *out, double *work, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t j, rho = 1
    cdef double css = 0.0, css_rho = 0.0, theta
    for j in range(n):
        work[j] = y[j]
    qsort(work, n, sizeof(double), _cmp_desc)
    for j in range(n):
        css += work[j]
        if work[j] - (css - 1.0) / (j + 1) > 0.0:
            rho = j + 1
            css_rho = css
    theta = (css_rho - 1.0) / rho
    for j in range(n):
        out[j] = y[j] - theta if y[j] > theta else 0.0


cdef inline double _kl(double p, double t) noexcept nogil:
    cdef double v = 0.0
    if p > 0.0:
        if t <= 0.0:
            return INFINITY
        v += p * log(p / t)
    if p < 1.0:
        if t >= 1.0:
            return INFINITY
        v += (1.0 - p) * log((1.0 - p) / (1.0 - t))
    return v if v > 0.0 else 0.0


cdef inline double _row_value(int code, double p, double t) noexcept nogil:
    if code == KL:
        return _kl(p, t)
    if code == KL_T:
        return _kl(t, p)
    if code == SQ:
        return (p - t) * (p - t)
    if code == HALF_KL:
        if p <= 0.0:
            return 0.0
        if t <= 0.0:
            return INFINITY
        return p * log(p / t)
    if t <= 0.0:
        return 0.0
    if p <= 0.0:
        return INFINITY
    return t * log(t / p)


cdef inline double _clip(double v, double lo, double hi) noexcept nogil:
    return lo if v < lo else (hi if v > hi else v)


cdef inline double _row_deriv(int code, double p, double t) noexcept nogil:
    cdef double pc = _clip(p, P_LO, P_HI), tc
    if code == KL:
        tc = _clip(t, P_LO, P_HI)
        return log(pc / (1.0 - pc)) - log(tc / (1.0 - tc))
    if code == KL_T:
        return -t / pc + (1.0 - t) / (1.0 - pc)
    if code == SQ:
        return 2.0 * (p - t)
    if code == HALF_KL:
        return log(pc / (t if t > P_LO else P_LO)) + 1.0
    return -t / pc


cdef double _evaluate(const double[:, ::1] A, const double[::1] t, const double[::1] w,
                      const int[::1] codes, const double *x, double *grad, double *p,
                      bint want_grad) noexcept nogil:
    cdef Py_ssize_t R = A.shape[0], N = A.shape[1], r, j
    cdef double total = 0.0, v, acc, dr
    for r in range(R):
        acc = 0.0
        for j in range(N):
            acc += A[r, j] * x[j]
        p[r] = _clip(acc, 0.0, 1.0)
        v = _row_value(codes[r], p[r], t[r])
        if v == INFINITY:
            return INFINITY
        total += w[r] * v
    if want_grad:
        for j in range(N):
            grad[j] = 0.0
        for r in range(R):
            dr = w[r] * _row_deriv(codes[r], p[r], t[r])
            for j in range(N):
                grad[j] += A[r, j] * dr
    return total


def project_simplex(y):
    """Euclidean projection of ``y`` onto the probability simplex (sort based)."""
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = yv.shape[0]
    out = np.empty(n)
    cdef double[::1] ov = out
    cdef double *work = <double *> malloc(n * sizeof(double))
    if work == NULL:
        raise MemoryError()
    _project(&yv[0], &ov[0], work, n)
    free(work)
    return out


def separable_value_grad(A, t, w, codes, x, want_grad=True):
    """Value and gradient of ``sum_r w_r loss_r(A_r @ x, t_r)``; ``(inf, None)`` if infinite."""
    cdef double[:, ::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef int[::1] cv = np.ascontiguousarray(codes, dtype=np.int32)
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    grad = np.zeros(Av.shape[1])
    p = np.empty(Av.shape[0])
    cdef double[::1] gv = grad
    cdef double[::1] pv = p
    cdef double val = _evaluate(Av, tv, wv, cv, &xv[0], &gv[0], &pv[0] if Av.shape[0] else NULL,
                                want_grad)
    if val == INFINITY:
        return float("inf"), None
    return val, (grad if want_grad else None)


def spg_separable(A, t, w, codes, x0, double tol, long max_iter):
    """Projected gradient with Barzilai-Borwein steps on a separable objective.

    Returns ``(x, value, iterations, converged, history)`` like ``_pykernels.spg_separable``.
    """
    cdef double[:, ::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef int[::1] cv = np.ascontiguousarray(codes, dtype=np.int32)
    cdef Py_ssize_t N = Av.shape[1], R = Av.shape[0], j
    x_arr = np.array(x0, dtype=np.float64)
    buf = np.zeros((7, N))
    pbuf = np.zeros(max(R, 1))
    cdef double[::1] x = x_arr
    cdef double[:, ::1] b = buf
    cdef double *g = &b[0, 0]
    cdef double *gn = &b[1, 0]
    cdef double *xn = &b[2, 0]
    cdef double *d = &b[3, 0]
    cdef double *z = &b[4, 0]
    cdef double *tmp = &b[5, 0]
    cdef double *work = &b[6, 0]
    cdef double[::1] pv = pbuf
    cdef double f, fn, gd, gnd, lam, m, alpha = 1.0, sy, ss, diff, gmean, gnmean
    cdef Py_ssize_t n_on
    cdef long it = 0
    cdef bint converged = False, failed = False

    f = _evaluate(Av, tv, wv, cv, &x[0], g, &pv[0], True)
    history = [f]
    if not isfinite(f):
        return x_arr, f, 0, False, np.array(history)
    while it < max_iter:
        with nogil:
            for j in range(N):
                tmp[j] = x[j] - g[j]
            _project(tmp, z, work, N)
            m = 0.0
            for j in range(N):
                diff = fabs(z[j] - x[j])
                if diff > m:
                    m = diff
        if m <= tol:
            converged = True
            break
        with nogil:
            # steps sum to zero: centre g on the support so the simplex
            # multiplier's roundoff stays out of the descent tests
            gmean = 0.0
            n_on = 0
            for j in range(N):
                if x[j] > 0.0:
                    gmean += g[j]
                    n_on += 1
            gmean /= n_on
            for j in range(N):
                tmp[j] = x[j] - alpha * g[j]
            _project(tmp, z, work, N)
            gd = 0.0
            for j in range(N):
                d[j] = z[j] - x[j]
                gd += (g[j] - gmean) * d[j]
            if gd >= 0.0:
                alpha = 1.0
                for j in range(N):
                    tmp[j] = x[j] - g[j]
                _project(tmp, z, work, N)
                gd = 0.0
                for j in range(N):
                    d[j] = z[j] - x[j]
                    gd += (g[j] - gmean) * d[j]
        if gd >= 0.0:
            break
        lam = 1.0
        with nogil:
            while True:
                for j in range(N):
                    xn[j] = x[j] + lam * d[j]
                fn = _evaluate(Av, tv, wv, cv, xn, gn, &pv[0], True)
                if fn <= f + ARMIJO * lam * gd:
                    break
                if isfinite(fn) and fabs(fn - f) <= FLAT_RTOL * (1.0 + fabs(f)):
                    gnmean = 0.0
                    for j in range(N):
                        if x[j] > 0.0:
                            gnmean += gn[j]
                    gnmean /= n_on
                    gnd = 0.0
                    for j in range(N):
                        gnd += (gn[j] - gnmean) * d[j]
                    if gnd <= 0.0:
                        break
                lam *= 0.5
                if lam < MIN_LAMBDA:
                    failed = True
                    break
        if failed:
            break
        with nogil:
            sy = 0.0
            ss = 0.0
            for j in range(N):
                diff = xn[j] - x[j]
                sy += diff * (gn[j] - g[j])
                ss += diff * diff
                x[j] = xn[j]
                g[j] = gn[j]
            if sy > 0.0:
                alpha = _clip(ss / sy, STEP_MIN, STEP_MAX)
            else:
                alpha = STEP_MAX
        f = fn
        history.append(f)
        it += 1
    return x_arr, f, it, converged, np.array(history)
