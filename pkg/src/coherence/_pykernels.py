"""Pure-Python implementations of the hot numerical kernels.

These mirror ``_kernels.pyx`` line for line and are used when the compiled
extension is unavailable (or when ``COHERENCE_PURE_PYTHON=1``).

Row codes select the per-row penalty of a separable objective
``sum_r w_r * loss(A_r @ x, t_r)``:

==========  ===========================================
code        loss(p, t)
==========  ===========================================
KL (0)      t-relative binary KL, p ln(p/t) + ...
KL_T (1)    binary KL with arguments swapped
SQ (2)      (p - t)**2
HALF_KL     p ln(p/t)
HALF_KL_T   t ln(t/p)
==========  ===========================================
"""
import math

import numpy as np

KL, KL_T, SQ, HALF_KL, HALF_KL_T = 0, 1, 2, 3, 4

# derivatives are evaluated at p clipped into [P_LO, P_HI] so log/ratio stay finite
P_LO = 1e-300
P_HI = 1.0 - 1.1102230246251565e-16

ARMIJO = 1e-4
STEP_MIN, STEP_MAX = 1e-12, 1e12
FLAT_RTOL = 1e-13
MIN_LAMBDA = 1e-20


def project_simplex(y):
    """Euclidean projection of ``y`` onto the probability simplex (sort based)."""
    y = np.asarray(y, dtype=float)
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, y.size + 1)
    rho = ind[u - css / ind > 0][-1]
    theta = css[rho - 1] / rho
    return np.maximum(y - theta, 0.0)


def _kl(p, t):
    v = 0.0
    if p > 0.0:
        if t <= 0.0:
            return math.inf
        v += p * math.log(p / t)
    if p < 1.0:
        if t >= 1.0:
            return math.inf
        v += (1.0 - p) * math.log((1.0 - p) / (1.0 - t))
    return max(v, 0.0)  # roundoff can dip below zero near p == t


def row_value(code, p, t):
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
            return math.inf
        return p * math.log(p / t)
    if t <= 0.0:
        return 0.0
    if p <= 0.0:
        return math.inf
    return t * math.log(t / p)


def row_deriv(code, p, t):
    pc = min(max(p, P_LO), P_HI)
    if code == KL:
        tc = min(max(t, P_LO), P_HI)
        return math.log(pc / (1.0 - pc)) - math.log(tc / (1.0 - tc))
    if code == KL_T:
        return -t / pc + (1.0 - t) / (1.0 - pc)
    if code == SQ:
        return 2.0 * (p - t)
    if code == HALF_KL:
        return math.log(pc / max(t, P_LO)) + 1.0
    return -t / pc


def separable_value_grad(A, t, w, codes, x, want_grad=True):
    """Value and gradient of ``sum_r w_r loss_r(A_r @ x, t_r)``.

    Returns ``(inf, None)`` as soon as a row is infinite.
    """
    p = np.clip(A @ x, 0.0, 1.0)
    total = 0.0
    for r in range(p.size):
        v = row_value(codes[r], p[r], t[r])
        if v == math.inf:
            return math.inf, None
        total += w[r] * v
    if not want_grad:
        return total, None
    dp = np.array([w[r] * row_deriv(codes[r], p[r], t[r]) for r in range(p.size)])
    return total, A.T @ dp


def spg_loop(fun, x0, tol, max_iter, project=project_simplex):
    """Projected gradient with Barzilai-Borwein steps and monotone backtracking.

    Parameters
    ----------
    fun : callable
        ``fun(x) -> (value, grad)``; ``grad`` may be None when value is inf.
    x0 : ndarray
        Feasible start with a finite objective.
    tol : float
        Stop when ``max|P(x - g) - x| <= tol``.

    Returns
    -------
    x, value, iterations, converged, history
    """
    x = np.array(x0, dtype=float)
    f, g = fun(x)
    history = [f]
    if not math.isfinite(f):
        return x, f, 0, False, np.array(history)
    alpha = 1.0
    it = 0
    converged = False
    while it < max_iter:
        if np.max(np.abs(project(x - g) - x)) <= tol:
            converged = True
            break
        # steps sum to zero, so centre the gradient on the support before
        # dotting; keeps the simplex multiplier's roundoff out of descent tests
        on = x > 0.0
        gc = g - g[on].mean()
        d = project(x - alpha * g) - x
        gd = float(gc @ d)
        if gd >= 0.0:
            alpha = 1.0
            d = project(x - g) - x
            gd = float(gc @ d)
            if gd >= 0.0:
                break
        lam = 1.0
        while True:
            xn = x + lam * d
            fn, gn = fun(xn)
            if fn <= f + ARMIJO * lam * gd:
                break
            # near the optimum the decrease drowns in roundoff; accept a flat
            # step if the directional derivative there still points downhill
            if math.isfinite(fn) and abs(fn - f) <= FLAT_RTOL * (1.0 + abs(f)) and (gn - gn[on].mean()) @ d <= 0.0:
                break
            lam *= 0.5
            if lam < MIN_LAMBDA:
                return x, f, it, False, np.array(history)
        s = xn - x
        y = gn - g
        sy = float(s @ y)
        alpha = min(max(float(s @ s) / sy, STEP_MIN), STEP_MAX) if sy > 0.0 else STEP_MAX
        x, f, g = xn, fn, gn
        history.append(f)
        it += 1
    return x, f, it, converged, np.array(history)


def spg_separable(A, t, w, codes, x0, tol, max_iter):
    """Run :func:`spg_loop` on a separable objective."""
    A = np.ascontiguousarray(A, dtype=float)
    t = np.asarray(t, dtype=float)
    w = np.asarray(w, dtype=float)
    codes = np.asarray(codes, dtype=np.int32)

    def fun(x):
        return separable_value_grad(A, t, w, codes, x)

    return spg_loop(fun, x0, tol, max_iter)
