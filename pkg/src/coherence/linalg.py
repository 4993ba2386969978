"""Small dense linear-algebra helpers for 0/1 event matrices."""
import numpy as np

PIVOT_TOL = 1e-10


def rref(M, tol=PIVOT_TOL, return_pivots=False):
    """Reduced row-echelon form by Gauss-Jordan elimination with partial pivoting.

    Parameters
    ----------
    M : array_like
        Matrix to reduce; it is not modified.
    tol : float
        Entries with absolute value at most ``tol`` are treated as zero.
    return_pivots : bool
        Also return the list of pivot column indices.

    Returns
    -------
    R : ndarray
        Same shape as ``M``; zero rows are moved to the bottom.
    pivots : list of int, optional
    """
    R = np.array(M, dtype=float, copy=True)
    if R.ndim != 2:
        raise ValueError("rref expects a 2-D matrix")
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        k = r + int(np.argmax(np.abs(R[r:, c])))
        if abs(R[k, c]) <= tol:
            R[r:, c] = 0.0
            continue
        R[[r, k]] = R[[k, r]]
        R[r] /= R[r, c]
        for i in range(rows):
            if i != r and R[i, c] != 0.0:
                R[i] -= R[i, c] * R[r]
        R[r, c] = 1.0
        R[np.abs(R) <= tol] = 0.0
        pivots.append(c)
        r += 1
    if return_pivots:
        return R, pivots
    return R


def rank(M, tol=PIVOT_TOL):
    """Numerical rank via :func:`rref`."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    return len(rref(M, tol, return_pivots=True)[1])


def in_row_span(b, M, tol=1e-9):
    """Return ``(inside, coefficients)`` for ``b`` against the rows of ``M``."""
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=float)
    coef = np.linalg.lstsq(M.T, b, rcond=None)[0]
    return bool(np.max(np.abs(M.T @ coef - b), initial=0.0) <= tol), coef


def null_vector(M):
    """Unit vector spanning the (assumed 1-D) null space of ``M``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    _, _, vt = np.linalg.svd(M)
    return vt[-1]
