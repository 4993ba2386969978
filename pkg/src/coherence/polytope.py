"""Facets of the coherent polytope and Dutch-book certificates.

The coherent credence vectors form the convex hull of the columns of ``V``.
Each facet corresponds to a nonnegative payout vector ``b = Vbar.T @ a`` in
the row span of ``Vbar`` whose zero set is maximal; ``a`` read as a bet on
the events (plus a constant) pays ``b`` in every atom.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .credence import CredenceBase, from_matrix, inconsistent_dependency, independent_rows, reduce_full_rank
from .errors import RankDeficientError, SizeLimitError, ValidationError
from .linalg import in_row_span, null_vector, rank, rref

ZERO_TOL = 1e-9
DEDUP_TOL = 1e-8
SNAP_TOL = 1e-9
MAX_ATOMS = 12


@dataclass(frozen=True)
class PayoutVector:
    """Nonnegative payout per atom, scaled so its first nonzero entry is 1."""

    b: np.ndarray


@dataclass(frozen=True)
class FacetInequality:
    """``a @ p >= c`` for every coherent ``p``; tight on a facet."""

    a: np.ndarray
    c: float
    payout: PayoutVector

    def violation(self, p):
        """How far ``p`` falls short of the inequality (positive means violated)."""
        return float(self.c - self.a @ np.asarray(p, dtype=float))


@dataclass(frozen=True)
class BetCertificate:
    """A Dutch book: bet ``a`` (one stake per event plus a constant).

    ``payouts = Vbar.T @ a`` is nonnegative in every atom while ``cost =
    a @ qbar`` is negative, so buying the bet at the quoted credences is a
    sure gain for the bookie's counterparty.
    """

    a: np.ndarray
    payouts: np.ndarray
    cost: float


def _as_base(base_or_V):
    if isinstance(base_or_V, CredenceBase):
        return base_or_V
    V = np.atleast_2d(np.asarray(base_or_V, dtype=float))
    return from_matrix(V, np.zeros(V.shape[0]))


def _snap(x, tol=SNAP_TOL):
    """Round entries lying within ``tol`` of an integer (removes SVD noise)."""
    x = np.array(x, dtype=float)
    r = np.rint(x)
    close = np.abs(x - r) <= tol
    x[close] = r[close] + 0.0
    return x


def _normalize_o1(b, a):
    nz = np.flatnonzero(np.abs(b) > ZERO_TOL)
    scale = b[nz[0]]
    b = _snap(b / scale)
    a = _snap(a / scale)
    b[np.abs(b) <= ZERO_TOL] = 0.0
    return b, a


def is_maximally_zero(b, Vbar, tol=ZERO_TOL):
    """Whether the zero set of ``b`` is maximal among row-span vectors.

    True iff the columns of ``Vbar`` where ``b`` vanishes have rank exactly
    ``rank(Vbar) - 1``.
    """
    b = np.asarray(b, dtype=float)
    Vbar = np.atleast_2d(np.asarray(Vbar, dtype=float))
    inside, _ = in_row_span(b, Vbar, tol)
    if not inside:
        raise ValidationError("vector is not in the row span")
    zeros = np.abs(b) <= tol
    if zeros.all():
        return False
    return rank(Vbar[:, zeros]) == rank(Vbar) - 1


def enumerate_facets(base_or_V, max_atoms=MAX_ATOMS):
    """All facet inequalities of the convex hull of the columns of ``V``.

    Parameters
    ----------
    base_or_V : CredenceBase or array_like
        The extended matrix must have full row rank (run
        :func:`~coherence.credence.reduce_full_rank` first).
    max_atoms : int
        Refuse larger problems; the search is over column subsets.

    Returns
    -------
    list of FacetInequality
        Sorted by payout vector (descending lexicographic).
    """
    base = _as_base(base_or_V)
    Vbar = base.Vbar
    n, N = base.n, base.N
    if N > max_atoms:
        raise SizeLimitError(f"facet enumeration is limited to {max_atoms} atoms (got {N})")
    if rank(Vbar) != n + 1:
        raise RankDeficientError("extended event matrix must have full row rank")
    if n == 0:
        return []
    found = []
    for cols in combinations(range(N), n):
        sub = Vbar[:, cols]
        if rank(sub) != n:
            continue
        a = null_vector(sub.T)
        b = Vbar.T @ a
        if np.all(b >= -ZERO_TOL):
            pass
        elif np.all(b <= ZERO_TOL):
            a, b = -a, -b
        else:
            continue
        b, a = _normalize_o1(b, a)
        if any(np.max(np.abs(b - f[0])) <= DEDUP_TOL for f in found):
            continue
        found.append((b, a))
    found.sort(key=lambda f: tuple(f[0]), reverse=True)
    return [FacetInequality(a[:n].copy(), float(-a[n]), PayoutVector(b)) for b, a in found]


def hull_violation(facets, p):
    """Largest violation of a facet system by ``p`` (<= 0 means inside)."""
    if not facets:
        return 0.0
    return max(f.violation(p) for f in facets)


def _certificate(a, base):
    a = _snap(a)
    return BetCertificate(a, _snap(base.Vbar.T @ a), float(a @ base.qbar))


def dutch_book(base, tolerance=ZERO_TOL):
    """A sure-loss bet against the credences, or None when they are coherent.

    Linear dependencies among the events that the credences contradict give
    a bet with zero payout and negative cost. Otherwise the facet that ``q``
    violates most gives the certificate.
    """
    dep = inconsistent_dependency(base)
    if dep is not None:
        a = _snap(dep / np.max(np.abs(dep)))
        if a @ base.qbar > 0:
            a = -a
        return _certificate(a, base)
    reduced, _ = reduce_full_rank(base)
    kept = independent_rows(base)
    best = None
    for facet in enumerate_facets(reduced):
        a = np.zeros(base.n + 1)
        a[kept] = facet.a
        a[-1] = -facet.c
        cost = float(a @ base.qbar)
        if best is None or cost < best[0]:
            best = (cost, a)
    if best is None or best[0] >= -tolerance:
        return None
    return _certificate(best[1], base)


__all__ = [
    "PayoutVector",
    "FacetInequality",
    "BetCertificate",
    "rref",
    "is_maximally_zero",
    "enumerate_facets",
    "hull_violation",
    "dutch_book",
]
