"""Atoms, events and credence bases, with coherence checks and rank reduction.

A credence base pairs a 0/1 event matrix ``V`` (events x atoms) with a vector
``q`` of probability estimates. It is coherent when ``q = V @ pi`` for some
probability vector ``pi`` over the atoms.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .errors import IncoherentBaseError, NotInferableError, ValidationError
from .linalg import PIVOT_TOL, in_row_span, rank

COHERENCE_TOL = 1e-7
DEPENDENCY_TOL = 1e-9
SIMPLEX_TOL = 1e-9


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


def check_probability_vector(pi, tol=SIMPLEX_TOL):
    """Validate ``pi`` as a point of the simplex and return it as a float array."""
    pi = np.asarray(pi, dtype=float)
    if pi.ndim != 1 or pi.size == 0:
        raise ValidationError("probability vector must be a non-empty 1-D array")
    if np.any(pi < -tol) or abs(pi.sum() - 1.0) > tol:
        raise ValidationError("probability vector must be nonnegative and sum to 1")
    return pi


@dataclass(frozen=True)
class AtomSpace:
    """Ordered, distinct atom labels."""

    labels: tuple

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        if not labels:
            raise ValidationError("an atom space needs at least one atom")
        if len(set(labels)) != len(labels):
            raise ValidationError("atom labels must be distinct")
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.labels)

    def index(self, label):
        return self.labels.index(label)


@dataclass(frozen=True, eq=False)
class CredenceBase:
    """Events over atoms with one credence (and weight) per event.

    Attributes
    ----------
    atoms : AtomSpace
    V : ndarray, shape (n, N)
        Row ``i`` is the indicator of event ``i`` over the atoms.
    q : ndarray, shape (n,)
    weights : ndarray, shape (n,)
    names : tuple of str
    outcomes : tuple of str
        The ground outcomes the atoms were built from.
    atom_of : tuple of int
        Atom index of each outcome.
    """

    atoms: AtomSpace
    V: np.ndarray
    q: np.ndarray
    weights: np.ndarray = None
    names: tuple = None
    outcomes: tuple = None
    atom_of: tuple = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        V = np.asarray(self.V, dtype=float)
        if V.ndim == 1 and V.size == 0:
            V = V.reshape(0, len(self.atoms))
        if V.ndim != 2 or V.shape[1] != len(self.atoms):
            raise ValidationError("event matrix must have one column per atom")
        if not np.all((V == 0) | (V == 1)):
            raise ValidationError("event matrix entries must be 0 or 1")
        n = V.shape[0]
        q = np.asarray(self.q, dtype=float).reshape(-1)
        if q.size != n:
            raise ValidationError(f"expected {n} credences, got {q.size}")
        if np.any(~np.isfinite(q)) or np.any(q < 0) or np.any(q > 1):
            raise ValidationError("credences must lie in [0, 1]")
        w = np.ones(n) if self.weights is None else np.asarray(self.weights, dtype=float).reshape(-1)
        if w.size != n:
            raise ValidationError(f"expected {n} weights, got {w.size}")
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise ValidationError("weights must be strictly positive")
        names = tuple(f"E{i + 1}" for i in range(n)) if self.names is None else tuple(self.names)
        if len(names) != n:
            raise ValidationError("one name per event is required")
        outcomes = self.atoms.labels if self.outcomes is None else tuple(self.outcomes)
        atom_of = tuple(range(len(self.atoms))) if self.atom_of is None else tuple(self.atom_of)
        if len(atom_of) != len(outcomes) or set(atom_of) != set(range(len(self.atoms))):
            raise ValidationError("every atom needs at least one outcome")
        for key, val in (("V", V), ("q", q), ("weights", w)):
            object.__setattr__(self, key, _frozen(val))
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "atom_of", atom_of)

    @property
    def n(self):
        return self.V.shape[0]

    @property
    def N(self):
        return self.V.shape[1]

    @property
    def Vbar(self):
        """``V`` with an appended row of ones."""
        return np.vstack([self.V, np.ones((1, self.N))])

    @property
    def qbar(self):
        """``q`` with an appended 1."""
        return np.append(self.q, 1.0)

    def event_outcomes(self, i):
        """Outcome labels of event ``i``."""
        return {o for o, a in zip(self.outcomes, self.atom_of) if self.V[i, a] == 1}

    def outcome_vector(self, members):
        """Indicator over atoms of a set of outcome labels (must be a union of atoms)."""
        members = set(members)
        unknown = members - set(self.outcomes)
        if unknown:
            raise ValidationError(f"unknown outcome label(s): {sorted(unknown)}")
        vec = np.zeros(self.N)
        hits = np.zeros(self.N)
        for o, a in zip(self.outcomes, self.atom_of):
            hits[a] += 1
            if o in members:
                vec[a] += 1
        if np.any((vec > 0) & (vec < hits)):
            raise ValidationError("event splits an atom of this base")
        return (vec > 0).astype(float)

    def replace(self, q=None, weights=None, rows=None):
        """Copy with new credences/weights, optionally keeping only ``rows``."""
        idx = np.arange(self.n) if rows is None else np.asarray(rows, dtype=int)
        return CredenceBase(
            self.atoms,
            self.V[idx],
            self.q[idx] if q is None else q,
            self.weights[idx] if weights is None else weights,
            tuple(self.names[i] for i in idx),
            self.outcomes,
            self.atom_of,
        )


def _atoms_from_membership(outcomes, membership):
    """Group outcomes with identical membership columns into atoms (first-seen order)."""
    pattern_index = {}
    atom_of = []
    groups = []
    for o, col in zip(outcomes, membership.T):
        key = col.tobytes()
        if key not in pattern_index:
            pattern_index[key] = len(groups)
            groups.append([])
        atom_of.append(pattern_index[key])
        groups[pattern_index[key]].append(o)
    labels = ["|".join(g) for g in groups]
    V = np.zeros((membership.shape[0], len(groups)))
    for o_idx, a in enumerate(atom_of):
        V[:, a] = membership[:, o_idx]
    return AtomSpace(tuple(labels)), V, tuple(atom_of)


def build_base(events, credences, weights=None, outcomes=None):
    """Build a :class:`CredenceBase` from named outcome sets.

    Parameters
    ----------
    events : sequence of (str, iterable of str)
        Event names and their member outcomes.
    credences : sequence of float
    weights : sequence of float, optional
    outcomes : sequence of str, optional
        Declared ground set. Defaults to the union of the events' members in
        first-seen order (so no outcome lies outside every event).

    Outcomes sharing a membership pattern are merged into a single atom.
    """
    events = [(str(name), list(members)) for name, members in events]
    if not events:
        raise ValidationError("at least one event is required")
    if outcomes is None:
        outcomes = []
        for _, members in events:
            for o in members:
                if o not in outcomes:
                    outcomes.append(o)
    outcomes = [str(o) for o in outcomes]
    if len(set(outcomes)) != len(outcomes):
        raise ValidationError("outcome labels must be distinct")
    pos = {o: j for j, o in enumerate(outcomes)}
    membership = np.zeros((len(events), len(outcomes)))
    for i, (name, members) in enumerate(events):
        for o in members:
            if str(o) not in pos:
                raise ValidationError(f"event {name!r}: unknown outcome label {o!r}")
            membership[i, pos[str(o)]] = 1.0
    atoms, V, atom_of = _atoms_from_membership(outcomes, membership)
    return CredenceBase(atoms, V, credences, weights, tuple(n for n, _ in events), tuple(outcomes), atom_of)


def from_matrix(V, q, weights=None, names=None, labels=None):
    """Build a base from an explicit 0/1 matrix whose columns are outcomes.

    Duplicate columns are merged into one atom; ``labels`` name the original
    columns (default ``w1 .. wN``).
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if labels is None:
        labels = [f"w{j + 1}" for j in range(V.shape[1])]
    if len(labels) != V.shape[1]:
        raise ValidationError("one label per column is required")
    if not np.all((V == 0) | (V == 1)):
        raise ValidationError("event matrix entries must be 0 or 1")
    atoms, Vd, atom_of = _atoms_from_membership([str(s) for s in labels], V)
    return CredenceBase(atoms, Vd, q, weights, names, tuple(str(s) for s in labels), atom_of)


@dataclass(frozen=True)
class CoherenceVerdict:
    """Result of :func:`coherence_check`.

    ``residual`` is the max violation ``|V pi - q|`` of the witness when
    coherent, and the squared-loss incoherence otherwise.
    """

    coherent: bool
    witness: np.ndarray | None
    residual: float


def _nnls_witness(base):
    pi, dist = nnls(base.Vbar, base.qbar, maxiter=50 * (base.N + 1))
    s = pi.sum()
    if s > 0:
        pi = pi / s
    return pi, dist


def coherence_check(base, tolerance=COHERENCE_TOL, exact_residual=True):
    """Decide whether ``q`` lies in the convex hull of the columns of ``V``.

    Parameters
    ----------
    base : CredenceBase
    tolerance : float
        Maximum allowed ``|V pi - q|`` for the nonnegative least-squares witness.
    exact_residual : bool
        When incoherent, compute the squared-loss incoherence as the residual
        (one projection). If False, report the least-squares distance instead.
    """
    if tolerance <= 0:
        raise ValidationError("tolerance must be positive")
    if base.n == 0:
        return CoherenceVerdict(True, np.full(base.N, 1.0 / base.N), 0.0)
    pi, dist = _nnls_witness(base)
    gap = float(np.max(np.abs(base.V @ pi - base.q))) if pi.sum() > 0 else np.inf
    if gap <= tolerance:
        return CoherenceVerdict(True, _frozen(pi), gap)
    if not exact_residual:
        return CoherenceVerdict(False, None, float(dist))
    from .dissimilarity import SQUARED
    from .projection import project

    unit = base.replace(weights=np.ones(base.n))
    return CoherenceVerdict(False, None, float(project(unit, SQUARED).incoherence))


def _reduction(base):
    """Greedy row selection for a full-rank extended matrix.

    Returns the kept event indices and the first dependency vector ``a``
    (length n+1, ``Vbar.T @ a = 0``) that is inconsistent with ``qbar``, or None.
    """
    key = "reduction"
    if key in base._cache:
        return base._cache[key]
    ones = np.ones(base.N)
    kept = []
    bad = None
    for i in range(base.n):
        basis = np.vstack([base.V[kept], ones]) if kept else ones[None, :]
        if rank(np.vstack([basis, base.V[i]])) > basis.shape[0]:
            kept.append(i)
            continue
        _, coef = in_row_span(base.V[i], basis)
        a = np.zeros(base.n + 1)
        a[i] = 1.0
        a[kept] = -coef[:-1]
        a[-1] = -coef[-1]
        if bad is None and abs(a @ base.qbar) > DEPENDENCY_TOL * np.abs(a).sum():
            bad = a
    base._cache[key] = (kept, bad)
    return kept, bad


def reduce_full_rank(base):
    """Drop linearly dependent events so the extended matrix has full row rank.

    Returns
    -------
    reduced : CredenceBase
    verdict : {"consistent", "inconsistent"}
        ``"inconsistent"`` when some dropped dependency disagrees with ``q``,
        which already proves the base incoherent.
    """
    kept, bad = _reduction(base)
    reduced = base if len(kept) == base.n else base.replace(rows=kept)
    return reduced, ("consistent" if bad is None else "inconsistent")


def independent_rows(base):
    """Indices of the events kept by :func:`reduce_full_rank`."""
    return list(_reduction(base)[0])


def inconsistent_dependency(base):
    """The dependency vector found by :func:`reduce_full_rank`, or None."""
    return _reduction(base)[1]


def implied_belief(base, event, tolerance=COHERENCE_TOL):
    """Probability of ``event`` forced by a coherent base.

    Solves ``Vbar.T @ a = event`` and returns ``a @ qbar``.
    """
    event = np.asarray(event, dtype=float)
    if event.shape != (base.N,) or not np.all((event == 0) | (event == 1)):
        raise ValidationError("event must be a 0/1 vector over the base's atoms")
    inside, a = in_row_span(event, base.Vbar)
    if not inside:
        raise NotInferableError("event is not in the row span of the extended matrix")
    if not coherence_check(base, tolerance, exact_residual=False).coherent:
        raise IncoherentBaseError("implied beliefs need a coherent base")
    return float(np.clip(a @ base.qbar, 0.0, 1.0))


def implied_beliefs(base, events):
    """Vectorized :func:`implied_belief` without the coherence re-check."""
    events = np.atleast_2d(np.asarray(events, dtype=float))
    coef = np.linalg.lstsq(base.Vbar.T, events.T, rcond=None)[0]
    if np.max(np.abs(base.Vbar.T @ coef - events.T), initial=0.0) > 1e-9:
        raise NotInferableError("some event is not in the row span of the extended matrix")
    return np.clip(coef.T @ base.qbar, 0.0, 1.0)


__all__ = [
    "AtomSpace",
    "CredenceBase",
    "CoherenceVerdict",
    "build_base",
    "from_matrix",
    "coherence_check",
    "reduce_full_rank",
    "inconsistent_dependency",
    "independent_rows",
    "implied_belief",
    "implied_beliefs",
    "check_probability_vector",
    "PIVOT_TOL",
    "COHERENCE_TOL",
]
