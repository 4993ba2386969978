"""Merging individually coherent experts with content-invariant losses.

Each expert's stated credences determine the probability of every 0/1 event
in the row span of its extended matrix (the *inferable set*). Losses summed
over the inferable set, or over its minimal positive spanning subset, depend
only on that information and not on how the expert phrased it.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .credence import (
    CredenceBase,
    _atoms_from_membership,
    coherence_check,
    implied_beliefs,
    reduce_full_rank,
)
from .dissimilarity import DissimilaritySpec, F, HALF_KINDS
from .errors import IncoherentBaseError, RankDeficientError, SizeLimitError, ValidationError
from .linalg import rank, rref
from .solver import DEFAULT_CONFIG, SeparableLoss, minimize_on_simplex

SUMMATIONS = ("stated", "full-i", "basis", "asym")
NODE_BUDGET = 10**6
MAX_STATED = 20
_INT_TOL = 1e-9


def _canonical(rows):
    """Unique 0/1 rows sorted in descending lexicographic order."""
    uniq = {tuple(int(v) for v in r) for r in rows}
    return np.array(sorted(uniq, reverse=True), dtype=float).reshape(len(uniq), -1)


@dataclass(frozen=True, eq=False)
class ExpertReport:
    """A coherent credence base with its derived inferable events.

    The inferable set, positive basis and implied beliefs are computed lazily
    and cached.
    """

    base: CredenceBase
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not coherence_check(self.base, exact_residual=False).coherent:
            raise IncoherentBaseError(f"expert {self.name!r} is not coherent")

    @property
    def reduced(self):
        if "reduced" not in self._cache:
            self._cache["reduced"] = reduce_full_rank(self.base)[0]
        return self._cache["reduced"]

    @property
    def inferable(self):
        if "I" not in self._cache:
            self._cache["I"] = inferable_set(self)
        return self._cache["I"]

    @property
    def basis(self):
        if "B" not in self._cache:
            self._cache["B"] = positive_basis(self.inferable)
        return self._cache["B"]

    @property
    def covers(self):
        if "O" not in self._cache:
            self._cache["O"] = exact_covers(self.basis)
        return self._cache["O"]

    def implied(self, events):
        """Implied probabilities of the rows of ``events`` (over this expert's atoms)."""
        return implied_beliefs(self.reduced, events)


def _as_report(e):
    return e if isinstance(e, ExpertReport) else ExpertReport(e)


def inferable_set(report):
    """All 0/1 events whose probability the expert's credences determine.

    Returns
    -------
    ndarray, shape (m, N)
        Rows in descending lexicographic order; includes the empty and the
        sure event.
    """
    base = report.reduced if isinstance(report, ExpertReport) else reduce_full_rank(report)[0]
    Vbar = base.Vbar
    if rank(Vbar) != Vbar.shape[0]:
        raise RankDeficientError("extended event matrix must have full row rank")
    if Vbar.shape[0] > MAX_STATED + 1:
        raise SizeLimitError(f"inferable-set enumeration is limited to {MAX_STATED} events")
    R = rref(Vbar)
    coeffs = np.array(list(itertools.product((0.0, 1.0), repeat=R.shape[0])))
    combos = coeffs @ R
    ok = np.all((np.abs(combos) <= _INT_TOL) | (np.abs(combos - 1.0) <= _INT_TOL), axis=1)
    return _canonical(np.rint(combos[ok]))


def positive_basis(I):
    """Nonzero events of ``I`` with maximal zero sets (minimal supports)."""
    I = np.atleast_2d(np.asarray(I, dtype=float))
    support = [frozenset(np.flatnonzero(r)) for r in I]
    keep = []
    for i, s in enumerate(support):
        if not s:
            continue
        if any(t and t < s for t in support):
            continue
        keep.append(I[i])
    return _canonical(keep)


def exact_covers(B, node_budget=NODE_BUDGET):
    """All subsets of the rows of ``B`` that sum to the all-ones vector.

    Depth-first exact-cover search, always branching on the lowest uncovered
    atom. Returns sorted tuples of row indices, in sorted order.
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if B.size == 0:
        return []
    N = B.shape[1]
    masks = [frozenset(np.flatnonzero(r)) for r in B]
    by_atom = {j: [k for k, m in enumerate(masks) if j in m] for j in range(N)}
    out = []
    nodes = 0

    def search(covered, chosen):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise SizeLimitError(f"exact-cover search exceeded {node_budget} nodes")
        if len(covered) == N:
            out.append(tuple(sorted(chosen)))
            return
        j = min(set(range(N)) - covered)
        for k in by_atom[j]:
            if masks[k].isdisjoint(covered):
                search(covered | masks[k], chosen + [k])

    search(frozenset(), [])
    return sorted(out)


@dataclass(frozen=True)
class AggregationMethod:
    """Which events each expert is compared on, and with which penalty.

    Attributes
    ----------
    summation : {"stated", "full-i", "basis", "asym"}
        ``stated``: the expert's own rows. ``full-i``: every inferable event
        except the empty and sure events. ``basis``: the positive basis.
        ``asym``: the positive basis counted once per exact cover it occurs in.
    spec : DissimilaritySpec
        Half-variants are allowed (and required) only with ``asym``.
    normalize : bool, optional
        Divide each expert's sum by its term count (``#S``, or the total
        cover size for ``asym``). Defaults to True except for ``stated``.
    """

    summation: str
    spec: DissimilaritySpec = F
    normalize: bool | None = None

    def __post_init__(self):
        if self.summation not in SUMMATIONS:
            raise ValidationError(f"unknown summation {self.summation!r}; expected one of {SUMMATIONS}")
        half = self.spec.kind in HALF_KINDS
        if self.summation == "asym" and not half:
            raise ValidationError("the asymmetric method needs half-f or half-fo")
        if half and self.summation != "asym":
            raise ValidationError("half-variants are only valid with the asymmetric method")
        if self.normalize is None:
            object.__setattr__(self, "normalize", self.summation != "stated")


def comparison_rows(report, method):
    """Events, target credences and weights an expert contributes.

    All three refer to the expert's own atoms.
    """
    report = _as_report(report)
    if method.summation == "stated":
        A, t = report.base.V, report.base.q
        w = np.ones(len(t))
        if method.normalize:
            w /= len(t)
        return A, t, w
    if method.summation == "asym":
        B = report.basis
        counts = np.zeros(len(B))
        for cover in report.covers:
            counts[list(cover)] += 1
        used = counts > 0
        total = counts.sum()
        A = B[used]
        w = counts[used] / (total if method.normalize else 1.0)
        return A, report.implied(A), w
    if method.summation == "basis":
        A = report.basis
    else:
        I = report.inferable
        sizes = I.sum(axis=1)
        A = I[(sizes > 0) & (sizes < I.shape[1])]
    w = np.full(len(A), 1.0 / len(A) if method.normalize else 1.0)
    return A, report.implied(A), w


def joint_space(experts):
    """Common refinement of the experts' atoms.

    Returns
    -------
    atoms : AtomSpace
    lifts : list of ndarray
        ``lifts[i]`` has shape (N_i, N_joint); ``event_i @ lifts[i]`` is the
        same event over the joint atoms.
    """
    bases = [_as_report(e).base for e in experts]
    outcomes = list(bases[0].outcomes)
    for b in bases[1:]:
        if set(b.outcomes) != set(outcomes):
            raise ValidationError("experts must share the same outcome labels")
    pos = [{o: a for o, a in zip(b.outcomes, b.atom_of)} for b in bases]
    membership = np.vstack([b.V[:, [p[o] for o in outcomes]] for b, p in zip(bases, pos)])
    atoms, _, atom_of = _atoms_from_membership(outcomes, membership)
    lifts = []
    for b, p in zip(bases, pos):
        L = np.zeros((b.N, len(atoms)))
        for o, J in zip(outcomes, atom_of):
            L[p[o], J] = 1.0
        lifts.append(L)
    return atoms, lifts, tuple(atom_of), tuple(outcomes)


def disagreement(report, pi, method, lift=None):
    """Disagreement between a belief ``pi`` and one expert.

    ``pi`` is over the expert's own atoms unless ``lift`` maps them into the
    space ``pi`` lives on.
    """
    A, t, w = comparison_rows(report, method)
    if lift is not None:
        A = A @ lift
    return SeparableLoss(A, t, w, method.spec).value(np.asarray(pi, dtype=float))


@dataclass(frozen=True)
class AggregationResult:
    """Merged belief over the joint atoms and how far each expert is from it."""

    pi_star: np.ndarray
    atoms: object
    disagreements: tuple
    total: float
    converged: bool
    iterations: int
    lifts: tuple = field(repr=False, default=())
    outcomes: tuple = field(repr=False, default=())
    atom_of: tuple = field(repr=False, default=())

    def belief(self, event):
        """Merged probability of an event over the joint atoms, or of a set of outcome labels."""
        if isinstance(event, (set, frozenset)):
            vec = np.zeros(len(self.pi_star))
            for o, J in zip(self.outcomes, self.atom_of):
                if o in event:
                    vec[J] = 1.0
            event = vec
        return float(np.asarray(event, dtype=float) @ self.pi_star)


def aggregate(experts, method, config=DEFAULT_CONFIG):
    """Belief on the joint atoms minimizing the summed expert disagreements."""
    reports = [_as_report(e) for e in experts]
    if not reports:
        raise ValidationError("at least one expert is required")
    atoms, lifts, atom_of, outcomes = joint_space(reports)
    rows, targets, weights = [], [], []
    for r, L in zip(reports, lifts):
        A, t, w = comparison_rows(r, method)
        rows.append(A @ L)
        targets.append(t)
        weights.append(w)
    loss = SeparableLoss(np.vstack(rows), np.concatenate(targets), np.concatenate(weights), method.spec)
    out = minimize_on_simplex(loss, config=config)
    per = tuple(disagreement(r, out.argmin, method, L) for r, L in zip(reports, lifts))
    return AggregationResult(out.argmin, atoms, per, out.objective_value, out.converged, out.iterations,
                             tuple(lifts), outcomes, atom_of)


__all__ = [
    "ExpertReport",
    "AggregationMethod",
    "AggregationResult",
    "inferable_set",
    "positive_basis",
    "exact_covers",
    "comparison_rows",
    "joint_space",
    "disagreement",
    "aggregate",
]
