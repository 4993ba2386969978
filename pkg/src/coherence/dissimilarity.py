"""Dissimilarity functions, proper scoring rules and forecast scores.

All values live on the extended half-line: ``math.inf`` is a legitimate
result and propagates through sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _pykernels as _pk
from .errors import NotProperError, ValidationError

KINDS = ("f", "fo", "squared", "exact", "scoring", "half-f", "half-fo")
HALF_KINDS = ("half-f", "half-fo")


@dataclass(frozen=True)
class ScoringRule:
    """Penalty ``s(outcome, q)`` for forecasting ``q`` when ``outcome`` in {0, 1} happens."""

    name: str
    penalty: Callable[[int, float], float]
    # optional d/dq penalty(outcome, q); finite differences are used otherwise
    derivative: Callable[[int, float], float] | None = None

    def __call__(self, outcome, q):
        return self.penalty(outcome, q)

    def dq(self, outcome, q, h=1e-6):
        if self.derivative is not None:
            return self.derivative(outcome, q)
        lo, hi = max(q - h, 0.0), min(q + h, 1.0)
        return (self.penalty(outcome, hi) - self.penalty(outcome, lo)) / (hi - lo)


def _log_penalty(outcome, q):
    x = q if outcome else 1.0 - q
    return math.inf if x <= 0.0 else -math.log(x)


def _log_dq(outcome, q):
    return -1.0 / q if outcome else 1.0 / (1.0 - q)


LOG = ScoringRule("log", _log_penalty, _log_dq)
BRIER = ScoringRule("brier", lambda i, q: (i - q) ** 2, lambda i, q: 2.0 * (q - i))


def is_proper(rule, grid=101, rtol=1e-12):
    """Numerical properness check.

    For each ``p`` on a ``grid``-point lattice of [0, 1], the expected penalty
    ``p s(1, r) + (1 - p) s(0, r)`` over the same lattice must be smallest at
    ``r = p`` (ties within ``rtol`` are not allowed to undercut it).
    """
    xs = np.linspace(0.0, 1.0, grid)
    s1 = np.array([rule(1, r) for r in xs], dtype=float)
    s0 = np.array([rule(0, r) for r in xs], dtype=float)
    for k, p in enumerate(xs):
        with np.errstate(invalid="ignore"):
            exp = np.where(p == 0.0, 0.0, p * s1) + np.where(p == 1.0, 0.0, (1.0 - p) * s0)
        best = exp[k]
        if not np.isfinite(best):
            return False
        others = np.delete(exp, k)
        if np.any(others <= best + rtol * (1.0 + abs(best))):
            return False
    return True


@dataclass(frozen=True)
class DissimilaritySpec:
    """Which per-event penalty ``l(p, q)`` to use.

    ``kind`` is one of ``f`` (binary KL), ``fo`` (binary KL with arguments
    swapped), ``squared`` (``2 (p - q)**2``), ``exact`` (0 or inf),
    ``scoring`` (derived from ``rule``), ``half-f`` (``p ln(p/q)``) or
    ``half-fo`` (``q ln(q/p)``).
    """

    kind: str
    rule: ScoringRule | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown dissimilarity kind {self.kind!r}")
        if (self.kind == "scoring") != (self.rule is not None):
            raise ValidationError("a scoring rule is required exactly for kind 'scoring'")

    @property
    def is_dissimilarity(self):
        """False for the half-variants, which are not zero only at p = q."""
        return self.kind not in HALF_KINDS

    @property
    def label(self):
        return f"score:{self.rule.name}" if self.kind == "scoring" else self.kind

    def __call__(self, p, q):
        return evaluate(self, p, q)

    def dp(self, p, q):
        """Derivative in ``p`` (with ``p`` clipped into the open interval)."""
        code = kernel_code(self)
        if code is not None:
            return code[1] * _pk.row_deriv(code[0], p, q)
        if self.kind == "scoring":
            pc = min(max(p, 1e-12), 1 - 1e-12)
            s = self.rule
            return (s(1, q) - s(0, q)) - (s(1, pc) - s(0, pc))
        raise ValidationError(f"kind {self.kind!r} has no derivative")

    def dq(self, p, q):
        """Derivative in ``q`` (``q`` must be interior)."""
        if self.kind == "f":
            return -p / q + (1.0 - p) / (1.0 - q)
        if self.kind == "fo":
            return math.log(q / (1.0 - q)) - math.log(p / (1.0 - p))
        if self.kind == "squared":
            return -4.0 * (p - q)
        if self.kind == "scoring":
            s = self.rule
            return p * s.dq(1, q) + (1.0 - p) * s.dq(0, q)
        if self.kind == "half-f":
            return -p / q
        if self.kind == "half-fo":
            return math.log(q / p) + 1.0
        raise ValidationError(f"kind {self.kind!r} has no derivative")


F = DissimilaritySpec("f")
FO = DissimilaritySpec("fo")
SQUARED = DissimilaritySpec("squared")
EXACT = DissimilaritySpec("exact")
HALF_F = DissimilaritySpec("half-f")
HALF_FO = DissimilaritySpec("half-fo")


def kernel_code(spec):
    """``(row code, scale)`` for the compiled kernels, or None for the generic path."""
    simple = {
        "f": (_pk.KL, 1.0),
        "fo": (_pk.KL_T, 1.0),
        "squared": (_pk.SQ, 2.0),
        "half-f": (_pk.HALF_KL, 1.0),
        "half-fo": (_pk.HALF_KL_T, 1.0),
    }
    if spec.kind in simple:
        return simple[spec.kind]
    if spec.kind == "scoring" and spec.rule is LOG:
        return (_pk.KL, 1.0)
    if spec.kind == "scoring" and spec.rule is BRIER:
        return (_pk.SQ, 1.0)
    return None


def _scoring_value(rule, p, q):
    total = 0.0
    for outcome, mass in ((1, p), (0, 1.0 - p)):
        if mass == 0.0:
            continue
        diff = rule(outcome, q) - rule(outcome, p)
        if math.isnan(diff):  # inf - inf: both forecasts equally hopeless
            diff = 0.0
        total += mass * diff
    return max(total, 0.0)


def evaluate(spec, p, q):
    """Exact value of ``l(p, q)`` with ``0 ln 0 = 0`` and infinite boundary penalties."""
    p, q = float(p), float(q)
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ValidationError("p and q must lie in [0, 1]")
    kind = spec.kind
    if kind == "exact":
        return 0.0 if p == q else math.inf
    if kind == "scoring":
        code = kernel_code(spec)
        if code is None:
            return _scoring_value(spec.rule, p, q)
    code, scale = kernel_code(spec)
    return scale * _pk.row_value(code, p, q)


def ell_from_scoring(rule):
    """Dissimilarity ``l(p, q) = p[s(1,q) - s(1,p)] + (1-p)[s(0,q) - s(0,p)]``.

    Raises
    ------
    NotProperError
        If ``rule`` fails :func:`is_proper`.
    """
    if not is_proper(rule):
        raise NotProperError(f"scoring rule {rule.name!r} is not proper on the test grid")
    return DissimilaritySpec("scoring", rule)


@dataclass(frozen=True)
class ScoreReport:
    """Per-event penalties and their total for one realized atom."""

    penalties: tuple
    total: float


def score_forecast(base, rule, realized_atom):
    """Total penalty ``sum_i s(1[atom in E_i], q_i)``."""
    if not 0 <= realized_atom < base.N:
        raise ValidationError("realized atom index out of range")
    col = base.V[:, realized_atom]
    pen = tuple(float(rule(int(col[i]), float(base.q[i]))) for i in range(base.n))
    return ScoreReport(pen, float(sum(pen)))


__all__ = [
    "ScoringRule",
    "DissimilaritySpec",
    "ScoreReport",
    "LOG",
    "BRIER",
    "F",
    "FO",
    "SQUARED",
    "EXACT",
    "HALF_F",
    "HALF_FO",
    "evaluate",
    "ell_from_scoring",
    "is_proper",
    "kernel_code",
    "score_forecast",
]
