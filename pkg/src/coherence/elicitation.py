"""Probe-style training losses: incoherence plus an indecisiveness penalty.

Credences arrive pre-computed as an array indexed by (probe, event,
rephrasing). Every copy of event ``h`` is an estimate of the same event, so
the incoherence term is the projection loss of the flattened array.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .credence import CredenceBase, AtomSpace
from .dissimilarity import F, LOG, ScoringRule, DissimilaritySpec, evaluate
from .errors import ValidationError
from .projection import project
from .solver import DEFAULT_CONFIG, minimize_on_simplex

DECISIVENESS_KINDS = ("max-entropy", "scoring-rule-entropy", "distance", "legacy", "none")


@dataclass(frozen=True, eq=False)
class ProbeCredences:
    """Credences ``values[i, h, j]`` of probe ``i`` for event ``h`` phrased ``j``.

    ``V`` is the (n x N) event matrix over shared atoms.
    """

    values: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 2:
            vals = vals[None, :, :]
        if vals.ndim != 3:
            raise ValidationError("values must be indexed by (probe, event, rephrasing)")
        V = np.atleast_2d(np.asarray(self.V, dtype=float))
        if V.shape[0] != vals.shape[1]:
            raise ValidationError("one event row per credence slot is required")
        if np.any((vals < 0) | (vals > 1)) or not np.all(np.isfinite(vals)):
            raise ValidationError("credences must lie in [0, 1]")
        if not np.all((V == 0) | (V == 1)):
            raise ValidationError("event matrix entries must be 0 or 1")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "V", V)

    def flattened(self):
        """A credence base with one row per (probe, event, rephrasing) copy."""
        k, n, m = self.values.shape
        rows = np.repeat(np.arange(n)[None, :, None], k, axis=0).repeat(m, axis=2).reshape(-1)
        N = self.V.shape[1]
        return CredenceBase(AtomSpace(tuple(f"w{j + 1}" for j in range(N))), self.V[rows],
                            self.values.reshape(-1))


@dataclass(frozen=True)
class DecisivenessKind:
    """How to measure indecisiveness of a coherent belief.

    Attributes
    ----------
    kind : str
        ``max-entropy``, ``scoring-rule-entropy``, ``distance``, ``legacy`` or ``none``.
    rule : ScoringRule, optional
        For ``scoring-rule-entropy`` and ``distance`` (default: log rule).
    direction : {"up", "pu"}
        For ``distance``: ``up`` is ``-L(u, p*)``, ``pu`` is ``-L(p*, u)``.
    spec : DissimilaritySpec
        Penalty used by ``distance``.
    """

    kind: str
    rule: ScoringRule = LOG
    direction: str = "up"
    spec: DissimilaritySpec = F

    def __post_init__(self):
        if self.kind not in DECISIVENESS_KINDS:
            raise ValidationError(f"unknown decisiveness kind {self.kind!r}")
        if self.direction not in ("up", "pu"):
            raise ValidationError("direction must be 'up' or 'pu'")


def incoherence_term(pc, spec=F, config=DEFAULT_CONFIG):
    """Incoherence of all probe copies against their events."""
    return project(pc.flattened(), spec, config).incoherence


def _pinned_support(V, p_star):
    allowed = np.ones(V.shape[1], dtype=bool)
    for row, p in zip(V, p_star):
        if p <= 0.0:
            allowed &= row == 0
        elif p >= 1.0:
            allowed &= row == 1
    return allowed


def _entropy_objective(rule):
    """Negative expected self-penalty ``-sum_w pi_w s(1, pi_w)`` and its gradient."""
    if rule is LOG:
        def fun(pi):
            with np.errstate(divide="ignore", invalid="ignore"):
                logs = np.where(pi > 0, np.log(np.maximum(pi, 1e-300)), 0.0)
            return float(pi @ logs), np.log(np.maximum(pi, 1e-300)) + 1.0
        return fun

    def fun(pi):
        s = np.array([rule(1, x) for x in pi])
        ds = np.array([rule.dq(1, x) for x in pi])
        return float(-(pi @ s)), -(s + pi * ds)
    return fun


def _max_expected_self_penalty(V, p_star, rule, config):
    V = np.atleast_2d(np.asarray(V, dtype=float))
    p_star = np.asarray(p_star, dtype=float)
    support = _pinned_support(V, p_star)
    if not support.any():
        raise ValidationError("belief pins every atom to zero")
    extra = None if V.shape[0] == 0 else (V, p_star)
    fun = _entropy_objective(rule)
    start = support / support.sum()
    out = minimize_on_simplex(fun, extra_equalities=extra, config=config, start=start, support=support)
    return 0.0 - out.objective_value, out


def decisiveness_term(p_star, V, kind, config=DEFAULT_CONFIG, credences=None):
    """Indecisiveness of the coherent belief ``p_star`` over events ``V``.

    ``max-entropy``
        Largest entropy of an atom distribution consistent with ``p_star``.
    ``scoring-rule-entropy``
        Largest ``sum_w pi_w s(1, pi_w)`` under the same constraints.
    ``distance``
        ``-L(u, p*)`` (or ``-L(p*, u)``) where ``u = V pi_u`` and ``pi_u`` is
        the unconstrained maximizer of the scoring-rule entropy.
    ``legacy``
        ``sum min(q_E, q_Ec)**2`` over event/complement pairs; needs the raw
        ``credences`` array of shape (..., 2, m).
    ``none``
        Zero.
    """
    if kind.kind == "none":
        return 0.0
    if kind.kind == "legacy":
        if credences is None:
            raise ValidationError("the legacy term needs the raw event/complement credences")
        c = np.asarray(credences, dtype=float)
        if c.ndim == 2:
            c = c[None]
        if c.shape[-2] != 2:
            raise ValidationError("the legacy term needs exactly two events (event and complement)")
        return float(np.sum(np.minimum(c[:, 0, :], c[:, 1, :]) ** 2))
    if kind.kind == "max-entropy":
        return _max_expected_self_penalty(V, p_star, LOG, config)[0]
    if kind.kind == "scoring-rule-entropy":
        return _max_expected_self_penalty(V, p_star, kind.rule, config)[0]
    V = np.atleast_2d(np.asarray(V, dtype=float))
    _, out = _max_expected_self_penalty(np.zeros((0, V.shape[1])), np.zeros(0), kind.rule, config)
    u = V @ out.argmin
    pairs = zip(u, p_star) if kind.direction == "up" else zip(p_star, u)
    return -float(sum(evaluate(kind.spec, float(np.clip(a, 0, 1)), float(np.clip(b, 0, 1))) for a, b in pairs))


def probe_loss(pc, spec=F, kind=DecisivenessKind("none"), mix_weight=1.0, config=DEFAULT_CONFIG):
    """``incoherence_term + mix_weight * decisiveness_term(p*)``."""
    if mix_weight < 0:
        raise ValidationError("mix_weight must be nonnegative")
    base = pc.flattened()
    res = project(base, spec, config)
    if kind.kind == "none":
        return res.incoherence
    # one coherent belief per event: every copy of event h projects to the same value
    n = pc.V.shape[0]
    p_event = pc.V @ res.pi_star if np.all(np.isfinite(res.pi_star)) else np.full(n, np.nan)
    J = decisiveness_term(p_event, pc.V, kind, config, credences=pc.values)
    return res.incoherence + mix_weight * J


__all__ = [
    "ProbeCredences",
    "DecisivenessKind",
    "incoherence_term",
    "decisiveness_term",
    "probe_loss",
]
