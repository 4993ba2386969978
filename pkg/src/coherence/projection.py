"""Nearest coherent credences and the incoherence of a credence base.

For a dissimilarity ``l`` the incoherence of ``q`` is

    L*(q) = min over coherent p of  sum_i w_i l(p_i, q_i)

and ``p*`` is the (unique) minimizer. Coherent vectors are ``V @ pi`` for
``pi`` on the simplex, so the search runs in ``pi``-space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .credence import coherence_check
from .dissimilarity import F, FO, SQUARED, evaluate
from .errors import ConvergenceError, ValidationError
from .solver import DEFAULT_CONFIG, SeparableLoss, minimize_on_simplex

ROOT_TOL = 1e-12


@dataclass(frozen=True)
class ProjectionResult:
    """``p_star = V @ pi_star`` and ``incoherence = L*(q)``."""

    p_star: np.ndarray
    pi_star: np.ndarray
    incoherence: float
    converged: bool
    iterations: int
    gap_estimate: float = 0.0


def project(base, spec=F, config=DEFAULT_CONFIG):
    """Project the credences of ``base`` onto the coherent polytope.

    Parameters
    ----------
    base : CredenceBase
        Its weights multiply the per-event penalties.
    spec : DissimilaritySpec
        Must be a true dissimilarity (not a half-variant).
    config : SolverConfig

    Returns
    -------
    ProjectionResult
        ``incoherence`` is ``inf`` (and ``converged`` False) when every
        coherent vector has infinite loss.
    """
    if not spec.is_dissimilarity:
        raise ValidationError(f"{spec.kind} is not a dissimilarity; use it through aggregation")
    if spec.kind == "exact":
        verdict = coherence_check(base, exact_residual=False)
        if verdict.coherent:
            return ProjectionResult(base.q.copy(), np.array(verdict.witness), 0.0, True, 0)
        nan = np.full(base.n, np.nan)
        return ProjectionResult(nan, np.full(base.N, np.nan), math.inf, False, 0, math.inf)
    loss = SeparableLoss(base.V, base.q, base.weights, spec)
    out = minimize_on_simplex(loss, config=config)
    return ProjectionResult(base.V @ out.argmin, out.argmin, out.objective_value, out.converged,
                            out.iterations, out.gap_estimate)


def _odds(p):
    return p / (1.0 - p)


def _bisect(fun, lo, hi, tol=ROOT_TOL, expand=2.0, max_expand=200):
    """Root of an increasing function by bisection with bracket expansion."""
    for _ in range(max_expand):
        if fun(lo) <= 0.0:
            break
        lo = lo - expand * (1.0 + abs(lo))
    else:
        raise ConvergenceError("could not bracket the root from below")
    for _ in range(max_expand):
        if fun(hi) >= 0.0:
            break
        hi = hi + expand * (1.0 + abs(hi))
    else:
        raise ConvergenceError("could not bracket the root from above")
    for _ in range(400):
        if hi - lo <= tol * (1.0 + abs(lo) + abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if fun(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def closed_form_repetition(q, spec=F):
    """Coherent value for several estimates of the same event.

    ``f``: the odds of the answer are the geometric mean of the odds.
    ``fo``: the answer is the arithmetic mean.
    """
    q = np.asarray(q, dtype=float)
    if q.size == 0 or np.any((q < 0) | (q > 1)):
        raise ValidationError("estimates must be a non-empty vector in [0, 1]")
    if spec.kind == "fo":
        return float(q.mean())
    if spec.kind != "f":
        raise ValidationError("closed form available for f and fo only")
    zeros, ones = np.any(q == 0), np.any(q == 1)
    if zeros and ones:
        raise ValidationError("estimates 0 and 1 together give infinite loss everywhere")
    if zeros:
        return 0.0
    if ones:
        return 1.0
    odds = math.exp(np.mean(np.log(_odds(q))))
    return odds / (1.0 + odds)


def _fo_partition_member(q, lam):
    # root in [0, 1] of  q - p = lam p (1 - p), written to avoid cancellation
    b = lam + 1.0
    return 2.0 * q / (b + np.sqrt(b * b - 4.0 * lam * q))


def closed_form_partition(q, spec=F, tol=ROOT_TOL):
    """Coherent projection when the events partition the outcomes.

    ``f``: all log-odds shift by one constant chosen so the result sums to 1.
    ``fo``: ``(q_i - p_i) / (p_i (1 - p_i))`` is one constant across events.
    """
    q = np.asarray(q, dtype=float)
    if np.any((q <= 0) | (q >= 1)):
        raise ValidationError("partition closed forms need interior estimates")
    if spec.kind == "f":
        logit = np.log(_odds(q))

        def excess(c):
            return float(np.sum(1.0 / (1.0 + np.exp(-(logit + c))))) - 1.0

        c = _bisect(excess, -1.0, 1.0, tol)
        return 1.0 / (1.0 + np.exp(-(logit + c)))
    if spec.kind == "fo":
        def shortfall(lam):
            return 1.0 - float(np.sum(_fo_partition_member(q, lam)))

        lam = _bisect(shortfall, -0.5, 0.5, tol)
        return _fo_partition_member(q, lam)
    raise ValidationError("closed form available for f and fo only")


def closed_form_complement_pair(qE, qEc, spec=SQUARED):
    """Projection of estimates for an event and its complement.

    Returns
    -------
    pE : float
        Coherent probability of the event.
    incoherence : float
    """
    qE, qEc = float(qE), float(qEc)
    if spec.kind == "squared":
        if not (0 <= qE <= 1 and 0 <= qEc <= 1):
            raise ValidationError("estimates must lie in [0, 1]")
        return (qE + 1.0 - qEc) / 2.0, (qE + qEc - 1.0) ** 2
    if not (0 < qE < 1 and 0 < qEc < 1):
        raise ValidationError("f and fo closed forms need interior estimates")
    if spec.kind == "f":
        odds = math.sqrt(qE * (1.0 - qEc) / ((1.0 - qE) * qEc))
        pE = odds / (1.0 + odds)
        return pE, math.log((1.0 - pE) ** 2 / ((1.0 - qE) * qEc))
    if spec.kind == "fo":
        pE = (qE + 1.0 - qEc) / 2.0
        return pE, evaluate(FO, pE, qE) + evaluate(FO, 1.0 - pE, qEc)
    raise ValidationError("closed form available for f, fo and squared only")


def incoherence_gradient(base, spec=F, config=DEFAULT_CONFIG):
    """Gradient of ``L*`` with respect to the credences.

    Equals ``w_i * d l(p*_i, q_i) / d q_i`` evaluated at the projection.
    """
    if np.any((base.q <= 0) | (base.q >= 1)):
        raise ValidationError("gradient needs interior credences")
    res = project(base, spec, config)
    if not res.converged:
        raise ConvergenceError("projection did not converge")
    return np.array([w * spec.dq(p, q) for w, p, q in zip(base.weights, res.p_star, base.q)])


__all__ = [
    "ProjectionResult",
    "project",
    "closed_form_repetition",
    "closed_form_partition",
    "closed_form_complement_pair",
    "incoherence_gradient",
]
