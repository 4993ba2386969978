"""Minimization of convex functions over the probability simplex.

The workhorse is a projected-gradient method (Barzilai-Borwein steps, exact
Euclidean projection onto the simplex, monotone backtracking). Extra linear
equality constraints are handled by an augmented Lagrangian around it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from . import _backend
from ._pykernels import spg_loop
from .dissimilarity import DissimilaritySpec, kernel_code
from .errors import InfeasibleConstraintsError, ValidationError


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    Attributes
    ----------
    tolerance : float
        Stop when the projected-gradient step ``max|P(x - g) - x|`` is below this.
    max_iterations : int
    step_rule : str
        Only ``"backtracking-line-search"`` is implemented.
    restarts : int
        Extra seeded random starts; the best objective wins.
    seed : int
    """

    tolerance: float = 1e-9
    max_iterations: int = 100_000
    step_rule: str = "backtracking-line-search"
    restarts: int = 0
    seed: int = 0

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValidationError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be at least 1")
        if self.step_rule != "backtracking-line-search":
            raise ValidationError(f"unsupported step rule {self.step_rule!r}")
        if self.restarts < 0:
            raise ValidationError("restarts must be nonnegative")


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class SolveOutcome:
    """Result of :func:`minimize_on_simplex`.

    ``gap_estimate`` is the Frank-Wolfe duality gap ``g @ x - min(g)`` at the
    returned point (an upper bound on suboptimality for convex objectives).
    ``history`` holds the objective after every accepted step of the run that
    produced ``argmin``.
    """

    argmin: np.ndarray
    objective_value: float
    converged: bool
    iterations: int
    gap_estimate: float
    history: np.ndarray = field(default=None, repr=False)


@dataclass(frozen=True, eq=False)
class SeparableLoss:
    """``sum_r weights[r] * spec_r(A[r] @ pi, targets[r])``.

    ``specs`` is either a single :class:`DissimilaritySpec` or one per row.
    """

    A: np.ndarray
    targets: np.ndarray
    weights: np.ndarray
    specs: tuple | DissimilaritySpec

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        t = np.asarray(self.targets, dtype=float).reshape(-1)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        specs = self.specs
        if isinstance(specs, DissimilaritySpec):
            specs = (specs,) * A.shape[0]
        specs = tuple(specs)
        if not (A.shape[0] == t.size == w.size == len(specs)):
            raise ValidationError("rows, targets, weights and specs must have equal length")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "targets", t)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "specs", specs)

    @property
    def kernel_rows(self):
        """``(codes, scaled weights)`` when every row has a compiled kernel, else None."""
        codes = [kernel_code(s) for s in self.specs]
        if any(c is None for c in codes):
            return None
        return (np.array([c[0] for c in codes], dtype=np.int32),
                self.weights * np.array([c[1] for c in codes]))

    def value(self, pi):
        p = np.clip(self.A @ pi, 0.0, 1.0)
        total = 0.0
        for w, s, pr, t in zip(self.weights, self.specs, p, self.targets):
            total += w * s(pr, t)
        return total

    def value_and_grad(self, pi):
        kr = self.kernel_rows
        if kr is not None:
            return _backend.separable_value_grad(self.A, self.targets, kr[1], kr[0], pi)
        val = self.value(pi)
        if not math.isfinite(val):
            return math.inf, None
        p = np.clip(self.A @ pi, 0.0, 1.0)
        dp = np.array([w * s.dp(pr, t) for w, s, pr, t in zip(self.weights, self.specs, p, self.targets)])
        return val, self.A.T @ dp

    def __call__(self, pi):
        return self.value_and_grad(pi)

    def forced_support(self):
        """Atoms that may carry mass without making some row infinite.

        A row whose target sits at 0 or 1 and whose penalty is infinite for any
        other value pins its event probability to the target.
        """
        allowed = np.ones(self.A.shape[1], dtype=bool)
        for row, t, s in zip(self.A, self.targets, self.specs):
            if t not in (0.0, 1.0) or s.kind == "exact":
                continue
            if math.isinf(s(0.5, t)):
                allowed &= (row == 0) if t == 0.0 else (row == 1)
        return allowed

    def restrict(self, support):
        """Drop columns outside ``support`` and rows that became constant.

        Returns ``(loss, offset)`` where ``offset`` is the total penalty of the
        constant rows.
        """
        A = self.A[:, support]
        keep = []
        offset = 0.0
        for r in range(A.shape[0]):
            row = A[r]
            if np.all(row == 0) or np.all(row == 1):
                offset += self.weights[r] * self.specs[r](float(row[0]) if row.size else 0.0, self.targets[r])
            else:
                keep.append(r)
        keep = np.array(keep, dtype=int)
        loss = SeparableLoss(A[keep].reshape(len(keep), A.shape[1]), self.targets[keep],
                             self.weights[keep], tuple(self.specs[r] for r in keep))
        return loss, offset


def _starts(n_free, config):
    """Uniform start followed by ``config.restarts`` seeded interior starts."""
    yield np.full(n_free, 1.0 / n_free)
    rng = np.random.default_rng(config.seed)
    for _ in range(config.restarts):
        yield 0.5 / n_free + 0.5 * rng.dirichlet(np.ones(n_free))


def _fw_gap(x, g):
    return float(g @ x - np.min(g)) if g is not None else math.inf


def _embed(x_free, support):
    x = np.zeros(support.size)
    x[support] = x_free
    return x


def _solve_free(objective, x0, config):
    """One projected-gradient run on the free coordinates."""
    trivial = isinstance(objective, SeparableLoss) and objective.A.shape[0] == 0
    if x0.size == 1 or trivial:
        x = x0 if x0.size > 1 else np.ones(1)
        val, g = objective(x)
        return x, val, 0, math.isfinite(val), np.array([val]), g
    if isinstance(objective, SeparableLoss):
        kr = objective.kernel_rows
        if kr is not None:
            x, val, it, conv, hist = _backend.spg_separable(
                objective.A, objective.targets, kr[1], kr[0], x0, config.tolerance, config.max_iterations)
            _, g = objective.value_and_grad(x)
            return x, val, it, conv, hist, g
    x, val, it, conv, hist = spg_loop(objective, x0, config.tolerance, config.max_iterations,
                                      _backend.project_simplex)
    _, g = objective(x) if math.isfinite(val) else (val, None)
    return x, val, it, conv, hist, g


def minimize_on_simplex(objective, extra_equalities=None, config=DEFAULT_CONFIG, start=None, support=None):
    """Minimize a convex function over ``{pi >= 0, sum(pi) = 1}``.

    Parameters
    ----------
    objective : SeparableLoss or callable
        A callable must return ``(value, gradient)``; value may be ``inf``.
        A :class:`SeparableLoss` additionally gets automatic support reduction
        for rows pinned at 0 or 1 and runs on the compiled kernels.
    extra_equalities : tuple of (A, b), optional
        Additional constraints ``A @ pi = b``.
    config : SolverConfig
    start : array_like, optional
        Feasible starting point; defaults to uniform over the allowed atoms.
    support : array_like of bool, optional
        Atoms allowed to carry mass (others are fixed at zero).

    Returns
    -------
    SolveOutcome
    """
    if isinstance(objective, SeparableLoss):
        N = objective.A.shape[1]
    elif start is not None:
        N = len(start)
    elif support is not None:
        N = len(support)
    else:
        raise ValidationError("pass a start or support to size a callable objective")
    allowed = np.ones(N, dtype=bool) if support is None else np.asarray(support, dtype=bool).copy()
    offset = 0.0
    free_obj = objective
    if isinstance(objective, SeparableLoss):
        allowed &= objective.forced_support()
        if allowed.any():
            free_obj, offset = objective.restrict(allowed)
    if not allowed.any():
        return SolveOutcome(np.full(N, 1.0 / N), math.inf, False, 0, math.inf, np.array([math.inf]))
    if not isinstance(objective, SeparableLoss):
        def free_obj(x, _f=objective, _s=allowed):
            val, g = _f(_embed(x, _s))
            return val, (None if g is None else np.asarray(g)[_s])

    n_free = int(allowed.sum())
    if extra_equalities is not None:
        return _augmented_lagrangian(free_obj, offset, extra_equalities, allowed, config, start)

    best = None
    starts = [np.asarray(start, dtype=float)[allowed]] if start is not None else _starts(n_free, config)
    for x0 in starts:
        run = _solve_free(free_obj, x0, config)
        if best is None or run[1] < best[1]:
            best = run
    x, val, it, conv, hist, g = best
    val = val + offset
    return SolveOutcome(_embed(x, allowed), float(val), bool(conv and math.isfinite(val)), int(it),
                        _fw_gap(x, g), np.asarray(hist) + offset)


def _augmented_lagrangian(obj, offset, extra, allowed, config, start):
    A, b = extra
    A = np.atleast_2d(np.asarray(A, dtype=float))[:, allowed]
    b = np.asarray(b, dtype=float).reshape(-1)
    M = np.vstack([A, np.ones(A.shape[1])])
    pi0, _ = nnls(M, np.append(b, 1.0), maxiter=50 * (M.shape[1] + 1))
    if np.max(np.abs(M @ pi0 - np.append(b, 1.0))) > 1e-7:
        raise InfeasibleConstraintsError("equality constraints have no solution on the simplex")
    n_free = A.shape[1]
    x = np.full(n_free, 1.0 / n_free) if start is None else np.asarray(start, dtype=float)[allowed]
    val0, _ = obj(x)
    if not math.isfinite(val0):
        x = 0.5 * x + 0.5 * pi0 / pi0.sum()
    lam = np.zeros(b.size)
    rho = 10.0
    total_it = 0
    prev_res = math.inf
    history = []
    conv = False
    for _ in range(60):
        def al(z, lam=lam, rho=rho):
            v, g = obj(z)
            if not math.isfinite(v):
                return math.inf, None
            r = A @ z - b
            return v + lam @ r + 0.5 * rho * (r @ r), g + A.T @ (lam + rho * r)

        x, val, it, inner_conv, hist = spg_loop(al, x, config.tolerance, config.max_iterations,
                                                _backend.project_simplex)
        total_it += it
        history.extend(hist)
        r = A @ x - b
        res = float(np.max(np.abs(r), initial=0.0))
        if inner_conv and res <= config.tolerance:
            conv = True
            break
        lam = lam + rho * r
        if res > 0.25 * prev_res:
            rho = min(rho * 10.0, 1e12)
        prev_res = res
    val, g = obj(x)
    g_al = None if g is None else g + A.T @ lam
    return SolveOutcome(_embed(x, allowed), float(val + offset), conv, total_it, _fw_gap(x, g_al),
                        np.asarray(history) + offset)


__all__ = ["SolverConfig", "SolveOutcome", "SeparableLoss", "minimize_on_simplex", "DEFAULT_CONFIG"]
