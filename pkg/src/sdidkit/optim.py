"""
Least squares over the probability simplex, with optional intercept and ridge.

Solves

    min_{w in simplex, b}  mean((A w + b - y)**2) + zeta**2 * ||w||**2

The intercept ``b`` is profiled out in closed form by centering ``A`` and
``y`` over rows, which leaves a pure simplex-constrained quadratic. That
quadratic is minimised with pairwise Frank-Wolfe steps (exact line search)
interleaved with an exact solve on the current support. The support solve
is only accepted when it does not increase the objective, so the iterate
sequence is monotone. Termination is certified by the Frank-Wolfe gap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConvergenceError, DimensionError

CLIP_THRESHOLD = 1e-12


@dataclass(frozen=True)
class SolverSettings:
    """Iteration cap and optimality-gap tolerance for :func:`solve_simplex_ls`."""

    max_iterations: int = 10_000
    tolerance: float = 1e-8
    record_history: bool = False

    def to_dict(self) -> dict:
        return {"max_iterations": self.max_iterations, "tolerance": self.tolerance}


@dataclass(frozen=True, eq=False)
class SimplexLSProblem:
    """
    Parameters
    ----------
    design : array_like, shape (n_rows, n_cols)
        One column per candidate unit or period.
    target : array_like, shape (n_rows,)
    ridge : float
        ``zeta``; the penalty is ``zeta**2 * ||w||**2`` added to the mean
        squared residual (equivalently ``n_rows * zeta**2`` on the residual sum).
    with_intercept : bool
        Fit a free additive constant alongside the weights.
    """

    design: np.ndarray
    target: np.ndarray
    ridge: float = 0.0
    with_intercept: bool = False

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.design, dtype=float))
        y = np.asarray(self.target, dtype=float).reshape(-1)
        if A.shape[0] < 1 or A.shape[1] < 1:
            raise DimensionError(f"design must have at least one row and column, got {A.shape}")
        if y.shape[0] != A.shape[0]:
            raise DimensionError(f"target has {y.shape[0]} rows, design has {A.shape[0]}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(y))):
            raise ValueError("design and target must be finite")
        if not (self.ridge >= 0 and np.isfinite(self.ridge)):
            raise ValueError(f"ridge must be a finite nonnegative number, got {self.ridge}")
        object.__setattr__(self, "design", A)
        object.__setattr__(self, "target", y)
        object.__setattr__(self, "ridge", float(self.ridge))

    @property
    def n_rows(self) -> int:
        return self.design.shape[0]

    @property
    def n_cols(self) -> int:
        return self.design.shape[1]


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Simplex weights plus intercept, with solver diagnostics when available."""

    weights: np.ndarray
    intercept: float = 0.0
    objective: float = float("nan")
    gap: float = float("nan")
    iterations: int = 0
    history: tuple = field(default=())

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "intercept", float(self.intercept))

    def __len__(self):
        return self.weights.shape[0]

    def is_valid(self, tol: float = 1e-9) -> bool:
        return bool(np.all(self.weights >= -CLIP_THRESHOLD) and abs(self.weights.sum() - 1) <= tol)

    @classmethod
    def uniform(cls, n: int) -> "WeightVector":
        return cls(np.full(n, 1.0 / n))

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "intercept": self.intercept}


def objective(problem: SimplexLSProblem, candidate: WeightVector) -> float:
    """Exact objective at ``candidate`` using its stored intercept."""
    w = candidate.weights
    if w.shape[0] != problem.n_cols:
        raise DimensionError(f"candidate has {w.shape[0]} weights, problem has {problem.n_cols} columns")
    b = candidate.intercept if problem.with_intercept else 0.0
    resid = problem.design @ w + b - problem.target
    return float(resid @ resid / problem.n_rows + problem.ridge**2 * (w @ w))


def optimal_intercept(problem: SimplexLSProblem, weights) -> float:
    if not problem.with_intercept:
        return 0.0
    return float(np.mean(problem.target - problem.design @ np.asarray(weights, dtype=float)))


def _centered(problem: SimplexLSProblem):
    A, y = problem.design, problem.target
    if problem.with_intercept:
        A = A - A.mean(axis=0)
        y = y - y.mean()
    return A, y


class _Quadratic:
    """``f(w) = w'Qw - 2c'w + k`` for the centred problem divided by ``scale``."""

    def __init__(self, problem: SimplexLSProblem, scale: float):
        A, y = _centered(problem)
        A = A / scale
        y = y / scale
        n = A.shape[0]
        self.Q = A.T @ A / n + (problem.ridge / scale) ** 2 * np.eye(A.shape[1])
        self.c = A.T @ y / n
        self.k = float(y @ y / n)

    def value(self, w):
        return float(w @ self.Q @ w - 2.0 * self.c @ w + self.k)

    def grad(self, w):
        return 2.0 * (self.Q @ w - self.c)


def _scale(problem: SimplexLSProblem) -> float:
    A, y = _centered(problem)
    return max(1.0, float(np.max(np.abs(A))), float(np.max(np.abs(y))))


def frank_wolfe_gap(problem: SimplexLSProblem, weights) -> float:
    """
    Optimality certificate: ``max_v <grad, w - v>`` over simplex vertices ``v``.

    Computed on the intercept-profiled objective in the problem's own units.
    Zero exactly at the constrained optimum.
    """
    w = np.asarray(weights, dtype=float)
    quad = _Quadratic(problem, 1.0)
    g = quad.grad(w)
    return float(g @ w - g.min())


def _support_solve(Q, c, support):
    """Minimiser of w'Qw - 2c'w on the affine set {sum(w_S) = 1, w_rest = 0}."""
    m = support.shape[0]
    K = np.zeros((m + 1, m + 1))
    K[:m, :m] = 2.0 * Q[np.ix_(support, support)]
    K[:m, m] = 1.0
    K[m, :m] = 1.0
    rhs = np.concatenate([2.0 * c[support], [1.0]])
    try:
        sol = np.linalg.solve(K, rhs)
        if not np.all(np.isfinite(sol)):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    return sol[:m]


def solve_simplex_ls(
    problem: SimplexLSProblem,
    settings: Optional[SolverSettings] = None,
    start: Optional[np.ndarray] = None,
) -> WeightVector:
    """
    Minimise the simplex least-squares objective.

    Parameters
    ----------
    problem : SimplexLSProblem
    settings : SolverSettings, optional
        ``tolerance`` bounds the Frank-Wolfe gap of the internally rescaled
        problem (centred design and target divided by ``max(1, max|entry|)``),
        which keeps the stopping rule meaningful for outcomes in the thousands.
    start : array_like, optional
        Initial point on the simplex; defaults to uniform weights.

    Returns
    -------
    WeightVector
        Weights below 1e-12 are clipped to zero and the rest renormalised.

    Raises
    ------
    ConvergenceError
        If the gap is still above tolerance after ``max_iterations``.
    """
    settings = settings or SolverSettings()
    k = problem.n_cols
    scale = _scale(problem)
    quad = _Quadratic(problem, scale)
    Q, c = quad.Q, quad.c

    if start is None:
        w = np.full(k, 1.0 / k)
    else:
        w = np.clip(np.asarray(start, dtype=float).reshape(-1), 0.0, None)
        if w.shape[0] != k or w.sum() <= 0:
            raise DimensionError("start must be a nonnegative vector with one entry per column")
        w = w / w.sum()

    f = quad.value(w)
    history = [f * scale**2] if settings.record_history else None
    gap = np.inf
    it = 0
    while True:
        g = 2.0 * (Q @ w - c)
        s = int(np.argmin(g))
        gap = float(g @ w - g[s])
        if gap <= settings.tolerance:
            break
        if it >= settings.max_iterations:
            raise ConvergenceError(
                "simplex least squares did not converge",
                objective=f * scale**2,
                gap=gap,
                iterations=it,
            )
        it += 1

        # Pairwise step: move mass from the worst support vertex to the best vertex.
        on = np.flatnonzero(w > 0)
        a = int(on[np.argmax(g[on])])
        slope = g[s] - g[a]
        curv = Q[s, s] + Q[a, a] - 2.0 * Q[s, a]
        step = w[a] if curv <= 0 else min(w[a], -slope / (2.0 * curv))
        trial = w.copy()
        trial[s] += step
        trial[a] = 0.0 if step == w[a] else trial[a] - step
        f_trial = quad.value(trial)
        if f_trial <= f:
            w, f = trial, f_trial

        # Exact minimiser on the current support, truncated to stay feasible.
        support = np.flatnonzero(w > 0)
        if support.shape[0] > 1:
            v = _support_solve(Q, c, support)
            d = v - w[support]
            neg = d < 0
            ratio = w[support][neg] / -d[neg]
            alpha = min(1.0, float(ratio.min())) if ratio.size else 1.0
            trial = np.zeros(k)
            trial[support] = np.maximum(w[support] + alpha * d, 0.0)
            if alpha < 1.0:
                trial[support[neg][ratio == ratio.min()]] = 0.0
            total = trial.sum()
            if total > 0:
                trial /= total
                f_trial = quad.value(trial)
                if f_trial <= f:
                    w, f = trial, f_trial
        if history is not None:
            history.append(f * scale**2)

    w = np.where(w < CLIP_THRESHOLD, 0.0, w)
    w = w / w.sum()
    return WeightVector(
        weights=w,
        intercept=optimal_intercept(problem, w),
        objective=quad.value(w) * scale**2,
        gap=gap * scale**2,
        iterations=it,
        history=tuple(history) if history is not None else (),
    )
