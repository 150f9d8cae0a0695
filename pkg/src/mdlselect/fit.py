"""
Dense least-squares machinery shared by every search driver.

``FitState`` keeps, for each task, an orthonormal basis of the active design
(intercept first) and the current residual. Scoring a candidate column
against a task then reduces to one inner product with the residual and one
cached squared norm of the column's component orthogonal to the basis, so
all ``m x h`` candidate scores come from a single matrix product.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateResidual, DimensionMismatch, SingularDesign

LN2 = math.log(2.0)
# relative threshold on the orthogonal residual norm of a new column
SINGULAR_TOL = 1e-10
# rss[t] <= RSS_EPS * ||y[:, t]||^2 counts as a perfect fit
RSS_EPS = 1e-12


@dataclass
class Dataset:
    """Feature matrix, response matrix and optional feature-class map.

    Parameters
    ----------
    x : ndarray, shape (n, m)
    y : ndarray, shape (n, h)
        One column per task. A 1-d array is promoted to a single column.
    feature_names, task_names : list of str, optional
        Default to ``f0..`` and ``y0..``.
    class_map : ndarray of int, shape (m,), optional
        Class index of every feature, in ``[0, K)``.
    class_names : list of str, optional
        ``K`` labels; required with ``class_map``.
    """

    x: np.ndarray
    y: np.ndarray
    feature_names: Optional[list] = None
    task_names: Optional[list] = None
    class_map: Optional[np.ndarray] = None
    class_names: Optional[list] = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.y.ndim == 1:
            self.y = self.y[:, None]
        if self.x.ndim != 2 or self.y.ndim != 2:
            raise DimensionMismatch("x and y must be 2-d")
        n, m = self.x.shape
        if self.y.shape[0] != n:
            raise DimensionMismatch(f"x has {n} rows but y has {self.y.shape[0]}")
        if n < 2 or self.y.shape[1] < 1:
            raise DimensionMismatch(f"need n >= 2 and h >= 1, got n={n}, h={self.y.shape[1]}")
        if self.feature_names is None:
            self.feature_names = [f"f{j}" for j in range(m)]
        if self.task_names is None:
            self.task_names = [f"y{t}" for t in range(self.h)]
        self.feature_names = list(self.feature_names)
        self.task_names = list(self.task_names)
        if len(self.feature_names) != m:
            raise DimensionMismatch(f"{len(self.feature_names)} feature names for {m} columns")
        if len(self.task_names) != self.h:
            raise DimensionMismatch(f"{len(self.task_names)} task names for {self.h} tasks")
        if self.class_map is not None:
            self.class_map = np.asarray(self.class_map, dtype=int)
            if self.class_map.shape != (m,):
                raise DimensionMismatch("class_map must hold one class per feature")
            if self.class_names is None:
                k = int(self.class_map.max()) + 1 if m else 0
                self.class_names = [f"c{i}" for i in range(k)]
            self.class_names = list(self.class_names)
            K = len(self.class_names)
            if m and (self.class_map.min() < 0 or self.class_map.max() >= K):
                raise DimensionMismatch("class_map entries must lie in [0, K)")
            if np.any(np.bincount(self.class_map, minlength=K) == 0):
                raise DimensionMismatch("every feature class needs at least one feature")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def m(self) -> int:
        return self.x.shape[1]

    @property
    def h(self) -> int:
        return self.y.shape[1]

    @property
    def has_classes(self) -> bool:
        return self.class_map is not None

    @property
    def n_classes(self) -> int:
        return len(self.class_names) if self.class_map is not None else 0

    @property
    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.class_map, minlength=self.n_classes)

    def qualified_names(self) -> list:
        """``class/feature`` identifiers (bare feature names without a class map)."""
        if self.class_map is None:
            return list(self.feature_names)
        return [f"{self.class_names[c]}/{f}" for f, c in zip(self.feature_names, self.class_map)]

    def rows(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.x[idx], self.y[idx], self.feature_names, self.task_names,
                       self.class_map, self.class_names)

    def task(self, t: int) -> "Dataset":
        """Single-response view on task ``t``."""
        return Dataset(self.x, self.y[:, [t]], self.feature_names, [self.task_names[t]],
                       self.class_map, self.class_names)

    def without_classes(self) -> "Dataset":
        return Dataset(self.x, self.y, self.feature_names, self.task_names)


def task_bits(rss, n: int) -> np.ndarray:
    """Gaussian residual code length per task with the profile variance ``rss / n``."""
    rss = np.asarray(rss, dtype=float)
    return 0.5 * n * np.log2(2.0 * math.pi * rss / n) + n / (2.0 * LN2)


def rss_floor(y: np.ndarray) -> np.ndarray:
    return RSS_EPS * np.sum(np.asarray(y, dtype=float) ** 2, axis=0)


class FitState:
    """Per-task least-squares fits grown one (feature, task) pair at a time.

    Parameters
    ----------
    x : ndarray, shape (n, m)
    y : ndarray, shape (n, h)

    Attributes
    ----------
    active : list of list of int
        Features in each task's model, in insertion order.
    rss : ndarray, shape (h,)
    """

    def __init__(self, x: np.ndarray, y: np.ndarray):
        self.x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        self.y = y[:, None] if y.ndim == 1 else y
        n, m = self.x.shape
        h = self.y.shape[1]
        self.n, self.m, self.h = n, m, h
        xc = self.x - self.x.mean(axis=0)
        self._xc_sq = np.sum(xc ** 2, axis=0)
        # squared norm of each column after projecting out each task's basis
        self._perp_sq = np.repeat(self._xc_sq[:, None], h, axis=1)
        q0 = np.full((n, 1), 1.0 / math.sqrt(n))
        self._basis = [q0.copy() for _ in range(h)]
        self.resid = self.y - self.y.mean(axis=0)
        self.rss = np.sum(self.resid ** 2, axis=0)
        self.eps = rss_floor(self.y)
        self.active = [[] for _ in range(h)]
        self._in_task = np.zeros((m, h), dtype=bool)

    @classmethod
    def from_support(cls, x, y, support) -> "FitState":
        """Fit from scratch; ``support[t]`` lists task ``t``'s features."""
        state = cls(x, y)
        for t, feats in enumerate(support):
            for j in feats:
                state.add(int(j), t)
        return state

    def copy(self) -> "FitState":
        new = object.__new__(FitState)
        new.__dict__.update(self.__dict__)
        new._perp_sq = self._perp_sq.copy()
        new._basis = [b.copy() for b in self._basis]
        new.resid = self.resid.copy()
        new.rss = self.rss.copy()
        new.active = [list(a) for a in self.active]
        new._in_task = self._in_task.copy()
        return new

    # -- scoring ---------------------------------------------------------

    def frozen(self) -> np.ndarray:
        """Tasks whose residual is already a perfect fit; nothing more may enter them."""
        return self.rss <= self.eps

    def candidate_rss(self, features=None):
        """RSS after adding each feature alone to each task.

        Returns
        -------
        rss_after : ndarray, shape (len(features), h)
        admissible : ndarray of bool, same shape
            False where the column is (numerically) in the span of the task's
            current design, is already active there, or the task is frozen.
        """
        cols = slice(None) if features is None else np.asarray(features)
        x = self.x[:, cols]
        perp = self._perp_sq[cols]
        scale = self._xc_sq[cols]
        inner = x.T @ self.resid
        admissible = perp > SINGULAR_TOL * np.maximum(scale, 1e-300)[:, None]
        admissible &= ~self._in_task[cols]
        admissible &= ~self.frozen()[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            drop = np.where(admissible, inner ** 2 / np.where(admissible, perp, 1.0), 0.0)
        rss_after = np.maximum(self.rss[None, :] - drop, 0.0)
        return rss_after, admissible

    def gains(self, features=None):
        """Residual-code reduction in bits for each (feature, task) addition.

        RSS values are floored at the perfect-fit threshold so an exact fit
        yields a large finite gain. Inadmissible entries are ``-inf``.
        """
        rss_after, ok = self.candidate_rss(features)
        before = np.maximum(self.rss, self.eps)
        after = np.maximum(rss_after, self.eps[None, :])
        g = 0.5 * self.n * (np.log2(before)[None, :] - np.log2(after))
        g = np.maximum(g, 0.0)
        return np.where(ok, g, -np.inf), ok

    def bits(self) -> float:
        """Residual code length over all tasks with the perfect-fit floor applied."""
        return float(np.sum(task_bits(np.maximum(self.rss, self.eps), self.n)))

    # -- mutation --------------------------------------------------------

    def add(self, feature: int, task: int) -> float:
        """Add ``feature`` to ``task``'s model; returns the new RSS of that task."""
        if self._in_task[feature, task]:
            raise ValueError(f"feature {feature} already active in task {task}")
        basis = self._basis[task]
        z = self.x[:, feature].copy()
        for _ in range(2):
            z -= basis @ (basis.T @ z)
        zz = float(z @ z)
        if zz <= SINGULAR_TOL * max(self._xc_sq[feature], 1e-300):
            raise SingularDesign(f"feature {feature} is collinear with task {task}'s design")
        q = z / math.sqrt(zz)
        self._basis[task] = np.column_stack([basis, q])
        r = self.resid[:, task]
        r -= (q @ r) * q
        self.rss[task] = float(r @ r)
        proj = q @ self.x
        col = self._perp_sq[:, task]
        col -= proj ** 2
        np.maximum(col, 0.0, out=col)
        col[feature] = 0.0
        self.active[task].append(int(feature))
        self._in_task[feature, task] = True
        return self.rss[task]

    # -- read-out --------------------------------------------------------

    def coefficients(self):
        """OLS coefficients on each task's active support.

        Returns
        -------
        beta : ndarray, shape (m, h)
            Zero outside the active set.
        intercept : ndarray, shape (h,)
        """
        beta = np.zeros((self.m, self.h))
        intercept = np.zeros(self.h)
        for t in range(self.h):
            feats = self.active[t]
            design = np.column_stack([np.ones(self.n), self.x[:, feats]])
            coef, *_ = np.linalg.lstsq(design, self.y[:, t], rcond=None)
            intercept[t] = coef[0]
            beta[feats, t] = coef[1:]
        return beta, intercept

    @property
    def sigma2(self) -> np.ndarray:
        return self.rss / self.n


def residual_bits(state: FitState, tasks=None) -> float:
    """Gaussian residual code length ``S_E`` (bits) summed over ``tasks``.

    Raises
    ------
    DegenerateResidual
        If a task's residual is a perfect fit, where the code length diverges.
    """
    tasks = range(state.h) if tasks is None else tasks
    tasks = list(tasks)
    rss = state.rss[tasks]
    if np.any(rss <= state.eps[tasks]):
        bad = [t for t, r, e in zip(tasks, rss, state.eps[tasks]) if r <= e]
        raise DegenerateResidual(f"perfect fit on task(s) {bad}")
    return float(np.sum(task_bits(rss, state.n)))


def delta_se(state: FitState, feature: int, tasks: Sequence[int]) -> float:
    """Residual bits saved by jointly refitting with ``feature`` added to ``tasks``."""
    tasks = list(tasks)
    rss_after, ok = state.candidate_rss([feature])
    rss_after, ok = rss_after[0, tasks], ok[0, tasks]
    if not np.all(ok):
        raise SingularDesign(f"feature {feature} cannot enter tasks "
                             f"{[t for t, a in zip(tasks, ok) if not a]}")
    if np.any(rss_after <= state.eps[tasks]):
        raise DegenerateResidual(f"feature {feature} fits a task in {tasks} exactly")
    before = residual_bits(state, tasks)
    return before - float(np.sum(task_bits(rss_after, state.n)))


# -- logistic refit -------------------------------------------------------


@dataclass
class LogisticFit:
    """Logistic coefficients with the intercept first."""

    coef: np.ndarray
    features: list
    converged: bool
    n_iter: int
    separated: bool = False

    def decision(self, x: np.ndarray) -> np.ndarray:
        return self.coef[0] + np.asarray(x)[:, self.features] @ self.coef[1:]

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return _sigmoid(self.decision(x))

    def predict(self, x: np.ndarray) -> np.ndarray:
        return (self.decision(x) >= 0.0).astype(int)


def _sigmoid(z):
    return np.exp(-np.logaddexp(0.0, -z))


MAX_COEF_NORM = 1e4


def fit_logistic(x: np.ndarray, y: np.ndarray, max_iter: int = 100, tol: float = 1e-8):
    """Newton-Raphson (IRLS) maximum-likelihood logistic fit with an intercept.

    Returns ``(coef, converged, n_iter, separated)``. Separation is flagged
    once the coefficient norm passes ``MAX_COEF_NORM`` or the fitted
    probabilities saturate on every row; the coefficients are then clamped
    to that norm.
    """
    n = x.shape[0]
    design = np.column_stack([np.ones(n), x])
    beta = np.zeros(design.shape[1])
    y = np.asarray(y, dtype=float)
    ybar = y.mean()
    if 0.0 < ybar < 1.0:
        beta[0] = math.log(ybar / (1.0 - ybar))

    def nll(b):
        z = design @ b
        return float(np.sum(np.logaddexp(0.0, z) - y * z))

    current = nll(beta)
    separated = False
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        p = _sigmoid(design @ beta)
        w = p * (1.0 - p)
        grad = design.T @ (y - p)
        hess = design.T @ (design * w[:, None])
        hess[np.diag_indices_from(hess)] += 1e-12 * (1.0 + np.trace(hess))
        step, *_ = np.linalg.lstsq(hess, grad, rcond=None)
        t = 1.0
        while True:
            trial = beta + t * step
            value = nll(trial)
            if value <= current + 1e-12 * abs(current) or t < 1e-8:
                break
            t *= 0.5
        change = float(np.max(np.abs(trial - beta)))
        beta, current = trial, value
        norm = float(np.linalg.norm(beta))
        if norm > MAX_COEF_NORM:
            beta *= MAX_COEF_NORM / norm
            separated = True
            break
        if current < 1e-9 * n:
            separated = True
            break
        if change < tol:
            converged = True
            break
    return beta, converged, it, separated


def refit_logistic(dataset: Dataset, selected, task: int, max_iter: int = 100,
                   tol: float = 1e-8) -> LogisticFit:
    """Logistic regression of task ``task`` on the features in ``selected``.

    ``selected`` is either a list of feature indices for this task or a
    per-task sequence of such lists.
    """
    feats = selected
    if len(selected) and not np.isscalar(selected[0]):
        feats = selected[task]
    feats = [int(j) for j in feats]
    y = dataset.y[:, task]
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("logistic refit needs 0/1 responses")
    coef, converged, n_iter, separated = fit_logistic(dataset.x[:, feats], y, max_iter, tol)
    if separated:
        warnings.warn(f"separation detected for task {task}; coefficients clamped",
                      SeparationWarning, stacklevel=2)
    return LogisticFit(coef, feats, converged, n_iter, separated)


class SeparationWarning(RuntimeWarning):
    """The logistic MLE does not exist (data separable on the selected features)."""


SeparationDetected = SeparationWarning
