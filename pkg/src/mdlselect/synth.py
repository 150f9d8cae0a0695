"""
Synthetic multi-task benchmarks and the evaluation harness.

Random streams: ``generate`` seeds a ``numpy.random.SeedSequence`` with
``(seed, scenario_code)`` and spawns four independent PCG64 child streams, in
this order: support layout, X, coefficient values, noise. Changing one draw
(for example the noise level) leaves the others bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import FoldTooSmall, ShapeMismatch, SpecError
from .fit import Dataset, fit_logistic

SCENARIOS = ("partial", "full", "independent")
_SCENARIO_CODE = {"partial": 1, "full": 2, "independent": 3}


@dataclass
class ScenarioSpec:
    """Recipe for one synthetic dataset.

    ``noise_sd`` defaults to ``sqrt(0.1)``: the noise variance is 0.1.
    """

    scenario: str = "partial"
    n: int = 100
    m: int = 2000
    h: int = 20
    m_star: int = 4
    noise_sd: float = math.sqrt(0.1)
    seed: int = 0
    binarize: bool = True

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise SpecError(f"unknown scenario {self.scenario!r}")
        if self.n < 2 or self.m < 1 or self.h < 1 or self.m_star < 0:
            raise SpecError("need n >= 2, m >= 1, h >= 1, m_star >= 0")
        if self.m_star > self.m:
            raise SpecError(f"m_star={self.m_star} exceeds m={self.m}")
        if self.scenario == "partial" and self.m - self.m_star < self.m_star and self.h > 1:
            raise SpecError("partial scenario needs at least m_star features beyond the shared ones")


@dataclass
class GroundTruth:
    beta: np.ndarray

    @property
    def support(self) -> np.ndarray:
        return self.beta != 0


def partial_share_counts(h: int, m_star: int) -> list:
    """Tasks sharing each of the first ``m_star`` features: h, then steps of h/m_star down."""
    return [int(round(h * (m_star - r) / m_star)) for r in range(m_star)]


def _layout(spec: ScenarioSpec, rng: np.random.Generator) -> np.ndarray:
    m, h, ms = spec.m, spec.h, spec.m_star
    support = np.zeros((m, h), dtype=bool)
    if spec.scenario == "full":
        support[:ms, :] = True
    elif spec.scenario == "independent":
        for t in range(h):
            support[rng.choice(m, size=ms, replace=False), t] = True
    else:
        for r, count in enumerate(partial_share_counts(h, ms)):
            support[r, :count] = True
        for t in range(h):
            missing = ms - int(support[:, t].sum())
            if missing:
                support[ms + rng.choice(m - ms, size=missing, replace=False), t] = True
    return support


def generate(spec: ScenarioSpec):
    """Draw ``(Dataset, GroundTruth)`` for ``spec``; deterministic in ``spec.seed``.

    Responses are ``X beta + noise``, then (if ``binarize``) set to 1 where at
    or above their column mean and 0 elsewhere.
    """
    spec.validate()
    ss = np.random.SeedSequence([int(spec.seed), _SCENARIO_CODE[spec.scenario]])
    r_layout, r_x, r_beta, r_noise = (np.random.Generator(np.random.PCG64(s)) for s in ss.spawn(4))
    support = _layout(spec, r_layout)
    x = r_x.standard_normal((spec.n, spec.m))
    beta = np.zeros((spec.m, spec.h))
    beta[support] = r_beta.standard_normal(int(support.sum()))
    y = x @ beta + spec.noise_sd * r_noise.standard_normal((spec.n, spec.h))
    if spec.binarize:
        y = (y >= y.mean(axis=0)).astype(float)
    data = Dataset(x, y, [f"x{j + 1}" for j in range(spec.m)], [f"y{t + 1}" for t in range(spec.h)])
    return data, GroundTruth(beta)


def precision_recall(selected, truth, level: str = "coefficient"):
    """Precision and recall of a selected support against the true one.

    ``level='feature'`` compares rows (any task). An empty selection has
    precision 1 and recall 0 (recall 1 if the truth is empty too).
    """
    sel = np.asarray(selected, dtype=bool)
    true = truth.support if isinstance(truth, GroundTruth) else np.asarray(truth, dtype=bool)
    if sel.shape != true.shape:
        raise ShapeMismatch(f"selected {sel.shape} vs truth {true.shape}")
    if level == "feature":
        sel, true = sel.any(axis=1), true.any(axis=1)
    elif level != "coefficient":
        raise ValueError(f"unknown level {level!r}")
    hits = int(np.sum(sel & true))
    n_sel, n_true = int(sel.sum()), int(true.sum())
    precision = hits / n_sel if n_sel else 1.0
    recall = hits / n_true if n_true else 1.0
    return precision, recall


def make_folds(y: np.ndarray, folds: int, seed: int = 0) -> np.ndarray:
    """Fold id per row. Single-task 0/1 responses are stratified; otherwise a seeded shuffle."""
    n = y.shape[0]
    if folds < 2 or folds > n:
        raise ValueError(f"need 2 <= folds <= n, got {folds}")
    rng = np.random.default_rng(seed)
    ids = np.empty(n, dtype=int)
    y = y.reshape(n, -1)
    if y.shape[1] == 1 and np.all((y == 0) | (y == 1)):
        start = 0
        for label in (0.0, 1.0):
            rows = rng.permutation(np.flatnonzero(y[:, 0] == label))
            ids[rows] = (start + np.arange(rows.size)) % folds
            start += rows.size
    else:
        ids[rng.permutation(n)] = np.arange(n) % folds
    return ids


@dataclass
class CVResult:
    """Held-out 0/1 error per task, pooled over folds."""

    errors: np.ndarray
    fold_sizes: list = field(default_factory=list)
    separated_fits: int = 0

    @property
    def mean(self) -> float:
        return float(np.mean(self.errors))

    @property
    def stderr(self) -> float:
        return standard_error(self.errors)


def standard_error(values) -> float:
    """Sample standard deviation over ``sqrt(count)``; 0 for a single value."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 2:
        return 0.0
    return float(np.std(v, ddof=1) / math.sqrt(v.size))


def cross_validate(dataset: Dataset, select: Callable, folds: int = 5, seed: int = 0) -> CVResult:
    """K-fold test error of ``select`` followed by a logistic refit per task.

    ``select(train_dataset)`` must return a ``SelectionModel``; it is only
    ever handed the training rows of a fold.
    """
    y = dataset.y
    ids = make_folds(y, folds, seed)
    wrong = np.zeros(dataset.h)
    separated = 0
    for f in range(folds):
        test = ids == f
        train = dataset.rows(np.flatnonzero(~test))
        for t in range(dataset.h):
            col = train.y[:, t]
            if col.min() == col.max():
                raise FoldTooSmall(f"training rows of fold {f} hold one class for task {t}")
        model = select(train)
        xt = dataset.x[test]
        for t in range(dataset.h):
            feats = model.task_features(t)
            coef, _, _, sep = fit_logistic(train.x[:, feats], train.y[:, t])
            separated += int(sep)
            pred = (coef[0] + xt[:, feats] @ coef[1:]) >= 0.0
            wrong[t] += np.sum(pred != (y[test, t] == 1))
    sizes = [int(np.sum(ids == f)) for f in range(folds)]
    return CVResult(wrong / dataset.n, sizes, separated)
