"""
Greedy stepwise search for multi-task feature selection.

Each iteration scores every remaining feature by the residual bits it would
save if added to all tasks, keeps the ``top_t`` best, and for each of those
grows a task subset greedily (largest per-task gain first) all the way to
``h`` tasks, keeping the subset size with the largest net saving. The best
(feature, subset) pair enters the model if it saves bits.

With a diagonal noise covariance the per-task gains are independent, so the
greedy growth is a sort of one row of the gain matrix.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .codes import MicCostParams, mic_model_cost
from .errors import DomainError
from .fit import Dataset, FitState
from .model import SelectionModel, Step

SCHEME_NAMES = {"partial": "partial-mic", "full": "full-mic", "ric": "ric"}


@dataclass
class MicSearchConfig:
    """Search settings.

    Parameters
    ----------
    scheme : {'partial', 'full', 'ric'}
    top_t : int
        Candidates kept after the all-tasks prefilter.
    max_features : int, optional
        Stop after this many accepted steps.
    l_theta : float
        Bits per coefficient.
    prune : bool
        Skip subset sizes whose lower bound cannot beat the incumbent.
    threads : int
        Worker threads for scoring the prefiltered candidates.
    """

    scheme: str = "partial"
    top_t: int = 75
    max_features: Optional[int] = None
    l_theta: float = 2.0
    prune: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEME_NAMES:
            raise DomainError(f"unknown scheme {self.scheme!r}")
        if self.top_t < 1:
            raise DomainError("top_t must be >= 1")


def cost_curve(scheme: str, params: MicCostParams) -> np.ndarray:
    """Model bits for entering ``k`` tasks, indexed by ``k = 0..h``.

    Entry 0 is unused (``inf``); so are all entries except ``h`` for ``full``.
    """
    curve = np.full(params.h + 1, np.inf)
    if scheme == "full":
        curve[params.h] = mic_model_cost("full", params.h, params)
    else:
        for k in range(1, params.h + 1):
            curve[k] = mic_model_cost(scheme, k, params)
    return curve


def best_subset_for_feature(state: FitState, feature: int, scheme: str = "partial",
                            params: Optional[MicCostParams] = None, gains=None,
                            incumbent: float = -np.inf, curve=None):
    """Best task subset for one feature and its net saving ``dSE - dSM``.

    Parameters
    ----------
    gains : ndarray, shape (h,), optional
        Precomputed per-task residual gains (``-inf`` where inadmissible).
    incumbent : float
        Net saving to beat. Subset sizes whose optimistic bound (all-task
        residual gain minus the size's model cost) falls strictly below it
        are not evaluated. ``-inf`` disables pruning.

    Returns
    -------
    tasks : tuple of int
        Empty if nothing could be evaluated.
    delta : float
    """
    if params is None:
        params = MicCostParams(state.m, state.h)
    if curve is None:
        curve = cost_curve(scheme, params)
    g = state.gains([feature])[0][0] if gains is None else np.asarray(gains, dtype=float)
    ok = np.isfinite(g)
    h = g.shape[0]

    if scheme == "full":
        if not ok.all():
            return (), -np.inf
        return tuple(range(h)), float(g.sum() - curve[h])

    if scheme == "ric":
        per_task = g - curve[1]
        chosen = tuple(int(t) for t in np.flatnonzero(ok & (per_task > 0)))
        if not chosen:
            t = int(np.argmax(np.where(ok, per_task, -np.inf)))
            return ((t,), float(per_task[t])) if ok[t] else ((), -np.inf)
        return chosen, float(per_task[list(chosen)].sum())

    n_ok = int(ok.sum())
    if n_ok == 0:
        return (), -np.inf
    total = float(g[ok].sum())
    ks = np.arange(1, n_ok + 1)
    upper = total - curve[ks]
    live = upper >= incumbent
    if not live.any():
        return (), -np.inf
    # stable sort: ties go to the lower task index
    order = np.argsort(-np.where(ok, g, -np.inf), kind="stable")[:n_ok]
    cum = np.cumsum(g[order])
    delta = np.where(live, cum - curve[ks], -np.inf)
    best = int(np.argmax(delta))
    return tuple(sorted(int(t) for t in order[: best + 1])), float(delta[best])


def lower_bound_prune(state: FitState, feature: int, k: int, scheme: str = "partial",
                      params: Optional[MicCostParams] = None, model_bits: float = 0.0,
                      gains=None) -> float:
    """Lower bound on the TDL after adding ``feature`` to some ``k`` tasks.

    Model bits already spent, plus the residual bits if the feature entered
    every admissible task, plus the model cost of a ``k``-task entry.
    """
    if params is None:
        params = MicCostParams(state.m, state.h)
    g = state.gains([feature])[0][0] if gains is None else np.asarray(gains)
    se_all = state.bits() - float(g[np.isfinite(g)].sum())
    return model_bits + se_all + mic_model_cost(scheme, k, params)


def _prefilter(g: np.ndarray, excluded: np.ndarray, top_t: int) -> np.ndarray:
    score = np.where(np.isfinite(g), g, 0.0).sum(axis=1)
    usable = np.isfinite(g).any(axis=1) & ~excluded
    score = np.where(usable, score, -np.inf)
    order = np.argsort(-score, kind="stable")
    order = order[np.isfinite(score[order])]
    return order[:top_t]


def _search(x, y, scheme, config: MicSearchConfig, m_total: int):
    """Shared loop for the partial and full schemes (and single-task ric)."""
    state = FitState(x, y)
    params = MicCostParams(m_total, state.h, config.l_theta)
    curve = cost_curve(scheme, params)
    null_bits = state.bits()
    included = np.zeros(state.m, dtype=bool)
    steps = []
    pool = ThreadPoolExecutor(config.threads) if config.threads > 1 else None
    try:
        while config.max_features is None or len(steps) < config.max_features:
            g, _ = state.gains()
            cands = _prefilter(g, included, config.top_t)
            if pool is not None:
                results = list(pool.map(
                    lambda j: best_subset_for_feature(state, j, scheme, params, g[j], 0.0, curve),
                    cands))
            else:
                results, incumbent = [], 0.0 if config.prune else -np.inf
                for j in cands:
                    res = best_subset_for_feature(state, j, scheme, params, g[j], incumbent, curve)
                    results.append(res)
                    if config.prune and res[1] > incumbent:
                        incumbent = res[1]
            best_j, best_tasks, best_d = None, (), 0.0
            for j, (tasks, d) in zip(cands, results):
                if not tasks:
                    continue
                if d > best_d or (d == best_d and best_j is not None and
                                  (j, len(tasks)) < (best_j, len(best_tasks))):
                    best_j, best_tasks, best_d = int(j), tasks, d
            if best_j is None or not best_d > 0.0:
                break
            before = state.bits()
            for t in best_tasks:
                state.add(best_j, t)
            dse = before - state.bits()
            steps.append(Step(best_j, best_tasks, dse, float(curve[len(best_tasks)])))
            included[best_j] = True
    finally:
        if pool is not None:
            pool.shutdown()
    return state, null_bits, steps


def run_mic(dataset: Dataset, config: Optional[MicSearchConfig] = None) -> SelectionModel:
    """Select features for all tasks of ``dataset`` under one multi-task code.

    An empty model is a valid result: no feature paid for its own bits.
    """
    config = config or MicSearchConfig()
    m, h = dataset.m, dataset.h
    if config.scheme == "ric":
        steps, null_bits = [], 0.0
        coef, intercept = np.zeros((m, h)), np.zeros(h)
        for t in range(h):
            state, nb, sub = _search(dataset.x, dataset.y[:, [t]], "partial", config, m)
            null_bits += nb
            steps.extend(Step(s.feature, (t,), s.dse, s.dsm) for s in sub)
            b, c = state.coefficients()
            coef[:, t], intercept[t] = b[:, 0], c[0]
    else:
        state, null_bits, steps = _search(dataset.x, dataset.y, config.scheme, config, m)
        coef, intercept = state.coefficients()
    return SelectionModel(SCHEME_NAMES[config.scheme], dataset.feature_names, dataset.task_names,
                          dataset.n, null_bits, steps, coef, intercept,
                          class_map=dataset.class_map, class_names=dataset.class_names,
                          l_theta=config.l_theta)


def mic_step_cost(scheme: str, k: int, m: int, h: int, l_theta: float = 2.0) -> float:
    """Model bits charged for one ledger step of a multi-task model."""
    if scheme == "ric-task":
        return math.log2(m) + l_theta
    return mic_model_cost(scheme, k, MicCostParams(m, h, l_theta))
