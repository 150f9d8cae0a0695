"""Selected models and their acceptance ledgers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass
class Step:
    """One accepted addition: a feature entering a set of tasks.

    ``dse`` is the residual bits saved and ``dsm`` the model bits charged,
    both measured at the moment of acceptance.
    """

    feature: int
    tasks: tuple
    dse: float
    dsm: float

    @property
    def delta(self) -> float:
        return self.dse - self.dsm


@dataclass
class SelectionModel:
    """Output of every search driver.

    Parameters
    ----------
    scheme : str
        ``partial-mic``, ``full-mic``, ``ric``, ``tpc``, ``tpc-fb``,
        ``tpc-stream`` or ``transfer-tpc``.
    feature_names, task_names : list of str
    n : int
        Rows the model was fit on.
    null_bits : float
        Residual code length of the intercept-only model.
    steps : list of Step
        Acceptance ledger in order.
    coef : ndarray, shape (m, h)
        Least-squares coefficients on the selected support.
    intercept : ndarray, shape (h,)
    total_tdl : float
        Total description length (bits) reached by the search.
    """

    scheme: str
    feature_names: list
    task_names: list
    n: int
    null_bits: float
    steps: list = field(default_factory=list)
    coef: Optional[np.ndarray] = None
    intercept: Optional[np.ndarray] = None
    total_tdl: Optional[float] = None
    class_map: Optional[np.ndarray] = None
    class_names: Optional[list] = None
    l_theta: float = 2.0

    def __post_init__(self):
        m, h = len(self.feature_names), len(self.task_names)
        if self.coef is None:
            self.coef = np.zeros((m, h))
        if self.intercept is None:
            self.intercept = np.zeros(h)
        if self.total_tdl is None:
            self.total_tdl = self.replay_tdl()

    @property
    def m(self) -> int:
        return len(self.feature_names)

    @property
    def h(self) -> int:
        return len(self.task_names)

    def replay_tdl(self) -> float:
        """Total description length implied by the ledger alone."""
        return self.null_bits - sum(s.dse for s in self.steps) + sum(s.dsm for s in self.steps)

    def support(self) -> np.ndarray:
        """Boolean ``(m, h)`` matrix of selected coefficients."""
        sel = np.zeros((self.m, self.h), dtype=bool)
        for s in self.steps:
            sel[s.feature, list(s.tasks)] = True
        return sel

    def task_features(self, task: int) -> list:
        """Features of one task in order of entry."""
        return [s.feature for s in self.steps if task in s.tasks]

    def per_task(self) -> list:
        return [self.task_features(t) for t in range(self.h)]

    @property
    def inclusions(self) -> list:
        """``(feature, tasks, coefficients)`` merged per feature, in order of first entry."""
        order, tasks = [], {}
        for s in self.steps:
            if s.feature not in tasks:
                order.append(s.feature)
                tasks[s.feature] = []
            tasks[s.feature].extend(s.tasks)
        out = []
        for j in order:
            ts = tuple(sorted(tasks[j]))
            out.append((j, ts, tuple(float(self.coef[j, t]) for t in ts)))
        return out

    @property
    def selected_features(self) -> list:
        return [j for j, _, _ in self.inclusions]

    @property
    def n_features(self) -> int:
        return len(self.inclusions)

    @property
    def n_coefficients(self) -> int:
        return int(self.support().sum())

    @property
    def model_bits(self) -> float:
        return float(sum(s.dsm for s in self.steps))
