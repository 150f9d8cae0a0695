"""
Three-part coding for single-response selection with feature classes.

A feature costs ``l_C + l_I + l_theta`` bits: ``log2 K`` to name its class
the first time the class enters (``log2 Q`` afterwards, ``Q`` being the
number of classes already in the model), ``log2 m_k`` to pick it within its
class, and ``l_theta`` for its coefficient.

The search drivers take a *coder*: any object with ``costs(state)``
returning per-feature model bits as an ``(m,)`` array. ``TpcCoder`` is the
plain class code; ``transfer.TransferCoder`` swaps in prior-informed
lengths.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, NoClassMap, SingularDesign
from .fit import Dataset, FitState
from .model import SelectionModel, Step


@dataclass
class TpcConfig:
    """Settings shared by the stepwise, forward-backward and streamwise drivers."""

    l_theta: float = 2.0
    max_features: Optional[int] = None
    extra_steps: int = 0


@dataclass
class TpcState:
    """Which features and classes the model holds, in order of entry."""

    class_map: Optional[np.ndarray]
    class_sizes: Optional[np.ndarray]
    selected_features: list = field(default_factory=list)
    selected_classes: list = field(default_factory=list)

    @classmethod
    def for_dataset(cls, dataset: Dataset) -> "TpcState":
        if not dataset.has_classes:
            return cls(None, None)
        return cls(dataset.class_map, dataset.class_sizes)

    @property
    def k_total(self) -> int:
        return 0 if self.class_sizes is None else len(self.class_sizes)

    @property
    def q(self) -> int:
        return len(self.selected_features)

    @property
    def Q(self) -> int:
        return len(self.selected_classes)

    def class_in_model(self) -> np.ndarray:
        """Boolean per class."""
        mask = np.zeros(self.k_total, dtype=bool)
        mask[self.selected_classes] = True
        return mask

    def add(self, feature: int) -> bool:
        """Record ``feature``; returns True if its class is new to the model."""
        self.selected_features.append(int(feature))
        if self.class_map is None:
            return False
        c = int(self.class_map[feature])
        if c in self.selected_classes:
            return False
        self.selected_classes.append(c)
        return True

    def copy(self) -> "TpcState":
        return TpcState(self.class_map, self.class_sizes,
                        list(self.selected_features), list(self.selected_classes))


class TpcCoder:
    """Class-aware model code; falls back to ``log2 m + l_theta`` without classes."""

    def __init__(self, dataset: Dataset, l_theta: float = 2.0):
        self.m = dataset.m
        self.l_theta = l_theta
        self.class_map = dataset.class_map
        self.class_sizes = None
        if self.class_map is not None:
            sizes = self.class_sizes = dataset.class_sizes
            self.new_class_bits = np.full(len(sizes), math.log2(len(sizes)))
            self.index_bits = np.array([math.log2(int(s)) for s in sizes])[self.class_map]

    def _class_bits(self, state: TpcState) -> np.ndarray:
        in_model = state.class_in_model()
        repeat = math.log2(max(state.Q, 1))
        return np.where(in_model, repeat, self.new_class_bits)[self.class_map]

    def costs(self, state: TpcState) -> np.ndarray:
        if self.class_map is None:
            return np.full(self.m, math.log2(max(self.m, 1)) + self.l_theta)
        return self._class_bits(state) + self.index_bits + self.l_theta

    def bits(self, state: TpcState, feature: int) -> float:
        return float(self.costs(state)[feature])

    def replay(self, order: Sequence[int], state: Optional[TpcState] = None) -> list:
        """Charges for adding ``order`` one at a time from ``state`` (empty by default)."""
        state = state.copy() if state is not None else TpcState(self.class_map, self.class_sizes)
        out = []
        for j in order:
            out.append(self.bits(state, j))
            state.add(j)
        return out


def tpc_model_bits(state: TpcState, feature: int, l_theta: float = 2.0) -> float:
    """Bits to code ``feature`` given the classes already in the model.

    Raises
    ------
    NoClassMap
        If ``state`` carries no feature classes.
    """
    if state.class_map is None:
        raise NoClassMap("TPC coding needs a feature-class map")
    c = int(state.class_map[feature])
    if c in state.selected_classes:
        l_c = math.log2(max(state.Q, 1))
    else:
        l_c = math.log2(state.k_total)
    return l_c + math.log2(state.class_sizes[c]) + l_theta


def _single(dataset: Dataset, task: int) -> Dataset:
    return dataset if dataset.h == 1 and task == 0 else dataset.task(task)


def _coder_for(dataset: Dataset, config: TpcConfig, coder):
    if coder is not None:
        return coder
    if not dataset.has_classes:
        warnings.warn("no feature-class map; falling back to RIC costing", stacklevel=3)
    return TpcCoder(dataset, config.l_theta)


class _Search:
    """Single-task fit plus class bookkeeping, with the ledger it produced."""

    def __init__(self, dataset: Dataset, coder):
        self.dataset = dataset
        self.coder = coder
        self.fit = FitState(dataset.x, dataset.y)
        self.tstate = TpcState.for_dataset(dataset)
        self.null_bits = self.fit.bits()
        self.steps = []
        self._deltas = None

    def deltas(self) -> np.ndarray:
        """Net saving ``dSE - dSM`` of every feature (``-inf`` if inadmissible)."""
        if self._deltas is None:
            g, _ = self.fit.gains()
            self._deltas = g[:, 0] - self.coder.costs(self.tstate)
        return self._deltas

    def accept(self, j: int):
        dsm = float(self.coder.costs(self.tstate)[j])
        before = self.fit.bits()
        self.fit.add(j, 0)
        self.tstate.add(j)
        self.steps.append(Step(int(j), (0,), before - self.fit.bits(), dsm))
        self._deltas = None

    @property
    def tdl(self) -> float:
        return self.fit.bits() + sum(s.dsm for s in self.steps)

    def forward(self, max_features=None, forced: int = 0):
        """Add the best feature while it saves bits; then ``forced`` more regardless."""
        while max_features is None or len(self.steps) < max_features:
            d = self.deltas()
            if d.size == 0:
                break
            j = int(np.argmax(d))
            if not d[j] > 0.0:
                break
            self.accept(j)
        for _ in range(forced):
            d = self.deltas()
            if d.size == 0:
                break
            j = int(np.argmax(d))
            if not np.isfinite(d[j]):
                break
            self.accept(j)

    def to_model(self, scheme: str, l_theta: float) -> SelectionModel:
        coef, intercept = self.fit.coefficients()
        ds = self.dataset
        return SelectionModel(scheme, ds.feature_names, ds.task_names, ds.n, self.null_bits,
                              list(self.steps), coef, intercept, class_map=ds.class_map,
                              class_names=ds.class_names, l_theta=l_theta)


def subset_tdl(dataset: Dataset, order: Sequence[int], coder) -> float:
    """TDL of a single-task model holding ``order``, refit from scratch.

    Model bits are charged by replaying the additions in the given order.
    """
    try:
        fit = FitState.from_support(dataset.x, dataset.y, [list(order)])
    except SingularDesign:
        return np.inf
    return fit.bits() + float(sum(coder.replay(order)))


def _replayed(dataset: Dataset, order, coder) -> _Search:
    s = _Search(dataset, coder)
    for j in order:
        s.accept(j)
    return s


def run_tpc(dataset: Dataset, config: Optional[TpcConfig] = None, task: int = 0,
            coder=None) -> SelectionModel:
    """Forward stepwise selection under the three-part code.

    Keeps adding the feature with the largest net saving while that saving
    is positive.
    """
    config = config or TpcConfig()
    data = _single(dataset, task)
    s = _Search(data, _coder_for(data, config, coder))
    s.forward(config.max_features)
    return s.to_model("tpc", config.l_theta)


def run_tpc_forward_backward(dataset: Dataset, config: Optional[TpcConfig] = None,
                             task: int = 0, coder=None) -> SelectionModel:
    """Forward search, ``extra_steps`` forced additions, then greedy removal.

    Removal drops, one at a time, the feature whose absence lowers the TDL
    most, re-costing the survivors from scratch in their original order. The
    result never has a larger TDL than the plain forward stop point.
    """
    config = config or TpcConfig()
    data = _single(dataset, task)
    coder = _coder_for(data, config, coder)
    s = _Search(data, coder)
    s.forward(config.max_features)
    stop_order, stop_tdl = [st.feature for st in s.steps], s.tdl
    s.forward(max_features=len(s.steps), forced=config.extra_steps)
    order = [st.feature for st in s.steps]
    current = subset_tdl(data, order, coder)
    while order:
        trials = [subset_tdl(data, order[:i] + order[i + 1:], coder) for i in range(len(order))]
        i = int(np.argmin(trials))
        if not trials[i] < current:
            break
        current = trials[i]
        del order[i]
    if current > stop_tdl:
        order = stop_order
    return _replayed(data, order, coder).to_model("tpc-fb", config.l_theta)


def run_tpc_streamwise(dataset: Dataset, config: Optional[TpcConfig] = None,
                       feature_order=None, task: int = 0, coder=None) -> SelectionModel:
    """One pass over ``feature_order``; each feature is added iff it saves bits then."""
    config = config or TpcConfig()
    data = _single(dataset, task)
    s = _Search(data, _coder_for(data, config, coder))
    order = range(data.m) if feature_order is None else feature_order
    for j in order:
        if config.max_features is not None and len(s.steps) >= config.max_features:
            break
        if s.deltas()[int(j)] > 0.0:
            s.accept(int(j))
    return s.to_model("tpc-stream", config.l_theta)


def tpc_total_cost(q: int, Q: int, K: int, index_sizes, l_theta: float = 2.0) -> float:
    """Model bits for ``q`` features over ``Q`` classes.

    ``index_sizes`` holds ``m_k`` of each selected feature's class.
    """
    sizes = np.asarray(index_sizes, dtype=float)
    return Q * math.log2(K) + (q - Q) * math.log2(Q) + float(np.sum(np.log2(sizes))) + l_theta * q


def scs_total_cost(q: int, m: int, l_theta: float = 2.0) -> float:
    """Model bits for ``q`` features under index-plus-coefficient coding."""
    return q * math.log2(m) + l_theta * q


def tpc_savings(q: int, Q: int, K: int, m: int, class_sizes=None,
                selected_class_of_each=None) -> float:
    """Bits saved by the class code relative to plain index coding.

    With ``class_sizes`` omitted all classes have ``m / K`` features.
    """
    if not (1 <= Q <= q):
        raise DomainError(f"need 1 <= Q <= q, got Q={Q}, q={q}")
    if Q > K:
        raise DomainError(f"Q={Q} exceeds K={K}")
    if class_sizes is None:
        index_sizes = np.full(q, m / K)
    else:
        sizes = np.asarray(class_sizes, dtype=float)
        if np.any(sizes <= 0):
            raise DomainError("class sizes must be positive")
        if selected_class_of_each is None:
            raise DomainError("selected_class_of_each is needed with explicit class sizes")
        index_sizes = sizes[np.asarray(selected_class_of_each, dtype=int)]
        if index_sizes.shape != (q,):
            raise DomainError("need one class per selected feature")
    return scs_total_cost(q, m) - tpc_total_cost(q, Q, K, index_sizes)


def tpc_savings_closed_form(q: int, Q: int, K: int, m: int, index_sizes=None) -> float:
    """``(q - Q) log2(K / Q)`` plus, for unequal classes, ``sum log2(m_avg / m_k)``."""
    base = (q - Q) * math.log2(K / Q)
    if index_sizes is None:
        return base
    m_avg = m / K
    return base + float(np.sum(np.log2(m_avg / np.asarray(index_sizes, dtype=float))))


def run_per_task(dataset: Dataset, runner, **kwargs) -> SelectionModel:
    """Run a single-task driver on every task and merge the ledgers."""
    models = [runner(dataset, task=t, **kwargs) for t in range(dataset.h)]
    steps = [Step(s.feature, (t,), s.dse, s.dsm) for t, mod in enumerate(models) for s in mod.steps]
    coef = np.column_stack([mod.coef[:, 0] for mod in models])
    intercept = np.array([mod.intercept[0] for mod in models])
    first = models[0]
    return SelectionModel(first.scheme, dataset.feature_names, dataset.task_names, dataset.n,
                          float(sum(mod.null_bits for mod in models)), steps, coef, intercept,
                          class_map=dataset.class_map, class_names=dataset.class_names,
                          l_theta=first.l_theta)
