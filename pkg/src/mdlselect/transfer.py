"""
Transfer of selection priors from previously fit models.

Every (model, task) pair that was fit before is one binary vote per feature
and per class: selected or not. With ``s`` of ``t`` votes for a feature and
a Beta(c, d) prior, the posterior predictive probability of selecting it is
``(s + c) / (t + c + d)``, and its index costs ``-log2`` of that. Classes
work the same way with counts ``(k, l)`` and Beta(a, b).

Defaults ``a = 1, b = K - 1, c = 1, d = m_k - 1`` make an empty prior
reproduce the plain three-part code bit for bit.

Prior file grammar (UTF-8 text, one record per line, single spaces)::

    transfer-prior v1
    tasks <t>
    hyper <a> <b> <c> <d>        # each a float or "default"
    class <class_name> <k> <l>
    feature <class_name>/<feature_name> <s> <u>
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .errors import DomainError, EmptyTrainingSet, ParseError, VersionMismatch
from .fit import Dataset
from .model import SelectionModel
from .tpc import TpcConfig, TpcState, _Search, _single

PRIOR_HEADER = "transfer-prior v1"


@dataclass
class TransferPrior:
    """Selection counts from ``t`` earlier tasks plus Beta hyperparameters.

    ``None`` hyperparameters resolve against the test dataset: ``b = K - 1``
    and ``d = m_k - 1`` for each feature's own class.
    """

    t: int = 0
    class_counts: dict = field(default_factory=dict)
    feature_counts: dict = field(default_factory=dict)
    a: float = 1.0
    b: Optional[float] = None
    c: float = 1.0
    d: Optional[float] = None

    def __post_init__(self):
        for name, (k, l) in self.class_counts.items():
            if k < 0 or l < 0:
                raise DomainError(f"negative count for class {name}")
        for name, (s, u) in self.feature_counts.items():
            if s < 0 or u < 0:
                raise DomainError(f"negative count for feature {name}")
        for v in (self.a, self.b, self.c, self.d):
            if v is not None and v < 0:
                raise DomainError("Beta hyperparameters must be non-negative")
        if self.a <= 0 or self.c <= 0:
            raise DomainError("a and c must be positive")

    @classmethod
    def uninformative(cls) -> "TransferPrior":
        return cls()

    def class_probability(self, name: str, K: int) -> float:
        k, l = self.class_counts.get(name, (0, 0))
        b = K - 1 if self.b is None else self.b
        return (k + self.a) / (k + l + self.a + b)

    def feature_probability(self, qualified: str, m_k: int) -> float:
        s, u = self.feature_counts.get(qualified, (0, 0))
        d = m_k - 1 if self.d is None else self.d
        return (s + self.c) / (s + u + self.c + d)


def _votes(model: SelectionModel, positive_only: bool):
    """Yield ``(selected feature set, selected class set)`` for each task of ``model``."""
    for t in range(model.h):
        feats = model.task_features(t)
        if positive_only:
            feats = [j for j in feats if model.coef[j, t] > 0]
        yield feats


def _qualified(model: SelectionModel) -> list:
    if model.class_map is None:
        return list(model.feature_names)
    return [f"{model.class_names[c]}/{f}" for f, c in zip(model.feature_names, model.class_map)]


def build_prior(trained_models: Iterable[SelectionModel], universe: Optional[Dataset] = None,
                positive_only: bool = False) -> TransferPrior:
    """Count how often each feature and class was selected across earlier tasks.

    Every task of every model votes once. A feature or class is counted
    unselected only by models whose universe contains it. With ``universe``
    given, names absent from it are dropped.
    """
    class_counts, feature_counts = {}, {}
    t = 0
    for model in trained_models:
        names = _qualified(model)
        classes = list(model.class_names) if model.class_map is not None else []
        for feats in _votes(model, positive_only):
            t += 1
            chosen = {names[j] for j in feats}
            chosen_classes = {model.class_names[model.class_map[j]] for j in feats} \
                if model.class_map is not None else set()
            for name in names:
                s, u = feature_counts.get(name, (0, 0))
                feature_counts[name] = (s + 1, u) if name in chosen else (s, u + 1)
            for name in classes:
                k, l = class_counts.get(name, (0, 0))
                class_counts[name] = (k + 1, l) if name in chosen_classes else (k, l + 1)
    if t == 0:
        warnings.warn("no training models; using the uninformative prior", EmptyTrainingSet,
                      stacklevel=2)
    if universe is not None:
        keep_f = set(universe.qualified_names())
        keep_c = set(universe.class_names or [])
        feature_counts = {k: v for k, v in feature_counts.items() if k in keep_f}
        class_counts = {k: v for k, v in class_counts.items() if k in keep_c}
    return TransferPrior(t, class_counts, feature_counts)


class TransferCoder:
    """Model code with prior-informed class and feature index lengths.

    ``setting=1`` uses the class prior for classes new to the model;
    ``setting=2`` keeps ``log2 K`` for them and transfers only feature
    priors. Classes already in the model cost ``log2 Q`` either way.
    """

    def __init__(self, dataset: Dataset, prior: TransferPrior, setting: int = 1,
                 l_theta: float = 2.0):
        if setting not in (1, 2):
            raise DomainError(f"setting must be 1 or 2, got {setting}")
        self.m = dataset.m
        self.l_theta = l_theta
        self.setting = setting
        self.class_map = dataset.class_map
        self.class_sizes = None
        names = dataset.qualified_names()
        if self.class_map is None:
            # single implicit class holding every feature
            self.index_bits = np.array([_neglog2(prior, "feature", n, dataset.m) for n in names])
            return
        sizes = self.class_sizes = dataset.class_sizes
        K = len(sizes)
        if setting == 1:
            self.new_class_bits = np.array([_neglog2(prior, "class", c, K) for c in dataset.class_names])
        else:
            self.new_class_bits = np.full(K, math.log2(K))
        self.index_bits = np.array([_neglog2(prior, "feature", n, int(sizes[c]))
                                    for n, c in zip(names, self.class_map)])

    def costs(self, state: TpcState) -> np.ndarray:
        if self.class_map is None:
            return self.index_bits + self.l_theta
        in_model = state.class_in_model()
        repeat = math.log2(max(state.Q, 1))
        class_bits = np.where(in_model, repeat, self.new_class_bits)[self.class_map]
        return class_bits + self.index_bits + self.l_theta

    def bits(self, state: TpcState, feature: int) -> float:
        return float(self.costs(state)[feature])

    def replay(self, order, state: Optional[TpcState] = None) -> list:
        state = state.copy() if state is not None else TpcState(self.class_map, self.class_sizes)
        out = []
        for j in order:
            out.append(self.bits(state, j))
            state.add(j)
        return out


def _neglog2(prior: TransferPrior, kind: str, name: str, size: int) -> float:
    """``-log2`` of a posterior predictive, as ``log2(denominator) - log2(numerator)``.

    Written as a difference of logs so an empty prior gives exactly
    ``log2(size)``.
    """
    if kind == "class":
        k, l = prior.class_counts.get(name, (0, 0))
        hyper = size - 1 if prior.b is None else prior.b
        num, den = k + prior.a, k + l + prior.a + hyper
    else:
        s, u = prior.feature_counts.get(name, (0, 0))
        hyper = size - 1 if prior.d is None else prior.d
        num, den = s + prior.c, s + u + prior.c + hyper
    if not 0 < num <= den:
        raise DomainError(f"predictive probability {num}/{den} for {kind} {name} is outside (0, 1]")
    return math.log2(den) - math.log2(num)


def transfer_model_bits(state: TpcState, prior: TransferPrior, feature: int, setting: int = 1,
                        dataset: Optional[Dataset] = None, l_theta: float = 2.0) -> float:
    """Bits to code ``feature`` under the transfer code for ``dataset``."""
    if dataset is None:
        raise DomainError("transfer_model_bits needs the dataset for names and class sizes")
    return TransferCoder(dataset, prior, setting, l_theta).bits(state, feature)


def run_transfer_tpc(dataset: Dataset, prior: TransferPrior, setting: int = 1,
                     config: Optional[TpcConfig] = None, task: int = 0) -> SelectionModel:
    """Forward stepwise selection with the prior-informed code."""
    config = config or TpcConfig()
    data = _single(dataset, task)
    s = _Search(data, TransferCoder(data, prior, setting, config.l_theta))
    s.forward(config.max_features)
    return s.to_model("transfer-tpc", config.l_theta)


# -- serialization ------------------------------------------------------


def _fmt(v) -> str:
    return "default" if v is None else repr(float(v))


def dumps_prior(prior: TransferPrior) -> str:
    lines = [PRIOR_HEADER, f"tasks {prior.t}",
             f"hyper {_fmt(prior.a)} {_fmt(prior.b)} {_fmt(prior.c)} {_fmt(prior.d)}"]
    for name in sorted(prior.class_counts):
        k, l = prior.class_counts[name]
        lines.append(f"class {name} {k} {l}")
    for name in sorted(prior.feature_counts):
        s, u = prior.feature_counts[name]
        lines.append(f"feature {name} {s} {u}")
    return "\n".join(lines) + "\n"


def loads_prior(text: str, path=None) -> TransferPrior:
    lines = text.splitlines()
    if not lines or lines[0].strip() != PRIOR_HEADER:
        found = lines[0].strip() if lines else ""
        if found.startswith("transfer-prior"):
            raise VersionMismatch(f"unsupported prior version {found!r}")
        raise ParseError(f"expected header {PRIOR_HEADER!r}", path, 1)
    t, hyper = 0, [1.0, None, 1.0, None]
    classes, features = {}, {}
    for no, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if not parts:
            continue
        try:
            if parts[0] == "tasks" and len(parts) == 2:
                t = int(parts[1])
            elif parts[0] == "hyper" and len(parts) == 5:
                hyper = [None if p == "default" else float(p) for p in parts[1:]]
            elif parts[0] == "class" and len(parts) == 4:
                classes[parts[1]] = (int(parts[2]), int(parts[3]))
            elif parts[0] == "feature" and len(parts) == 4:
                features[parts[1]] = (int(parts[2]), int(parts[3]))
            else:
                raise ParseError(f"unrecognized record {parts[0]!r}", path, no)
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(str(exc), path, no) from None
    a, b, c, d = hyper
    return TransferPrior(t, classes, features, a if a is not None else 1.0, b,
                         c if c is not None else 1.0, d)


def save_prior(prior: TransferPrior, path) -> None:
    Path(path).write_text(dumps_prior(prior), encoding="utf-8")


def load_prior(path) -> TransferPrior:
    return loads_prior(Path(path).read_text(encoding="utf-8"), path)
