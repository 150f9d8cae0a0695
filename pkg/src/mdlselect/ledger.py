"""Recompute a model's description length from the data, independent of its ledger."""

from __future__ import annotations

import math

from .codes import MicCostParams, mic_model_cost
from .errors import DomainError
from .fit import Dataset, FitState
from .model import SelectionModel
from .tpc import TpcCoder
from .transfer import TransferCoder

_MIC = {"partial-mic": "partial", "full-mic": "full"}
_TPC = ("tpc", "tpc-fb", "tpc-stream")


def model_bits(model: SelectionModel, dataset: Dataset, prior=None, setting: int = 1) -> float:
    """Model part of the TDL re-derived from the scheme's code."""
    scheme = model.scheme
    lt = model.l_theta
    if scheme in _MIC:
        params = MicCostParams(dataset.m, dataset.h, lt)
        return sum(mic_model_cost(_MIC[scheme], len(s.tasks), params) for s in model.steps)
    if scheme == "ric":
        return sum(len(s.tasks) * (math.log2(dataset.m) + lt) for s in model.steps)
    if scheme in _TPC or scheme == "transfer-tpc":
        total = 0.0
        for t in range(model.h):
            single = dataset.task(t)
            if scheme == "transfer-tpc":
                if prior is None:
                    raise DomainError("recomputing a transfer-tpc model needs its prior")
                coder = TransferCoder(single, prior, setting, lt)
            else:
                coder = TpcCoder(single, lt)
            total += sum(coder.replay(model.task_features(t)))
        return total
    raise DomainError(f"unknown scheme {scheme!r}")


def recompute_tdl(model: SelectionModel, dataset: Dataset, prior=None, setting: int = 1) -> float:
    """Residual bits of a from-scratch fit on the model's support plus its model bits."""
    fit = FitState.from_support(dataset.x, dataset.y, model.per_task())
    return fit.bits() + model_bits(model, dataset, prior, setting)
