"""
Code lengths (in bits) used to charge for model structure.

All logarithms are base 2. The functions here are pure; ``c_h`` memoizes
its partial sums in a module-level table guarded by a lock.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

SCHEMES = ("partial", "full", "ric")


def log_star(k: int) -> float:
    """Length of the idealized universal code for the positive integer ``k``.

    Sums ``log2 k + log2 log2 k + ...`` keeping only strictly positive terms.

    >>> log_star(1), log_star(2)
    (0.0, 1.0)
    """
    if k < 1 or int(k) != k:
        raise DomainError(f"log_star needs an integer k >= 1, got {k!r}")
    total = 0.0
    term = math.log2(k)
    while term > 0.0:
        total += term
        term = math.log2(term)
    return total


_MASS = [0.0, 1.0]  # _MASS[h] = sum_{k=1..h} 2^-log*(k)
_MASS_LOCK = threading.Lock()


def _log_star_mass(h: int) -> float:
    if h >= len(_MASS):
        with _MASS_LOCK:
            for k in range(len(_MASS), h + 1):
                _MASS.append(_MASS[-1] + 2.0 ** (-log_star(k)))
    return _MASS[h]


def c_h(h: int) -> float:
    """Normalizer making ``2^-(log*(k) + c_h)`` a distribution over ``1..h``."""
    if h < 1 or int(h) != h:
        raise DomainError(f"c_h needs an integer h >= 1, got {h!r}")
    return math.log2(_log_star_mass(int(h)))


def log2_binomial(h: int, k: int) -> float:
    """``log2 C(h, k)`` accumulated as a sum of logs (no factorials)."""
    if k < 0 or k > h:
        raise DomainError(f"need 0 <= k <= h, got k={k}, h={h}")
    k = min(k, h - k)
    i = np.arange(1, k + 1, dtype=float)
    return float(np.sum(np.log2(h - k + i) - np.log2(i)))


def l_h_subset(k: int, h: int) -> float:
    """Bits to name which ``k`` of ``h`` tasks a feature enters."""
    if k < 1 or k > h:
        raise DomainError(f"task-subset size must satisfy 1 <= k <= h, got k={k}, h={h}")
    return log_star(k) + c_h(h) + log2_binomial(h, k)


@dataclass(frozen=True)
class MicCostParams:
    """Inputs to the per-feature multi-task model cost.

    Parameters
    ----------
    m : int
        Number of candidate features.
    h : int
        Number of tasks.
    l_theta : float
        Bits charged per nonzero coefficient.
    """

    m: int
    h: int
    l_theta: float = 2.0

    def __post_init__(self):
        if self.m < 1 or self.h < 1:
            raise DomainError(f"need m >= 1 and h >= 1, got m={self.m}, h={self.h}")
        if not self.l_theta > 0:
            raise DomainError(f"l_theta must be positive, got {self.l_theta}")


@dataclass(frozen=True)
class CodeCosts:
    """Description-length components of one accepted step, in bits.

    ``total`` is the model part only (``l_i + l_h + l_theta_total``); ``s_e``
    is the residual-code reduction bought by the step.
    """

    s_e: float
    l_i: float
    l_h: float
    l_theta_total: float

    @property
    def total(self) -> float:
        return self.l_i + self.l_h + self.l_theta_total


def mic_cost_parts(scheme: str, k: int, params: MicCostParams) -> tuple[float, float, float]:
    """Return ``(l_i, l_h, l_theta_total)`` for one feature entering ``k`` tasks."""
    m, h, lt = params.m, params.h, params.l_theta
    if scheme == "partial":
        if k < 1 or k > h:
            raise DomainError(f"partial scheme needs 1 <= k <= h, got k={k}")
        return math.log2(m), l_h_subset(k, h), k * lt
    if scheme == "full":
        if k < 0 or k > h:
            raise DomainError(f"full scheme needs 0 <= k <= h, got k={k}")
        return math.log2(m), 0.0, h * lt
    if scheme == "ric":
        if k < 0 or k > h:
            raise DomainError(f"ric scheme needs 0 <= k <= h, got k={k}")
        return k * math.log2(m), 0.0, k * lt
    raise DomainError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def mic_model_cost(scheme: str, k: int, params: MicCostParams) -> float:
    """Model bits for one feature entering ``k`` of ``h`` tasks under ``scheme``.

    ``partial`` codes the index, the subset and ``k`` coefficients; ``full``
    always pays for all ``h`` coefficients; ``ric`` codes each task alone.
    """
    return float(sum(mic_cost_parts(scheme, k, params)))


def partial_cost_curve(params: MicCostParams) -> np.ndarray:
    """Partial-scheme model cost for every ``k = 1..h`` (index ``k - 1``)."""
    return np.array([mic_model_cost("partial", k, params) for k in range(1, params.h + 1)])


def cost_table(m: int, h: int, l_theta: float = 2.0, ks=None) -> list[dict]:
    """Per-feature costs of the three schemes for a few subset sizes.

    Default ``ks`` is ``(1, h // 4, h)``. Each row carries the scheme costs
    and the name of the cheapest scheme.
    """
    params = MicCostParams(m, h, l_theta)
    if ks is None:
        ks = sorted({1, max(1, h // 4), h})
    rows = []
    for k in ks:
        row = {"k": int(k)}
        for scheme in SCHEMES:
            row[scheme] = mic_model_cost(scheme, int(k), params)
        row["best"] = min(SCHEMES, key=lambda s: row[s])
        rows.append(row)
    return rows


def information_criterion_penalty(name: str, n: int | None = None, m: int | None = None) -> float:
    """Per-feature penalty ``F`` in ``-2 log L + F q`` for AIC, BIC or RIC (natural log)."""
    name = name.lower()
    if name == "aic":
        return 2.0
    if name == "bic":
        if not n:
            raise DomainError("BIC needs n")
        return math.log(n)
    if name == "ric":
        if not m:
            raise DomainError("RIC needs m")
        return 2.0 * math.log(m)
    raise DomainError(f"unknown criterion {name!r}")
