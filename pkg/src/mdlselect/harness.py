"""Scheme dispatch and the replicated synthetic benchmark."""

from __future__ import annotations

import csv
import io
import time
import warnings
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .fit import Dataset
from .mic import MicSearchConfig, run_mic
from .model import SelectionModel
from .synth import ScenarioSpec, cross_validate, generate, precision_recall, standard_error
from .tpc import (TpcConfig, run_per_task, run_tpc, run_tpc_forward_backward,
                  run_tpc_streamwise)
from .transfer import TransferPrior, run_transfer_tpc

SCHEMES = ("partial-mic", "full-mic", "ric", "tpc", "tpc-fb", "tpc-stream", "transfer-tpc")
_MIC = {"partial-mic": "partial", "full-mic": "full", "ric": "ric"}


def make_selector(scheme: str, top_t: int = 75, l_theta: float = 2.0,
                  prior: Optional[TransferPrior] = None, setting: int = 1,
                  extra_steps: int = 0, threads: int = 1,
                  feature_order=None) -> Callable[[Dataset], SelectionModel]:
    """Return ``dataset -> SelectionModel`` for a scheme name.

    Single-task schemes (the ``tpc`` family) run on every task separately.
    """
    if scheme in _MIC:
        config = MicSearchConfig(_MIC[scheme], top_t=top_t, l_theta=l_theta, threads=threads)
        return lambda data: run_mic(data, config)
    tconf = TpcConfig(l_theta=l_theta, extra_steps=extra_steps)
    if scheme == "tpc":
        return lambda data: run_per_task(data, run_tpc, config=tconf)
    if scheme == "tpc-fb":
        return lambda data: run_per_task(data, run_tpc_forward_backward, config=tconf)
    if scheme == "tpc-stream":
        return lambda data: run_per_task(data, run_tpc_streamwise, config=tconf,
                                         feature_order=feature_order)
    if scheme == "transfer-tpc":
        p = prior if prior is not None else TransferPrior.uninformative()
        return lambda data: run_per_task(data, run_transfer_tpc, prior=p, setting=setting,
                                         config=tconf)
    raise DomainError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


@dataclass
class RunRecord:
    """One method x scenario x replicate result."""

    scenario: str
    scheme: str
    replicate: int
    seed: int
    test_error: float
    n_coefficients: int
    n_features: int
    coef_precision: float
    coef_recall: float
    feat_precision: float
    feat_recall: float
    seconds: float
    task_errors: tuple = ()


def run_suite(scenarios, schemes, replicates: int, seed: int, folds: int = 5,
              spec_overrides: Optional[dict] = None, top_t: int = 75,
              l_theta: float = 2.0, threads: int = 1, progress=None) -> list:
    """Generate each replicate once and evaluate every scheme on it.

    Replicate ``r`` uses data seed ``seed + r``; the CV split reuses it.
    Precision and recall are measured on a selection from all ``n`` rows.
    """
    records = []
    for scenario in scenarios:
        for r in range(replicates):
            s = seed + r
            spec = ScenarioSpec(scenario=scenario, seed=s, **(spec_overrides or {}))
            data, truth = generate(spec)
            for scheme in schemes:
                start = time.perf_counter()
                select = make_selector(scheme, top_t=top_t, l_theta=l_theta, threads=threads)
                cv = cross_validate(data, select, folds, seed=s)
                model = select(data)
                sel = model.support()
                cp, cr = precision_recall(sel, truth, "coefficient")
                fp, fr = precision_recall(sel, truth, "feature")
                rec = RunRecord(scenario, scheme, r, s, cv.mean, model.n_coefficients,
                                model.n_features, cp, cr, fp, fr,
                                time.perf_counter() - start, tuple(cv.errors.tolist()))
                records.append(rec)
                if progress is not None:
                    progress(rec)
    return records


def summarize(records) -> list:
    """Mean and standard error per (scenario, scheme).

    Test-error spread is taken over every task of every replicate; the other
    columns over replicates.
    """
    groups = {}
    for rec in records:
        groups.setdefault((rec.scenario, rec.scheme), []).append(rec)
    rows = []
    for (scenario, scheme), recs in groups.items():
        task_err = np.concatenate([np.asarray(r.task_errors) for r in recs])
        if task_err.size < 2:
            warnings.warn(f"{scenario}/{scheme}: one error value, standard error reported as 0 "
                          "(no degrees of freedom)", stacklevel=2)
        row = {"scenario": scenario, "scheme": scheme, "replicates": len(recs),
               "test_error": float(task_err.mean()), "test_error_se": standard_error(task_err)}
        for key in ("n_coefficients", "n_features", "coef_precision", "coef_recall",
                    "feat_precision", "feat_recall"):
            vals = [getattr(r, key) for r in recs]
            row[key] = float(np.mean(vals))
            row[key + "_se"] = standard_error(vals)
        rows.append(row)
    return rows


def records_to_tsv(records) -> str:
    buf = io.StringIO()
    fields = [k for k in asdict(records[0]) if k != "task_errors"] if records else []
    writer = csv.DictWriter(buf, fields, delimiter="\t", extrasaction="ignore",
                            lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow(asdict(r))
    return buf.getvalue()


def format_summary(rows) -> str:
    """Plain-text table: test error, coefficient and feature precision/recall."""
    out = [f"{'scenario':<12} {'scheme':<12} {'test error':>14} {'coef sel':>9} "
           f"{'feat sel':>9} {'coef P/R':>11} {'feat P/R':>11}"]
    for r in rows:
        out.append(f"{r['scenario']:<12} {r['scheme']:<12} "
                   f"{r['test_error']:>6.3f} ± {r['test_error_se']:.3f} "
                   f"{r['n_coefficients']:>9.1f} {r['n_features']:>9.1f} "
                   f"{r['coef_precision']:>5.2f}/{r['coef_recall']:<5.2f} "
                   f"{r['feat_precision']:>5.2f}/{r['feat_recall']:<5.2f}")
    return "\n".join(out)
