"""
Command-line front end.

Exit codes: 0 success, 2 bad scenario or flags, 3 data errors,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import shlex
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import dataio
from .codes import cost_table
from .errors import (ChecksumMismatch, DegenerateResidual, DimensionMismatch, DomainError,
                     MDLSelectError, ParseError, SingularDesign, SpecError, UnknownFeature,
                     FoldTooSmall, VersionMismatch)
from .fit import Dataset
from .harness import SCHEMES, format_summary, make_selector, records_to_tsv, run_suite, summarize
from .synth import SCENARIOS, ScenarioSpec, generate
from .transfer import build_prior, load_prior, save_prior

EXIT_OK, EXIT_SPEC, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

DATA_ERRORS = (ParseError, DimensionMismatch, UnknownFeature, VersionMismatch, ChecksumMismatch,
               FoldTooSmall, FileNotFoundError, IsADirectoryError)
NUMERIC_ERRORS = (SingularDesign, DegenerateResidual, FloatingPointError, np.linalg.LinAlgError)


def _echo(argv) -> str:
    return "# mdlselect " + " ".join(shlex.quote(a) for a in argv)


def cmd_generate(args) -> int:
    spec = ScenarioSpec(args.scenario, args.n, args.m, args.h, args.m_star, args.noise_sd,
                        args.seed, not args.continuous)
    data, truth = generate(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    delim = "\t" if args.tab else ","
    ext = "tsv" if args.tab else "csv"
    dataio.save_dataset(data, out / f"X.{ext}", out / f"Y.{ext}", delimiter=delim)
    dataio.write_matrix(out / f"truth.{ext}", data.task_names, truth.beta, delim)
    print(f"spec scenario={spec.scenario} n={spec.n} m={spec.m} h={spec.h} "
          f"m_star={spec.m_star} noise_sd={spec.noise_sd!r} seed={spec.seed} "
          f"binarize={spec.binarize}")
    print(f"wrote {out / f'X.{ext}'} {out / f'Y.{ext}'} {out / f'truth.{ext}'}")
    return EXIT_OK


def cmd_select(args) -> int:
    data = dataio.load_dataset(args.x, args.y, args.classmap)
    if args.scheme in ("tpc", "tpc-fb", "tpc-stream", "transfer-tpc") and not data.has_classes:
        print("warning: no class map given; falling back to RIC costing", file=sys.stderr)
    prior = load_prior(args.prior) if args.prior else None
    order = None
    if args.scheme == "tpc-stream" and args.seed is not None:
        order = np.random.default_rng(args.seed).permutation(data.m)
    select = make_selector(args.scheme, args.top_t, args.l_theta, prior, args.setting,
                           args.extra_steps, args.threads, order)
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = select(data)
    elapsed = time.perf_counter() - start
    if args.out:
        dataio.save_model(model, args.out)
    print(f"scheme={model.scheme} features={model.n_features} "
          f"coefficients={model.n_coefficients} tdl_bits={model.total_tdl:.6f} "
          f"seconds={elapsed:.3f}")
    return EXIT_OK


def cmd_build_prior(args) -> int:
    models = [dataio.load_model(p) for p in args.models]
    universe = None
    if args.x:
        fnames, x = dataio.read_matrix(args.x)
        cmap = cnames = None
        if args.classmap:
            cmap, cnames = dataio.read_classmap(args.classmap, fnames)
        universe = Dataset(x, np.zeros((x.shape[0], 1)), fnames, None, cmap, cnames)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        prior = build_prior(models, universe, positive_only=args.positive_only)
    save_prior(prior, args.out)
    print(f"tasks={prior.t} classes={len(prior.class_counts)} "
          f"features={len(prior.feature_counts)} -> {args.out}")
    return EXIT_OK


def cmd_eval(args, argv) -> int:
    overrides = {"n": args.n, "m": args.m, "h": args.h, "m_star": args.m_star}
    ScenarioSpec(args.scenarios[0], seed=args.seed, **overrides).validate()

    def progress(rec):
        if args.verbose:
            print(f"  {rec.scenario} {rec.scheme} rep={rec.replicate} "
                  f"err={rec.test_error:.3f} ({rec.seconds:.1f}s)", file=sys.stderr)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        records = run_suite(args.scenarios, args.schemes, args.replicates, args.seed,
                            args.folds, overrides, args.top_t, args.l_theta, args.threads,
                            progress)
    rows = summarize(records)
    if sum(len(r.task_errors) for r in records) // max(len(rows), 1) < 2:
        print("warning: a single error value per row; standard errors are 0 "
              "(no degrees of freedom)", file=sys.stderr)
    print(_echo(argv))
    print(format_summary(rows))
    if args.out:
        Path(args.out).write_text(_echo(argv) + "\n" + records_to_tsv(records), encoding="utf-8")
    return EXIT_OK


def cmd_costs(args) -> int:
    ks = args.k if args.k else None
    rows = cost_table(args.m, args.h, args.l_theta, ks)
    print(f"# per-feature model cost in bits, m={args.m} h={args.h} l_theta={args.l_theta}")
    print(f"{'k':>5} {'partial':>10} {'full':>10} {'ric':>10}  best")
    for r in rows:
        print(f"{r['k']:>5} {r['partial']:>10.2f} {r['full']:>10.2f} {r['ric']:>10.2f}  {r['best']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mdlselect", description="MDL feature selection toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic scenario")
    g.add_argument("--scenario", choices=SCENARIOS, default="partial")
    g.add_argument("--n", type=int, default=100)
    g.add_argument("--m", type=int, default=2000)
    g.add_argument("--h", type=int, default=20)
    g.add_argument("--m-star", type=int, default=4)
    g.add_argument("--noise-sd", type=float, default=ScenarioSpec.noise_sd)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--continuous", action="store_true", help="keep real-valued responses")
    g.add_argument("--tab", action="store_true", help="tab-delimited output")
    g.add_argument("--out", default=".")

    s = sub.add_parser("select", help="run a selection scheme")
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--classmap")
    s.add_argument("--scheme", choices=SCHEMES, default="partial-mic")
    s.add_argument("--out")
    s.add_argument("--top-t", type=int, default=75)
    s.add_argument("--l-theta", type=float, default=2.0)
    s.add_argument("--prior")
    s.add_argument("--setting", type=int, choices=(1, 2))
    s.add_argument("--extra-steps", type=int)
    s.add_argument("--seed", type=int, help="feature order for tpc-stream")
    s.add_argument("--threads", type=int, default=1)

    b = sub.add_parser("build-prior", help="count selections across trained models")
    b.add_argument("--models", nargs="+", required=True)
    b.add_argument("--x", help="test-task X file defining the feature universe")
    b.add_argument("--classmap")
    b.add_argument("--positive-only", action="store_true")
    b.add_argument("--out", required=True)

    e = sub.add_parser("eval", help="replicated synthetic benchmark")
    e.add_argument("--scenarios", nargs="+", choices=SCENARIOS, default=list(SCENARIOS))
    e.add_argument("--schemes", nargs="+", choices=SCHEMES,
                   default=["partial-mic", "full-mic", "ric"])
    e.add_argument("--replicates", type=int, default=5)
    e.add_argument("--seed", type=int, required=True)
    e.add_argument("--folds", type=int, default=5)
    e.add_argument("--n", type=int, default=100)
    e.add_argument("--m", type=int, default=2000)
    e.add_argument("--h", type=int, default=20)
    e.add_argument("--m-star", type=int, default=4)
    e.add_argument("--top-t", type=int, default=75)
    e.add_argument("--l-theta", type=float, default=2.0)
    e.add_argument("--threads", type=int, default=1)
    e.add_argument("--out", help="per-replicate TSV")
    e.add_argument("--verbose", action="store_true")

    c = sub.add_parser("costs", help="per-feature model cost of each scheme")
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--h", type=int, required=True)
    c.add_argument("--l-theta", type=float, default=2.0)
    c.add_argument("--k", type=int, nargs="*")
    return p


def _check_flags(parser, args):
    if args.command != "select":
        return
    if args.setting is not None and args.scheme != "transfer-tpc":
        parser.error("--setting requires --scheme transfer-tpc")
    if args.prior is not None and args.scheme != "transfer-tpc":
        parser.error("--prior requires --scheme transfer-tpc")
    if args.extra_steps is not None and args.scheme != "tpc-fb":
        parser.error("--extra-steps requires --scheme tpc-fb")
    if args.setting is None:
        args.setting = 1
    if args.extra_steps is None:
        args.extra_steps = 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _check_flags(parser, args)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "generate":
            return cmd_generate(args)
        if args.command == "select":
            return cmd_select(args)
        if args.command == "build-prior":
            return cmd_build_prior(args)
        if args.command == "eval":
            return cmd_eval(args, argv)
        return cmd_costs(args)
    except (SpecError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MDLSelectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
