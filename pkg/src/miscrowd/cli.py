"""Command line entry point: ``miscrowd {aggregate,misc,sweep,synth}``."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .aggregate import AGGREGATORS, EmConfig
from .bench import SWEEP_ERROR_RATES, SWEEP_NONZERO_RATE, RunReport, run_benchmark, run_cell, corrupt, run_sweep
from .data import load_dataset, save_dataset, synth_dawid_skene
from .misc import MiscConfig
from .tucker import StopRule

SEED_ENV = "MISCROWD_SEED"


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(","))


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def _names(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def _add_data_args(p: argparse.ArgumentParser, truth_required: bool = False) -> None:
    p.add_argument("--data", required=True, help="label file: worker,item,label per line")
    p.add_argument("--truth", required=truth_required, help="truth file: item,label per line")
    p.add_argument("--name", help="dataset name in reports (default: label file stem)")
    p.add_argument("--n-classes", type=int, help="override the class count")
    p.add_argument("--compact-classes", action="store_true",
                   help="renumber observed label tokens to 1..Nc")


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=_default_seed(),
                   help=f"master seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.add_argument("--timing", action="store_true",
                   help="fill the wall_ms column (makes output run-dependent)")


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ranks", type=_ints, help="Tucker ranks R1,R2,R3")
    p.add_argument("--init-rank", type=int, help="rank of the HOSVD initialization")
    p.add_argument("--max-sweeps", type=int, default=StopRule.max_sweeps)
    p.add_argument("--tol", type=float, default=StopRule.residual_tol,
                   help="stop HOOI when the residual drops by less than this")
    p.add_argument("--max-outer", type=int, default=MiscConfig.max_outer)
    p.add_argument("--em-iters", type=int, default=EmConfig.max_iters)
    p.add_argument("--em-tol", type=float, default=EmConfig.tol)
    p.add_argument("--smoothing", type=float, default=EmConfig.smoothing)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="miscrowd", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("aggregate", help="pure label aggregation")
    _add_data_args(p)
    _add_run_args(p)
    _add_model_args(p)
    p.add_argument("--aggregator", type=_names, default=("mv",),
                   help=f"comma-separated subset of {', '.join(AGGREGATORS)}")
    p.add_argument("--nonzero-rate", type=float, help="sparsify to this rate first")
    p.add_argument("--error-rate", type=float, help="inject noise up to this annotation error rate first")
    p.add_argument("--predictions", help="write item,label predictions here (single aggregator)")

    p = sub.add_parser("misc", help="Tucker completion mixed with label aggregation")
    _add_data_args(p)
    _add_run_args(p)
    _add_model_args(p)
    p.add_argument("--aggregator", type=_names, default=("ds-em",))
    p.add_argument("--nonzero-rate", type=float)
    p.add_argument("--error-rate", type=float)
    p.add_argument("--predictions")

    p = sub.add_parser("sweep", help="sparse-and-noisy robustness sweep")
    _add_data_args(p, truth_required=True)
    _add_run_args(p)
    _add_model_args(p)
    p.add_argument("--strategies", type=_names, default=("ds-em", "ds-em+tucker"))
    p.add_argument("--nonzero-rate", type=float, default=SWEEP_NONZERO_RATE)
    p.add_argument("--error-rate", type=_floats, default=SWEEP_ERROR_RATES,
                   help="comma-separated annotation error levels")
    p.add_argument("--seeds", type=int, default=10, help="number of trials (seeds seed..seed+n-1)")

    p = sub.add_parser("synth", help="write a synthetic Dawid-Skene dataset")
    p.add_argument("--workers", type=int, default=50)
    p.add_argument("--items", type=int, default=200)
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--accuracy", type=float, default=0.7)
    p.add_argument("--spread", type=float, default=0.0)
    p.add_argument("--bimodal", action="store_true",
                   help="workers are either accuracy-spread or accuracy+spread")
    p.add_argument("--density", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out", required=True, help="output prefix; writes PREFIX_labels.csv and PREFIX_truth.csv")
    return parser


def _misc_config(args) -> MiscConfig:
    return MiscConfig(
        ranks=args.ranks,
        init_rank=args.init_rank,
        hooi_stop=StopRule(args.max_sweeps, args.tol),
        max_outer=args.max_outer,
        em=EmConfig(args.em_iters, args.em_tol, args.smoothing),
    )


def _emit(report: RunReport, args) -> None:
    text = report.to_csv() if args.format == "csv" else report.to_text()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(args):
    ds = load_dataset(args.data, args.truth, args.name, args.compact_classes)
    if args.n_classes is not None:
        if args.n_classes < ds.labels.max():
            raise SystemExit(f"--n-classes {args.n_classes} is below the largest label")
        ds.n_classes = args.n_classes
    return ds


def _run_single(args, mixed: bool) -> int:
    ds = _load(args)
    misc = _misc_config(args)
    strategies = [f"{a}+tucker" if mixed else a for a in args.aggregator]
    if args.predictions:
        if len(strategies) != 1:
            raise SystemExit("--predictions needs exactly one aggregator")
        labels = corrupt(ds.labels, ds.truth, args.seed, args.nonzero_rate, args.error_rate, ds.n_classes)
        row, pred = run_cell(ds.name, strategies[0], args.seed, labels, ds.truth, ds.n_classes,
                             misc, args.timing)
        report = RunReport([row])
        if pred is not None:
            with open(args.predictions, "w", encoding="utf-8") as fh:
                for item, c in zip(ds.items, pred):
                    fh.write(f"{item},{ds.class_tokens[c - 1]}\n")
    else:
        report = run_benchmark([ds], strategies, [args.seed], misc, args.nonzero_rate,
                               args.error_rate, args.timing)
    _emit(report, args)
    return 1 if report.failed else 0


def _run_sweep(args) -> int:
    ds = _load(args)
    report = run_sweep(ds, args.strategies, args.error_rate,
                       range(args.seed, args.seed + args.seeds), args.nonzero_rate,
                       _misc_config(args), args.timing)
    _emit(report, args)
    return 1 if report.failed else 0


def _run_synth(args) -> int:
    labels, truth = synth_dawid_skene(args.workers, args.items, args.classes,
                                      accuracy=args.accuracy, spread=args.spread,
                                      bimodal=args.bimodal,
                                      density=args.density, seed=args.seed)
    save_dataset(labels, f"{args.out}_labels.csv", truth, f"{args.out}_truth.csv")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "synth":
        return _run_synth(args)
    try:
        if args.command == "sweep":
            return _run_sweep(args)
        return _run_single(args, mixed=args.command == "misc")
    except (OSError, ValueError) as exc:
        print(f"miscrowd: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
