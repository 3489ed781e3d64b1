"""Experiment runner and report formatting.

A strategy name is either a pure aggregator (``mv``, ``ds-em``, ``ds-mf``)
or an aggregator mixed with Tucker completion (``ds-em+tucker``).
"""

from __future__ import annotations

import csv
import io
import logging
import statistics
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .aggregate import AGGREGATORS, get_aggregator
from .data import inject_noise, sparsify
from .labels import annotation_error_rate, estimation_error, nonzero_rate
from .misc import MiscConfig, run_misc

log = logging.getLogger(__name__)

CSV_HEADER = ("dataset", "strategy", "seed", "nonzero_rate", "annotation_error_rate",
              "estimation_error", "wall_ms", "outer_iters")

# default sweep: noise levels and target nonzero rate of the sparse and noisy protocol
SWEEP_ERROR_RATES = (0.304, 0.416, 0.514, 0.609)
SWEEP_NONZERO_RATE = 0.037


def parse_strategy(name: str) -> tuple[str, bool]:
    """Split a strategy name into (aggregator, uses_completion)."""
    agg, _, completer = name.partition("+")
    if agg not in AGGREGATORS or completer not in ("", "tucker"):
        raise ValueError(f"unknown strategy {name!r}")
    return agg, bool(completer)


@dataclass
class ReportRow:
    dataset: str
    strategy: str
    seed: int | str
    nonzero_rate: float | None = None
    annotation_error_rate: float | None = None
    estimation_error: float | None = None
    wall_ms: float | None = None
    outer_iters: int | None = None
    error: str | None = None
    estimation_error_sd: float | None = None  # summary rows only


@dataclass
class RunReport:
    rows: list[ReportRow] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return any(r.error for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.rows:
            seed = r.seed
            if r.estimation_error_sd is not None:
                seed = f"{r.seed};sd={_num(r.estimation_error_sd)}"
            writer.writerow([
                r.dataset, r.strategy, seed, _num(r.nonzero_rate),
                _num(r.annotation_error_rate), _num(r.estimation_error), _num(r.wall_ms),
                "error" if r.error else _num(r.outer_iters),
            ])
        return buf.getvalue()

    def to_text(self) -> str:
        head = ["dataset", "strategy", "seed", "nonzero %", "annot err %", "est err %",
                "wall ms", "outer"]
        body = []
        for r in self.rows:
            est = _pct(r.estimation_error)
            if r.estimation_error_sd is not None:
                est = f"{est} +/- {_pct(r.estimation_error_sd)}"
            body.append([
                r.dataset, r.strategy, str(r.seed), _pct(r.nonzero_rate),
                _pct(r.annotation_error_rate), est,
                "" if r.wall_ms is None else f"{r.wall_ms:.1f}",
                f"ERROR: {r.error}" if r.error else ("" if r.outer_iters is None else str(r.outer_iters)),
            ])
        widths = [max(len(row[k]) for row in [head] + body) for k in range(len(head))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in [head] + body]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _pct(x) -> str:
    return "" if x is None else f"{100 * x:.2f}"


def run_strategy(labels, strategy: str, n_classes: int | None = None,
                 misc: MiscConfig | None = None) -> tuple[np.ndarray, int | None]:
    """Predicted item labels and, for mixed strategies, the outer iteration count."""
    agg, mixed = parse_strategy(strategy)
    misc = misc or MiscConfig()
    if not mixed:
        return get_aggregator(agg, misc.em)(labels, n_classes).labels, None
    cfg = replace(misc, aggregator=agg, n_classes=n_classes)
    result, trace = run_misc(labels, cfg)
    return result.labels, len(trace)


def run_cell(dataset: str, strategy: str, seed, labels, truth=None,
             n_classes: int | None = None, misc: MiscConfig | None = None,
             timing: bool = False) -> tuple[ReportRow, np.ndarray | None]:
    """Run one strategy on one label matrix; failures become error rows."""
    row = ReportRow(dataset, strategy, seed, nonzero_rate=nonzero_rate(labels))
    try:
        if truth is not None:
            row.annotation_error_rate = annotation_error_rate(labels, truth)
        start = time.perf_counter()
        pred, row.outer_iters = run_strategy(labels, strategy, n_classes, misc)
        if timing:
            row.wall_ms = 1000 * (time.perf_counter() - start)
        if truth is not None:
            row.estimation_error = estimation_error(pred, truth)
        return row, pred
    except Exception as exc:  # a failing cell must not stop the run
        log.exception("%s / %s / seed %s failed", dataset, strategy, seed)
        row.error = f"{type(exc).__name__}: {exc}"
        return row, None


def corrupt(labels, truth, seed: int, nonzero: float | None = None, error: float | None = None,
            n_classes: int | None = None, level: int = 0) -> np.ndarray:
    """Sparsify then add noise, each from its own stream of ``seed``."""
    if nonzero is not None:
        labels = sparsify(labels, nonzero, seed, 0)
    if error is not None:
        if truth is None:
            raise ValueError("injecting noise needs ground truth")
        labels = inject_noise(labels, truth, error, seed, 1, level, n_classes=n_classes)
    return labels


def run_benchmark(datasets: Sequence, strategies: Sequence[str], seeds: Sequence[int] = (0,),
                  misc: MiscConfig | None = None, nonzero: float | None = None,
                  error: float | None = None, timing: bool = False) -> RunReport:
    """Every (dataset, strategy, seed) cell, in that order.

    ``datasets`` holds :class:`~miscrowd.data.Dataset` objects. Seeds only
    matter when ``nonzero`` or ``error`` ask for corruption.
    """
    report = RunReport()
    for ds in datasets:
        for strategy in strategies:
            for seed in seeds:
                try:
                    labels = corrupt(ds.labels, ds.truth, seed, nonzero, error, ds.n_classes)
                except Exception as exc:
                    report.rows.append(ReportRow(ds.name, strategy, seed, error=str(exc)))
                    continue
                row, _ = run_cell(ds.name, strategy, seed, labels, ds.truth, ds.n_classes,
                                  misc, timing)
                report.rows.append(row)
    return report


def _summary(dataset: str, strategy: str, rows: list[ReportRow]) -> ReportRow:
    ok = [r for r in rows if not r.error]
    out = ReportRow(dataset, strategy, "mean")
    if not ok:
        out.error = "no successful cells"
        return out
    mean = lambda attr: statistics.fmean(getattr(r, attr) for r in ok)
    out.nonzero_rate = mean("nonzero_rate")
    out.annotation_error_rate = mean("annotation_error_rate")
    out.estimation_error = mean("estimation_error")
    errs = [r.estimation_error for r in ok]
    out.estimation_error_sd = statistics.stdev(errs) if len(errs) > 1 else 0.0
    if all(r.outer_iters is not None for r in ok):
        out.outer_iters = round(statistics.fmean(r.outer_iters for r in ok))
    if all(r.wall_ms is not None for r in ok):
        out.wall_ms = mean("wall_ms")
    return out


def run_sweep(dataset, strategies: Sequence[str], error_rates: Sequence[float] = SWEEP_ERROR_RATES,
              seeds: Sequence[int] = range(10), nonzero: float | None = SWEEP_NONZERO_RATE,
              misc: MiscConfig | None = None, timing: bool = False) -> RunReport:
    """Sparse-and-noisy sweep: one row per (level, strategy, seed), then one
    mean/sd summary row per (level, strategy).

    For each seed the labels are sparsified once; every noise level and every
    strategy then sees the same sparsified matrix.
    """
    if dataset.truth is None:
        raise ValueError("a sweep needs ground truth")
    cells: dict[tuple[int, str], list[ReportRow]] = {}
    for seed in seeds:
        try:
            sparse = corrupt(dataset.labels, dataset.truth, seed, nonzero, None, dataset.n_classes)
        except Exception as exc:
            sparse, failure = None, str(exc)
        for level, rate in enumerate(error_rates):
            name = f"{dataset.name}@{rate:g}"
            labels, failure_here = None, None
            if sparse is None:
                failure_here = failure
            else:
                try:
                    labels = inject_noise(sparse, dataset.truth, rate, seed, 1, level,
                                          n_classes=dataset.n_classes)
                except Exception as exc:
                    failure_here = str(exc)
            for strategy in strategies:
                if labels is None:
                    row = ReportRow(name, strategy, seed, error=failure_here)
                else:
                    row, _ = run_cell(name, strategy, seed, labels, dataset.truth,
                                      dataset.n_classes, misc, timing)
                cells.setdefault((level, strategy), []).append(row)

    report = RunReport()
    for level, rate in enumerate(error_rates):
        for strategy in strategies:
            report.rows.extend(cells[level, strategy])
    for level, rate in enumerate(error_rates):
        for strategy in strategies:
            report.rows.append(_summary(f"{dataset.name}@{rate:g}", strategy, cells[level, strategy]))
    return report
