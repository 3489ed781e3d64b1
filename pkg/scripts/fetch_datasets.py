"""Normalize public crowdsourcing datasets to the miscrowd CSV layout.

The datasets are not redistributed here. Download them from their authors:

* RTE and Temp: R. Snow, B. O'Connor, D. Jurafsky, A. Ng, "Cheap and fast,
  but is it good? Evaluating non-expert annotations for natural language
  tasks", EMNLP 2008. The release ships ``rte.standardized.tsv`` and
  ``temp.standardized.tsv`` (one row per annotation, with the gold label).
* Bluebirds: P. Welinder, S. Branson, S. Belongie, P. Perona, "The
  multidimensional wisdom of crowds", NIPS 2010. Several truth-inference
  benchmark collections redistribute it as an answer table
  (item, worker, label) plus a truth table (item, label).

Then, for example::

    python scripts/fetch_datasets.py snow rte.standardized.tsv --out data/rte
    python scripts/fetch_datasets.py snow temp.standardized.tsv --out data/temp
    python scripts/fetch_datasets.py table answer.csv --truth truth.csv --out data/bluebirds

and run the optional acceptance check with ``MISCROWD_DATA_DIR=data``.

Label tokens are rewritten to 1..K: integer tokens are shifted so the
smallest becomes 1 (0/1 -> 1/2), anything else is numbered in sorted order.
The mapping is printed so results can be traced back.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path


def _sniff(path: Path) -> str:
    return "\t" if path.suffix.lower() in (".tsv", ".tab") else ","


def _read(path: Path, columns: list[str]) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter=_sniff(path))
        missing = [c for c in columns if c not in (reader.fieldnames or [])]
        if missing:
            raise SystemExit(f"{path}: missing columns {missing}; found {reader.fieldnames}")
        return [[row[c].strip() for c in columns] for row in reader]


def label_map(tokens) -> dict[str, int]:
    tokens = sorted(set(tokens))
    try:
        values = {t: int(t) for t in tokens}
    except ValueError:
        return {t: k for k, t in enumerate(tokens, 1)}
    shift = 1 - min(values.values())
    return {t: v + shift for t, v in values.items()}


def write(out: Path, answers, truth) -> None:
    mapping = label_map([a[2] for a in answers] + [t[1] for t in truth])
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(f"{out}_labels.csv", "w", encoding="utf-8") as fh:
        fh.write("# worker,item,label\n")
        for worker, item, label in answers:
            fh.write(f"{worker},{item},{mapping[label]}\n")
    if truth:
        with open(f"{out}_truth.csv", "w", encoding="utf-8") as fh:
            fh.write("# item,label\n")
            for item, label in truth:
                fh.write(f"{item},{mapping[label]}\n")
    shown = ", ".join(f"{k}->{v}" for k, v in sorted(mapping.items(), key=lambda kv: kv[1]))
    print(f"{out}: {len(answers)} labels, {len(truth)} truth items; classes {shown}")


def from_snow(args) -> None:
    rows = _read(Path(args.src), [args.worker, args.item, args.label, args.gold])
    answers = [(w, i, lab) for w, i, lab, _ in rows]
    truth = {}
    for _, item, _, gold in rows:
        if truth.setdefault(item, gold) != gold:
            raise SystemExit(f"{args.src}: item {item} has conflicting gold labels")
    write(Path(args.out), answers, sorted(truth.items()))


def from_table(args) -> None:
    answers = [(w, i, lab) for i, w, lab in _read(Path(args.src), [args.item, args.worker, args.label])]
    truth = []
    if args.truth:
        truth = [tuple(r) for r in _read(Path(args.truth), [args.item, args.truth_label])]
    write(Path(args.out), answers, truth)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("snow", help="one annotation per row with a gold column")
    p.add_argument("src")
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--worker", default="!amt_worker_ids")
    p.add_argument("--item", default="orig_id")
    p.add_argument("--label", default="response")
    p.add_argument("--gold", default="gold")
    p.set_defaults(run=from_snow)

    p = sub.add_parser("table", help="answer table plus optional truth table")
    p.add_argument("src")
    p.add_argument("--truth")
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--item", default="question")
    p.add_argument("--worker", default="worker")
    p.add_argument("--label", default="answer")
    p.add_argument("--truth-label", default="truth")
    p.set_defaults(run=from_table)

    args = parser.parse_args(argv)
    args.run(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
