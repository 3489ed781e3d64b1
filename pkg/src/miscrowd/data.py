"""Dataset files, seeded corruption and synthetic Dawid-Skene data.

File formats (UTF-8, one record per line, ``#`` starts a comment line):

* labels: ``worker,item,label``
* truth:  ``item,label``

Labels are positive integers. Worker and item ids are arbitrary strings,
indexed in order of first appearance.

Randomness always comes from :func:`make_rng`: numpy's PCG64 seeded through a
``SeedSequence`` of ``(seed, *stream)``, so independent trials get
independent, reproducible streams.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .labels import annotation_error_rate, as_label_matrix, nonzero_rate

log = logging.getLogger(__name__)


class DatasetError(ValueError):
    pass


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, stream)])))


@dataclass
class Dataset:
    name: str
    workers: list[str]
    items: list[str]
    labels: np.ndarray                  # (n_workers, n_items), 0 = unlabeled
    truth: np.ndarray | None = None     # (n_items,), 0 = unknown
    n_classes: int = 0
    class_tokens: list[int] = field(default_factory=list)  # class c is class_tokens[c - 1]
    duplicates: int = 0
    unmatched_truth: dict[str, int] = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape


def _records(path: Path, width: int):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != width or not all(parts):
                raise DatasetError(f"{path}:{lineno}: expected {width} comma-separated fields")
            try:
                label = int(parts[-1])
            except ValueError:
                label = 0
            if label < 1:
                raise DatasetError(f"{path}:{lineno}: label {parts[-1]!r} is not a positive integer")
            yield lineno, parts[:-1], label


def load_dataset(labels_path, truth_path=None, name: str | None = None,
                 compact_classes: bool = False) -> Dataset:
    """Read a label file and optional truth file.

    Class ids are the integer tokens themselves (``n_classes`` is the largest
    token seen in either file). With ``compact_classes`` the observed tokens
    are renumbered to ``1..n_classes`` keeping their numeric order.
    A repeated (worker, item) pair keeps its last label and is counted in
    ``duplicates``. Truth for items absent from the label file goes to
    ``unmatched_truth``.
    """
    labels_path = Path(labels_path)
    workers: dict[str, int] = {}
    items: dict[str, int] = {}
    cells: dict[tuple[int, int], int] = {}
    duplicates = 0
    for _, (w, i), label in _records(labels_path, 3):
        key = (workers.setdefault(w, len(workers)), items.setdefault(i, len(items)))
        duplicates += key in cells
        cells[key] = label
    if not cells:
        raise DatasetError(f"{labels_path}: no records")
    if duplicates:
        log.warning("%s: %d duplicate worker/item pairs, kept the last label", labels_path, duplicates)

    truth_raw: dict[str, int] = {}
    if truth_path is not None:
        for _, (i,), label in _records(Path(truth_path), 2):
            truth_raw[i] = label

    tokens = sorted(set(cells.values()) | set(truth_raw.values()))
    if compact_classes:
        code = {tok: c for c, tok in enumerate(tokens, 1)}
        class_tokens = tokens
    else:
        code = {tok: tok for tok in tokens}
        class_tokens = list(range(1, tokens[-1] + 1))

    matrix = np.zeros((len(workers), len(items)), dtype=np.int64)
    for (w, i), label in cells.items():
        matrix[w, i] = code[label]

    truth = None
    unmatched: dict[str, int] = {}
    if truth_path is not None:
        truth = np.zeros(len(items), dtype=np.int64)
        for i, label in truth_raw.items():
            if i in items:
                truth[items[i]] = code[label]
            else:
                unmatched[i] = code[label]
        if unmatched:
            log.warning("%s: %d truth items have no labels", truth_path, len(unmatched))

    return Dataset(
        name=name or labels_path.stem,
        workers=list(workers),
        items=list(items),
        labels=matrix,
        truth=truth,
        n_classes=len(class_tokens),
        class_tokens=class_tokens,
        duplicates=duplicates,
        unmatched_truth=unmatched,
    )


def save_dataset(labels, labels_path, truth=None, truth_path=None) -> None:
    """Write a label matrix (and truth) with workers ``w1..`` and items ``i1..``."""
    labels = np.asarray(labels)
    w, i = np.nonzero(labels)
    with open(labels_path, "w", encoding="utf-8") as fh:
        fh.write("# worker,item,label\n")
        for ww, ii in zip(w, i):
            fh.write(f"w{ww + 1},i{ii + 1},{labels[ww, ii]}\n")
    if truth is not None and truth_path is not None:
        with open(truth_path, "w", encoding="utf-8") as fh:
            fh.write("# item,label\n")
            for ii, c in enumerate(np.asarray(truth)):
                if c > 0:
                    fh.write(f"i{ii + 1},{c}\n")


def sparsify(a, target_nonzero_rate: float, seed: int = 0, *stream: int) -> np.ndarray:
    """Delete labels uniformly at random until the nonzero rate is at most the target.

    Deletion never removes the last label of an item. Raises ``ValueError``
    when that guard makes the target unreachable.
    """
    a = np.array(a, dtype=np.int64)
    if target_nonzero_rate >= nonzero_rate(a):
        return a
    budget = int(np.floor(target_nonzero_rate * a.size + 1e-9))
    per_item = np.count_nonzero(a, axis=0)
    w, i = np.nonzero(a)
    count = w.size
    for k in make_rng(seed, *stream).permutation(w.size):
        if count <= budget:
            break
        if per_item[i[k]] > 1:
            a[w[k], i[k]] = 0
            per_item[i[k]] -= 1
            count -= 1
    if count > budget:
        raise ValueError(
            f"nonzero rate {target_nonzero_rate} is unreachable while keeping every labeled item covered"
        )
    return a


def inject_noise(a, truth, target_error_rate: float, seed: int = 0, *stream: int,
                 n_classes: int | None = None) -> np.ndarray:
    """Flip random correct labels to a uniformly drawn wrong class.

    Stops as soon as the annotation error rate reaches ``target_error_rate``.
    Only labels of items with known truth are touched.
    """
    a, n_classes = as_label_matrix(np.array(a), n_classes)
    truth = np.asarray(truth, dtype=np.int64)
    if annotation_error_rate(a, truth) >= target_error_rate:
        return a
    if n_classes < 2:
        raise ValueError("cannot inject noise with a single class")
    known = truth > 0
    labeled = (a > 0) & known[None, :]
    n_labels = int(labeled.sum())
    n_wrong = int((labeled & (a != truth[None, :])).sum())
    needed = int(np.ceil(target_error_rate * n_labels - 1e-9)) - n_wrong
    w, i = np.nonzero(labeled & (a == truth[None, :]))
    if needed > w.size:
        raise ValueError(f"error rate {target_error_rate} exceeds the achievable maximum")
    rng = make_rng(seed, *stream)
    pick = rng.permutation(w.size)[:needed]
    # a draw from the n_classes - 1 wrong classes, skipping over the true one
    shift = rng.integers(1, n_classes, size=needed)
    w, i = w[pick], i[pick]
    a[w, i] = (truth[i] - 1 + shift) % n_classes + 1
    return a


def synth_dawid_skene(n_workers: int, n_items: int, n_classes: int, *,
                      accuracy: float = 0.7, spread: float = 0.0, bimodal: bool = False,
                      density: float = 1.0, seed: int = 0,
                      stream: tuple[int, ...] = ()) -> tuple[np.ndarray, np.ndarray]:
    """Labels drawn from a Dawid-Skene model with one-coin workers.

    Worker ``w`` answers correctly with probability ``a_w`` and otherwise
    picks a uniformly random wrong class. ``a_w`` is drawn uniformly from
    ``accuracy +/- spread``, or with ``bimodal`` is one of the two endpoints
    with equal odds (reliable and unreliable workers); either way it is
    clipped to [0, 1]. Each (worker, item) pair is observed with
    probability ``density``; every item keeps at least one label. True classes
    are uniform. Returns ``(labels, truth)``.
    """
    if n_classes < 2:
        raise ValueError("need at least two classes")
    rng = make_rng(seed, *stream)
    truth = rng.integers(1, n_classes + 1, size=n_items)
    if bimodal:
        acc = accuracy + spread * rng.choice([-1.0, 1.0], size=n_workers)
    else:
        acc = rng.uniform(accuracy - spread, accuracy + spread, size=n_workers)
    acc = np.clip(acc, 0.0, 1.0)
    correct = rng.random((n_workers, n_items)) < acc[:, None]
    shift = rng.integers(1, n_classes, size=(n_workers, n_items))
    labels = np.where(correct, truth[None, :], (truth[None, :] - 1 + shift) % n_classes + 1)
    observed = rng.random((n_workers, n_items)) < density
    uncovered = ~observed.any(axis=0)
    observed[rng.integers(0, n_workers, size=uncovered.sum()), np.flatnonzero(uncovered)] = True
    return np.where(observed, labels, 0).astype(np.int64), truth.astype(np.int64)
