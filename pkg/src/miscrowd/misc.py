"""The mixed-strategy complete/aggregate loop.

1. Aggregate the raw labels into an initial guess of the truth.
2. Append the guess as a one-hot slice below the one-hot label tensor.
3. Replace the stacked tensor by a low-rank Tucker approximation.
4. Decode the bottom slice into a new guess; repeat from 2 until the guess
   stops changing.
5. Decode every fiber of the approximation into a dense label matrix
   (workers plus the appended row) and aggregate that.

The raw label tensor is re-used unchanged in every round; only the appended
slice evolves.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .aggregate import EmConfig, get_aggregator
from .labels import AggregationResult, as_label_matrix, binarize, binarize_prediction, decode_argmax
from .tensor import concat_mode1, frobenius_norm
from .tucker import StopRule, hooi, reconstruct

log = logging.getLogger(__name__)

# tensor in, completed tensor of the same shape out
Completer = Callable[[np.ndarray], np.ndarray]


def default_ranks(n_workers: int, n_items: int, n_classes: int) -> tuple[int, int, int]:
    """Noise-free structure (1, min(Ni, Nc), min(Ni, Nc)) with one extra worker direction."""
    r = min(n_items, n_classes)
    return (min(n_workers + 1, 2), r, r)


@dataclass(frozen=True)
class MiscConfig:
    ranks: tuple[int, int, int] | None = None
    init_rank: int | None = None
    hooi_stop: StopRule = field(default_factory=StopRule)
    max_outer: int = 20
    aggregator: str = "ds-em"
    em: EmConfig = field(default_factory=EmConfig)
    n_classes: int | None = None

    def __post_init__(self):
        if self.max_outer < 1:
            raise ValueError("max_outer must be at least 1")

    def resolve_ranks(self, n_workers: int, n_items: int, n_classes: int) -> tuple[int, int, int]:
        ranks = tuple(self.ranks) if self.ranks is not None else default_ranks(
            n_workers, n_items, n_classes)
        bounds = (n_workers + 1, n_items, n_classes)
        if len(ranks) != 3 or any(not 1 <= r <= b for r, b in zip(ranks, bounds)):
            raise ValueError(f"ranks {ranks} must lie within (1..{bounds[0]}, 1..{bounds[1]}, 1..{bounds[2]})")
        return ranks


@dataclass(frozen=True)
class MiscStep:
    labels: np.ndarray   # decoded bottom slice after this round
    residual: float      # ||T - L|| of the completion
    changed: int         # Hamming distance to the previous round's labels


@dataclass
class MiscTrace:
    steps: list[MiscStep] = field(default_factory=list)
    initial_labels: np.ndarray | None = None

    def __len__(self):
        return len(self.steps)

    @property
    def converged(self) -> bool:
        return bool(self.steps) and self.steps[-1].changed == 0


def tucker_completer(ranks: Sequence[int], init_rank: int | None = None,
                     stop: StopRule | None = None) -> Completer:
    def complete(t: np.ndarray) -> np.ndarray:
        return reconstruct(hooi(t, ranks, init_rank, stop))
    return complete


def _complete(a, cfg: MiscConfig, completer: Completer | None):
    a, n_classes = as_label_matrix(a, cfg.n_classes)
    n_workers, n_items = a.shape
    if completer is None:
        ranks = cfg.resolve_ranks(n_workers, n_items, n_classes)
        completer = tucker_completer(ranks, cfg.init_rank, cfg.hooi_stop)
    aggregate = get_aggregator(cfg.aggregator, cfg.em)

    raw = binarize(a, n_classes)
    guess = aggregate(a, n_classes)
    trace = MiscTrace(initial_labels=guess.labels)
    completed = None
    for outer in range(cfg.max_outer):
        target = concat_mode1(raw, binarize_prediction(guess))
        completed = completer(target)
        labels = decode_argmax(completed[-1:])[0]
        changed = int(np.count_nonzero(labels != guess.labels))
        trace.steps.append(MiscStep(labels, frobenius_norm(target - completed), changed))
        log.debug("outer %d: residual %.6g, %d labels changed",
                  outer + 1, trace.steps[-1].residual, changed)
        guess = AggregationResult.from_posterior(binarize(labels[None, :], n_classes)[0])
        if changed == 0:
            break
    return decode_argmax(completed), n_classes, aggregate, trace


def complete_only(a, cfg: MiscConfig | None = None, completer: Completer | None = None,
                  ) -> np.ndarray:
    """The densified (workers + 1) x items label matrix, before the final aggregation."""
    dense, *_ = _complete(a, cfg or MiscConfig(), completer)
    return dense


def run_misc(a, cfg: MiscConfig | None = None, completer: Completer | None = None,
             ) -> tuple[AggregationResult, MiscTrace]:
    """Infer item labels with the complete/aggregate loop.

    ``completer`` swaps out the Tucker back-end; it receives the stacked
    one-hot tensor and must return an array of the same shape. Running out of
    outer iterations is not an error: check ``trace.converged``.
    """
    dense, n_classes, aggregate, trace = _complete(a, cfg or MiscConfig(), completer)
    return aggregate(dense, n_classes), trace
