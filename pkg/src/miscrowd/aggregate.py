"""Label aggregation: majority voting and two Dawid-Skene estimators.

Every aggregator maps ``(label_matrix, n_classes)`` to an
:class:`~miscrowd.labels.AggregationResult`; :func:`get_aggregator` looks
them up by name.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import digamma, logsumexp

from .labels import AggregationResult, as_label_matrix

Aggregator = Callable[[np.ndarray, "int | None"], AggregationResult]


@dataclass(frozen=True)
class EmConfig:
    max_iters: int = 100
    tol: float = 1e-6        # max-abs change of item posteriors between iterations
    smoothing: float = 0.01  # pseudo-count added to every confusion cell

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.tol < 0 or self.smoothing < 0:
            raise ValueError("tol and smoothing must be non-negative")


@dataclass(frozen=True)
class ConfusionModel:
    prior: np.ndarray      # (n_classes,)
    confusion: np.ndarray  # (n_workers, true class, reported class)


@dataclass(frozen=True)
class _Observations:
    worker: np.ndarray
    item: np.ndarray
    label: np.ndarray  # 0-based class
    shape: tuple[int, int]
    n_classes: int

    @classmethod
    def from_matrix(cls, a, n_classes=None) -> "_Observations":
        a, n_classes = as_label_matrix(a, n_classes)
        w, i = np.nonzero(a)
        return cls(w, i, a[w, i] - 1, a.shape, n_classes)

    def vote_counts(self) -> np.ndarray:
        counts = np.zeros((self.shape[1], self.n_classes))
        np.add.at(counts, (self.item, self.label), 1.0)
        return counts

    def confusion_counts(self, q: np.ndarray) -> np.ndarray:
        """Soft counts ``n[w, c, d] = sum_i q[i, c] * [A(w, i) = d]``."""
        counts = np.zeros((self.shape[0], self.n_classes, self.n_classes))
        # counts[w, d, :] accumulates q[i, :]; swap to (w, c, d) afterwards
        np.add.at(counts, (self.worker, self.label), q[self.item])
        return counts.transpose(0, 2, 1)

    def item_scores(self, log_prior: np.ndarray, log_conf: np.ndarray) -> np.ndarray:
        """Unnormalized log posteriors ``log p(c) + sum_w log pi_w(c, A(w, i))``."""
        scores = np.tile(log_prior, (self.shape[1], 1))
        np.add.at(scores, self.item, log_conf[self.worker, :, self.label])
        return scores


def _normalize_rows(m: np.ndarray) -> np.ndarray:
    total = m.sum(axis=-1, keepdims=True)
    uniform = np.full_like(m, 1.0 / m.shape[-1])
    return np.divide(m, total, out=uniform, where=total > 0)


def _softmax(scores: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norm = logsumexp(scores, axis=1)
    return np.exp(scores - norm[:, None]), norm


def _log(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(x)


def majority_vote(a, n_classes: int | None = None) -> AggregationResult:
    """Vote shares per item; items nobody labeled get a uniform posterior."""
    obs = _Observations.from_matrix(a, n_classes)
    return AggregationResult.from_posterior(_normalize_rows(obs.vote_counts()))


def _m_step(obs: _Observations, q: np.ndarray, smoothing: float) -> ConfusionModel:
    prior = _normalize_rows(q.sum(axis=0))
    confusion = _normalize_rows(obs.confusion_counts(q) + smoothing)
    return ConfusionModel(prior, confusion)


def ds_log_likelihood(a, model: ConfusionModel, n_classes: int | None = None,
                      smoothing: float = 0.0) -> float:
    """Marginal log-likelihood of the observed labels under ``model``.

    With ``smoothing > 0`` the Dirichlet log-prior term
    ``smoothing * sum log pi`` is added, giving the objective that the
    smoothed EM updates increase monotonically.
    """
    obs = _Observations.from_matrix(a, n_classes)
    log_conf = _log(model.confusion)
    ll = float(logsumexp(obs.item_scores(_log(model.prior), log_conf), axis=1).sum())
    if smoothing > 0:
        ll += smoothing * float(log_conf.sum())
    return ll


def ds_em(a, n_classes: int | None = None, cfg: EmConfig | None = None,
          callback: Callable[[int, ConfusionModel, np.ndarray], None] | None = None,
          ) -> tuple[AggregationResult, ConfusionModel]:
    """Dawid-Skene EM started from majority-vote posteriors.

    One iteration is an M-step on the current posteriors followed by an
    E-step under the new parameters. ``callback(iteration, model, posterior)``
    sees every iterate.
    """
    cfg = cfg or EmConfig()
    obs = _Observations.from_matrix(a, n_classes)
    q = _normalize_rows(obs.vote_counts())
    for it in range(1, cfg.max_iters + 1):
        model = _m_step(obs, q, cfg.smoothing)
        q_new, _ = _softmax(obs.item_scores(_log(model.prior), _log(model.confusion)))
        if callback is not None:
            callback(it, model, q_new)
        delta = float(np.max(np.abs(q_new - q)))
        q = q_new
        if delta < cfg.tol:
            break
    return AggregationResult.from_posterior(q, it), model


def ds_mf(a, n_classes: int | None = None, cfg: EmConfig | None = None,
          callback: Callable[[int, ConfusionModel, np.ndarray], None] | None = None,
          ) -> tuple[AggregationResult, ConfusionModel]:
    """Mean-field variational Dawid-Skene.

    Symmetric Dirichlet priors with concentration ``1 + smoothing`` sit on the
    class prior and on every confusion row. Each round refreshes the Dirichlet
    posteriors from the item posteriors, then the item posteriors from the
    expected log-parameters. The returned model holds posterior means.
    """
    cfg = cfg or EmConfig()
    obs = _Observations.from_matrix(a, n_classes)
    conc = 1.0 + cfg.smoothing
    q = _normalize_rows(obs.vote_counts())
    for it in range(1, cfg.max_iters + 1):
        alpha = conc + q.sum(axis=0)
        beta = conc + obs.confusion_counts(q)
        e_log_prior = digamma(alpha) - digamma(alpha.sum())
        e_log_conf = digamma(beta) - digamma(beta.sum(axis=2, keepdims=True))
        q_new, _ = _softmax(obs.item_scores(e_log_prior, e_log_conf))
        model = ConfusionModel(alpha / alpha.sum(), beta / beta.sum(axis=2, keepdims=True))
        if callback is not None:
            callback(it, model, q_new)
        delta = float(np.max(np.abs(q_new - q)))
        q = q_new
        if delta < cfg.tol:
            break
    return AggregationResult.from_posterior(q, it), model


AGGREGATORS = ("mv", "ds-em", "ds-mf")


def get_aggregator(name: str, cfg: EmConfig | None = None) -> Aggregator:
    """Aggregator by name: ``"mv"``, ``"ds-em"`` or ``"ds-mf"``."""
    if name == "mv":
        return majority_vote
    if name == "ds-em":
        return lambda a, n_classes=None: ds_em(a, n_classes, cfg)[0]
    if name == "ds-mf":
        return lambda a, n_classes=None: ds_mf(a, n_classes, cfg)[0]
    raise ValueError(f"unknown aggregator {name!r}; choose from {', '.join(AGGREGATORS)}")
