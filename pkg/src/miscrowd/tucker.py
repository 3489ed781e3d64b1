"""Truncated HOSVD and higher-order orthogonal iteration (HOOI)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import complete_orthonormal, leading_left_vectors, numerical_rank
from .tensor import as_tensor, frobenius_norm, matricize, multilinear_product

MULTILINEAR_RANK_RTOL = 1e-8


@dataclass(frozen=True)
class TuckerModel:
    core: np.ndarray
    factors: tuple[np.ndarray, ...]
    # residual ||t - reconstruct|| after each HOOI sweep; empty for plain HOSVD
    residuals: tuple[float, ...] = field(default=(), compare=False)

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(self.core.shape)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(u.shape[0] for u in self.factors)


@dataclass(frozen=True)
class StopRule:
    max_sweeps: int = 25
    residual_tol: float = 1e-8

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")
        if self.residual_tol < 0:
            raise ValueError("residual_tol must be non-negative")


def _check_ranks(shape: Sequence[int], ranks: Sequence[int]) -> tuple[int, ...]:
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != len(shape):
        raise ValueError(f"expected {len(shape)} ranks, got {len(ranks)}")
    for k, (r, n) in enumerate(zip(ranks, shape)):
        if not 1 <= r <= n:
            raise ValueError(f"rank {r} for mode {k} must lie in [1, {n}]")
    return ranks


def _leading(m: np.ndarray, r: int) -> np.ndarray:
    # r may exceed min(m.shape) when the other modes are narrow; pad orthonormally
    p = min(r, min(m.shape))
    return complete_orthonormal(leading_left_vectors(m, p), r)


def _transposed(factors):
    return [u.T for u in factors]


def hosvd(t, ranks: Sequence[int]) -> TuckerModel:
    """Truncated higher-order SVD.

    Each factor is computed from an unfolding of ``t`` itself, so the modes
    are independent of each other.
    """
    t = as_tensor(t)
    ranks = _check_ranks(t.shape, ranks)
    factors = tuple(_leading(matricize(t, k), r) for k, r in enumerate(ranks))
    core = multilinear_product(t, _transposed(factors))
    return TuckerModel(core, factors)


def hooi(
    t,
    ranks: Sequence[int],
    init_rank: int | None = None,
    stop: StopRule | None = None,
) -> TuckerModel:
    """Higher-order orthogonal iteration, initialized by a truncated HOSVD.

    The initial HOSVD uses ``init_rank`` in every mode (capped at each mode's
    dimension); by default ``init_rank = max(ranks)``. Sweeps stop after
    ``stop.max_sweeps`` or once the residual decreases by less than
    ``stop.residual_tol``.
    """
    t = as_tensor(t)
    ranks = _check_ranks(t.shape, ranks)
    stop = stop or StopRule()
    if init_rank is None:
        init_rank = max(ranks)
    if not 1 <= init_rank <= max(t.shape):
        raise ValueError(f"initial rank {init_rank} must lie in [1, {max(t.shape)}]")

    factors = list(hosvd(t, [min(init_rank, n) for n in t.shape]).factors)
    residuals: list[float] = []
    for _ in range(stop.max_sweeps):
        for i, r in enumerate(ranks):
            projected = multilinear_product(t, _transposed(factors), skip=i)
            factors[i] = _leading(matricize(projected, i), r)
        core = multilinear_product(t, _transposed(factors))
        residuals.append(frobenius_norm(t - multilinear_product(core, factors)))
        if len(residuals) > 1 and residuals[-2] - residuals[-1] < stop.residual_tol:
            break
    return TuckerModel(core, tuple(factors), tuple(residuals))


def reconstruct(model: TuckerModel) -> np.ndarray:
    return multilinear_product(model.core, model.factors)


def relative_error(model: TuckerModel, t) -> float:
    t = as_tensor(t)
    return frobenius_norm(reconstruct(model) - t) / frobenius_norm(t)


def multilinear_ranks(t, rtol: float = MULTILINEAR_RANK_RTOL) -> tuple[int, ...]:
    t = as_tensor(t)
    return tuple(numerical_rank(matricize(t, k), rtol) for k in range(t.ndim))
