"""Thin SVD with a deterministic sign convention.

The factorization itself is LAPACK's (``numpy.linalg.svd``); this module pins
down the parts the rest of the package relies on: thin shape, sorted
non-negative singular values, and singular vector signs chosen so that the
largest-magnitude entry of every left vector is positive (first such entry on
ties).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RANK_RTOL = 1e-12


class SVDError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SvdResult:
    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singular_values) @ self.right.T


def _normalize_signs(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if u.shape[1] == 0:
        return u, v
    pivots = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[pivots, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs, v * signs


def svd(m) -> SvdResult:
    """Thin SVD of a real matrix; ``r = min(rows, cols)`` triples."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"svd expects a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise SVDError("matrix has non-finite entries")
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SVDError(f"SVD did not converge: {exc}") from exc
    u, v = _normalize_signs(u, vt.T)
    return SvdResult(u, s, v)


def leading_left_vectors(m, r: int) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if not 1 <= r <= min(m.shape):
        raise ValueError(f"cannot take {r} leading vectors of a {m.shape[0]}x{m.shape[1]} matrix")
    return svd(m).left[:, :r]


def numerical_rank(m, rtol: float = RANK_RTOL) -> int:
    """Count of singular values above ``rtol * sigma_max`` (0 for a zero matrix)."""
    s = svd(m).singular_values
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


def complete_orthonormal(q: np.ndarray, r: int) -> np.ndarray:
    """Extend orthonormal columns ``q`` (n x p) to ``r`` orthonormal columns.

    The new columns come from the part of the canonical basis left over after
    projecting out ``q``, so the result is deterministic.
    """
    n, p = q.shape
    if r > n:
        raise ValueError(f"cannot fit {r} orthonormal columns in dimension {n}")
    if r <= p:
        return q[:, :r]
    cols = [q[:, j] for j in range(p)]
    for e in np.eye(n):
        if len(cols) == r:
            break
        v = e.copy()
        for _ in range(2):  # second pass restores orthogonality lost to rounding
            for c in cols:
                v -= (c @ v) * c
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            cols.append(v / norm)
    return np.column_stack(cols)
