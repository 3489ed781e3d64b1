"""Dense tensor primitives.

Tensors are plain ``numpy.ndarray`` objects of dtype float64. The linear
element order is first-index-fastest (``order="F"``), so the k-mode
unfolding below is a reshape with no permutation of the remaining indices:
element ``t[i_1, ..., i_d]`` lands in row ``i_k`` and column

    j = sum_{p != k} i_p * J_p,    J_p = prod_{m < p, m != k} I_m

(0-based here; the 1-based form adds one to every index). Modes are numbered
like numpy axes, starting at 0.

None of the functions modify their inputs.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


def as_tensor(t) -> np.ndarray:
    """Return ``t`` as a float64 array of order >= 1 with no empty dimensions."""
    arr = np.asarray(t, dtype=np.float64)
    if arr.ndim < 1:
        raise ValueError("a tensor needs at least one mode")
    if min(arr.shape) < 1:
        raise ValueError(f"tensor dimensions must be positive, got {arr.shape}")
    return arr


def _check_mode(t: np.ndarray, k: int) -> None:
    if not 0 <= k < t.ndim:
        raise ValueError(f"mode {k} out of range for a {t.ndim}-way tensor")


def linear_index(index: Sequence[int], shape: Sequence[int]) -> int:
    """Offset of ``index`` in the first-index-fastest layout of ``shape``."""
    offset, stride = 0, 1
    for i, n in zip(index, shape):
        offset += i * stride
        stride *= n
    return offset


def matricize(t, k: int) -> np.ndarray:
    """k-mode unfolding: the k-mode fibers become the columns."""
    t = as_tensor(t)
    _check_mode(t, k)
    return np.reshape(np.moveaxis(t, k, 0), (t.shape[k], -1), order="F")


def tensorize(m, shape: Sequence[int], k: int) -> np.ndarray:
    """Fold a k-mode unfolding back into a tensor of the given shape."""
    m = np.asarray(m, dtype=np.float64)
    shape = tuple(int(n) for n in shape)
    if not 0 <= k < len(shape):
        raise ValueError(f"mode {k} out of range for a {len(shape)}-way tensor")
    rest = shape[:k] + shape[k + 1:]
    if m.shape != (shape[k], int(np.prod(rest, dtype=np.int64))):
        raise ValueError(f"matrix of shape {m.shape} cannot fold into {shape} along mode {k}")
    return np.moveaxis(np.reshape(m, (shape[k],) + rest, order="F"), 0, k)


def mode_product(g, k: int, u) -> np.ndarray:
    """k-mode product ``g x_k u``; mode k of the result has ``u.shape[0]`` entries."""
    g = as_tensor(g)
    _check_mode(g, k)
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2 or u.shape[1] != g.shape[k]:
        raise ValueError(
            f"matrix of shape {u.shape} does not match mode {k} of size {g.shape[k]}"
        )
    return np.moveaxis(np.tensordot(u, g, axes=(1, k)), 0, k)


def multilinear_product(g, factors: Sequence, skip: int | None = None) -> np.ndarray:
    """Full multilinear product ``[[g; U_0, ..., U_{d-1}]]``.

    With ``skip`` set, that mode is left untouched and its factor entry is
    ignored (it may be ``None``).
    """
    g = as_tensor(g)
    if len(factors) != g.ndim:
        raise ValueError(f"expected {g.ndim} factors, got {len(factors)}")
    out = g
    for k, u in enumerate(factors):
        if k != skip:
            out = mode_product(out, k, u)
    return out


def concat_mode1(a, s) -> np.ndarray:
    """Stack slice ``s`` (1 x I_2 x ...) below ``a`` along the first mode."""
    a, s = as_tensor(a), as_tensor(s)
    if a.ndim != s.ndim or a.shape[1:] != s.shape[1:]:
        raise ValueError(f"cannot append slice of shape {s.shape} to tensor of shape {a.shape}")
    return np.concatenate([a, s], axis=0)


def slice_mode1(t, w: int) -> np.ndarray:
    """The mode-1 slice ``t[w]`` kept as a 1 x I_2 x ... tensor."""
    t = as_tensor(t)
    if not -t.shape[0] <= w < t.shape[0]:
        raise IndexError(f"slice {w} out of range for first mode of size {t.shape[0]}")
    return t[w:w + 1] if w != -1 else t[-1:]


def frobenius_norm(t) -> float:
    return float(np.sqrt(np.sum(np.square(np.asarray(t, dtype=np.float64)))))


def subtract(a, b) -> np.ndarray:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a - b
