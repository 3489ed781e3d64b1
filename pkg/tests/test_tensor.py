import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from miscrowd.tensor import (
    concat_mode1,
    frobenius_norm,
    linear_index,
    matricize,
    mode_product,
    multilinear_product,
    slice_mode1,
    subtract,
    tensorize,
)
from oracles import mode_product_by_sum, unfold_by_formula

shapes = st.lists(st.integers(1, 5), min_size=1, max_size=4).map(tuple)
tensors = shapes.flatmap(
    lambda s: arrays(np.float64, s, elements=st.floats(-10, 10, allow_nan=False)))


def test_linear_order_is_first_index_fastest():
    t = np.arange(24.0).reshape((2, 3, 4), order="F")
    for idx in np.ndindex(t.shape):
        assert t[idx] == linear_index(idx, t.shape)


def test_matricize_matrix_mode1_is_identity():
    m = np.arange(6.0).reshape(2, 3)
    np.testing.assert_array_equal(matricize(m, 0), m)


def test_matricize_example1_entries(example1_tensor):
    m = matricize(example1_tensor, 0)
    assert m.shape == (2, 12)
    np.testing.assert_array_equal(m, unfold_by_formula(example1_tensor, 1))
    # 1-based entries (1,1), (1,1+2*3), (1,3+(4-1)*3)
    assert m[0, 0] == 1
    assert m[0, 6] == 0
    assert m[0, 11] == 1


@pytest.mark.parametrize("k", [0, 1, 2])
def test_tensorize_example1_roundtrip(example1_tensor, k):
    m = matricize(example1_tensor, k)
    np.testing.assert_array_equal(tensorize(m, example1_tensor.shape, k), example1_tensor)


def test_tensorize_random_against_formula(rng):
    t = rng.normal(size=(2, 3, 4))
    for k in range(3):
        m = unfold_by_formula(t, k + 1)
        np.testing.assert_array_equal(tensorize(m, t.shape, k), t)
        np.testing.assert_array_equal(matricize(t, k), m)


def test_tensorize_zero():
    assert not tensorize(np.zeros((3, 8)), (2, 3, 4), 1).any()


def test_tensorize_shape_mismatch():
    with pytest.raises(ValueError):
        tensorize(np.zeros((3, 7)), (2, 3, 4), 1)


def test_mode_out_of_range(example1_tensor):
    with pytest.raises(ValueError):
        matricize(example1_tensor, 3)
    with pytest.raises(ValueError):
        mode_product(example1_tensor, -1, np.eye(2))


def test_mode_product_identity(rng):
    g = rng.normal(size=(3, 4, 2))
    np.testing.assert_array_equal(mode_product(g, 1, np.eye(4)), g)


def test_mode_product_ones():
    out = mode_product(np.ones((2, 2, 2)), 0, np.array([[1.0, 1.0]]))
    assert out.shape == (1, 2, 2)
    np.testing.assert_array_equal(out, np.full((1, 2, 2), 2.0))


def test_mode_product_matches_summation(rng):
    g = rng.normal(size=(3, 2, 4))
    u = rng.normal(size=(5, 2))
    np.testing.assert_allclose(mode_product(g, 1, u), mode_product_by_sum(g, 1, u), rtol=1e-12)


def test_mode_product_dimension_mismatch(rng):
    with pytest.raises(ValueError):
        mode_product(rng.normal(size=(2, 3)), 1, np.eye(2))


def test_multilinear_identity(rng):
    g = rng.normal(size=(2, 3, 4))
    np.testing.assert_array_equal(multilinear_product(g, [np.eye(n) for n in g.shape]), g)


def test_multilinear_order_independent(rng):
    g = rng.normal(size=(2, 3, 4))
    us = [rng.normal(size=(5, n)) for n in g.shape]
    ref = multilinear_product(g, us)
    other = mode_product(mode_product(mode_product(g, 1, us[1]), 0, us[0]), 2, us[2])
    np.testing.assert_allclose(other, ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max())


def test_multilinear_rank_one_outer_product(rng):
    a, b, c = rng.normal(size=3), rng.normal(size=4), rng.normal(size=2)
    out = multilinear_product(np.ones((1, 1, 1)), [a[:, None], b[:, None], c[:, None]])
    brute = np.zeros((3, 4, 2))
    for i, j, k in np.ndindex(brute.shape):
        brute[i, j, k] = a[i] * b[j] * c[k]
    np.testing.assert_allclose(out, brute, rtol=1e-14)


def test_multilinear_factor_count():
    with pytest.raises(ValueError):
        multilinear_product(np.ones((2, 2, 2)), [np.eye(2)] * 2)


def test_concat_and_slice(example1_tensor):
    s = np.zeros((1, 3, 4))
    t = concat_mode1(example1_tensor, s)
    assert t.shape == (3, 3, 4)
    assert not t[2].any()
    np.testing.assert_array_equal(slice_mode1(t, 2), s)
    np.testing.assert_array_equal(slice_mode1(t, -1), s)


def test_concat_copies():
    x = np.arange(4.0).reshape(1, 2, 2)
    t = concat_mode1(x, x)
    np.testing.assert_array_equal(t[0], t[1])


def test_concat_mismatch(example1_tensor):
    with pytest.raises(ValueError):
        concat_mode1(example1_tensor, np.zeros((1, 3, 3)))


def test_norm_and_subtract(example1_tensor):
    assert frobenius_norm(example1_tensor) == 2.0
    assert not subtract(example1_tensor, example1_tensor).any()
    with pytest.raises(ValueError):
        subtract(example1_tensor, example1_tensor[:1])


@settings(max_examples=60, deadline=None)
@given(tensors, st.data())
def test_unfold_fold_roundtrip_property(t, data):
    k = data.draw(st.integers(0, t.ndim - 1))
    np.testing.assert_array_equal(tensorize(matricize(t, k), t.shape, k), t)


@settings(max_examples=60, deadline=None)
@given(tensors, st.data())
def test_mode_product_unfolding_property(t, data):
    k = data.draw(st.integers(0, t.ndim - 1))
    rows = data.draw(st.integers(1, 4))
    u = data.draw(arrays(np.float64, (rows, t.shape[k]), elements=st.floats(-5, 5)))
    lhs = matricize(mode_product(t, k, u), k)
    rhs = u @ matricize(t, k)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(rhs).max()))


@settings(max_examples=60, deadline=None)
@given(tensors)
def test_norm_mode_invariance_property(t):
    n = frobenius_norm(t)
    for k in range(t.ndim):
        assert abs(frobenius_norm(matricize(t, k)) - n) <= 1e-12 * max(n, 1.0)
