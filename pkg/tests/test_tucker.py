import numpy as np
import pytest

from miscrowd.labels import binarize
from miscrowd.tensor import frobenius_norm, multilinear_product
from miscrowd.tucker import (
    StopRule,
    TuckerModel,
    hooi,
    hosvd,
    multilinear_ranks,
    reconstruct,
    relative_error,
)
from conftest import EXAMPLE1_TENSOR, EXAMPLE2_MATRIX


def _orthonormal(model, tol=1e-10):
    return all(np.abs(u.T @ u - np.eye(u.shape[1])).max() <= tol for u in model.factors)


def _random_tucker(rng, shape, ranks):
    core = rng.normal(size=ranks)
    factors = [np.linalg.qr(rng.normal(size=(n, r)))[0] for n, r in zip(shape, ranks)]
    return multilinear_product(core, factors)


def test_hosvd_exact_at_multilinear_ranks(rng):
    t = _random_tucker(rng, (6, 5, 4), (2, 3, 2))
    ranks = multilinear_ranks(t)
    assert ranks == (2, 3, 2)
    model = hosvd(t, ranks)
    assert relative_error(model, t) <= 1e-10
    assert _orthonormal(model)


def test_example2_exact():
    t = binarize(EXAMPLE2_MATRIX, 4)
    assert multilinear_ranks(t) == (1, 3, 3)
    assert relative_error(hosvd(t, (1, 3, 3)), t) <= 1e-10


def test_rank_one_core(rng):
    a, b, c = rng.normal(size=4), rng.normal(size=3), rng.normal(size=5)
    t = np.einsum("i,j,k->ijk", a, b, c)
    model = hosvd(t, (1, 1, 1))
    assert model.core.shape == (1, 1, 1)
    expected = np.linalg.norm(a) * np.linalg.norm(b) * np.linalg.norm(c)
    assert abs(abs(model.core.item()) - expected) <= 1e-12 * expected
    assert relative_error(model, t) <= 1e-12


@pytest.mark.parametrize("ranks", [(0, 1, 1), (3, 1, 1), (1, 1)])
def test_rank_out_of_range(ranks):
    with pytest.raises(ValueError):
        hosvd(np.ones((2, 3, 4)), ranks)


def test_hooi_fixed_point(rng):
    t = _random_tucker(rng, (6, 5, 4), (2, 2, 2))
    model = hooi(t, (2, 2, 2), stop=StopRule(max_sweeps=1))
    assert model.residuals[0] <= 1e-10 * frobenius_norm(t)


def test_hooi_beats_truncated_hosvd(rng):
    t = rng.normal(size=(6, 5, 4))
    h = frobenius_norm(reconstruct(hosvd(t, (2, 2, 2))) - t)
    model = hooi(t, (2, 2, 2))
    assert frobenius_norm(reconstruct(model) - t) <= h + 1e-12
    assert _orthonormal(model)


def test_hooi_monotone(rng):
    t = rng.normal(size=(6, 5, 4))
    model = hooi(t, (2, 2, 2), stop=StopRule(max_sweeps=10, residual_tol=0.0))
    assert len(model.residuals) == 10
    assert np.all(np.diff(model.residuals) <= 1e-12)


def test_hooi_last_residual_matches_model(rng):
    t = rng.normal(size=(5, 4, 3))
    model = hooi(t, (2, 2, 2))
    assert model.residuals[-1] == pytest.approx(frobenius_norm(reconstruct(model) - t), abs=1e-12)


def test_hooi_stops_on_small_decrease(rng):
    t = _random_tucker(rng, (5, 4, 3), (2, 2, 2))
    model = hooi(t, (2, 2, 2), stop=StopRule(max_sweeps=25, residual_tol=1e-8))
    assert len(model.residuals) == 2


def test_hooi_small_init_rank_pads(rng):
    # init rank 1 leaves the other modes one column wide in the first sweep,
    # narrower than the requested rank 3
    t = rng.normal(size=(6, 5, 4))
    model = hooi(t, (3, 3, 3), init_rank=1)
    assert model.ranks == (3, 3, 3)
    assert _orthonormal(model)


def test_hooi_init_rank_errors():
    with pytest.raises(ValueError):
        hooi(np.ones((2, 3, 4)), (1, 1, 1), init_rank=0)
    with pytest.raises(ValueError):
        hooi(np.ones((2, 3, 4)), (1, 1, 1), init_rank=5)


def test_degenerate_rank_request_pads():
    t = binarize(EXAMPLE2_MATRIX, 4)  # multilinear ranks (1, 3, 3)
    model = hooi(t, (2, 3, 4))
    assert model.ranks == (2, 3, 4)
    assert _orthonormal(model)
    assert relative_error(model, t) <= 1e-10


def test_stop_rule_validation():
    with pytest.raises(ValueError):
        StopRule(max_sweeps=0)
    with pytest.raises(ValueError):
        StopRule(residual_tol=-1)


def test_reconstruct_trivial(rng):
    t = rng.normal(size=(2, 3, 2))
    ident = TuckerModel(t, tuple(np.eye(n) for n in t.shape))
    np.testing.assert_array_equal(reconstruct(ident), t)
    zero = TuckerModel(np.zeros((1, 1, 1)), tuple(np.ones((n, 1)) for n in t.shape))
    assert not reconstruct(zero).any()
    full = hosvd(t, t.shape)
    assert relative_error(full, t) <= 1e-10


def test_multilinear_ranks_examples():
    assert multilinear_ranks(EXAMPLE1_TENSOR) == (2, 3, 3)
    assert multilinear_ranks(np.zeros((2, 3, 4))) == (0, 0, 0)


@pytest.mark.parametrize("seed", range(5))
def test_perfect_labeling_ranks(seed):
    r = np.random.default_rng(seed)
    n_items, n_classes = r.integers(2, 7), r.integers(2, 6)
    row = r.integers(1, n_classes + 1, size=n_items)
    row[: min(n_items, n_classes)] = np.arange(1, min(n_items, n_classes) + 1)  # use enough classes
    a = np.tile(row, (r.integers(1, 5), 1))
    m = min(n_items, n_classes)
    assert multilinear_ranks(binarize(a, n_classes)) == (1, m, m)
