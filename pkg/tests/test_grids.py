import numpy as np
import pytest

from depthkit.grids import (
    NoValidDataError,
    normalize,
    sample_sparse,
    segment_stats,
)
from depthkit.reference import normalize_ref, segment_stats_ref


def test_normalize_linear():
    d = np.array([[2.0, 4.0, 6.0]])
    np.testing.assert_array_equal(normalize(d), [[0.0, 0.5, 1.0]])


def test_normalize_degenerate_constant():
    d = np.full((3, 3), 3.0)
    np.testing.assert_array_equal(normalize(d), np.full((3, 3), 0.5))


def test_normalize_degenerate_with_invalid_pixels():
    d = np.array([[3.0, 0.0], [0.0, 3.0]])
    np.testing.assert_array_equal(normalize(d), [[0.5, 0.0], [0.0, 0.5]])


def test_normalize_invalid_pixels_stay_zero():
    d = np.array([[0.0, 1.0], [5.0, 9.0]])
    out = normalize(d)
    assert out[0, 0] == 0.0
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_normalize_empty_map_raises():
    with pytest.raises(NoValidDataError):
        normalize(np.zeros((4, 4)))


def test_normalize_matches_loop_oracle():
    rng = np.random.default_rng(11)
    d = rng.uniform(0.5, 12.0, (8, 8))
    d[rng.random((8, 8)) < 0.2] = 0.0
    np.testing.assert_allclose(normalize(d), normalize_ref(d), atol=1e-15)


def test_normalize_rejects_bad_values():
    with pytest.raises(ValueError):
        normalize(np.array([[1.0, -2.0]]))
    with pytest.raises(ValueError):
        normalize(np.array([[1.0, np.nan]]))


def test_segment_stats_constant_segment():
    d = np.full((4, 4), 2.0)
    seg = np.ones((4, 4), dtype=int)
    (rec,) = segment_stats(d, seg)
    assert (rec.label, rec.pixel_count) == (1, 16)
    assert rec.mean == rec.min == rec.max == 2.0


def test_segment_stats_two_values():
    d = np.array([[1.0, 3.0]])
    seg = np.array([[1, 1]])
    (rec,) = segment_stats(d, seg)
    assert rec.mean == 2.0 and rec.min == 1.0 and rec.max == 3.0


def test_segment_stats_skips_invalid_pixels():
    d = np.array([[2.0, 0.0, 4.0]])
    seg = np.array([[1, 1, 1]])
    (rec,) = segment_stats(d, seg)
    assert rec.pixel_count == 2 and rec.mean == 3.0


def test_segment_stats_matches_accumulation_oracle():
    rng = np.random.default_rng(5)
    d = rng.uniform(0.0, 10.0, (10, 10))
    d[d < 1.0] = 0.0
    seg = rng.integers(0, 5, (10, 10))
    ref = segment_stats_ref(d, seg)
    recs = segment_stats(d, seg)
    assert sorted(ref) == [r.label for r in recs]
    for r in recs:
        e = ref[r.label]
        assert r.pixel_count == e["pixel_count"]
        np.testing.assert_allclose(
            [r.mean, r.min, r.max], [e["mean"], e["min"], e["max"]], atol=1e-12
        )
        assert r.min <= r.mean <= r.max


def test_segment_stats_shape_mismatch():
    with pytest.raises(ValueError):
        segment_stats(np.ones((2, 2)), np.ones((3, 3), dtype=int))


def test_sample_sparse_zero_points():
    gt = np.ones((5, 5))
    assert not sample_sparse(gt, 0).any()


def test_sample_sparse_all_points_copies_map():
    rng = np.random.default_rng(2)
    gt = rng.uniform(1.0, 5.0, (6, 6))
    np.testing.assert_array_equal(sample_sparse(gt, 100, seed=1), gt)


def test_sample_sparse_exact_count_and_values():
    rng = np.random.default_rng(3)
    gt = rng.uniform(1.0, 5.0, (100, 100))
    sp = sample_sparse(gt, 50, seed=7)
    nz = sp > 0
    assert nz.sum() == 50
    np.testing.assert_array_equal(sp[nz], gt[nz])


def test_sample_sparse_subset_of_valid_and_deterministic():
    rng = np.random.default_rng(4)
    gt = rng.uniform(1.0, 5.0, (20, 20))
    gt[rng.random((20, 20)) < 0.5] = 0.0
    a = sample_sparse(gt, 30, seed=9)
    b = sample_sparse(gt, 30, seed=9)
    np.testing.assert_array_equal(a, b)
    assert not a[gt == 0].any()


def test_sample_sparse_negative_count_raises():
    with pytest.raises(ValueError):
        sample_sparse(np.ones((2, 2)), -1)
