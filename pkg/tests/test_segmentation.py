import numpy as np
import pytest
from scipy import ndimage

from depthkit.scene import SceneSpec, generate_scene
from depthkit.segmentation import (
    SegmenterConfig,
    segment_field,
    segment_from_depth,
    segment_from_gray,
)


def test_two_plateaus_two_segments():
    v = np.full((6, 8), 0.1)
    v[:, 4:] = 0.9
    seg = segment_field(v, SegmenterConfig(join_threshold=0.2))
    assert seg.max() == 2
    assert len(np.unique(seg[:, :4])) == 1 and len(np.unique(seg[:, 4:])) == 1


def test_constant_field_single_segment():
    seg = segment_field(np.full((5, 5), 0.4), SegmenterConfig(join_threshold=0.1))
    np.testing.assert_array_equal(seg, np.ones((5, 5)))


def test_saturating_threshold_joins_everything():
    v = np.random.default_rng(0).random((10, 10))
    seg = segment_field(v, SegmenterConfig(join_threshold=1.0))
    np.testing.assert_array_equal(seg, np.ones((10, 10)))


def test_depth_staircase_three_segments():
    d = np.zeros((9, 4))
    d[0:3] = 1.0
    d[3:6] = 5.0
    d[6:9] = 9.0
    seg = segment_from_depth(d, SegmenterConfig(join_threshold=0.2))
    # normalized bands are 0 / 0.5 / 1.0; jumps of 0.5 exceed the threshold
    assert seg.max() == 3
    assert len(np.unique(seg[0:3])) == 1
    assert len(np.unique(seg[3:6])) == 1
    assert len(np.unique(seg[6:9])) == 1


def test_constant_depth_single_segment():
    seg = segment_from_depth(np.full((4, 4), 7.0), SegmenterConfig(join_threshold=0.2))
    np.testing.assert_array_equal(seg, np.ones((4, 4)))


def test_gray_plateaus():
    img = np.full((4, 6), 0.2)
    img[:, 3:] = 0.8
    seg = segment_from_gray(img, SegmenterConfig(join_threshold=0.3))
    assert seg.max() == 2


def test_gray_constant_and_saturating_threshold():
    np.testing.assert_array_equal(
        segment_from_gray(np.full((3, 3), 0.7), SegmenterConfig(join_threshold=0.1)),
        np.ones((3, 3)),
    )
    img = np.random.default_rng(3).random((6, 6))
    np.testing.assert_array_equal(
        segment_from_gray(img, SegmenterConfig(join_threshold=1.0)), np.ones((6, 6))
    )


def test_segmentation_refines_oracle_regions():
    # constant regions, identity distortion: with a threshold below the
    # smallest normalized inter-region gap, every produced segment must
    # lie inside exactly one generated region
    spec = SceneSpec(
        width=24, height=18, regions=5, region_kind="constant",
        distortion=((1.0, 0.0),) * 5, seed=13,
    )
    gt, regions, rel = generate_scene(spec)
    levels = np.sort(np.unique((rel - rel.min()) / (rel.max() - rel.min())))
    min_gap = np.diff(levels).min()
    seg = segment_from_depth(rel, SegmenterConfig(join_threshold=min_gap * 0.9))
    for label in range(1, seg.max() + 1):
        assert len(np.unique(regions[seg == label])) == 1


def test_affine_invariance_of_depth_segmentation():
    rng = np.random.default_rng(21)
    d = rng.uniform(1.0, 9.0, (12, 12))
    cfg = SegmenterConfig(join_threshold=0.15)
    base = segment_from_depth(d, cfg)
    np.testing.assert_array_equal(segment_from_depth(3.7 * d + 1.2, cfg), base)


def test_labels_dense_and_connected():
    rng = np.random.default_rng(8)
    v = rng.random((16, 16))
    for connectivity in (4, 8):
        cfg = SegmenterConfig(join_threshold=0.25, connectivity=connectivity)
        seg = segment_field(v, cfg)
        labels = np.unique(seg)
        assert labels.max() == len(labels[labels > 0])  # dense 1..K
        structure = ndimage.generate_binary_structure(2, 1 if connectivity == 4 else 2)
        for k in labels[labels > 0]:
            _, n = ndimage.label(seg == k, structure=structure)
            assert n == 1


def test_min_segment_pixels_suppresses_to_gap():
    v = np.zeros((5, 5))
    v[2, 2] = 1.0  # isolated single-pixel component
    seg = segment_field(v, SegmenterConfig(join_threshold=0.5, min_segment_pixels=2))
    assert seg[2, 2] == 0
    assert seg.max() == 1


def test_eight_connectivity_joins_diagonals():
    v = np.array([[1.0, 0.0], [0.0, 1.0]])
    cfg4 = SegmenterConfig(join_threshold=0.5, connectivity=4)
    cfg8 = SegmenterConfig(join_threshold=0.5, connectivity=8)
    assert segment_field(v, cfg4).max() == 4  # no neighbor pair joins
    seg8 = segment_field(v, cfg8)
    assert seg8.max() == 2
    assert seg8[0, 0] == seg8[1, 1] and seg8[0, 1] == seg8[1, 0]


def test_label_order_is_row_major_first_pixel():
    v = np.full((3, 6), 0.9)
    v[:, :2] = 0.1
    v[:, 4:] = 0.5
    seg = segment_field(v, SegmenterConfig(join_threshold=0.2))
    assert seg[0, 0] == 1 and seg[0, 2] == 2 and seg[0, 4] == 3


def test_config_validation():
    with pytest.raises(ValueError):
        SegmenterConfig(join_threshold=0.0)
    with pytest.raises(ValueError):
        SegmenterConfig(join_threshold=1.5)
    with pytest.raises(ValueError):
        SegmenterConfig(min_segment_pixels=0)
    with pytest.raises(ValueError):
        SegmenterConfig(connectivity=6)


def test_field_range_validation():
    with pytest.raises(ValueError):
        segment_field(np.array([[0.5, 1.5]]))
