"""Region segmentation of normalized depth or grayscale fields.

Externally produced segment maps (loaded through :mod:`depthkit.io_formats`)
are first-class inputs everywhere downstream; the region grower here exists
so the pipeline runs standalone and tests stay hermetic.  It is a plain
threshold-joined flood fill: adjacent pixels belong to the same segment when
their values differ by at most ``join_threshold``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .grids import as_depth, as_gray, normalize


@dataclass(frozen=True)
class SegmenterConfig:
    join_threshold: float = 0.1
    min_segment_pixels: int = 1
    connectivity: int = 4

    def __post_init__(self):
        if not (0.0 < self.join_threshold <= 1.0):
            raise ValueError("join_threshold must be in (0, 1]")
        if self.min_segment_pixels < 1:
            raise ValueError("min_segment_pixels must be >= 1")
        if self.connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")


def segment_field(values, cfg: SegmenterConfig = SegmenterConfig()) -> np.ndarray:
    """Grow segments over a [0, 1] field.

    Neighbors p, q join the same segment iff |v(p) - v(q)| <= join_threshold.
    Components smaller than min_segment_pixels are relabeled 0 (gap);
    surviving labels are renumbered densely from 1, ordered by their first
    row-major pixel, so output labelings are reproducible byte for byte.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 2 or v.size == 0:
        raise ValueError(f"field must be 2-D and non-empty, got shape {v.shape}")
    if not np.all(np.isfinite(v)) or v.min() < 0.0 or v.max() > 1.0:
        raise ValueError("field values must be finite and lie in [0, 1]")

    h, w = v.shape
    n = h * w
    idx = np.arange(n).reshape(h, w)

    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []

    def join(a_idx, b_idx, a_val, b_val):
        ok = np.abs(a_val - b_val) <= cfg.join_threshold
        rows.append(a_idx[ok])
        cols.append(b_idx[ok])

    join(idx[:, :-1], idx[:, 1:], v[:, :-1], v[:, 1:])
    join(idx[:-1, :], idx[1:, :], v[:-1, :], v[1:, :])
    if cfg.connectivity == 8:
        join(idx[:-1, :-1], idx[1:, 1:], v[:-1, :-1], v[1:, 1:])
        join(idx[:-1, 1:], idx[1:, :-1], v[:-1, 1:], v[1:, :-1])

    i = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    j = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
    graph = coo_matrix((np.ones(i.size, dtype=np.int8), (i, j)), shape=(n, n))
    n_comp, comp = connected_components(graph, directed=False)

    sizes = np.bincount(comp, minlength=n_comp)
    comp_ids, first_idx = np.unique(comp, return_index=True)
    keep = sizes[comp_ids] >= cfg.min_segment_pixels
    kept_ids = comp_ids[keep]
    kept_first = first_idx[keep]
    order = np.argsort(kept_first, kind="stable")

    relabel = np.zeros(n_comp, dtype=np.int32)
    relabel[kept_ids[order]] = np.arange(1, kept_ids.size + 1, dtype=np.int32)
    return relabel[comp].reshape(h, w)


def segment_from_depth(d_rel, cfg: SegmenterConfig = SegmenterConfig()) -> np.ndarray:
    """Normalize a relative depth map, then segment the normalized field.

    Because of the normalization the result is invariant to positive
    affine rescaling of the raw depth values.
    """
    return segment_field(normalize(as_depth(d_rel)), cfg)


def segment_from_gray(img, cfg: SegmenterConfig = SegmenterConfig()) -> np.ndarray:
    """Segment a grayscale image directly (no normalization)."""
    return segment_field(as_gray(img), cfg)
