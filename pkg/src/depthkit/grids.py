"""Grid primitives shared by every other module.

All maps are plain 2-D numpy arrays in row-major (row, col) order with the
origin at the top-left pixel:

* depth maps      -- float64, meters, value 0.0 encodes "no data" (KITTI
                     convention); every value must be finite and >= 0
* sparse depth    -- same layout, mostly zero; nonzero pixels are the
                     measured points
* segment maps    -- integer labels, label 0 reserved for unassigned pixels
* gray images     -- float64 values in [0, 1]

Everything here is a pure function of its inputs (plus an explicit seed
where randomness is involved), so results are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Depths below this are clamped wherever a log or an inverse is taken.
DEFAULT_CLAMP_FLOOR = 1e-3


class NoValidDataError(ValueError):
    """An operation needed at least one valid (> 0) pixel and found none."""


def as_depth(d) -> np.ndarray:
    """Coerce to a float64 depth grid and check the depth-map invariants."""
    arr = np.asarray(d, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"depth map must be 2-D and non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("depth map contains non-finite values")
    if np.any(arr < 0):
        raise ValueError("depth map contains negative values")
    return arr


def as_gray(img) -> np.ndarray:
    """Coerce to a float64 grayscale grid with values in [0, 1]."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"gray image must be 2-D and non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("gray image contains non-finite values")
    if arr.min(initial=0.0) < 0.0 or arr.max(initial=0.0) > 1.0:
        raise ValueError("gray image values must lie in [0, 1]")
    return arr


def as_segments(seg) -> np.ndarray:
    """Coerce to an int32 label grid; labels must be non-negative."""
    arr = np.asarray(seg)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"segment map must be 2-D and non-empty, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        flt = np.asarray(arr, dtype=np.float64)
        if not np.all(flt == np.round(flt)):
            raise ValueError("segment labels must be integers")
        arr = flt.astype(np.int32)
    else:
        arr = arr.astype(np.int32, copy=False)
    if np.any(arr < 0):
        raise ValueError("segment labels must be non-negative")
    return arr


def check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def valid_mask(d: np.ndarray) -> np.ndarray:
    """Boolean mask of pixels carrying data (> 0)."""
    return d > 0


def normalize(d) -> np.ndarray:
    """Rescale valid pixels linearly to [0, 1]; invalid pixels stay 0.

    Min and max are taken over valid (> 0) pixels only.  If all valid
    values are equal the range is degenerate and every valid pixel maps
    to 0.5, so downstream segmentation still receives a constant field.
    """
    d = as_depth(d)
    m = valid_mask(d)
    if not m.any():
        raise NoValidDataError("depth map has no valid (> 0) pixels")
    vals = d[m]
    lo = float(vals.min())
    hi = float(vals.max())
    out = np.zeros_like(d)
    if hi == lo:
        out[m] = 0.5
    else:
        out[m] = (vals - lo) / (hi - lo)
    return out


@dataclass(frozen=True)
class SegmentStats:
    """Per-segment depth statistics over valid (> 0) pixels."""

    label: int
    pixel_count: int
    mean: float
    min: float
    max: float


def segment_stats(d, seg) -> list[SegmentStats]:
    """Statistics of `d` per nonzero segment label.

    Pixels where d == 0 are skipped so gaps never bias the means;
    segments that contain no valid pixel at all yield no record.
    Records are returned in ascending label order.
    """
    d = as_depth(d)
    seg = as_segments(seg)
    check_same_shape(d, seg)
    out: list[SegmentStats] = []
    for label in np.unique(seg):
        if label == 0:
            continue
        vals = d[(seg == label) & (d > 0)]
        if vals.size == 0:
            continue
        out.append(
            SegmentStats(
                label=int(label),
                pixel_count=int(vals.size),
                mean=float(vals.mean()),
                min=float(vals.min()),
                max=float(vals.max()),
            )
        )
    return out


def sample_sparse(gt, n: int, seed: int = 0) -> np.ndarray:
    """Pick min(n, #valid) pixels of `gt` uniformly without replacement.

    Returns a sparse map holding the ground-truth values at the sampled
    pixels and 0 elsewhere.  Bit-identical for equal seeds.
    """
    gt = as_depth(gt)
    if n < 0:
        raise ValueError("sample count must be >= 0")
    out = np.zeros_like(gt)
    valid = np.flatnonzero(gt > 0)
    k = min(int(n), valid.size)
    if k == 0:
        return out
    rng = np.random.default_rng(seed)
    chosen = rng.choice(valid, size=k, replace=False)
    out.ravel()[chosen] = gt.ravel()[chosen]
    return out
