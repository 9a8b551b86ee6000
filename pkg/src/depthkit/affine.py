"""Affine-transform baselines: map relative depth to metric depth.

Fits depth_metric ~ a * depth_relative + b against the sparse points,
either with one global pair (a, b) or independently per segment.  Fits are
least squares via the closed-form 2x2 normal equations with mean-centering
for conditioning.

Degenerate cases get bounded fallbacks instead of exploding scales:
a segment with no sparse points keeps the relative depth unchanged
(identity), and a fit over one point or a constant predictor collapses to
bias-only (a=0, b=mean of targets).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import (
    DEFAULT_CLAMP_FLOOR,
    NoValidDataError,
    as_depth,
    as_segments,
    check_same_shape,
)

FIT_OK = "fitted"
FIT_IDENTITY = "identity"
FIT_BIAS = "degenerate-bias"


@dataclass(frozen=True)
class AffineParams:
    a: float  # dimensionless scale
    b: float  # meters


@dataclass(frozen=True)
class SegmentFit:
    label: int
    params: AffineParams
    status: str
    point_count: int


@dataclass(frozen=True)
class SegmentAffine:
    """Per-segment fits plus the global fallback used for gap (label-0) pixels."""

    fits: tuple[SegmentFit, ...]
    fallback: AffineParams

    def by_label(self) -> dict[int, SegmentFit]:
        return {f.label: f for f in self.fits}


def _fit_points(x: np.ndarray, y: np.ndarray) -> tuple[float, float, str]:
    """Least-squares (a, b) for y ~ a*x + b; bias-only when rank-deficient."""
    if x.size == 1 or np.all(x == x[0]):
        return 0.0, float(y.mean()), FIT_BIAS
    xm = float(x.mean())
    ym = float(y.mean())
    xc = x - xm
    denom = float((xc * xc).sum())
    if denom == 0.0:
        return 0.0, ym, FIT_BIAS
    a = float((xc * (y - ym)).sum()) / denom
    return a, ym - a * xm, FIT_OK


def _overlap(d_rel: np.ndarray, d_s: np.ndarray) -> np.ndarray:
    return (d_s > 0) & (d_rel > 0)


def fit_global(d_rel, d_s) -> AffineParams:
    """One (a, b) minimizing the squared distance to all sparse points.

    Uses points where both the sparse map and the relative map are valid;
    raises when no such point exists.
    """
    d_rel = as_depth(d_rel)
    d_s = as_depth(d_s)
    check_same_shape(d_rel, d_s)
    sel = _overlap(d_rel, d_s)
    if not sel.any():
        raise NoValidDataError("no sparse point overlaps valid relative depth")
    a, b, _ = _fit_points(d_rel[sel], d_s[sel])
    return AffineParams(a, b)


def fit_segmentwise(d_rel, seg, d_s) -> SegmentAffine:
    """Independent least-squares fit per nonzero segment.

    Segments without sparse points keep the relative value (identity);
    one-point or constant-predictor segments get a bias-only fit.  The
    global fit over all points is stored as the fallback for gap pixels
    (identity when no points exist anywhere).
    """
    d_rel = as_depth(d_rel)
    seg = as_segments(seg)
    d_s = as_depth(d_s)
    check_same_shape(d_rel, seg)
    check_same_shape(d_rel, d_s)

    overlap = _overlap(d_rel, d_s)
    if overlap.any():
        ga, gb, _ = _fit_points(d_rel[overlap], d_s[overlap])
        fallback = AffineParams(ga, gb)
    else:
        fallback = AffineParams(1.0, 0.0)

    fits = []
    for label in np.unique(seg):
        k = int(label)
        if k == 0:
            continue
        sel = overlap & (seg == k)
        n = int(np.count_nonzero(sel))
        if n == 0:
            fits.append(SegmentFit(k, AffineParams(1.0, 0.0), FIT_IDENTITY, 0))
            continue
        a, b, status = _fit_points(d_rel[sel], d_s[sel])
        fits.append(SegmentFit(k, AffineParams(a, b), status, n))
    return SegmentAffine(tuple(fits), fallback)


def apply_affine(
    d_rel,
    params: AffineParams | SegmentAffine,
    seg=None,
    clamp_floor: float = DEFAULT_CLAMP_FLOOR,
) -> np.ndarray:
    """Evaluate a * d + b per pixel, clamped below at clamp_floor.

    With SegmentAffine each pixel uses its segment's fit; label-0 pixels
    fall back to the stored global fit.
    """
    d_rel = as_depth(d_rel)
    if isinstance(params, AffineParams):
        out = params.a * d_rel + params.b
        return np.maximum(out, clamp_floor)

    if seg is None:
        raise ValueError("segment-wise params require a segment map")
    seg = as_segments(seg)
    check_same_shape(d_rel, seg)
    by_label = params.by_label()
    labels = [int(v) for v in np.unique(seg) if v != 0]
    missing = [k for k in labels if k not in by_label]
    if missing:
        raise ValueError(f"segment fit does not cover labels {missing}")

    max_label = max(labels, default=0)
    a = np.full(max_label + 1, params.fallback.a)
    b = np.full(max_label + 1, params.fallback.b)
    for k in labels:
        a[k] = by_label[k].params.a
        b[k] = by_label[k].params.b
    out = a[seg] * d_rel + b[seg]
    return np.maximum(out, clamp_floor)
