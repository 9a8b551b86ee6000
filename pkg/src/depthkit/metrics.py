"""Depth evaluation metrics.

All metrics run over the valid set V = {pixels with gt > 0}.  Predictions
are clamped below at 1e-3 m before any inverse or logarithm so those
metrics stay defined at pred = 0.  Inverse metrics are reported in 1/km.

    rmse   sqrt(mean (gt - pred)^2)                       [m]
    mae    mean |gt - pred|                               [m]
    irmse  sqrt(mean (1/gt - 1/pred)^2) * 1000            [1/km]
    imae   mean |1/gt - 1/pred| * 1000                    [1/km]
    silog  mean(l^2) - (mean l)^2,  l = ln pred - ln gt   [-]
    rel    mean |(gt - pred) / gt|                        [-]
    delta  fraction of pixels with max(gt/pred, pred/gt) < tau

The segment-scale variant computes silog independently inside each segment
and averages the per-segment values, so depth errors *between* segments do
not register; segments with fewer than two valid pixels are skipped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import (
    DEFAULT_CLAMP_FLOOR,
    NoValidDataError,
    as_depth,
    as_segments,
    check_same_shape,
)

DEFAULT_TAUS = (1.25, 1.25**2, 1.25**3)

METRIC_NAMES = ("rmse", "mae", "irmse", "imae", "silog", "rel")


@dataclass(frozen=True)
class MetricReport:
    rmse: float
    mae: float
    irmse: float
    imae: float
    silog: float
    rel: float
    delta: dict[float, float] = field(default_factory=dict)
    silog_segment: float | None = None
    valid_pixel_count: int = 0

    def as_dict(self, scale100: bool = False) -> dict[str, float]:
        """Flat name -> value mapping; scale100 multiplies every metric by
        100 for presentation (the raw values are untouched)."""
        f = 100.0 if scale100 else 1.0
        out = {name: getattr(self, name) * f for name in METRIC_NAMES}
        for tau, frac in self.delta.items():
            out[f"delta_{tau:g}"] = frac * f
        if self.silog_segment is not None:
            out["silog_segment"] = self.silog_segment * f
        out["valid_pixel_count"] = self.valid_pixel_count
        return out


def _valid_pair(pred, gt) -> tuple[np.ndarray, np.ndarray]:
    pred = as_depth(pred)
    gt = as_depth(gt)
    check_same_shape(pred, gt)
    v = gt > 0
    if not v.any():
        raise NoValidDataError("ground truth has no valid (> 0) pixels")
    return pred[v], gt[v]


def _silog_vals(p: np.ndarray, g: np.ndarray) -> float:
    l = np.log(np.maximum(p, DEFAULT_CLAMP_FLOOR)) - np.log(g)
    return float(np.mean(l * l) - np.mean(l) ** 2)


def silog(pred, gt) -> float:
    """Scale-invariant log error: the variance of per-pixel log errors."""
    p, g = _valid_pair(pred, gt)
    return _silog_vals(p, g)


def silog_segment(pred, gt, seg) -> float:
    """Unweighted mean of per-segment silog values.

    Segments (nonzero labels) with fewer than 2 valid pixels are excluded;
    raises when no segment qualifies.
    """
    pred = as_depth(pred)
    gt = as_depth(gt)
    seg = as_segments(seg)
    check_same_shape(pred, gt)
    check_same_shape(pred, seg)
    v = gt > 0
    vals = []
    for label in np.unique(seg):
        if label == 0:
            continue
        sel = v & (seg == label)
        if np.count_nonzero(sel) < 2:
            continue
        vals.append(_silog_vals(pred[sel], gt[sel]))
    if not vals:
        raise NoValidDataError("no segment has >= 2 valid pixels")
    return float(np.mean(vals))


def evaluate(pred, gt, taus=DEFAULT_TAUS, seg=None) -> MetricReport:
    """Compute the full metric suite for one (pred, gt) pair.

    silog_segment is present iff a segment map is given.
    """
    p, g = _valid_pair(pred, gt)
    diff = g - p
    rmse = float(np.sqrt(np.mean(diff * diff)))
    mae = float(np.mean(np.abs(diff)))

    pc = np.maximum(p, DEFAULT_CLAMP_FLOOR)
    inv_diff = 1.0 / g - 1.0 / pc
    irmse = float(np.sqrt(np.mean(inv_diff * inv_diff))) * 1000.0
    imae = float(np.mean(np.abs(inv_diff))) * 1000.0

    si = _silog_vals(p, g)
    rel = float(np.mean(np.abs(diff) / g))

    with np.errstate(divide="ignore"):
        ratio = np.maximum(g / p, p / g)
    delta = {float(tau): float(np.mean(ratio < tau)) for tau in taus}

    seg_si = silog_segment(pred, gt, seg) if seg is not None else None
    return MetricReport(
        rmse=rmse,
        mae=mae,
        irmse=irmse,
        imae=imae,
        silog=si,
        rel=rel,
        delta=delta,
        silog_segment=seg_si,
        valid_pixel_count=int(p.size),
    )


def evaluate_many(pairs, taus=DEFAULT_TAUS, segs=None, pooled: bool = False) -> MetricReport:
    """Aggregate metrics over a list of (pred, gt) pairs.

    Default: mean of per-image metrics (order-independent).  pooled=True
    instead pools valid pixels across all images and evaluates once;
    silog_segment is still averaged per (image, segment) since labels do
    not span images.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no image pairs given")
    if segs is None:
        segs = [None] * len(pairs)
    if len(segs) != len(pairs):
        raise ValueError("segs must match pairs one to one")

    if not pooled:
        reports = [evaluate(p, g, taus, s) for (p, g), s in zip(pairs, segs)]
        seg_vals = [r.silog_segment for r in reports if r.silog_segment is not None]
        delta = {
            float(tau): float(np.mean([r.delta[float(tau)] for r in reports])) for tau in taus
        }
        return MetricReport(
            rmse=float(np.mean([r.rmse for r in reports])),
            mae=float(np.mean([r.mae for r in reports])),
            irmse=float(np.mean([r.irmse for r in reports])),
            imae=float(np.mean([r.imae for r in reports])),
            silog=float(np.mean([r.silog for r in reports])),
            rel=float(np.mean([r.rel for r in reports])),
            delta=delta,
            silog_segment=float(np.mean(seg_vals)) if seg_vals else None,
            valid_pixel_count=int(sum(r.valid_pixel_count for r in reports)),
        )

    # pooled: concatenate valid pixels into one long pseudo-image
    preds, gts = [], []
    for p, g in pairs:
        p = as_depth(p)
        g = as_depth(g)
        check_same_shape(p, g)
        v = g > 0
        preds.append(p[v])
        gts.append(g[v])
    pooled_pred = np.concatenate(preds).reshape(1, -1)
    pooled_gt = np.concatenate(gts).reshape(1, -1)
    report = evaluate(pooled_pred, pooled_gt, taus)
    seg_vals = []
    for (p, g), s in zip(pairs, segs):
        if s is not None:
            seg_vals.append(silog_segment(p, g, s))
    return MetricReport(
        rmse=report.rmse,
        mae=report.mae,
        irmse=report.irmse,
        imae=report.imae,
        silog=report.silog,
        rel=report.rel,
        delta=report.delta,
        silog_segment=float(np.mean(seg_vals)) if seg_vals else None,
        valid_pixel_count=report.valid_pixel_count,
    )
