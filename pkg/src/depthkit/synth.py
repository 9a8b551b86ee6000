"""Synthetic training-pair generation.

Turns (relative depth, segment map, sparse depth) into a synthetic pair:
a dense pseudo-ground-truth map built by rescaling each segment with its
own affine factors, and a sparse counterpart made by masking that map with
the original sparse pattern plus Gaussian noise.

Rescaling factors per segment k:

    formula mode:  alpha_k = 2 * mean(sparse) / mean(rel over segment k)
    random mode:   alpha_k ~ U(min(sparse), max(sparse))
    both modes:    beta_k  ~ U(min(sparse), max(sparse)) - mean(sparse)

where the sparse statistics run over the measured (> 0) pixels and the
segment mean over valid (> 0) pixels of the segment.  Each segment draws
from its own RNG stream keyed by (seed, label), so adding or removing a
segment never perturbs the draws of the others.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grids import (
    DEFAULT_CLAMP_FLOOR,
    NoValidDataError,
    as_depth,
    as_segments,
    check_same_shape,
    segment_stats,
)

log = logging.getLogger(__name__)

ALPHA_MODES = ("formula", "random")


@dataclass(frozen=True)
class SegmentScale:
    """Affine factors for one segment; `degenerate` marks segments whose
    relative-depth mean was zero (the whole segment then maps to the
    stored beta, which absorbs mean(sparse))."""

    label: int
    alpha: float
    beta: float
    degenerate: bool = False


@dataclass(frozen=True)
class RescalePlan:
    scales: tuple[SegmentScale, ...]
    alpha_mode: str
    clamp_floor: float = DEFAULT_CLAMP_FLOOR

    def __post_init__(self):
        if self.alpha_mode not in ALPHA_MODES:
            raise ValueError(f"alpha_mode must be one of {ALPHA_MODES}")
        if self.clamp_floor <= 0:
            raise ValueError("clamp_floor must be > 0")

    def by_label(self) -> dict[int, SegmentScale]:
        return {s.label: s for s in self.scales}


@dataclass(frozen=True)
class NoiseConfig:
    """Gaussian noise for the sparse half of a pair.

    sigma=None picks 0.01 * mean of the measured sparse values, so the
    noise scales with scene depth.
    """

    sigma: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.sigma is not None and self.sigma < 0:
            raise ValueError("sigma must be >= 0")


def _sparse_range(d_s: np.ndarray) -> tuple[float, float, float]:
    vals = d_s[d_s > 0]
    if vals.size == 0:
        raise NoValidDataError("sparse map has no measured (> 0) points")
    return float(vals.mean()), float(vals.min()), float(vals.max())


def resolve_sigma(noise: NoiseConfig, mask_source) -> float:
    """The noise level actually applied: explicit sigma, or the
    depth-scaled default 0.01 * mean of the measured points."""
    if noise.sigma is not None:
        return noise.sigma
    mask_source = as_depth(mask_source)
    vals = mask_source[mask_source > 0]
    if vals.size == 0:
        return 0.0
    return 0.01 * float(vals.mean())


def plan_rescale(
    d_rel,
    seg,
    d_s,
    alpha_mode: str = "formula",
    seed: int = 0,
    clamp_floor: float = DEFAULT_CLAMP_FLOOR,
) -> RescalePlan:
    """Draw per-segment (alpha, beta) factors.

    Segments are processed in ascending label order; segment k's draws come
    from numpy's default generator seeded with (seed, k).  In random mode
    alpha is drawn before beta.  A segment with no valid relative depth is
    flagged degenerate and gets alpha=0 with beta shifted by mean(sparse),
    so the whole segment lands near the sparse statistics.
    """
    if alpha_mode not in ALPHA_MODES:
        raise ValueError(f"alpha_mode must be one of {ALPHA_MODES}")
    d_rel = as_depth(d_rel)
    seg = as_segments(seg)
    d_s = as_depth(d_s)
    check_same_shape(d_rel, seg)
    check_same_shape(d_rel, d_s)

    s_mean, s_min, s_max = _sparse_range(d_s)
    means = {s.label: s.mean for s in segment_stats(d_rel, seg)}

    scales = []
    for label in np.unique(seg):
        k = int(label)
        if k == 0:
            continue
        rng = np.random.default_rng((seed, k))
        if alpha_mode == "random":
            alpha = float(rng.uniform(s_min, s_max))
        else:
            alpha = 0.0  # overwritten below unless degenerate
        beta = float(rng.uniform(s_min, s_max)) - s_mean

        if k not in means:
            scales.append(SegmentScale(k, 0.0, s_mean + beta, degenerate=True))
            continue
        if alpha_mode == "formula":
            alpha = 2.0 * s_mean / means[k]
        scales.append(SegmentScale(k, alpha, beta))
    return RescalePlan(tuple(scales), alpha_mode, clamp_floor)


def rescale(d_rel, seg, plan: RescalePlan) -> np.ndarray:
    """Apply alpha_k * d + beta_k per segment, clamped below at clamp_floor.

    Label-0 (gap) pixels come out 0 and are left for gap filling.
    """
    d_rel = as_depth(d_rel)
    seg = as_segments(seg)
    check_same_shape(d_rel, seg)

    by_label = plan.by_label()
    labels = [int(v) for v in np.unique(seg) if v != 0]
    missing = [k for k in labels if k not in by_label]
    if missing:
        raise ValueError(f"rescale plan does not cover labels {missing}")

    max_label = max(labels, default=0)
    alpha = np.zeros(max_label + 1)
    beta = np.zeros(max_label + 1)
    for k in labels:
        alpha[k] = by_label[k].alpha
        beta[k] = by_label[k].beta

    out = alpha[seg] * d_rel + beta[seg]
    np.maximum(out, plan.clamp_floor, out=out)
    out[seg == 0] = 0.0
    return out


def fill_gaps(d, max_passes: int = 16) -> np.ndarray:
    """Fill zero pixels with the mean of nonzero values in their 5x5 window.

    Each pass reads only the pass-start snapshot, updates every zero pixel
    that has at least one nonzero pixel in its window, and never touches
    nonzero pixels.  Passes repeat until no zeros remain, nothing more can
    be filled, or max_passes is reached; any survivors are logged.
    """
    d = as_depth(d)
    if max_passes < 0:
        raise ValueError("max_passes must be >= 0")
    kernel = np.ones((5, 5))
    cur = d.copy()
    for _ in range(max_passes):
        zeros = cur == 0
        if not zeros.any():
            return cur
        sums = ndimage.convolve(cur, kernel, mode="constant", cval=0.0)
        counts = ndimage.convolve((cur > 0).astype(np.float64), kernel, mode="constant", cval=0.0)
        fillable = zeros & (counts > 0)
        if not fillable.any():
            break
        cur[fillable] = sums[fillable] / counts[fillable]
    remaining = int(np.count_nonzero(cur == 0))
    if remaining:
        log.warning("fill_gaps: %d zero pixels remain after %d passes", remaining, max_passes)
    return cur


def make_sparse(
    d_sg,
    mask_source,
    noise: NoiseConfig = NoiseConfig(),
    clamp_floor: float = DEFAULT_CLAMP_FLOOR,
) -> np.ndarray:
    """Mask a dense map to the sparse pattern and add Gaussian noise.

    Output equals (d_sg + N(0, sigma^2)) at pixels where mask_source > 0
    (clamped below at clamp_floor) and 0 elsewhere, so the sparsity
    pattern of the source is preserved exactly.
    """
    d_sg = as_depth(d_sg)
    mask_source = as_depth(mask_source)
    check_same_shape(d_sg, mask_source)

    mask = mask_source > 0
    out = np.zeros_like(d_sg)
    if not mask.any():
        return out
    vals = d_sg[mask]
    sigma = resolve_sigma(noise, mask_source)
    if sigma > 0:
        rng = np.random.default_rng(noise.seed)
        vals = vals + rng.normal(0.0, sigma, size=vals.size)
    out[mask] = np.maximum(vals, clamp_floor)
    return out


def generate_pair(
    d_rel,
    seg,
    d_s,
    alpha_mode: str = "formula",
    noise: NoiseConfig = NoiseConfig(),
    seed: int = 0,
    max_passes: int = 16,
    clamp_floor: float = DEFAULT_CLAMP_FLOOR,
) -> tuple[np.ndarray, np.ndarray]:
    """Full stage: plan -> rescale -> fill gaps -> mask + noise.

    Returns (dense synthetic ground truth, noisy sparse counterpart).
    Deterministic given (inputs, seed, noise.seed).
    """
    plan = plan_rescale(d_rel, seg, d_s, alpha_mode=alpha_mode, seed=seed, clamp_floor=clamp_floor)
    d_sg = fill_gaps(rescale(d_rel, seg, plan), max_passes=max_passes)
    d_ss = make_sparse(d_sg, d_s, noise=noise, clamp_floor=clamp_floor)
    return d_sg, d_ss
