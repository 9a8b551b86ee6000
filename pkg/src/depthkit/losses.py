"""Training objective: MSE, windowed SSIM, and their weighted sum.

The SSIM map follows the classic four-term quotient

    (2*mu_p*mu_t + C1) * (2*cov + C2)
    ---------------------------------,   C1 = (k1*L)^2, C2 = (k2*L)^2
    (mu_p^2 + mu_t^2 + C1) * (var_p + var_t + C2)

with local moments from a uniform averaging window (default 11x11) and
reflect padding, so the output keeps the input size.  Inputs to the SSIM
ops are expected in [0, 1] (the L = 1.0 convention); `normalize_pair`
maps a depth pair there over its joint value range, and `total_loss`
applies it before the SSIM term while the MSE term uses raw depths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grids import NoValidDataError, as_depth, check_same_shape


@dataclass(frozen=True)
class SsimConfig:
    window: int = 11
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0
    boundary: str = "reflect"

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError("window must be odd and >= 3")
        if self.k1 <= 0 or self.k2 <= 0 or self.dynamic_range <= 0:
            raise ValueError("k1, k2 and dynamic_range must be > 0")


@dataclass(frozen=True)
class LossConfig:
    ssim_weight: float = 3.0  # the lambda in mse + lambda * ssim

    def __post_init__(self):
        if self.ssim_weight < 0:
            raise ValueError("ssim_weight must be >= 0")


def _pair(pred, target) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.ndim != 2 or target.ndim != 2:
        raise ValueError("loss inputs must be 2-D grids")
    check_same_shape(pred, target)
    return pred, target


def mse_loss(pred, target) -> float:
    """Mean squared difference over all pixels (dense-target convention)."""
    p, t = _pair(pred, target)
    d = p - t
    return float(np.mean(d * d))


def masked_mse_loss(pred, target) -> float:
    """MSE over target > 0 pixels only, for real (non-dense) ground truth."""
    p, t = _pair(pred, target)
    v = t > 0
    if not v.any():
        raise NoValidDataError("target has no valid (> 0) pixels")
    d = p[v] - t[v]
    return float(np.mean(d * d))


def mse_grad(pred, target) -> np.ndarray:
    """Analytic gradient of mse_loss w.r.t. pred: 2 * (pred - target) / N."""
    p, t = _pair(pred, target)
    return 2.0 * (p - t) / p.size


def normalize_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    """Map two grids to [0, 1] with one shared affine over their joint range.

    A degenerate joint range (all values equal) maps everything to 0.5.
    """
    a, b = _pair(a, b)
    lo = min(float(a.min()), float(b.min()))
    hi = max(float(a.max()), float(b.max()))
    if hi == lo:
        return np.full_like(a, 0.5), np.full_like(b, 0.5)
    span = hi - lo
    return (a - lo) / span, (b - lo) / span


def ssim_map(pred, target, cfg: SsimConfig = SsimConfig()) -> np.ndarray:
    """Per-pixel SSIM between two [0, 1] grids; values lie in [-1, 1]."""
    p, t = _pair(pred, target)
    if min(p.shape) < cfg.window:
        raise ValueError(f"image dims {p.shape} smaller than window {cfg.window}")

    def win_mean(x):
        return ndimage.uniform_filter(x, size=cfg.window, mode=cfg.boundary)

    mu_p = win_mean(p)
    mu_t = win_mean(t)
    var_p = win_mean(p * p) - mu_p * mu_p
    var_t = win_mean(t * t) - mu_t * mu_t
    cov = win_mean(p * t) - mu_p * mu_t

    c1 = (cfg.k1 * cfg.dynamic_range) ** 2
    c2 = (cfg.k2 * cfg.dynamic_range) ** 2
    num = (2.0 * mu_p * mu_t + c1) * (2.0 * cov + c2)
    den = (mu_p * mu_p + mu_t * mu_t + c1) * (var_p + var_t + c2)
    return num / den


def ssim_loss(pred, target, cfg: SsimConfig = SsimConfig()) -> float:
    """1 - mean of the SSIM map; lies in [0, 2]."""
    return 1.0 - float(np.mean(ssim_map(pred, target, cfg)))


def total_loss(
    pred,
    target,
    loss_cfg: LossConfig = LossConfig(),
    ssim_cfg: SsimConfig = SsimConfig(),
) -> float:
    """mse(raw) + lambda * ssim_loss(jointly normalized pair).

    With ssim_weight == 0 the SSIM term is skipped entirely, so the loss
    also works on grids smaller than the SSIM window.
    """
    if loss_cfg.ssim_weight == 0:
        return mse_loss(pred, target)
    np_pred, np_target = normalize_pair(pred, target)
    return mse_loss(pred, target) + loss_cfg.ssim_weight * ssim_loss(np_pred, np_target, ssim_cfg)
