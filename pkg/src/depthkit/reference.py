"""Naive per-pixel reference implementations.

Everything in here recomputes a result with plain loops (or an
independent solver route, e.g. numpy's lstsq instead of the closed-form
normal equations) so the fast implementations can be checked against a
second opinion.  Only meant for tests on small grids; nothing here is
optimized.
"""

from __future__ import annotations

import numpy as np


def normalize_ref(d: np.ndarray) -> np.ndarray:
    vals = [x for x in d.ravel() if x > 0]
    lo, hi = min(vals), max(vals)
    out = np.zeros_like(d, dtype=np.float64)
    for r in range(d.shape[0]):
        for c in range(d.shape[1]):
            if d[r, c] > 0:
                out[r, c] = 0.5 if hi == lo else (d[r, c] - lo) / (hi - lo)
    return out


def segment_stats_ref(d: np.ndarray, seg: np.ndarray) -> dict[int, dict[str, float]]:
    acc: dict[int, list[float]] = {}
    for r in range(d.shape[0]):
        for c in range(d.shape[1]):
            if seg[r, c] != 0 and d[r, c] > 0:
                acc.setdefault(int(seg[r, c]), []).append(float(d[r, c]))
    return {
        k: {
            "pixel_count": len(v),
            "mean": sum(v) / len(v),
            "min": min(v),
            "max": max(v),
        }
        for k, v in acc.items()
    }


def metrics_ref(pred: np.ndarray, gt: np.ndarray, taus, floor: float = 1e-3) -> dict[str, float]:
    """The seven global metrics, pixel by pixel."""
    sq = ab = isq = iab = rl = 0.0
    logs: list[float] = []
    hits = {float(t): 0 for t in taus}
    n = 0
    for r in range(gt.shape[0]):
        for c in range(gt.shape[1]):
            g = gt[r, c]
            if g <= 0:
                continue
            n += 1
            p = pred[r, c]
            sq += (g - p) ** 2
            ab += abs(g - p)
            pc = max(p, floor)
            isq += (1.0 / g - 1.0 / pc) ** 2
            iab += abs(1.0 / g - 1.0 / pc)
            logs.append(np.log(pc) - np.log(g))
            rl += abs(g - p) / g
            ratio = max(g / p, p / g) if p > 0 else np.inf
            for t in hits:
                if ratio < t:
                    hits[t] += 1
    mean_l = sum(logs) / n
    mean_l2 = sum(x * x for x in logs) / n
    out = {
        "rmse": np.sqrt(sq / n),
        "mae": ab / n,
        "irmse": np.sqrt(isq / n) * 1000.0,
        "imae": iab / n * 1000.0,
        "silog": mean_l2 - mean_l**2,
        "rel": rl / n,
        "valid_pixel_count": n,
    }
    for t, h in hits.items():
        out[f"delta_{t:g}"] = h / n
    return out


def silog_ref(pred: np.ndarray, gt: np.ndarray, floor: float = 1e-3) -> float:
    logs = []
    for r in range(gt.shape[0]):
        for c in range(gt.shape[1]):
            if gt[r, c] > 0:
                logs.append(np.log(max(pred[r, c], floor)) - np.log(gt[r, c]))
    m = sum(logs) / len(logs)
    return sum(x * x for x in logs) / len(logs) - m * m


def silog_segment_ref(pred: np.ndarray, gt: np.ndarray, seg: np.ndarray) -> float:
    vals = []
    for k in sorted(set(int(x) for x in seg.ravel()) - {0}):
        sub_p, sub_g = [], []
        for r in range(gt.shape[0]):
            for c in range(gt.shape[1]):
                if seg[r, c] == k and gt[r, c] > 0:
                    sub_p.append(pred[r, c])
                    sub_g.append(gt[r, c])
        if len(sub_g) >= 2:
            vals.append(silog_ref(np.array([sub_p]), np.array([sub_g])))
    return sum(vals) / len(vals)


def mse_ref(pred: np.ndarray, target: np.ndarray) -> float:
    total = 0.0
    for r in range(pred.shape[0]):
        for c in range(pred.shape[1]):
            total += (pred[r, c] - target[r, c]) ** 2
    return total / pred.size


def ssim_map_ref(
    pred: np.ndarray,
    target: np.ndarray,
    window: int = 11,
    k1: float = 0.01,
    k2: float = 0.03,
    dynamic_range: float = 1.0,
) -> np.ndarray:
    """Window-by-window SSIM with explicit symmetric (reflect) padding."""
    half = window // 2
    p = np.pad(pred, half, mode="symmetric")
    t = np.pad(target, half, mode="symmetric")
    c1 = (k1 * dynamic_range) ** 2
    c2 = (k2 * dynamic_range) ** 2
    out = np.zeros_like(pred, dtype=np.float64)
    for r in range(pred.shape[0]):
        for c in range(pred.shape[1]):
            wp = p[r : r + window, c : c + window]
            wt = t[r : r + window, c : c + window]
            mp, mt = np.mean(wp), np.mean(wt)
            vp = np.mean(wp * wp) - mp * mp
            vt = np.mean(wt * wt) - mt * mt
            cov = np.mean(wp * wt) - mp * mt
            out[r, c] = ((2 * mp * mt + c1) * (2 * cov + c2)) / (
                (mp * mp + mt * mt + c1) * (vp + vt + c2)
            )
    return out


def fill_pass_ref(d: np.ndarray) -> np.ndarray:
    """One gap-fill pass: zero pixels take the mean of nonzero values in
    their 5x5 window (window truncated at borders)."""
    h, w = d.shape
    out = d.copy()
    for r in range(h):
        for c in range(w):
            if d[r, c] != 0:
                continue
            vals = []
            for dr in range(-2, 3):
                for dc in range(-2, 3):
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < h and 0 <= cc < w and d[rr, cc] > 0:
                        vals.append(d[rr, cc])
            if vals:
                out[r, c] = sum(vals) / len(vals)
    return out


def fit_ref(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares (a, b) via the pseudo-inverse (lstsq) route."""
    design = np.stack([x, np.ones_like(x)], axis=1)
    sol, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(sol[0]), float(sol[1])


def apply_affine_ref(d: np.ndarray, a: float, b: float, floor: float = 1e-3) -> np.ndarray:
    out = np.zeros_like(d, dtype=np.float64)
    for r in range(d.shape[0]):
        for c in range(d.shape[1]):
            out[r, c] = max(a * d[r, c] + b, floor)
    return out
