"""Deterministic piecewise-affine test scenes.

A scene is a rectangle tiling of the grid (recursive seeded splits), a
ground-truth depth per region (constant or planar gradient), and a
"relative" map obtained by distorting each region with its own affine pair
(a_k, b_k).  The relative map therefore has correct structure inside each
region and wrong depth relations between regions, which is exactly the
failure mode the segment-wise machinery is built to correct, so these
scenes anchor the verification suite: the known per-region distortion is
the ground truth the fits must recover.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SceneSpec:
    width: int
    height: int
    regions: int = 4
    depth_range: tuple[float, float] = (1.0, 9.0)
    region_kind: str = "planar-gradient"  # or "constant"
    distortion: tuple[tuple[float, float], ...] | None = None
    scale_range: tuple[float, float] = (0.5, 2.0)
    bias_range: tuple[float, float] = (0.0, 0.8)
    rel_noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("width and height must be >= 1")
        if not (1 <= self.regions <= self.width * self.height):
            raise ValueError("regions must be in [1, width*height]")
        if self.depth_range[0] <= 0 or self.depth_range[1] < self.depth_range[0]:
            raise ValueError("depth_range must satisfy 0 < min <= max")
        if self.region_kind not in ("constant", "planar-gradient"):
            raise ValueError("region_kind must be 'constant' or 'planar-gradient'")
        if self.distortion is not None:
            if len(self.distortion) != self.regions:
                raise ValueError("distortion must list one (a, b) per region")
            if any(a <= 0 for a, _ in self.distortion):
                raise ValueError("distortion scales must be > 0")
        if self.rel_noise_sigma < 0:
            raise ValueError("rel_noise_sigma must be >= 0")


def _split_rects(h: int, w: int, regions: int, rng: np.random.Generator):
    """Tile h x w into `regions` rectangles by repeatedly splitting the
    largest one at a seeded position along its longer side."""
    rects = [(0, h, 0, w)]  # (r0, r1, c0, c1), half-open
    while len(rects) < regions:
        # the largest splittable rectangle; ties resolved by list order
        order = sorted(
            range(len(rects)),
            key=lambda i: (rects[i][1] - rects[i][0]) * (rects[i][3] - rects[i][2]),
            reverse=True,
        )
        for i in order:
            r0, r1, c0, c1 = rects[i]
            rh, rw = r1 - r0, c1 - c0
            if rh < 2 and rw < 2:
                continue
            if rh >= rw:
                cut = int(rng.integers(r0 + 1, r1))
                rects[i : i + 1] = [(r0, cut, c0, c1), (cut, r1, c0, c1)]
            else:
                cut = int(rng.integers(c0 + 1, c1))
                rects[i : i + 1] = [(r0, r1, c0, cut), (r0, r1, cut, c1)]
            break
        else:  # pragma: no cover - guarded by SceneSpec validation
            raise ValueError("cannot split grid into that many regions")
    rects.sort(key=lambda r: (r[0], r[2]))
    return rects


def generate_scene(spec: SceneSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Build (ground truth, labels, relative map) for a spec.

    Labels tile the grid with values 1..regions (no label 0).  The
    relative map is rel = a_k * gt + b_k per region, optionally plus
    Gaussian noise (rel_noise_sigma), floored at 1e-3 to stay a legal
    depth map.  Identical specs produce bit-identical triples.
    """
    rng = np.random.default_rng(spec.seed)
    h, w = spec.height, spec.width
    rects = _split_rects(h, w, spec.regions, rng)

    gt = np.zeros((h, w))
    labels = np.zeros((h, w), dtype=np.int32)
    lo, hi = spec.depth_range
    for k, (r0, r1, c0, c1) in enumerate(rects, start=1):
        labels[r0:r1, c0:c1] = k
        if spec.region_kind == "constant":
            gt[r0:r1, c0:c1] = rng.uniform(lo, hi)
        else:
            near = rng.uniform(lo, hi)
            far = rng.uniform(lo, hi)
            rr = np.arange(r0, r1)[:, None] - r0
            cc = np.arange(c0, c1)[None, :] - c0
            denom = max(r1 - r0 - 1, 0) + max(c1 - c0 - 1, 0)
            frac = (rr + cc) / denom if denom > 0 else np.zeros((r1 - r0, c1 - c0))
            gt[r0:r1, c0:c1] = near + (far - near) * frac

    if spec.distortion is not None:
        dist = list(spec.distortion)
    else:
        dist = [
            (float(rng.uniform(*spec.scale_range)), float(rng.uniform(*spec.bias_range)))
            for _ in range(spec.regions)
        ]

    rel = np.zeros_like(gt)
    for k, (a, b) in enumerate(dist, start=1):
        sel = labels == k
        rel[sel] = a * gt[sel] + b
    if spec.rel_noise_sigma > 0:
        rel = rel + rng.normal(0.0, spec.rel_noise_sigma, size=rel.shape)
        rel = np.maximum(rel, 1e-3)
    if np.any(rel <= 0):
        raise ValueError("distortion drove the relative map non-positive")
    return gt, labels, rel
