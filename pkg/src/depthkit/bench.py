"""Seeded benchmark harness: scenes x sparsity levels x fit methods.

Each cell builds an oracle scene, samples sparse points from the ground
truth, fits the selected affine method against them, and evaluates the
completed map.  Cells are independent of each other; rows are sorted
before writing so the CSV is byte-reproducible for a fixed spec.
"""

from __future__ import annotations

import csv
import sys
from dataclasses import dataclass, replace

from .affine import apply_affine, fit_global, fit_segmentwise
from .grids import sample_sparse
from .metrics import DEFAULT_TAUS, evaluate
from .scene import SceneSpec, generate_scene

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

METHODS = ("global-affine", "segment-affine")

DEFAULT_SPARSITY = (50, 200, 500, 2000)


@dataclass(frozen=True)
class BenchSpec:
    scene: SceneSpec
    sparsity: tuple[int, ...] = DEFAULT_SPARSITY
    methods: tuple[str, ...] = METHODS
    seeds: int = 1
    taus: tuple[float, ...] = DEFAULT_TAUS

    def __post_init__(self):
        if any(n < 1 for n in self.sparsity):
            raise ValueError("sparsity values must be >= 1")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown methods {bad}, expected subset of {METHODS}")
        if self.seeds < 1:
            raise ValueError("seeds must be >= 1")


def load_bench_spec(path) -> BenchSpec:
    """Parse a spec from a TOML file with a [scene] table."""
    with open(path, "rb") as f:
        data = tomllib.load(f)
    scene_data = dict(data.pop("scene", {}))
    for key in ("depth_range", "scale_range", "bias_range"):
        if key in scene_data:
            scene_data[key] = tuple(scene_data[key])
    if "distortion" in scene_data:
        scene_data["distortion"] = tuple(tuple(p) for p in scene_data["distortion"])
    scene = SceneSpec(**scene_data)
    for key in ("sparsity", "methods", "taus"):
        if key in data:
            data[key] = tuple(data[key])
    return BenchSpec(scene=scene, **data)


def _run_method(method: str, rel, labels, d_s):
    if method == "global-affine":
        return apply_affine(rel, fit_global(rel, d_s))
    return apply_affine(rel, fit_segmentwise(rel, labels, d_s), labels)


def run_bench(spec: BenchSpec) -> list[dict]:
    """One row per (seed, sparsity, method) cell, with every metric field.

    Trial i uses scene seed spec.scene.seed + i for both the scene and the
    point sampling, so the same points feed every method in a cell.
    """
    rows = []
    for trial in range(spec.seeds):
        scene_seed = spec.scene.seed + trial
        gt, labels, rel = generate_scene(replace(spec.scene, seed=scene_seed))
        for n in spec.sparsity:
            d_s = sample_sparse(gt, n, seed=scene_seed)
            for method in spec.methods:
                pred = _run_method(method, rel, labels, d_s)
                report = evaluate(pred, gt, spec.taus, seg=labels)
                row = {"seed": trial, "sparsity": n, "method": method}
                row.update(report.as_dict())
                rows.append(row)
    rows.sort(key=lambda r: (r["seed"], r["sparsity"], r["method"]))
    return rows


def write_bench_csv(rows: list[dict], path) -> None:
    if not rows:
        raise ValueError("no bench rows to write")
    fields = list(rows[0].keys())
    with open(path, "w", newline="", encoding="ascii") as f:
        writer = csv.DictWriter(f, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
