"""Command-line entry point.

Subcommands cover the whole pipeline: scene generation, segmentation,
sparse sampling, synthetic-pair generation, affine-fit baselines, metric
evaluation, losses, and the benchmark harness.  Every randomized command
takes --seed (default 0) and is byte-reproducible for a fixed seed.

Depth file formats are inferred from the extension (.pgm = 16-bit PGM,
.pfm = 32-bit PFM, .csv = point list; .csv inputs additionally need
--shape).  Set DEPTHKIT_LOG=DEBUG|INFO|WARNING to control log verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import bench as bench_mod
from . import io_formats as io
from .affine import apply_affine, fit_global, fit_segmentwise
from .grids import sample_sparse
from .losses import LossConfig, SsimConfig, mse_loss, normalize_pair, ssim_loss
from .metrics import DEFAULT_TAUS, evaluate_many
from .scene import SceneSpec, generate_scene
from .segmentation import SegmenterConfig, segment_from_depth, segment_from_gray
from .synth import NoiseConfig, fill_gaps, make_sparse, plan_rescale, rescale, resolve_sigma


def _load_depth(path: str, shape=None) -> np.ndarray:
    return io.read_depth(path, io.detect_format(path), shape=shape)


def _save_depth(d, path: str) -> None:
    io.write_depth(d, path, io.detect_format(path))


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(","))


def _shape_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--shape",
        type=int,
        nargs=2,
        metavar=("H", "W"),
        default=None,
        help="grid shape, required when reading .csv point files",
    )


def _cmd_scenegen(args) -> int:
    spec = SceneSpec(
        width=args.width,
        height=args.height,
        regions=args.regions,
        depth_range=tuple(args.depth_range),
        region_kind=args.kind,
        scale_range=tuple(args.scale_range),
        bias_range=tuple(args.bias_range),
        rel_noise_sigma=args.noise_sigma,
        seed=args.seed,
    )
    gt, labels, rel = generate_scene(spec)
    os.makedirs(args.out_dir, exist_ok=True)
    _save_depth(gt, os.path.join(args.out_dir, "gt.pfm"))
    io.write_segments(labels, os.path.join(args.out_dir, "labels.pgm"))
    _save_depth(rel, os.path.join(args.out_dir, "rel.pfm"))
    print(f"wrote gt.pfm, labels.pgm, rel.pfm to {args.out_dir}")
    return 0


def _cmd_segment(args) -> int:
    values = _load_depth(args.infile, shape=args.shape)
    cfg = SegmenterConfig(
        join_threshold=args.threshold,
        min_segment_pixels=args.min_pixels,
        connectivity=args.connectivity,
    )
    if args.mode == "depth":
        seg = segment_from_depth(values, cfg)
    else:
        seg = segment_from_gray(values, cfg)
    io.write_segments(seg, args.out)
    print(f"wrote {seg.max()} segments to {args.out}")
    return 0


def _cmd_sample(args) -> int:
    gt = _load_depth(args.gt, shape=args.shape)
    sparse = sample_sparse(gt, args.n, seed=args.seed)
    _save_depth(sparse, args.out)
    print(f"wrote {np.count_nonzero(sparse)} points to {args.out}")
    return 0


def _cmd_gen_pair(args) -> int:
    d_rel = _load_depth(args.rel, shape=args.shape)
    seg = io.read_segments(args.seg)
    d_s = _load_depth(args.sparse, shape=args.shape)
    noise = NoiseConfig(sigma=args.sigma, seed=args.seed)

    plan = plan_rescale(d_rel, seg, d_s, alpha_mode=args.alpha, seed=args.seed)
    d_sg = fill_gaps(rescale(d_rel, seg, plan), max_passes=args.max_passes)
    d_ss = make_sparse(d_sg, d_s, noise=noise)

    os.makedirs(args.out_dir, exist_ok=True)
    _save_depth(d_sg, os.path.join(args.out_dir, "sg.pfm"))
    _save_depth(d_ss, os.path.join(args.out_dir, "ss.pfm"))
    with open(os.path.join(args.out_dir, "manifest.txt"), "w", encoding="ascii") as f:
        f.write(f"seed = {args.seed}\n")
        f.write(f"alpha_mode = {args.alpha}\n")
        f.write(f"sigma = {resolve_sigma(noise, d_s)!r}\n")
        f.write(f"max_passes = {args.max_passes}\n")
        f.write(f"clamp_floor = {plan.clamp_floor!r}\n")
        f.write("label alpha beta degenerate\n")
        for s in plan.scales:
            f.write(f"{s.label} {s.alpha!r} {s.beta!r} {s.degenerate}\n")
    print(f"wrote sg.pfm, ss.pfm, manifest.txt to {args.out_dir}")
    return 0


def _cmd_fit_affine(args) -> int:
    d_rel = _load_depth(args.rel, shape=args.shape)
    d_s = _load_depth(args.sparse, shape=args.shape)
    lines = [f"mode = {args.mode}"]
    if args.mode == "global":
        params = fit_global(d_rel, d_s)
        pred = apply_affine(d_rel, params)
        lines.append(f"a = {params.a!r}")
        lines.append(f"b = {params.b!r}")
    else:
        if args.seg is None:
            raise ValueError("--mode segment requires --seg")
        seg = io.read_segments(args.seg)
        fits = fit_segmentwise(d_rel, seg, d_s)
        pred = apply_affine(d_rel, fits, seg)
        lines.append(f"fallback_a = {fits.fallback.a!r}")
        lines.append(f"fallback_b = {fits.fallback.b!r}")
        lines.append("label a b status points")
        for f_ in fits.fits:
            lines.append(
                f"{f_.label} {f_.params.a!r} {f_.params.b!r} {f_.status} {f_.point_count}"
            )
    _save_depth(pred, args.out)
    with open(args.report, "w", encoding="ascii") as f:
        f.write("\n".join(lines) + "\n")
    print(f"wrote {args.out} and {args.report}")
    return 0


def _format_report(values: dict, fmt: str) -> str:
    if fmt == "csv":
        head = ",".join(values)
        row = ",".join(repr(v) if isinstance(v, float) else str(v) for v in values.values())
        return f"{head}\n{row}\n"
    if fmt == "md":
        lines = ["| metric | value |", "| --- | --- |"]
        lines += [f"| {k} | {v:.6f} |" if isinstance(v, float) else f"| {k} | {v} |"
                  for k, v in values.items()]
        return "\n".join(lines) + "\n"
    width = max(len(k) for k in values)
    lines = [f"{k:<{width}}  {v:.6f}" if isinstance(v, float) else f"{k:<{width}}  {v}"
             for k, v in values.items()]
    return "\n".join(lines) + "\n"


def _cmd_evaluate(args) -> int:
    if len(args.pred) != len(args.gt):
        raise ValueError("--pred and --gt need the same number of files")
    pairs = [
        (_load_depth(p, shape=args.shape), _load_depth(g, shape=args.shape))
        for p, g in zip(args.pred, args.gt)
    ]
    segs = None
    if args.seg:
        if len(args.seg) != len(args.pred):
            raise ValueError("--seg needs one file per --pred")
        segs = [io.read_segments(s) for s in args.seg]
    report = evaluate_many(pairs, taus=args.taus, segs=segs, pooled=args.pool)
    sys.stdout.write(_format_report(report.as_dict(scale100=args.scale100), args.format))
    return 0


def _cmd_loss(args) -> int:
    pred = _load_depth(args.pred, shape=args.shape)
    target = _load_depth(args.target, shape=args.shape)
    cfg = SsimConfig(window=args.window)
    mse = mse_loss(pred, target)
    ssim = ssim_loss(*normalize_pair(pred, target), cfg)
    total = mse + args.lam * ssim
    print(f"mse   {mse!r}")
    print(f"ssim  {ssim!r}")
    print(f"total {total!r}")
    return 0


def _cmd_bench(args) -> int:
    if args.spec:
        spec = bench_mod.load_bench_spec(args.spec)
    else:
        spec = bench_mod.BenchSpec(scene=SceneSpec(width=64, height=64))
    scene_over = {}
    for name, value in (
        ("width", args.width),
        ("height", args.height),
        ("regions", args.regions),
        ("region_kind", args.kind),
        ("rel_noise_sigma", args.noise_sigma),
        ("seed", args.scene_seed),
    ):
        if value is not None:
            scene_over[name] = value
    if args.depth_range is not None:
        scene_over["depth_range"] = tuple(args.depth_range)
    if scene_over:
        spec = replace(spec, scene=replace(spec.scene, **scene_over))
    over = {}
    if args.seeds is not None:
        over["seeds"] = args.seeds
    if args.sparsity is not None:
        over["sparsity"] = _parse_ints(args.sparsity)
    if args.methods is not None:
        over["methods"] = tuple(args.methods.split(","))
    if args.taus is not None:
        over["taus"] = args.taus
    if over:
        spec = replace(spec, **over)
    rows = bench_mod.run_bench(spec)
    bench_mod.write_bench_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="depthkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scenegen", help="generate an oracle scene (gt, labels, rel)")
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--regions", type=int, default=4)
    p.add_argument("--depth-range", type=float, nargs=2, default=(1.0, 9.0))
    p.add_argument("--kind", choices=("constant", "planar-gradient"), default="planar-gradient")
    p.add_argument("--scale-range", type=float, nargs=2, default=(0.5, 2.0))
    p.add_argument("--bias-range", type=float, nargs=2, default=(0.0, 0.8))
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_scenegen)

    p = sub.add_parser("segment", help="segment a depth map or gray image")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--mode", choices=("depth", "gray"), default="depth")
    p.add_argument("--threshold", type=float, default=0.1)
    p.add_argument("--min-pixels", type=int, default=1)
    p.add_argument("--connectivity", type=int, choices=(4, 8), default=4)
    p.add_argument("--out", required=True)
    _shape_arg(p)
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("sample", help="sample sparse points from a dense map")
    p.add_argument("--gt", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _shape_arg(p)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("gen-pair", help="generate a synthetic (dense, sparse) pair")
    p.add_argument("--rel", required=True)
    p.add_argument("--seg", required=True)
    p.add_argument("--sparse", required=True)
    p.add_argument("--alpha", choices=("formula", "random"), default="formula")
    p.add_argument("--sigma", type=float, default=None,
                   help="noise std in meters (default: 0.01 * mean sparse depth)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-passes", type=int, default=16)
    p.add_argument("--out-dir", required=True)
    _shape_arg(p)
    p.set_defaults(func=_cmd_gen_pair)

    p = sub.add_parser("fit-affine", help="fit and apply an affine baseline")
    p.add_argument("--mode", choices=("global", "segment"), required=True)
    p.add_argument("--rel", required=True)
    p.add_argument("--sparse", required=True)
    p.add_argument("--seg", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--report", required=True)
    _shape_arg(p)
    p.set_defaults(func=_cmd_fit_affine)

    p = sub.add_parser("evaluate", help="evaluate predicted vs ground-truth depth")
    p.add_argument("--pred", nargs="+", required=True)
    p.add_argument("--gt", nargs="+", required=True)
    p.add_argument("--seg", nargs="+", default=None)
    p.add_argument("--scale100", action="store_true", help="multiply metrics by 100 for display")
    p.add_argument("--pool", action="store_true", help="pool pixels across images")
    p.add_argument("--taus", type=_parse_floats, default=DEFAULT_TAUS)
    p.add_argument("--format", choices=("table", "csv", "md"), default="table")
    _shape_arg(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("loss", help="print mse/ssim/total loss for two maps")
    p.add_argument("--pred", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=LossConfig().ssim_weight)
    p.add_argument("--window", type=int, default=11)
    _shape_arg(p)
    p.set_defaults(func=_cmd_loss)

    p = sub.add_parser("bench", help="run the scene/sparsity/method benchmark")
    p.add_argument("--spec", default=None, help="TOML spec file with a [scene] table")
    p.add_argument("--out", required=True)
    p.add_argument("--seeds", type=int, default=None)
    p.add_argument("--sparsity", default=None, help="comma list, e.g. 50,200,500,2000")
    p.add_argument("--methods", default=None, help="comma list of fit methods")
    p.add_argument("--taus", type=_parse_floats, default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--regions", type=int, default=None)
    p.add_argument("--depth-range", type=float, nargs=2, default=None)
    p.add_argument("--kind", choices=("constant", "planar-gradient"), default=None)
    p.add_argument("--noise-sigma", type=float, default=None)
    p.add_argument("--scene-seed", type=int, default=None)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("DEPTHKIT_LOG", "WARNING"))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
