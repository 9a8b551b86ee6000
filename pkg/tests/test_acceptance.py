"""Acceptance gate: every criterion below runs at its stated tolerance and
prints one PASS line (visible with `pytest tests/test_acceptance.py -v -s`)."""

import time

import numpy as np
import pytest

from depthkit import reference as ref
from depthkit.affine import FIT_OK, AffineParams, apply_affine, fit_global, fit_segmentwise
from depthkit.bench import BenchSpec, run_bench
from depthkit.cli import main
from depthkit.grids import sample_sparse
from depthkit.io_formats import (
    FormatError,
    read_depth,
    read_segments,
    write_depth,
    write_segments,
)
from depthkit.losses import mse_grad, mse_loss, normalize_pair, ssim_map, total_loss
from depthkit.metrics import DEFAULT_TAUS, evaluate, silog, silog_segment
from depthkit.scene import SceneSpec, generate_scene
from depthkit.synth import NoiseConfig, fill_gaps, generate_pair, make_sparse, plan_rescale


def _report(num, name):
    print(f"ACCEPTANCE {num} ({name}): PASS")


def test_c1_oracle_equivalence():
    """Metrics, losses, gap fill, and affine fits match the brute-force
    references on 200 random instances <= 32x32, within 1e-9 absolute."""
    start = time.perf_counter()
    tol = 1e-9
    for i in range(200):
        rng = np.random.default_rng(1_000 + i)
        h, w = rng.integers(12, 33, size=2)

        gt = rng.uniform(0.5, 10.0, (h, w))
        gt[rng.random((h, w)) < 0.1] = 0.0
        pred = np.abs(gt * rng.uniform(0.5, 2.0, (h, w)) + rng.normal(0, 0.5, (h, w)))
        seg = rng.integers(0, 4, (h, w))

        got = evaluate(pred, gt, DEFAULT_TAUS).as_dict()
        expected = ref.metrics_ref(pred, gt, DEFAULT_TAUS)
        for key, val in expected.items():
            assert abs(got[key] - val) <= tol, (i, key)
        assert abs(silog_segment(pred, gt, seg) - ref.silog_segment_ref(pred, gt, seg)) <= tol

        assert abs(mse_loss(pred, gt) - ref.mse_ref(pred, gt)) <= tol
        a01, b01 = normalize_pair(pred, np.maximum(gt, 1e-6))
        assert np.abs(ssim_map(a01, b01) - ref.ssim_map_ref(a01, b01)).max() <= tol

        holes = rng.uniform(1.0, 5.0, (h, w))
        holes[rng.random((h, w)) < 0.1] = 0.0
        assert np.abs(fill_gaps(holes, max_passes=1) - ref.fill_pass_ref(holes)).max() <= tol

        rel = rng.uniform(0.2, 3.0, (h, w))
        d_s = np.where(rng.random((h, w)) < 0.3, np.abs(2 * rel + rng.normal(0, 0.3, (h, w))) + 0.1, 0.0)
        d_s[0, 0] = 1.0
        d_s[0, 1] = 2.0
        params = fit_global(rel, d_s)
        sel = d_s > 0
        a_ref, b_ref = ref.fit_ref(rel[sel], d_s[sel])
        assert abs(params.a - a_ref) <= tol and abs(params.b - b_ref) <= tol
        for f in fit_segmentwise(rel, seg, d_s).fits:
            s = sel & (seg == f.label)
            if f.status == FIT_OK:
                a_s, b_s = ref.fit_ref(rel[s], d_s[s])
                assert abs(f.params.a - a_s) <= tol and abs(f.params.b - b_s) <= tol
        assert np.abs(
            apply_affine(rel, params) - ref.apply_affine_ref(rel, params.a, params.b)
        ).max() <= tol
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"oracle sweep took {elapsed:.1f}s"
    _report(1, f"oracle equivalence, 200 instances in {elapsed:.1f}s")


def test_c2_silog_scale_invariance():
    """|silog(c*pred, gt) - silog(pred, gt)| < 1e-10 for c in {0.1, 10}."""
    for i in range(50):
        rng = np.random.default_rng(2_000 + i)
        h, w = rng.integers(8, 33, size=2)
        gt = rng.uniform(1.0, 9.0, (h, w))
        pred = rng.uniform(1.0, 9.0, (h, w))
        base = silog(pred, gt)
        for c in (0.1, 10.0):
            assert abs(silog(c * pred, gt) - base) < 1e-10
    _report(2, "silog scale invariance on 50 maps")


def test_c3_segment_vs_global_ordering():
    """Segment-wise fit exact, global fit poor, and the segment-scale vs
    global silog gap, on 20 seeded 4-region scenes."""
    for seed in range(20):
        spec = SceneSpec(width=48, height=48, regions=4, bias_range=(0.0, 0.0), seed=seed)
        gt, labels, rel = generate_scene(spec)
        d_s = sample_sparse(gt, 300, seed=seed)
        for k in range(1, 5):
            assert len(np.unique(rel[(d_s > 0) & (labels == k)])) >= 2, (seed, k)

        pred_seg = apply_affine(rel, fit_segmentwise(rel, labels, d_s), labels)
        pred_glob = apply_affine(rel, fit_global(rel, d_s))
        assert float(np.sqrt(np.mean((pred_seg - gt) ** 2))) < 1e-6
        assert float(np.sqrt(np.mean((pred_glob - gt) ** 2))) > 0.01

        assert silog_segment(rel, gt, labels) < 1e-10
        assert silog(rel, gt) > 1e-4
    _report(3, "segment vs global ordering on 20 scenes")


def test_c4_formula_mean_property():
    """mean(alpha_k * rel over segment k) = 2 * mean(sparse), 1e-9 relative,
    for every segment of 100 seeded rescale plans."""
    for i in range(100):
        rng = np.random.default_rng(4_000 + i)
        h, w = rng.integers(8, 25, size=2)
        d_rel = rng.uniform(0.2, 3.0, (h, w))
        seg = rng.integers(1, 6, (h, w))
        d_s = np.where(rng.random((h, w)) < 0.2, rng.uniform(1.0, 8.0, (h, w)), 0.0)
        d_s[0, 0] = 2.0
        plan = plan_rescale(d_rel, seg, d_s, alpha_mode="formula", seed=i)
        target = 2.0 * d_s[d_s > 0].mean()
        for s in plan.scales:
            got = (s.alpha * d_rel[seg == s.label]).mean()
            assert abs(got - target) <= 1e-9 * abs(target), (i, s.label)
    _report(4, "rescale mean property on 100 plans")


def test_c5_gap_fill_contract():
    """Nonzero pixels bit-unchanged, zero count non-increasing per pass,
    fillable zeros take exactly the 5x5 nonzero-neighborhood mean."""
    for i in range(100):
        rng = np.random.default_rng(5_000 + i)
        h, w = rng.integers(8, 33, size=2)
        d = rng.uniform(1.0, 9.0, (h, w))
        d[rng.random((h, w)) < 0.1] = 0.0
        nonzero = d > 0

        one = fill_gaps(d, max_passes=1)
        np.testing.assert_array_equal(one[nonzero], d[nonzero])
        assert np.abs(one - ref.fill_pass_ref(d)).max() <= 1e-9

        prev = d
        zeros = np.count_nonzero(prev == 0)
        for _ in range(3):
            nxt = fill_gaps(prev, max_passes=1)
            z = np.count_nonzero(nxt == 0)
            assert z <= zeros
            np.testing.assert_array_equal(nxt[nonzero], d[nonzero])
            prev, zeros = nxt, z
    _report(5, "gap-fill contract on 100 maps")


def test_c6_sparsity_preservation_and_noise_std():
    """Masked positions preserved exactly; empirical noise std within
    [0.095, 0.105] at sigma = 0.1 over >= 1e5 masked pixels."""
    for i in range(10):
        rng = np.random.default_rng(6_000 + i)
        gt, labels, rel = generate_scene(SceneSpec(width=32, height=24, regions=3, seed=i))
        d_s = sample_sparse(gt, 80, seed=i)
        _, d_ss = generate_pair(rel, labels, d_s, noise=NoiseConfig(sigma=0.05, seed=i), seed=i)
        np.testing.assert_array_equal(d_ss > 0, d_s > 0)

    d_sg = np.full((400, 300), 5.0)
    mask = np.full((400, 300), 2.0)  # every pixel masked in
    assert mask.size >= 100_000
    out = make_sparse(d_sg, mask, NoiseConfig(sigma=0.1, seed=99))
    std = float(np.std(out - d_sg))
    assert 0.095 <= std <= 0.105, std
    _report(6, f"sparsity preservation, noise std {std:.4f}")


def test_c7_loss_identities():
    """total_loss(x,x)=0, ssim_map(x,x)=1, constant-image closed form to
    1e-9, analytic MSE gradient vs central differences to 1e-6."""
    rng = np.random.default_rng(7_000)
    for _ in range(10):
        x = rng.uniform(0.5, 9.0, (16, 16))
        assert total_loss(x, x) == 0.0
        assert (ssim_map(*normalize_pair(x, x)) == 1.0).all()

    c1, c2 = np.full((16, 16), 0.2), np.full((16, 16), 0.4)
    closed = (2 * 0.2 * 0.4 + 1e-4) / (0.2**2 + 0.4**2 + 1e-4)
    assert np.abs(ssim_map(c1, c2) - closed).max() <= 1e-9

    pred = rng.uniform(0.5, 9.0, (12, 12))
    target = rng.uniform(0.5, 9.0, (12, 12))
    grad = mse_grad(pred, target)
    h = 1e-5
    for _ in range(10):
        r, c = rng.integers(0, 12, size=2)
        plus, minus = pred.copy(), pred.copy()
        plus[r, c] += h
        minus[r, c] -= h
        fd = (mse_loss(plus, target) - mse_loss(minus, target)) / (2 * h)
        assert abs(grad[r, c] - fd) <= 1e-6
    _report(7, "loss identities")


def test_c8_sparsity_trend():
    """Seed-averaged segment-affine RMSE is non-increasing through
    50 -> 200 -> 500 -> 2000 points on noise-perturbed scenes."""
    spec = BenchSpec(
        scene=SceneSpec(width=48, height=48, regions=4, rel_noise_sigma=0.05, seed=0),
        sparsity=(50, 200, 500, 2000),
        methods=("segment-affine",),
        seeds=20,
    )
    rows = run_bench(spec)
    means = [
        float(np.mean([r["rmse"] for r in rows if r["sparsity"] == n])) for n in spec.sparsity
    ]
    for lo, hi in zip(means[1:], means[:-1]):
        assert lo <= hi, means
    _report(8, "sparsity trend " + " -> ".join(f"{m:.4f}" for m in means))


def test_c9_determinism_and_io(tmp_path, capsys):
    """Byte-reproducible CLI runs, lossless round trips, and 1000 fuzzed
    malformed files that raise format errors and never crash."""
    # --- CLI byte-reproducibility, every subcommand twice ---
    for run in ("a", "b"):
        base = tmp_path / run
        scene = base / "scene"
        assert main(["scenegen", "--width", "24", "--height", "20", "--regions", "4",
                     "--seed", "5", "--out-dir", str(scene)]) == 0
        assert main(["segment", "--in", str(scene / "rel.pfm"), "--threshold", "0.05",
                     "--out", str(base / "seg.pgm")]) == 0
        assert main(["sample", "--gt", str(scene / "gt.pfm"), "--n", "60", "--seed", "2",
                     "--out", str(base / "sp.pgm")]) == 0
        assert main(["gen-pair", "--rel", str(scene / "rel.pfm"),
                     "--seg", str(scene / "labels.pgm"), "--sparse", str(base / "sp.pgm"),
                     "--sigma", "0.05", "--seed", "3", "--out-dir", str(base / "pair")]) == 0
        assert main(["fit-affine", "--mode", "global", "--rel", str(scene / "rel.pfm"),
                     "--sparse", str(base / "sp.pgm"), "--out", str(base / "pred_g.pfm"),
                     "--report", str(base / "rep_g.txt")]) == 0
        assert main(["fit-affine", "--mode", "segment", "--rel", str(scene / "rel.pfm"),
                     "--sparse", str(base / "sp.pgm"), "--seg", str(scene / "labels.pgm"),
                     "--out", str(base / "pred_s.pfm"), "--report", str(base / "rep_s.txt")]) == 0
        assert main(["evaluate", "--pred", str(base / "pred_s.pfm"),
                     "--gt", str(scene / "gt.pfm"), "--format", "csv"]) == 0
        assert main(["loss", "--pred", str(base / "pred_s.pfm"),
                     "--target", str(scene / "gt.pfm"), "--lambda", "3"]) == 0
        assert main(["bench", "--out", str(base / "bench.csv"), "--seeds", "2",
                     "--sparsity", "20,80", "--width", "20", "--height", "16",
                     "--regions", "3", "--noise-sigma", "0.02"]) == 0
        (base / "stdout.txt").write_text(capsys.readouterr().out)

    for rel in ("scene/gt.pfm", "scene/labels.pgm", "scene/rel.pfm", "seg.pgm", "sp.pgm",
                "pair/sg.pfm", "pair/ss.pfm", "pair/manifest.txt", "pred_g.pfm", "rep_g.txt",
                "pred_s.pfm", "rep_s.txt", "bench.csv"):
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes(), rel
    a_out = (tmp_path / "a" / "stdout.txt").read_text().replace(str(tmp_path / "a"), "")
    b_out = (tmp_path / "b" / "stdout.txt").read_text().replace(str(tmp_path / "b"), "")
    assert a_out == b_out

    # --- lossless round trips ---
    rng = np.random.default_rng(9_000)
    f32 = rng.uniform(0.0, 40.0, (11, 7)).astype(np.float32).astype(np.float64)
    write_depth(f32, tmp_path / "rt.pfm", "pfm32")
    np.testing.assert_array_equal(read_depth(tmp_path / "rt.pfm", "pfm32"), f32)
    grid256 = np.round(rng.uniform(0.0, 200.0, (6, 9)) * 256.0) / 256.0
    write_depth(grid256, tmp_path / "rt.pgm", "pgm16")
    np.testing.assert_array_equal(read_depth(tmp_path / "rt.pgm", "pgm16"), grid256)
    pts = np.where(rng.random((8, 8)) < 0.3, rng.uniform(1.0, 5.0, (8, 8)), 0.0)
    write_depth(pts, tmp_path / "rt.csv", "csv-points")
    np.testing.assert_array_equal(read_depth(tmp_path / "rt.csv", "csv-points", shape=(8, 8)), pts)
    seg = rng.integers(0, 9, (10, 10))
    write_segments(seg, tmp_path / "rt_seg.pgm")
    np.testing.assert_array_equal(read_segments(tmp_path / "rt_seg.pgm"), seg)

    # --- 1000 fuzzed files: FormatError or a clean read, never a crash ---
    bases = {
        "pgm16": (tmp_path / "rt.pgm").read_bytes(),
        "pfm32": (tmp_path / "rt.pfm").read_bytes(),
        "csv-points": (tmp_path / "rt.csv").read_bytes(),
    }
    fuzz = np.random.default_rng(31_337)
    fuzz_path = tmp_path / "fuzz.bin"
    errors = 0
    for i in range(1000):
        fmt = ("pgm16", "pfm32", "csv-points")[i % 3]
        data = bytearray(bases[fmt])
        for _ in range(int(fuzz.integers(1, 4))):
            op = fuzz.integers(0, 4)
            if op == 0 and len(data) > 1:  # truncate
                data = data[: fuzz.integers(0, len(data))]
            elif op == 1 and len(data) > 0:  # flip a byte
                data[fuzz.integers(0, len(data))] = int(fuzz.integers(0, 256))
            elif op == 2:  # splice garbage
                pos = int(fuzz.integers(0, len(data) + 1))
                data = data[:pos] + bytes(fuzz.integers(0, 256, 8, dtype=np.uint8)) + data[pos:]
            else:  # overwrite the header region
                data[: min(6, len(data))] = bytes(fuzz.integers(0, 256, min(6, len(data)), dtype=np.uint8))
        fuzz_path.write_bytes(bytes(data))
        try:
            read_depth(fuzz_path, fmt, shape=(8, 8) if fmt == "csv-points" else None)
        except FormatError:
            errors += 1
    assert errors > 500  # the vast majority of mutations must be caught
    _report(9, f"determinism and I/O ({errors}/1000 fuzzed files rejected cleanly)")
