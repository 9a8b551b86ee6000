"""depthkit: numerics for sparse-to-dense depth completion.

Segment-wise rescaling of relative depth maps into synthetic training
pairs, global and per-segment affine-fit baselines, the MSE+SSIM training
objective, and the standard depth evaluation metrics, plus deterministic
oracle scenes and bit-exact file formats to verify all of it.
"""

from .affine import (
    FIT_BIAS,
    FIT_IDENTITY,
    FIT_OK,
    AffineParams,
    SegmentAffine,
    SegmentFit,
    apply_affine,
    fit_global,
    fit_segmentwise,
)
from .bench import BenchSpec, load_bench_spec, run_bench, write_bench_csv
from .grids import (
    DEFAULT_CLAMP_FLOOR,
    NoValidDataError,
    SegmentStats,
    normalize,
    sample_sparse,
    segment_stats,
    valid_mask,
)
from .io_formats import (
    FormatError,
    detect_format,
    read_depth,
    read_segments,
    write_depth,
    write_segments,
)
from .losses import (
    LossConfig,
    SsimConfig,
    masked_mse_loss,
    mse_grad,
    mse_loss,
    normalize_pair,
    ssim_loss,
    ssim_map,
    total_loss,
)
from .metrics import DEFAULT_TAUS, MetricReport, evaluate, evaluate_many, silog, silog_segment
from .scene import SceneSpec, generate_scene
from .segmentation import SegmenterConfig, segment_field, segment_from_depth, segment_from_gray
from .synth import (
    NoiseConfig,
    RescalePlan,
    SegmentScale,
    fill_gaps,
    generate_pair,
    make_sparse,
    plan_rescale,
    rescale,
)

__version__ = "0.1.0"
