"""Multi-directional, multi-scale Gabor structure-tensor corner detection.

The package covers the full desk-scale workflow: kernel banks, image
filtering, per-pixel tensor eigen-analysis and corner selection,
synthetic wedge-model ground truth, and the matching/repeatability
benchmark protocols, all tied together by the ``gaborcorner`` CLI.
"""

from .detector import (
    CircularMask,
    Corner,
    DetectorConfig,
    circular_mask,
    config_hash,
    corner_measure,
    detect,
    eigenvalues,
    measure_map,
    select_corners,
    structure_tensor,
)
from .errors import (
    ConfigurationError,
    GaborCornerError,
    ImageFormatError,
    ModelDomainError,
    NumericError,
    ParameterDomainError,
    SizeError,
    TransformError,
    UnsupportedModelError,
    UsageError,
)
from .evaluation import (
    GroundTruth,
    MatchResult,
    RepeatabilityResult,
    TransformCase,
    benchmark_csv,
    gaussian_noise,
    generate_transform_suite,
    jpeg_roundtrip,
    localization_error,
    match_corners,
    repeatability,
    run_transform_benchmark,
)
from .filtering import ResponseStack, apply_bank, as_image, convolve
from .image_io import (
    OverlayStyle,
    load_ground_truth,
    load_image,
    save_ground_truth,
    save_image,
    save_overlay,
    write_kernel_dump,
    write_response_dump,
)
from .kernels import (
    GaborParams,
    KernelBank,
    KernelGrid,
    complex_kernel,
    even_component_at,
    imaginary_kernel,
    kernel_bank,
    kernel_half_width,
    odd_component_at,
)
from .models import (
    AffineSpec,
    CornerModel,
    RasterSpec,
    affine_warp,
    apply_affine,
    classify_model,
    invert_affine,
    model_filter_response,
    preset_model,
    render_model,
    warp_by_matrix,
)
from .cli import run_cli

__version__ = "0.1.0"

__all__ = [
    "AffineSpec",
    "CircularMask",
    "ConfigurationError",
    "Corner",
    "CornerModel",
    "DetectorConfig",
    "GaborCornerError",
    "GaborParams",
    "GroundTruth",
    "ImageFormatError",
    "KernelBank",
    "KernelGrid",
    "MatchResult",
    "ModelDomainError",
    "NumericError",
    "OverlayStyle",
    "ParameterDomainError",
    "RasterSpec",
    "RepeatabilityResult",
    "ResponseStack",
    "SizeError",
    "TransformCase",
    "TransformError",
    "UnsupportedModelError",
    "UsageError",
    "affine_warp",
    "apply_affine",
    "apply_bank",
    "as_image",
    "benchmark_csv",
    "circular_mask",
    "classify_model",
    "complex_kernel",
    "config_hash",
    "convolve",
    "corner_measure",
    "detect",
    "eigenvalues",
    "even_component_at",
    "gaussian_noise",
    "generate_transform_suite",
    "imaginary_kernel",
    "invert_affine",
    "jpeg_roundtrip",
    "kernel_bank",
    "kernel_half_width",
    "load_ground_truth",
    "load_image",
    "localization_error",
    "match_corners",
    "measure_map",
    "model_filter_response",
    "odd_component_at",
    "preset_model",
    "render_model",
    "repeatability",
    "run_cli",
    "run_transform_benchmark",
    "save_ground_truth",
    "save_image",
    "save_overlay",
    "select_corners",
    "structure_tensor",
    "warp_by_matrix",
    "write_kernel_dump",
    "write_response_dump",
]
