"""Benchmark protocols: ground-truth matching, localization error,
transform suites, and repeatability scoring."""

from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from PIL import Image as PILImage

from .detector import DetectorConfig, config_hash, detect
from .errors import ConfigurationError, ModelDomainError
from .filtering import as_image
from .models import AffineSpec, affine_warp, apply_affine

COORDINATE_NOTE = "x=column, y=row, origin top-left"

FAMILIES = (
    "rotation",
    "uniform-scale",
    "non-uniform-scale",
    "shear",
    "jpeg",
    "gaussian-noise",
)

DEFAULT_MATCH_RADIUS = 4.0
DEFAULT_REPEAT_RADIUS = 2.0

_IDENTITY = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


@dataclass(frozen=True)
class GroundTruth:
    """Reference corner coordinates for one image."""

    corners: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        pts = list(self.corners)
        for i, (ax, ay) in enumerate(pts):
            for bx, by in pts[i + 1 :]:
                if math.hypot(ax - bx, ay - by) < 1.0:
                    raise ModelDomainError(
                        f"ground-truth corners ({ax}, {ay}) and ({bx}, {by}) are within 1 px"
                    )


@dataclass(frozen=True)
class MatchResult:
    """Outcome of one-to-one corner matching against a reference set."""

    pairs: tuple[tuple[tuple[float, float], tuple[float, float]], ...]
    missed: int
    false_alarms: int
    localization_error: float | None

    @property
    def matched(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class RepeatabilityResult:
    """Corner counts before/after a transform and the matched count."""

    original_count: int
    transformed_count: int
    matched_count: int

    @property
    def value(self) -> float | None:
        """Symmetric fraction of re-found corners; None when undefined."""
        if self.original_count == 0 or self.transformed_count == 0:
            return None
        return (self.matched_count / 2.0) * (
            1.0 / self.original_count + 1.0 / self.transformed_count
        )


@dataclass(frozen=True)
class TransformCase:
    """One benchmark transform: family, parameter and exact pixel map."""

    family: str
    parameter: object
    matrix: np.ndarray
    index: int


def _as_points(items) -> np.ndarray:
    points = []
    for item in items:
        if hasattr(item, "x") and hasattr(item, "y"):
            points.append((float(item.x), float(item.y)))
        else:
            x, y = item
            points.append((float(x), float(y)))
    if not points:
        return np.zeros((0, 2), dtype=np.float64)
    return np.asarray(points, dtype=np.float64)


def _greedy_pairs(a: np.ndarray, b: np.ndarray, radius: float, inclusive: bool):
    """One-to-one assignment by ascending distance.

    Candidate pairs are ordered by (distance, index_a, index_b) so the
    outcome is deterministic under exact distance ties.
    """
    candidates = []
    for i in range(len(a)):
        d = np.hypot(b[:, 0] - a[i, 0], b[:, 1] - a[i, 1]) if len(b) else np.zeros(0)
        close = np.nonzero(d <= radius if inclusive else d < radius)[0]
        for j in close:
            candidates.append((float(d[j]), i, int(j)))
    candidates.sort()
    used_a: set[int] = set()
    used_b: set[int] = set()
    pairs = []
    for _, i, j in candidates:
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        pairs.append((i, j))
    return pairs


def localization_error(pairs) -> float | None:
    """Root mean squared distance over matched pairs; None when empty."""
    pairs = tuple(pairs)
    if not pairs:
        return None
    squares = [
        (ax - bx) ** 2 + (ay - by) ** 2 for (ax, ay), (bx, by) in pairs
    ]
    return math.sqrt(math.fsum(squares) / len(squares))


def match_corners(detected, reference, tau: float = DEFAULT_MATCH_RADIUS) -> MatchResult:
    """Greedy one-to-one matching; a pair counts when strictly closer than tau.

    Unmatched reference corners are missed; unmatched detections are
    false alarms.
    """
    if tau <= 0:
        raise ConfigurationError(f"tau must be > 0, got {tau}")
    det = _as_points(detected)
    ref = _as_points(reference)
    index_pairs = _greedy_pairs(det, ref, tau, inclusive=False)
    pairs = tuple(
        ((float(det[i, 0]), float(det[i, 1])), (float(ref[j, 0]), float(ref[j, 1])))
        for i, j in index_pairs
    )
    return MatchResult(
        pairs=pairs,
        missed=len(ref) - len(pairs),
        false_alarms=len(det) - len(pairs),
        localization_error=localization_error(pairs),
    )


def repeatability(original, transformed, matrix, radius: float = DEFAULT_REPEAT_RADIUS) -> RepeatabilityResult:
    """Score how many corners survive a transform.

    Original corners are transported through the exact coordinate map
    and matched one-to-one against the transformed image's corners
    within `radius` pixels (inclusive).
    """
    a = _as_points(original)
    b = _as_points(transformed)
    if len(a):
        a = apply_affine(matrix, a)
    pairs = _greedy_pairs(a, b, radius, inclusive=True)
    return RepeatabilityResult(
        original_count=len(a), transformed_count=len(b), matched_count=len(pairs)
    )


def _suite_parameters() -> list[tuple[str, object]]:
    cases: list[tuple[str, object]] = []
    for degrees in range(-90, 91, 10):
        if degrees != 0:
            cases.append(("rotation", float(degrees)))
    for tenth in range(5, 21):
        if tenth != 10:
            cases.append(("uniform-scale", tenth / 10.0))
    for sx in range(7, 16):
        for sy in range(5, 19):
            if not (sx == 10 and sy == 10):
                cases.append(("non-uniform-scale", (sx / 10.0, sy / 10.0)))
    for tenth in range(-10, 11):
        if tenth != 0:
            cases.append(("shear", tenth / 10.0))
    for quality in range(5, 101, 5):
        cases.append(("jpeg", quality))
    for sigma in range(1, 16):
        cases.append(("gaussian-noise", float(sigma)))
    return cases


def jpeg_roundtrip(image, quality: int) -> np.ndarray:
    """Encode to an in-memory JPEG at the given quality and decode back."""
    img = as_image(image)
    quantized = np.clip(np.floor(img + 0.5), 0.0, 255.0).astype(np.uint8)
    buffer = io.BytesIO()
    PILImage.fromarray(quantized, mode="L").save(buffer, format="JPEG", quality=int(quality))
    buffer.seek(0)
    with PILImage.open(buffer) as decoded:
        return np.asarray(decoded, dtype=np.float64)


def gaussian_noise(image, sigma: float, stream: int) -> np.ndarray:
    """Add zero-mean Gaussian noise from a counter-based generator.

    The output is left as unclipped floats so the noise level stays
    exact; quantization only happens on 8-bit export.
    """
    img = as_image(image)
    rng = np.random.Generator(np.random.Philox(stream))
    return img + rng.normal(0.0, sigma, size=img.shape)


def _case_image(img: np.ndarray, family: str, parameter, stream: int):
    if family == "rotation":
        return affine_warp(img, AffineSpec(rotation=math.radians(parameter)))
    if family == "uniform-scale":
        return affine_warp(img, AffineSpec(scale_x=parameter, scale_y=parameter))
    if family == "non-uniform-scale":
        sx, sy = parameter
        return affine_warp(img, AffineSpec(scale_x=sx, scale_y=sy))
    if family == "shear":
        return affine_warp(img, AffineSpec(shear=parameter))
    if family == "jpeg":
        return jpeg_roundtrip(img, parameter), _IDENTITY.copy()
    if family == "gaussian-noise":
        return gaussian_noise(img, parameter, stream), _IDENTITY.copy()
    raise ConfigurationError(f"unknown transform family {family!r}")


def generate_transform_suite(image, seed: int = 0, families=None) -> list[tuple[TransformCase, np.ndarray]]:
    """Transformed benchmark images for the standard parameter grids.

    Per image the full suite holds 18 rotations, 15 uniform scalings,
    125 non-uniform scalings, 20 shears, 20 JPEG qualities and 15 noise
    levels. Case indices are assigned over the full enumeration before
    any family filter, and each noise case draws from a counter-based
    generator keyed by seed XOR case index, so any subset reproduces
    bit for bit.
    """
    img = as_image(image)
    if families is None:
        chosen = set(FAMILIES)
    else:
        chosen = set(families)
        unknown = chosen.difference(FAMILIES)
        if unknown:
            raise ConfigurationError(f"unknown transform families: {sorted(unknown)}")
    out = []
    for index, (family, parameter) in enumerate(_suite_parameters()):
        if family not in chosen:
            continue
        case_img, matrix = _case_image(img, family, parameter, seed ^ index)
        out.append((TransformCase(family, parameter, matrix, index), case_img))
    return out


def _worker_count(requested, case_count: int) -> int:
    if requested is None:
        requested = os.cpu_count() or 1
    return max(1, min(int(requested), case_count))


def run_transform_benchmark(
    image,
    config: DetectorConfig | None = None,
    seed: int = 0,
    families=None,
    workers=None,
    image_id: str = "image",
) -> dict:
    """Detect on the original and every suite case; score repeatability.

    Cases may run on a thread pool; results merge in case-index order,
    so the report is byte-identical regardless of worker count.
    """
    config = config or DetectorConfig()
    img = as_image(image)
    base_points = [(c.x, c.y) for c in detect(img, config)]
    suite = generate_transform_suite(img, seed=seed, families=families)

    def _score(entry):
        case, case_img = entry
        found = [(c.x, c.y) for c in detect(case_img, config)]
        result = repeatability(base_points, found, case.matrix)
        parameter = list(case.parameter) if isinstance(case.parameter, tuple) else case.parameter
        return {
            "index": case.index,
            "family": case.family,
            "parameter": parameter,
            "original_count": result.original_count,
            "transformed_count": result.transformed_count,
            "matched_count": result.matched_count,
            "repeatability": result.value,
        }

    if suite:
        with ThreadPoolExecutor(max_workers=_worker_count(workers, len(suite))) as pool:
            rows = list(pool.map(_score, suite))
    else:
        rows = []

    family_means = {}
    for family in FAMILIES:
        values = [r["repeatability"] for r in rows if r["family"] == family and r["repeatability"] is not None]
        if values:
            family_means[family] = math.fsum(values) / len(values)
    overall = [r["repeatability"] for r in rows if r["repeatability"] is not None]
    return {
        "image": image_id,
        "coordinates": COORDINATE_NOTE,
        "seed": seed,
        "config": config.as_dict(),
        "config_hash": config_hash(config),
        "original_count": len(base_points),
        "cases": rows,
        "family_means": family_means,
        "grand_mean": math.fsum(overall) / len(overall) if overall else None,
    }


def benchmark_csv(report: dict) -> str:
    """Flatten a repeatability report into CSV."""
    lines = ["index,family,parameter,original_count,transformed_count,matched_count,repeatability"]
    for row in report["cases"]:
        parameter = row["parameter"]
        if isinstance(parameter, list):
            parameter = "x".join(repr(p) for p in parameter)
        value = "" if row["repeatability"] is None else repr(row["repeatability"])
        lines.append(
            f"{row['index']},{row['family']},{parameter},"
            f"{row['original_count']},{row['transformed_count']},{row['matched_count']},{value}"
        )
    return "\n".join(lines) + "\n"
