"""Synthetic wedge corner models and affine warping.

A corner model partitions the plane around a central vertex into angular
sectors of constant gray value. Rendered rasters double as ground truth
because the vertex coordinate is exact by construction, which is what
the benchmark protocols lean on.

Angles are measured with the two-argument arctangent in raster
coordinates (x right, y down) and mapped into [0, 2*pi). Region i covers
[start_i, start_{i+1}); the half-open convention also settles boundary
ties: a pixel whose angle lands exactly on a region's start angle
belongs to that region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ModelDomainError, SizeError, TransformError, UnsupportedModelError
from .filtering import as_image, convolve
from .kernels import (
    DEFAULT_ETA,
    DEFAULT_GAMMA,
    GaborParams,
    imaginary_kernel,
    kernel_half_width,
)

TWO_PI = 2.0 * math.pi

# Default gray levels and start angles per model family. Grays follow
# the usual five-level benchmark assignment (50, 100, 150, 200, 120).
MODEL_PRESETS: dict[str, tuple[tuple[float, ...], tuple[float, ...]]] = {
    "step": ((50.0, 100.0), (0.0, math.pi)),
    "L": ((50.0, 100.0), (0.0, math.pi / 2.0)),
    "Y": ((50.0, 100.0, 150.0), (0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0)),
    "T": ((50.0, 100.0, 150.0), (0.0, math.pi / 2.0, math.pi)),
    "X": (
        (50.0, 100.0, 150.0, 200.0),
        (0.0, math.pi / 2.0, math.pi, 3.0 * math.pi / 2.0),
    ),
    "star": (
        (50.0, 100.0, 150.0, 200.0, 120.0),
        tuple(i * TWO_PI / 5.0 for i in range(5)),
    ),
}


@dataclass(frozen=True)
class CornerModel:
    """Angular partition around a vertex: tuple of (gray, start_angle).

    Start angles must increase strictly and lie in [0, 2*pi); the last
    region wraps around through zero back to the first start angle.
    """

    regions: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if len(self.regions) < 2:
            raise ModelDomainError("a corner model needs at least 2 regions")
        angles = [angle for _, angle in self.regions]
        for gray, angle in self.regions:
            if not (0.0 <= gray <= 255.0):
                raise ModelDomainError(f"gray values must lie in [0, 255], got {gray!r}")
            if not (0.0 <= angle < TWO_PI):
                raise ModelDomainError(f"start angles must lie in [0, 2*pi), got {angle!r}")
        for a, b in zip(angles, angles[1:]):
            if b <= a:
                raise ModelDomainError("start angles must be strictly increasing")

    @property
    def region_count(self) -> int:
        return len(self.regions)

    @property
    def grays(self) -> tuple[float, ...]:
        return tuple(gray for gray, _ in self.regions)

    @property
    def start_angles(self) -> tuple[float, ...]:
        return tuple(angle for _, angle in self.regions)


@dataclass(frozen=True)
class RasterSpec:
    """Output raster geometry; the vertex sits at the center pixel.

    The side must be odd, and at least 65 so the widest default kernel
    support still fits around the vertex. antialias enables 2x2
    supersampling of pixel membership (off by default: hard membership
    keeps the ground truth exact).
    """

    side: int = 129
    antialias: bool = False

    def __post_init__(self) -> None:
        if self.side < 65:
            raise ModelDomainError(f"raster side must be >= 65, got {self.side}")
        if self.side % 2 == 0:
            raise ModelDomainError(f"raster side must be odd, got {self.side}")


def classify_model(model: CornerModel) -> str:
    """Model family from the region count and, for two regions, the gap."""
    count = model.region_count
    if count == 2:
        gap = model.regions[1][1] - model.regions[0][1]
        return "step-edge" if gap == math.pi else "L"
    if count == 3:
        return "Y-or-T"
    if count == 4:
        return "X"
    if count == 5:
        return "star"
    raise UnsupportedModelError(f"no classification for {count} regions")


def preset_model(name: str, grays=None, angles=None) -> CornerModel:
    """Model from a named preset, optionally overriding grays or angles."""
    if name not in MODEL_PRESETS:
        raise ModelDomainError(f"unknown model preset {name!r}; expected one of {sorted(MODEL_PRESETS)}")
    default_grays, default_angles = MODEL_PRESETS[name]
    grays = tuple(float(g) for g in (grays if grays is not None else default_grays))
    angles = tuple(float(a) for a in (angles if angles is not None else default_angles))
    if len(grays) != len(angles):
        raise ModelDomainError(
            f"{len(grays)} gray values but {len(angles)} start angles"
        )
    return CornerModel(regions=tuple(zip(grays, angles)))


def _sample_partition(model: CornerModel, side: int, dx: float, dy: float) -> np.ndarray:
    """Gray value per pixel, sampling membership at centers offset by (dx, dy)."""
    center = side // 2
    ys, xs = np.mgrid[0:side, 0:side]
    angle = np.arctan2(ys + dy - center, xs + dx - center) % TWO_PI
    starts = model.start_angles
    # Angles below the first start angle wrap into the last region.
    image = np.full((side, side), model.regions[-1][0], dtype=np.float64)
    for i, (gray, start) in enumerate(model.regions):
        stop = starts[i + 1] if i + 1 < len(starts) else math.inf
        image[(angle >= start) & (angle < stop)] = gray
    return image


def render_model(model: CornerModel, raster: RasterSpec = RasterSpec()) -> tuple[np.ndarray, tuple[int, int]]:
    """Rasterize a model; returns (image, vertex) with the vertex centered.

    The vertex pixel, whose angle is undefined, takes the first region's
    gray value.
    """
    side = raster.side
    center = side // 2
    if raster.antialias:
        offsets = ((-0.25, -0.25), (0.25, -0.25), (-0.25, 0.25), (0.25, 0.25))
        image = sum(_sample_partition(model, side, dx, dy) for dx, dy in offsets) / 4.0
    else:
        image = _sample_partition(model, side, 0.0, 0.0)
    image[center, center] = model.regions[0][0]
    return image, (center, center)


@dataclass(frozen=True)
class AffineSpec:
    """Rotation, axis scaling and horizontal shear ([1, p; 0, 1]).

    When more than one component is set, the linear map applies scale
    first, then rotation, then shear. Rotation is counterclockwise on
    screen; scaling and shear are anchored at the raster origin.
    """

    rotation: float = 0.0
    scale_x: float = 1.0
    scale_y: float = 1.0
    shear: float = 0.0

    def __post_init__(self) -> None:
        for name in ("rotation", "shear"):
            if not math.isfinite(getattr(self, name)):
                raise TransformError(f"{name} must be finite")
        for name in ("scale_x", "scale_y"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise TransformError(f"{name} must be finite and > 0, got {value!r}")

    def matrix(self) -> np.ndarray:
        cos_t, sin_t = _snapped_trig(self.rotation)
        rotate = np.array([[cos_t, sin_t], [-sin_t, cos_t]])
        shear = np.array([[1.0, self.shear], [0.0, 1.0]])
        scale = np.diag([self.scale_x, self.scale_y])
        return shear @ rotate @ scale

    def inverse(self) -> "AffineSpec":
        return AffineSpec(
            rotation=-self.rotation,
            scale_x=1.0 / self.scale_x,
            scale_y=1.0 / self.scale_y,
            shear=-self.shear,
        )


def _snapped_trig(radians: float) -> tuple[float, float]:
    """cos/sin with quarter-turn angles snapped to exact 0 and +-1.

    Keeps axis-aligned rotations free of interpolation: the sampling
    positions stay exact integers, so the warp is a pixel permutation.
    """
    quarter = radians / (math.pi / 2.0)
    nearest = round(quarter)
    if abs(quarter - nearest) < 1e-12:
        cos_t, sin_t = ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))[int(nearest) % 4]
        return cos_t, sin_t
    return math.cos(radians), math.sin(radians)


def invert_affine(matrix: np.ndarray) -> np.ndarray:
    """Inverse of a 2x3 forward map as another 2x3 map."""
    m = np.asarray(matrix, dtype=np.float64)
    linear = m[:, :2]
    det = linear[0, 0] * linear[1, 1] - linear[0, 1] * linear[1, 0]
    if abs(det) < 1e-12:
        raise TransformError("affine matrix is singular")
    inv = np.linalg.inv(linear)
    return np.hstack([inv, (-inv @ m[:, 2])[:, None]])


def apply_affine(matrix: np.ndarray, points) -> np.ndarray:
    """Map (N, 2) points (x, y) through a 2x3 forward map."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    m = np.asarray(matrix, dtype=np.float64)
    return pts @ m[:, :2].T + m[:, 2]


def warp_by_matrix(image, matrix: np.ndarray, out_shape: tuple[int, int]) -> np.ndarray:
    """Apply a 2x3 forward pixel map by inverse-mapped bilinear sampling.

    Destination pixels that map outside the source read as 0. Sampling
    at exact integer positions reproduces source pixels bit for bit.
    """
    img = as_image(image)
    height, width = img.shape
    out_h, out_w = int(out_shape[0]), int(out_shape[1])
    if out_h < 1 or out_w < 1:
        raise SizeError(f"output shape must be positive, got {(out_h, out_w)}")
    inv = invert_affine(matrix)
    yo, xo = np.mgrid[0:out_h, 0:out_w].astype(np.float64)
    xs = inv[0, 0] * xo + inv[0, 1] * yo + inv[0, 2]
    ys = inv[1, 0] * xo + inv[1, 1] * yo + inv[1, 2]
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    fx = xs - x0
    fy = ys - y0
    out = np.zeros((out_h, out_w), dtype=np.float64)
    for dy in (0, 1):
        for dx in (0, 1):
            weight = (fx if dx else 1.0 - fx) * (fy if dy else 1.0 - fy)
            xi = x0 + dx
            yi = y0 + dy
            inside = (xi >= 0) & (xi < width) & (yi >= 0) & (yi < height)
            xi = np.clip(xi, 0, width - 1)
            yi = np.clip(yi, 0, height - 1)
            out += np.where(inside, weight * img[yi, xi], 0.0)
    return out


def affine_warp(image, spec: AffineSpec) -> tuple[np.ndarray, np.ndarray]:
    """Warp onto a canvas sized to contain the whole mapped image.

    Returns (warped, matrix) where matrix is the exact 2x3 forward map
    from source pixel coordinates (x, y) to destination coordinates;
    ground-truth points transport through it without re-estimation.
    """
    img = as_image(image)
    linear = spec.matrix()
    det = linear[0, 0] * linear[1, 1] - linear[0, 1] * linear[1, 0]
    if abs(det) < 1e-12:
        raise TransformError("composite transform is singular")
    height, width = img.shape
    corners = np.array(
        [[0.0, 0.0], [width - 1.0, 0.0], [0.0, height - 1.0], [width - 1.0, height - 1.0]]
    )
    mapped = corners @ linear.T
    low = mapped.min(axis=0)
    extent = mapped.max(axis=0) - low
    out_w = int(math.ceil(extent[0])) + 1
    out_h = int(math.ceil(extent[1])) + 1
    forward = np.hstack([linear, (-low)[:, None]])
    return warp_by_matrix(img, forward, (out_h, out_w)), forward


def model_filter_response(
    model: CornerModel,
    frequency: float,
    directions: int,
    raster: RasterSpec = RasterSpec(),
    gamma: float = DEFAULT_GAMMA,
    eta: float = DEFAULT_ETA,
    boundary: str = "reflect",
) -> np.ndarray:
    """Per-direction filter response sampled at the rendered vertex."""
    half = kernel_half_width(GaborParams(frequency, 0.0, gamma, eta))
    if raster.side // 2 < half:
        raise SizeError(
            f"raster side {raster.side} too small for kernel half-width {half} around the vertex"
        )
    image, (cx, cy) = render_model(model, raster)
    responses = np.empty(directions, dtype=np.float64)
    for k in range(directions):
        grid = imaginary_kernel(GaborParams(frequency, k * math.pi / directions, gamma, eta))
        responses[k] = convolve(image, grid, boundary=boundary)[cy, cx]
    return responses
