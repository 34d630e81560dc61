"""Multi-directional structure-tensor corner detector.

At every pixel the directional filter responses are aggregated over a
small circular window into a directions x directions tensor; the
product-over-sum of its eigenvalue spectrum is the corner measure. Flat
patches and straight edges leave the tensor rank deficient, so the
product term drives their measure toward zero, while genuine corners
energize every direction at once. A corner must clear the threshold at
every scale, which strips candidates that only look corner-like at one
bandwidth.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ConfigurationError, NumericError, SizeError
from .filtering import ResponseStack, apply_bank, as_image
from .kernels import (
    DEFAULT_DIRECTIONS,
    DEFAULT_ETA,
    DEFAULT_FREQUENCIES,
    DEFAULT_GAMMA,
    KernelBank,
    kernel_bank,
)

# Eigenvalues of the windowed tensor are nonnegative in exact
# arithmetic; round-off below this fraction of the trace is clamped,
# anything worse is treated as a numerical failure.
PSD_TOLERANCE = 1e-6

DEFAULT_THRESHOLD = 2.0e8
DEFAULT_GUARD = 2.22e-16


@dataclass(frozen=True)
class CircularMask:
    """Binary disc of radius span/2 on a (span + 1)-sided window."""

    span: int
    weights: np.ndarray


def circular_mask(span: int) -> CircularMask:
    """Disc weights: entry (v, w) is 1 iff v^2 + w^2 <= (span/2)^2."""
    if not isinstance(span, (int, np.integer)) or span < 2 or span % 2:
        raise ConfigurationError(f"window span must be an even integer >= 2, got {span!r}")
    half = span // 2
    v, w = np.mgrid[-half : half + 1, -half : half + 1]
    weights = ((v * v + w * w) <= (span / 2.0) ** 2).astype(np.float64)
    return CircularMask(span=int(span), weights=weights)


@dataclass(frozen=True)
class DetectorConfig:
    """Detector parameters.

    frequencies, directions, gamma, eta and the 15x15 NMS window with
    threshold 2e8 and guard 2.22e-16 are the published operating point.
    window_span sets the circular tensor window (side span + 1); NMS
    candidates are strict local maxima of the sharpest scale's measure
    plane and must clear the threshold at every scale.
    """

    frequencies: tuple[float, ...] = DEFAULT_FREQUENCIES
    directions: int = DEFAULT_DIRECTIONS
    gamma: float = DEFAULT_GAMMA
    eta: float = DEFAULT_ETA
    window_span: int = 8
    nms_size: tuple[int, int] = (15, 15)
    threshold: float = DEFAULT_THRESHOLD
    guard: float = DEFAULT_GUARD
    boundary: str = "reflect"

    def __post_init__(self) -> None:
        if not self.frequencies:
            raise ConfigurationError("at least one frequency is required")
        if any(f <= 0 or not math.isfinite(f) for f in self.frequencies):
            raise ConfigurationError(f"frequencies must be positive, got {self.frequencies}")
        if self.directions < 2:
            raise ConfigurationError(f"need at least 2 directions, got {self.directions}")
        if self.window_span < 2 or self.window_span % 2:
            raise ConfigurationError(f"window_span must be even and >= 2, got {self.window_span}")
        rows, cols = self.nms_size
        if rows < 3 or cols < 3 or rows % 2 == 0 or cols % 2 == 0:
            raise ConfigurationError(f"nms_size must be odd and >= 3x3, got {self.nms_size}")
        if self.threshold <= 0:
            raise ConfigurationError(f"threshold must be > 0, got {self.threshold}")
        if self.guard <= 0:
            raise ConfigurationError(f"guard must be > 0, got {self.guard}")
        if self.boundary not in ("reflect", "replicate", "zero"):
            raise ConfigurationError(f"unknown boundary mode {self.boundary!r}")

    @property
    def anchor_scale(self) -> int:
        """Index of the measure plane used for localization.

        The largest frequency has the smallest spatial support and the
        sharpest measure peaks, so it anchors the local-maximum test.
        """
        return int(np.argmax(self.frequencies))

    def bank(self) -> KernelBank:
        return kernel_bank(self.frequencies, self.directions, self.gamma, self.eta)

    def as_dict(self) -> dict:
        return {
            "frequencies": list(self.frequencies),
            "directions": self.directions,
            "gamma": self.gamma,
            "eta": self.eta,
            "window_span": self.window_span,
            "nms_rows": self.nms_size[0],
            "nms_cols": self.nms_size[1],
            "threshold": self.threshold,
            "guard": self.guard,
            "boundary": self.boundary,
        }


def config_hash(config: DetectorConfig) -> str:
    """Stable digest of the fully resolved configuration."""
    payload = json.dumps(config.as_dict(), sort_keys=True).encode("ascii")
    return hashlib.sha256(payload).hexdigest()


@dataclass(frozen=True)
class Corner:
    """Detected corner: pixel position plus the per-scale measures."""

    x: int
    y: int
    measures: tuple[float, ...]

    @property
    def score(self) -> float:
        return min(self.measures)


def structure_tensor(stack: ResponseStack, scale_index: int, pixel, mask: CircularMask) -> np.ndarray:
    """Windowed direction-product tensor at one pixel.

    Entry (i, j) sums weight * response_i * response_j over the window;
    window entries outside the image are dropped. The result is
    symmetric bit for bit.
    """
    planes = stack.planes[scale_index]
    x, y = int(pixel[0]), int(pixel[1])
    directions, height, width = planes.shape
    if not (0 <= x < width and 0 <= y < height):
        raise SizeError(f"pixel {(x, y)} outside image of shape {(height, width)}")
    half = mask.span // 2
    x0, x1 = max(0, x - half), min(width - 1, x + half)
    y0, y1 = max(0, y - half), min(height - 1, y + half)
    window = planes[:, y0 : y1 + 1, x0 : x1 + 1]
    weights = mask.weights[y0 - y + half : y1 - y + half + 1, x0 - x + half : x1 - x + half + 1]
    tensor = np.empty((directions, directions), dtype=np.float64)
    for i in range(directions):
        for j in range(i, directions):
            value = float(np.sum(weights * window[i] * window[j]))
            tensor[i, j] = value
            tensor[j, i] = value
    return tensor


def eigenvalues(matrix, assume_psd: bool = True) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, sorted descending.

    With assume_psd, negative round-off above -PSD_TOLERANCE * trace is
    clamped to zero; anything more negative raises NumericError.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if not np.all(np.isfinite(m)):
        raise NumericError("matrix contains non-finite entries")
    values = np.linalg.eigvalsh(m)[::-1]
    if assume_psd:
        floor = -PSD_TOLERANCE * abs(float(np.trace(m)))
        if values[-1] < floor:
            raise NumericError(
                f"matrix is not positive semidefinite: min eigenvalue {values[-1]!r}"
            )
        values = np.maximum(values, 0.0)
    return values


def corner_measure(eigs, guard: float = DEFAULT_GUARD) -> float:
    """Product of the eigenvalue spectrum over its guarded sum.

    Any zero eigenvalue annihilates the product, which is why
    rank-deficient tensors (edges, flat patches) score zero.
    """
    lam = np.maximum(np.asarray(eigs, dtype=np.float64), 0.0)
    return float(lam.prod() / (lam.sum() + guard))


def measure_map(image, config: DetectorConfig | None = None) -> np.ndarray:
    """Dense per-scale corner-measure planes, shape (scales, H, W)."""
    config = config or DetectorConfig()
    img = as_image(image)
    bank = config.bank()
    largest_side = 2 * bank.max_half_width + 1
    if min(img.shape) < largest_side:
        raise SizeError(
            f"image of shape {img.shape} is smaller than the largest kernel side {largest_side}"
        )
    stack = apply_bank(img, bank, boundary=config.boundary)
    mask = circular_mask(config.window_span)
    scales, directions = stack.planes.shape[:2]
    height, width = img.shape
    measures = np.empty((scales, height, width), dtype=np.float64)
    for s in range(scales):
        planes = stack.planes[s]
        tensor = np.empty((height, width, directions, directions), dtype=np.float64)
        for i in range(directions):
            for j in range(i, directions):
                # Dropping window entries outside the image is exactly
                # zero padding of the product plane.
                summed = ndimage.convolve(
                    planes[i] * planes[j], mask.weights, mode="constant", cval=0.0
                )
                tensor[..., i, j] = summed
                tensor[..., j, i] = summed
        lam = np.linalg.eigvalsh(tensor)
        trace = np.einsum("...ii->...", tensor)
        if np.any(lam[..., 0] < -PSD_TOLERANCE * np.abs(trace)):
            raise NumericError("structure tensor lost positive semidefiniteness")
        lam = np.maximum(lam, 0.0)
        measures[s] = lam.prod(axis=-1) / (lam.sum(axis=-1) + config.guard)
    return measures


def select_corners(measures: np.ndarray, config: DetectorConfig | None = None) -> list[Corner]:
    """Non-maximum suppression plus thresholding of dense measure planes.

    Candidates are strict local maxima of the anchor plane over the NMS
    window; only pixels whose window fits fully inside the image are
    eligible, so border pixels compete as neighbors but can never
    surface as corners themselves. Exact plateau ties go to the
    lexicographically smallest (y, x). A candidate becomes a corner when
    its measure exceeds the threshold at every scale. Corners come back
    sorted by descending score.
    """
    config = config or DetectorConfig()
    measures = np.asarray(measures, dtype=np.float64)
    anchor = measures[config.anchor_scale]
    height, width = anchor.shape
    rows, cols = config.nms_size
    half_r, half_c = rows // 2, cols // 2
    if height < rows or width < cols:
        return []
    peak = ndimage.maximum_filter(anchor, size=(rows, cols), mode="constant", cval=-np.inf)
    lowest = measures.min(axis=0)
    candidates = (anchor == peak) & (lowest > config.threshold)
    candidates[:half_r, :] = False
    candidates[height - half_r :, :] = False
    candidates[:, :half_c] = False
    candidates[:, width - half_c :] = False

    corners = []
    for y, x in zip(*np.nonzero(candidates)):
        window = anchor[y - half_r : y + half_r + 1, x - half_c : x + half_c + 1]
        top = window.max()
        if anchor[y, x] < top:
            continue
        ties = np.argwhere(window == top)
        first = ties[np.lexsort((ties[:, 1], ties[:, 0]))][0]
        if (y - half_r + int(first[0]), x - half_c + int(first[1])) != (y, x):
            continue
        corners.append(
            Corner(x=int(x), y=int(y), measures=tuple(float(m[y, x]) for m in measures))
        )
    corners.sort(key=lambda c: (-c.score, c.y, c.x))
    return corners


def detect(image, config: DetectorConfig | None = None) -> list[Corner]:
    """Full pipeline: filter bank, tensors, measures, NMS, thresholds."""
    config = config or DetectorConfig()
    return select_corners(measure_map(image, config), config)
