"""Gabor kernel generation.

Builds the odd (sine-carrier) component of the 2-D Gabor filter and the
multi-scale, multi-direction kernel banks the detector runs on. The odd
component is point-antisymmetric, so it integrates to zero and the
filters are blind to constant intensity offsets; downstream code relies
on that property and the tests assert it bit for bit.

Coordinates follow the image raster: x grows to the right (columns),
y grows downward (rows). A kernel grid stores tap (x, y) at array index
``[half_width + y, half_width + x]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ParameterDomainError

# Truncation rule: the sampled support extends to
# ceil(TRUNCATION_FACTOR * max(gamma, eta) / frequency) pixels, roughly
# 4.9 Gaussian standard deviations along the wider envelope axis. A
# factor of 3.0 leaves border taps at ~1.2e-4 of the peak, which is too
# coarse for the zero-sum arithmetic downstream; 3.5 brings the worst
# default-bank ratio under 5e-6.
TRUNCATION_FACTOR = 3.5

DEFAULT_FREQUENCIES = (0.15, 0.2, 0.25)
DEFAULT_DIRECTIONS = 6
DEFAULT_GAMMA = 0.6
DEFAULT_ETA = 1.2


@dataclass(frozen=True)
class GaborParams:
    """Parameters of a single Gabor kernel.

    frequency is the carrier frequency in cycles/pixel and theta the
    orientation in radians. gamma and eta set the envelope sharpness
    along and across the carrier direction; the envelope aspect ratio is
    eta / gamma. Orientation is meaningful modulo pi for the odd kernel
    (the kernel at theta + pi is the negation of the kernel at theta);
    ``normalized_theta`` folds it into [0, pi). The raw theta is kept so
    that the theta vs theta + pi negation stays observable.
    """

    frequency: float
    theta: float = 0.0
    gamma: float = DEFAULT_GAMMA
    eta: float = DEFAULT_ETA

    def __post_init__(self) -> None:
        for name in ("frequency", "gamma", "eta"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise ParameterDomainError(f"{name} must be finite and > 0, got {value!r}")
        if not math.isfinite(self.theta):
            raise ParameterDomainError(f"theta must be finite, got {self.theta!r}")

    @property
    def normalized_theta(self) -> float:
        return self.theta % math.pi

    @property
    def aspect_ratio(self) -> float:
        return self.eta / self.gamma


@dataclass(frozen=True)
class KernelGrid:
    """Square grid of sampled kernel taps with an odd side length."""

    taps: np.ndarray
    half_width: int

    @property
    def side(self) -> int:
        return 2 * self.half_width + 1

    def tap(self, x: int, y: int) -> float:
        """Tap value at integer offset (x, y) from the center."""
        return float(self.taps[self.half_width + y, self.half_width + x])


@dataclass(frozen=True)
class KernelBank:
    """Odd-component kernels for every (frequency, direction) pair."""

    frequencies: tuple[float, ...]
    directions: int
    gamma: float
    eta: float
    kernels: tuple[tuple[KernelGrid, ...], ...]

    @property
    def angles(self) -> tuple[float, ...]:
        return tuple(k * math.pi / self.directions for k in range(self.directions))

    @property
    def max_half_width(self) -> int:
        return max(grid.half_width for row in self.kernels for grid in row)

    def kernel(self, scale_index: int, direction_index: int) -> KernelGrid:
        return self.kernels[scale_index][direction_index]


def kernel_half_width(params: GaborParams) -> int:
    """Truncated support radius in pixels for the given parameters."""
    exact = TRUNCATION_FACTOR * max(params.gamma, params.eta) / params.frequency
    # Round off float noise so an analytically integral radius is not
    # ceiled one tap too far.
    return int(math.ceil(round(exact, 9)))


def _envelope_and_carrier(params: GaborParams, x, y):
    """Gaussian envelope (with amplitude) and the rotated carrier coordinate."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    cos_t = math.cos(params.theta)
    sin_t = math.sin(params.theta)
    xr = x * cos_t + y * sin_t
    yr = -x * sin_t + y * cos_t
    f2 = params.frequency * params.frequency
    amplitude = f2 / (math.pi * params.gamma * params.eta)
    envelope = np.exp(
        -(f2 / (params.gamma * params.gamma)) * xr * xr
        - (f2 / (params.eta * params.eta)) * yr * yr
    )
    return amplitude * envelope, xr


def odd_component_at(params: GaborParams, x, y):
    """Evaluate the odd (sine) Gabor component at continuous coordinates."""
    scaled, xr = _envelope_and_carrier(params, x, y)
    return scaled * np.sin(2.0 * math.pi * params.frequency * xr)


def even_component_at(params: GaborParams, x, y):
    """Evaluate the even (cosine) Gabor component at continuous coordinates."""
    scaled, xr = _envelope_and_carrier(params, x, y)
    return scaled * np.cos(2.0 * math.pi * params.frequency * xr)


def _support_grid(half_width: int):
    ys, xs = np.mgrid[-half_width : half_width + 1, -half_width : half_width + 1]
    return xs.astype(np.float64), ys.astype(np.float64)


def imaginary_kernel(params: GaborParams) -> KernelGrid:
    """Sample the odd Gabor component on its truncated integer support.

    The sampled grid is point-antisymmetric bit for bit (negating both
    coordinates negates the tap), hence the center tap is zero and the
    exact sum of all taps is zero.
    """
    half = kernel_half_width(params)
    xs, ys = _support_grid(half)
    return KernelGrid(taps=odd_component_at(params, xs, ys), half_width=half)


def complex_kernel(params: GaborParams) -> tuple[KernelGrid, KernelGrid]:
    """Sampled even and odd components on a shared support.

    Returns (real, imag); the imaginary grid equals
    ``imaginary_kernel(params)`` tap for tap.
    """
    half = kernel_half_width(params)
    xs, ys = _support_grid(half)
    real = KernelGrid(taps=even_component_at(params, xs, ys), half_width=half)
    imag = KernelGrid(taps=odd_component_at(params, xs, ys), half_width=half)
    return real, imag


def kernel_bank(
    frequencies=DEFAULT_FREQUENCIES,
    directions: int = DEFAULT_DIRECTIONS,
    gamma: float = DEFAULT_GAMMA,
    eta: float = DEFAULT_ETA,
) -> KernelBank:
    """Build the odd-kernel table at directions k * pi / directions."""
    freqs = tuple(float(f) for f in frequencies)
    if not freqs:
        raise ConfigurationError("at least one frequency is required")
    for f in freqs:
        if not math.isfinite(f) or f <= 0.0:
            raise ConfigurationError(f"frequencies must be finite and > 0, got {f!r}")
    directions = int(directions)
    if directions < 2:
        raise ConfigurationError(f"need at least 2 directions, got {directions}")

    rows = []
    for f in freqs:
        row = tuple(
            imaginary_kernel(GaborParams(f, k * math.pi / directions, gamma, eta))
            for k in range(directions)
        )
        rows.append(row)
    return KernelBank(
        frequencies=freqs,
        directions=directions,
        gamma=float(gamma),
        eta=float(eta),
        kernels=tuple(rows),
    )
