"""Convolution engine: single kernels and whole kernel banks.

Everything runs in 64-bit floats; the detector multiplies pairs of
responses and sums them, so 32-bit accumulation would drift measurably.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.signal import fftconvolve

from .errors import ConfigurationError, NumericError, SizeError
from .kernels import KernelBank, KernelGrid

_PAD_MODES = {"reflect": "symmetric", "replicate": "edge", "zero": "constant"}
_NDIMAGE_MODES = {"reflect": "reflect", "replicate": "nearest", "zero": "constant"}

# Direct convolution wins for small kernels; the transform path wins
# once a kernel carries a few hundred taps.
_FFT_SIDE_THRESHOLD = 15


def as_image(data) -> np.ndarray:
    """Coerce to a finite 2-D float64 raster."""
    image = np.asarray(data, dtype=np.float64)
    if image.ndim != 2 or image.shape[0] < 1 or image.shape[1] < 1:
        raise SizeError(f"expected a 2-D image, got shape {image.shape}")
    if not np.all(np.isfinite(image)):
        raise NumericError("image contains non-finite values")
    return image


def _kernel_taps(kernel) -> np.ndarray:
    taps = kernel.taps if isinstance(kernel, KernelGrid) else np.asarray(kernel, dtype=np.float64)
    if taps.ndim != 2 or taps.shape[0] != taps.shape[1] or taps.shape[0] % 2 == 0:
        raise SizeError(f"kernel must be an odd-sided square grid, got shape {taps.shape}")
    return taps


def convolve(image, kernel, boundary: str = "reflect", method: str = "auto") -> np.ndarray:
    """Same-size true convolution of image with kernel.

    The kernel is applied flipped (convolution, not correlation), so an
    impulse reproduces the kernel itself. boundary is one of reflect
    (mirror padding, the default), replicate, or zero. method picks the
    direct or FFT path; auto switches on kernel size. Both paths agree
    to ~1e-8 relative.
    """
    img = as_image(image)
    taps = _kernel_taps(kernel)
    half = taps.shape[0] // 2
    if half >= min(img.shape):
        raise SizeError(
            f"kernel half-width {half} does not fit image of shape {img.shape}"
        )
    if boundary not in _PAD_MODES:
        raise ConfigurationError(
            f"unknown boundary mode {boundary!r}; expected one of {sorted(_PAD_MODES)}"
        )
    if method == "auto":
        method = "fft" if taps.shape[0] >= _FFT_SIDE_THRESHOLD else "direct"
    if method == "direct":
        return ndimage.convolve(img, taps, mode=_NDIMAGE_MODES[boundary], cval=0.0)
    if method == "fft":
        if half == 0:
            padded = img
        elif boundary == "zero":
            padded = np.pad(img, half, mode="constant", constant_values=0.0)
        else:
            padded = np.pad(img, half, mode=_PAD_MODES[boundary])
        return fftconvolve(padded, taps, mode="valid")
    raise ConfigurationError(f"unknown convolution method {method!r}")


@dataclass(frozen=True)
class ResponseStack:
    """Filter responses for every (frequency, direction) pair.

    planes has shape (scales, directions, height, width); every plane
    matches the source image size.
    """

    frequencies: tuple[float, ...]
    directions: int
    planes: np.ndarray

    def plane(self, scale_index: int, direction_index: int) -> np.ndarray:
        return self.planes[scale_index, direction_index]


def apply_bank(image, bank: KernelBank, boundary: str = "reflect") -> ResponseStack:
    """Convolve the image with every kernel in the bank."""
    img = as_image(image)
    scales = len(bank.frequencies)
    planes = np.empty((scales, bank.directions) + img.shape, dtype=np.float64)
    for s in range(scales):
        for k in range(bank.directions):
            planes[s, k] = convolve(img, bank.kernel(s, k), boundary=boundary)
    return ResponseStack(frequencies=bank.frequencies, directions=bank.directions, planes=planes)
