import numpy as np
import pytest

from gaborcorner import (
    GaborParams,
    SizeError,
    apply_bank,
    convolve,
    imaginary_kernel,
    kernel_bank,
)

BOUNDARIES = ("reflect", "replicate", "zero")
_PAD = {"reflect": "symmetric", "replicate": "edge", "zero": "constant"}


def direct_double_sum(image, taps, boundary):
    """Literal convolution: pad, flip nothing, sum kernel * shifted image."""
    half = taps.shape[0] // 2
    if boundary == "zero":
        padded = np.pad(image, half, mode="constant")
    else:
        padded = np.pad(image, half, mode=_PAD[boundary])
    out = np.zeros_like(image, dtype=np.float64)
    height, width = image.shape
    for r in range(height):
        for c in range(width):
            acc = 0.0
            for dr in range(-half, half + 1):
                for dc in range(-half, half + 1):
                    acc += taps[half + dr, half + dc] * padded[half + r - dr, half + c - dc]
            out[r, c] = acc
    return out


class TestConvolve:
    def test_impulse_reproduces_kernel(self):
        # Convolving a unit impulse with any kernel returns the kernel
        # itself, centered on the impulse.
        kernel = imaginary_kernel(GaborParams(0.45, 0.7))
        half = kernel.half_width
        side = 4 * half + 1
        image = np.zeros((side, side))
        image[side // 2, side // 2] = 1.0
        out = convolve(image, kernel, boundary="zero", method="direct")
        window = out[side // 2 - half : side // 2 + half + 1, side // 2 - half : side // 2 + half + 1]
        assert np.array_equal(window, kernel.taps)
        outside = out.copy()
        outside[side // 2 - half : side // 2 + half + 1, side // 2 - half : side // 2 + half + 1] = 0.0
        assert np.max(np.abs(outside)) == 0.0
        # The transform path reproduces the same identity to round-off.
        fft_out = convolve(image, kernel, boundary="zero", method="fft")
        assert np.max(np.abs(fft_out - out)) < 1e-15

    @pytest.mark.parametrize("value", [1.0, 100.0, 255.0])
    def test_constant_killed_by_zero_dc_kernel(self, value):
        kernel = imaginary_kernel(GaborParams(0.25))
        image = np.full((70, 70), value)
        out = convolve(image, kernel, boundary="reflect")
        assert np.max(np.abs(out)) < 1e-9 * value

    def test_linearity(self, rng):
        kernel = imaginary_kernel(GaborParams(0.3))
        a, b = 1.7, -0.6
        img1 = rng.normal(size=(64, 64))
        img2 = rng.normal(size=(64, 64))
        lhs = convolve(a * img1 + b * img2, kernel)
        rhs = a * convolve(img1, kernel) + b * convolve(img2, kernel)
        scale = np.max(np.abs(rhs)) or 1.0
        assert np.max(np.abs(lhs - rhs)) < 1e-9 * scale

    @pytest.mark.parametrize("boundary", BOUNDARIES)
    def test_fast_path_matches_direct_double_sum(self, boundary, rng):
        image = rng.normal(size=(33, 33)) * 100.0
        kernel = imaginary_kernel(GaborParams(0.2))
        oracle = direct_double_sum(image, kernel.taps, boundary)
        fast = convolve(image, kernel, boundary=boundary, method="fft")
        assert np.max(np.abs(fast - oracle)) < 1e-8 * np.max(np.abs(oracle))

    def test_direct_path_matches_double_sum_tightly(self, rng):
        image = rng.normal(size=(21, 21))
        kernel = rng.normal(size=(5, 5))
        oracle = direct_double_sum(image, kernel, "reflect")
        out = convolve(image, kernel, boundary="reflect", method="direct")
        assert np.allclose(out, oracle, rtol=0, atol=1e-12)

    def test_boundary_modes_agree_in_interior(self, rng):
        image = rng.normal(size=(48, 48))
        kernel = rng.normal(size=(9, 9))
        half = 4
        outs = [convolve(image, kernel, boundary=b, method="direct") for b in BOUNDARIES]
        interior = np.s_[half:-half, half:-half]
        # The direct path computes interior pixels from the same taps
        # regardless of padding, so agreement is exact there.
        assert np.array_equal(outs[0][interior], outs[1][interior])
        assert np.array_equal(outs[0][interior], outs[2][interior])

    def test_fft_path_boundary_independent_interior(self, rng):
        image = rng.normal(size=(48, 48))
        kernel = imaginary_kernel(GaborParams(0.45))
        half = kernel.half_width
        outs = [convolve(image, kernel, boundary=b, method="fft") for b in BOUNDARIES]
        interior = np.s_[half:-half, half:-half]
        scale = np.max(np.abs(outs[0][interior]))
        assert np.max(np.abs(outs[0][interior] - outs[1][interior])) < 1e-9 * scale
        assert np.max(np.abs(outs[0][interior] - outs[2][interior])) < 1e-9 * scale

    def test_shift_equivariance_in_interior(self, rng):
        kernel = imaginary_kernel(GaborParams(0.4))
        half = kernel.half_width
        base = rng.normal(size=(40, 40))
        shifted = np.roll(base, (3, 5), axis=(0, 1))
        out_base = convolve(base, kernel)
        out_shifted = convolve(shifted, kernel)
        margin = half + 6
        inner = np.s_[margin:-margin, margin:-margin]
        rolled = np.roll(out_base, (3, 5), axis=(0, 1))
        scale = np.max(np.abs(out_base)) or 1.0
        assert np.max(np.abs(out_shifted[inner] - rolled[inner])) < 1e-9 * scale

    def test_kernel_too_large_raises(self):
        kernel = imaginary_kernel(GaborParams(0.15))  # half-width 28
        with pytest.raises(SizeError):
            convolve(np.zeros((28, 28)), kernel)

    def test_default_kernel_fits_33px_image(self, rng):
        # Half-width 21 on a 33px image: padding is still well defined.
        out = convolve(rng.normal(size=(33, 33)), imaginary_kernel(GaborParams(0.2)))
        assert out.shape == (33, 33)
        assert np.all(np.isfinite(out))


class TestApplyBank:
    def test_default_bank_gives_18_image_sized_planes(self, rng):
        image = rng.normal(size=(64, 72))
        stack = apply_bank(image, kernel_bank())
        assert stack.planes.shape == (3, 6, 64, 72)
        assert np.all(np.isfinite(stack.planes))

    def test_zero_image_gives_zero_planes(self):
        stack = apply_bank(np.zeros((60, 60)), kernel_bank())
        assert np.max(np.abs(stack.planes)) == 0.0

    def test_plane_matches_standalone_convolve(self, rng):
        image = rng.normal(size=(64, 64))
        bank = kernel_bank()
        stack = apply_bank(image, bank, boundary="reflect")
        expected = convolve(image, bank.kernel(2, 4), boundary="reflect")
        assert np.array_equal(stack.plane(2, 4), expected)
