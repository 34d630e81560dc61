import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaborcorner import (
    ConfigurationError,
    GaborParams,
    ParameterDomainError,
    complex_kernel,
    imaginary_kernel,
    kernel_bank,
    kernel_half_width,
    odd_component_at,
)

DEFAULT_PARAMS = GaborParams(frequency=0.2, theta=0.0, gamma=0.6, eta=1.2)

params_strategy = st.builds(
    GaborParams,
    frequency=st.floats(0.08, 0.5),
    theta=st.floats(0.0, math.pi, exclude_max=True),
    gamma=st.floats(0.3, 2.0),
    eta=st.floats(0.3, 2.0),
)


def odd_tap_oracle(params, x, y):
    """Scalar evaluation of the odd component, independent of numpy."""
    xr = x * math.cos(params.theta) + y * math.sin(params.theta)
    yr = -x * math.sin(params.theta) + y * math.cos(params.theta)
    f2 = params.frequency**2
    envelope = math.exp(-(f2 / params.gamma**2) * xr * xr - (f2 / params.eta**2) * yr * yr)
    return (f2 / (math.pi * params.gamma * params.eta)) * envelope * math.sin(
        2.0 * math.pi * params.frequency * xr
    )


class TestImaginaryKernel:
    def test_center_tap_is_zero(self):
        assert imaginary_kernel(DEFAULT_PARAMS).tap(0, 0) == 0.0

    def test_known_tap_value(self):
        # (f**2 / (pi*gamma*eta)) * exp(-1/9) * sin(0.4*pi) for the
        # default shape at offset (1, 0).
        grid = imaginary_kernel(DEFAULT_PARAMS)
        expected = odd_tap_oracle(DEFAULT_PARAMS, 1.0, 0.0)
        assert expected == pytest.approx(0.015049740284525777, abs=1e-15)
        assert grid.tap(1, 0) == pytest.approx(expected, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(params=params_strategy)
    def test_antisymmetry_is_bit_exact(self, params):
        taps = imaginary_kernel(params).taps
        assert np.max(np.abs(taps + taps[::-1, ::-1])) == 0.0

    @settings(max_examples=30, deadline=None)
    @given(params=params_strategy)
    def test_exact_tap_sum_is_zero(self, params):
        # fsum gives the correctly rounded sum of the tap multiset,
        # which is exactly zero for an antisymmetric grid.
        taps = imaginary_kernel(params).taps
        assert math.fsum(taps.ravel()) == 0.0

    def test_matches_oracle_on_a_patch(self):
        grid = imaginary_kernel(DEFAULT_PARAMS)
        for x in range(-3, 4):
            for y in range(-3, 4):
                assert grid.tap(x, y) == pytest.approx(
                    odd_tap_oracle(DEFAULT_PARAMS, x, y), abs=1e-15
                )

    def test_rotated_kernel_matches_oracle(self):
        params = GaborParams(0.2, 5.0 * math.pi / 6.0, 0.6, 1.2)
        grid = imaginary_kernel(params)
        for x, y in ((2, 1), (-1, 3), (0, -2), (4, 4)):
            assert grid.tap(x, y) == pytest.approx(odd_tap_oracle(params, x, y), abs=1e-15)

    def test_half_width_rule(self):
        assert imaginary_kernel(DEFAULT_PARAMS).half_width == kernel_half_width(DEFAULT_PARAMS)
        assert kernel_half_width(GaborParams(0.15)) == 28
        assert kernel_half_width(GaborParams(0.2)) == 21
        assert kernel_half_width(GaborParams(0.25)) == 17

    def test_opposite_orientation_negates(self):
        for theta in (0.0, math.pi / 6.0, 1.234):
            a = imaginary_kernel(GaborParams(0.2, theta)).taps
            b = imaginary_kernel(GaborParams(0.2, theta + math.pi)).taps
            assert np.max(np.abs(a + b)) < 1e-12

    def test_scale_self_similarity_at_continuous_points(self):
        # Kernel at frequency f equals (f/f0)^2 times the kernel at f0
        # evaluated at coordinates shrunk by f/f0.
        base = GaborParams(0.15, math.pi / 6.0)
        other = GaborParams(0.25, math.pi / 6.0)
        ratio = other.frequency / base.frequency
        points = [(0.7, -2.3), (3.1, 4.9), (-5.5, 0.2), (10.0, -8.0)]
        for x, y in points:
            lhs = float(odd_component_at(other, x, y))
            rhs = ratio**2 * float(odd_component_at(base, ratio * x, ratio * y))
            assert lhs == pytest.approx(rhs, abs=1e-10)

    @pytest.mark.parametrize("field", ["frequency", "gamma", "eta"])
    @pytest.mark.parametrize("bad", [0.0, -1.0, math.nan])
    def test_rejects_bad_parameters(self, field, bad):
        values = {"frequency": 0.2, "theta": 0.0, "gamma": 0.6, "eta": 1.2, field: bad}
        with pytest.raises(ParameterDomainError):
            GaborParams(**values)

    def test_normalized_theta(self):
        assert GaborParams(0.2, theta=math.pi + 0.25).normalized_theta == pytest.approx(0.25)
        assert GaborParams(0.2, theta=-0.25).normalized_theta == pytest.approx(math.pi - 0.25)


class TestComplexKernel:
    def test_imag_identical_to_imaginary_kernel(self):
        _, imag = complex_kernel(DEFAULT_PARAMS)
        assert np.array_equal(imag.taps, imaginary_kernel(DEFAULT_PARAMS).taps)

    def test_real_part_is_point_symmetric(self):
        real, _ = complex_kernel(GaborParams(0.2, math.pi / 6.0))
        assert np.max(np.abs(real.taps - real.taps[::-1, ::-1])) == 0.0

    def test_real_center_tap_is_amplitude(self):
        params = DEFAULT_PARAMS
        real, _ = complex_kernel(params)
        amplitude = params.frequency**2 / (math.pi * params.gamma * params.eta)
        assert real.tap(0, 0) == amplitude


class TestKernelBank:
    def test_default_bank_shape(self):
        bank = kernel_bank()
        assert bank.frequencies == (0.15, 0.2, 0.25)
        assert bank.directions == 6
        assert sum(len(row) for row in bank.kernels) == 18

    def test_angles_are_exact_sixths(self):
        bank = kernel_bank(directions=6)
        assert bank.angles == tuple(k * math.pi / 6 for k in range(6))

    def test_bank_kernels_match_standalone_generation(self):
        bank = kernel_bank()
        grid = bank.kernel(1, 2)
        expected = imaginary_kernel(GaborParams(0.2, 2 * math.pi / 6, 0.6, 1.2))
        assert np.array_equal(grid.taps, expected.taps)

    def test_truncation_adequacy(self):
        # Largest border tap stays four orders of magnitude below the
        # overall peak for every default-bank kernel.
        bank = kernel_bank()
        for row in bank.kernels:
            for grid in row:
                taps = grid.taps
                border = np.concatenate([taps[0], taps[-1], taps[1:-1, 0], taps[1:-1, -1]])
                assert np.max(np.abs(border)) < 1e-4 * np.max(np.abs(taps))

    def test_rejects_bad_configuration(self):
        with pytest.raises(ConfigurationError):
            kernel_bank(frequencies=())
        with pytest.raises(ConfigurationError):
            kernel_bank(frequencies=(0.2, -0.1))
        with pytest.raises(ConfigurationError):
            kernel_bank(directions=1)
