import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qclab.coherent import CoherentParams
from qclab.errors import (
    AliasingWarning,
    GridMismatchError,
    GridSpecError,
    PacketNearBoundaryError,
    PacketTooNarrowError,
)
from qclab.grid import (
    GridSpec,
    WaveFunction,
    from_bytes,
    l2_inner,
    l2_norm,
    laplacian,
    momentum_expectation,
    momentum_variance,
    position_expectation,
    position_variance,
    read_binary,
    real_inner,
    renormalize_if_drifted,
    sample_coherent,
    spectral_derivative,
    spectral_inner,
    to_bytes,
    write_binary,
    write_csv,
)


def packet(grid, a=0.0, p=0.0, s=1.0):
    return sample_coherent(CoherentParams([a] * grid.dim, [p] * grid.dim, s), grid)


class TestGridSpec:
    def test_spacing_and_axis(self, grid):
        assert grid.spacing == pytest.approx(40.0 / 2048)
        assert grid.axis[0] == -20.0
        assert grid.axis[-1] == pytest.approx(20.0 - grid.spacing)

    @pytest.mark.parametrize("n", [100, 32, 0])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(GridSpecError):
            GridSpec(1, n, 10.0)

    def test_point_cap(self):
        with pytest.raises(GridSpecError):
            GridSpec(2, 4096, 10.0, max_points=2**20)

    def test_rejects_dim_three(self):
        with pytest.raises(GridSpecError):
            GridSpec(3, 64, 10.0)

    def test_wavenumbers_are_fft_ordered(self, small_grid):
        k = small_grid.wavenumber_axis
        assert k[0] == 0.0
        assert k[1] == pytest.approx(2 * np.pi / small_grid.box_length)


class TestWaveFunction:
    def test_values_are_read_only(self, grid):
        phi = packet(grid)
        with pytest.raises(ValueError):
            phi.values[0] = 1.0

    def test_shape_mismatch(self, grid):
        with pytest.raises(GridMismatchError):
            WaveFunction(grid, np.zeros(10))

    def test_normalized_flag_checked(self, grid):
        with pytest.raises(ValueError):
            WaveFunction(grid, 2 * packet(grid).values, normalized=True)

    def test_arithmetic(self, grid):
        phi = packet(grid)
        assert l2_norm(phi + phi) == pytest.approx(2.0)
        assert l2_norm(phi - phi) == 0.0
        assert l2_norm(3 * phi) == pytest.approx(3.0)

    def test_grid_mismatch_in_sum(self, grid, small_grid):
        with pytest.raises(GridMismatchError):
            packet(grid) + packet(small_grid)

    def test_boundary_mass_of_central_packet(self, grid):
        assert packet(grid).boundary_mass() < 1e-30


class TestInnerProducts:
    def test_overlap_oracle(self, grid):
        # two unit-width packets two apart overlap by exp(-1/2)
        ov = l2_inner(packet(grid, -1.0), packet(grid, 1.0))
        assert abs(ov - math.exp(-0.5)) < 1e-12

    def test_peak_value(self, grid):
        phi = packet(grid, 0.0, 0.0, 1.0)
        assert abs(phi.values[1024]) == pytest.approx((2 * np.pi) ** -0.25, rel=1e-12)

    def test_linear_in_first_slot(self, grid):
        phi, psi = packet(grid, -1.0, 0.5), packet(grid, 1.0, -0.3)
        z = 0.3 - 0.7j
        assert l2_inner(z * phi, psi) == pytest.approx(z * l2_inner(phi, psi), abs=1e-14)
        assert l2_inner(phi, z * psi) == pytest.approx(np.conj(z) * l2_inner(phi, psi), abs=1e-14)

    def test_spectral_matches_direct(self, grid):
        phi, psi = packet(grid, -1.0, 0.5), packet(grid, 1.0, -0.3)
        assert spectral_inner(phi, psi) == pytest.approx(l2_inner(phi, psi), abs=1e-14)

    @given(a=st.floats(-5, 5), b=st.floats(-5, 5), p=st.floats(-2, 2), q=st.floats(-2, 2))
    def test_conjugate_symmetry(self, a, b, p, q):
        g = GridSpec(1, 512, 30.0)
        phi, psi = packet(g, a, p), packet(g, b, q)
        assert abs(l2_inner(phi, psi) - np.conj(l2_inner(psi, phi))) <= 1e-12
        assert real_inner(phi, psi) == pytest.approx(real_inner(psi, phi), abs=1e-14)


class TestDerivativesAndMoments:
    def test_spectral_first_derivative(self, grid):
        phi = packet(grid, 0.5, 0.0, 0.7)
        x = grid.axis
        exact = -(x - 0.5) / (2 * 0.49) * phi.values
        assert np.abs(spectral_derivative(phi).values - exact).max() < 1e-10

    def test_laplacian_of_plane_wave(self, small_grid):
        k = 2 * np.pi * 3 / small_grid.box_length
        phi = WaveFunction(small_grid, np.exp(1j * k * small_grid.axis))
        assert np.abs(laplacian(phi).values + k**2 * phi.values).max() < 1e-9

    def test_aliasing_warning(self, small_grid):
        rough = WaveFunction(small_grid, np.sign(small_grid.axis) + 0j)
        with pytest.warns(AliasingWarning):
            spectral_derivative(rough)

    def test_no_warning_for_smooth_state(self, grid):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            spectral_derivative(packet(grid))

    def test_moments(self, grid):
        phi = packet(grid, 1.5, 2.0, 0.5)
        assert position_expectation(phi)[0] == pytest.approx(1.5, abs=1e-12)
        assert position_variance(phi)[0] == pytest.approx(0.25, abs=1e-12)
        assert momentum_expectation(phi)[0] == pytest.approx(2.0, abs=1e-10)
        assert momentum_variance(phi)[0] == pytest.approx(1.0, abs=1e-10)


class TestSampling:
    def test_too_narrow(self, grid):
        with pytest.raises(PacketTooNarrowError):
            packet(grid, 0.0, 0.0, 2 * grid.spacing)

    def test_near_boundary(self, grid):
        with pytest.raises(PacketNearBoundaryError):
            packet(grid, 15.0, 0.0, 1.0)

    def test_renormalize(self, grid):
        phi = packet(grid) * (1 + 1e-6)
        assert l2_norm(renormalize_if_drifted(phi)) == pytest.approx(1.0, abs=1e-14)
        same = packet(grid)
        assert renormalize_if_drifted(same) is same


class TestSerialization:
    def test_bytes_round_trip(self, grid2d):
        phi = packet(grid2d, 0.5, 1.0, 0.6)
        back = from_bytes(to_bytes(phi))
        assert back.grid == grid2d
        assert np.array_equal(back.values, phi.values)

    def test_binary_file(self, grid, tmp_path):
        phi = packet(grid, 0.1, -0.4)
        write_binary(phi, tmp_path / "s.bin")
        assert np.array_equal(read_binary(tmp_path / "s.bin").values, phi.values)

    def test_truncated_payload(self, grid):
        with pytest.raises(ValueError):
            from_bytes(to_bytes(packet(grid))[:-16])

    def test_csv(self, small_grid, tmp_path):
        phi = packet(small_grid, 0.0, 1.0)
        write_csv(phi, tmp_path / "s.csv")
        data = np.loadtxt(tmp_path / "s.csv", delimiter=",", skiprows=1)
        assert data.shape == (512, 4)
        assert np.allclose(data[:, 1] + 1j * data[:, 2], phi.values, atol=0, rtol=1e-15)
