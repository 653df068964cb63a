import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qclab.born import (
    born_density,
    born_normal_equivalence,
    embedded_state,
    equivalence_sweep,
    isotropic_probability_law,
    normal_pdf,
    separation_for_distance,
    sharp_state_limit,
    transition_probability,
    write_sweep_csv,
)
from qclab.coherent import CoherentParams
from qclab.errors import ProbeUnderResolvedError, UnderflowGuardError
from qclab.grid import GridSpec

# Gaussian probe at b = a: 2 / (1 + (s / sigma)^2) for s = sigma / 2, /4, /8, /16
GAUSSIAN_RATIOS = [1.6, 1.8823529411764706, 1.9692307692307693, 1.9922178988326849]
# cube probe, from adaptive quadrature of the normal density over the cube
CELL_RATIOS = [0.9896588543144011, 0.9974005737083644, 0.9993492549256047, 0.9998372581253373]
ARCCOS_OVERLAP = 0.9191066572935884


class TestDensities:
    @given(a=st.floats(-3, 3), b=st.floats(-3, 3), s=st.floats(0.1, 3.0))
    def test_born_density_is_normal(self, a, b, s):
        params = CoherentParams(a, 0.0, s)
        assert born_density(params, b) == pytest.approx(normal_pdf(params, b), rel=1e-12)

    def test_two_dimensional(self):
        params = CoherentParams([0.5, -0.5], [0.0, 0.0], 0.7)
        assert born_density(params, [0.0, 0.1]) == pytest.approx(
            normal_pdf(params, [0.0, 0.1]), rel=1e-12)

    def test_transition_oracle(self, grid):
        phi = embedded_state(-0.5, 0.5, grid)
        psi = embedded_state(0.5, 0.5, grid)
        assert transition_probability(phi, psi) == pytest.approx(math.exp(-1.0), abs=1e-12)

    def test_law_domain(self):
        assert isotropic_probability_law(0.0) == 1.0
        assert isotropic_probability_law(math.pi / 2) == pytest.approx(0.0, abs=1e-30)
        with pytest.raises(ValueError):
            isotropic_probability_law(2.0)


class TestEquivalence:
    def test_overlap_distance(self, grid):
        eq = born_normal_equivalence(-1.0, 1.0, 1.0, grid)
        assert eq.distance == pytest.approx(ARCCOS_OVERLAP, abs=1e-10)
        assert eq.normal_side == pytest.approx(math.exp(-1.0))

    def test_sweep(self, grid, tmp_path):
        sweep = equivalence_sweep(0.5, grid)
        assert len(sweep) == 50
        assert max(e.residual for e in sweep) < 1e-8
        write_sweep_csv(sweep, tmp_path / "s.csv")
        rows = np.loadtxt(tmp_path / "s.csv", delimiter=",", skiprows=1)
        assert rows.shape == (50, 4)

    @given(a=st.floats(-2, 2), d=st.floats(0, 3.0))
    def test_equivalence_property(self, a, d):
        eq = born_normal_equivalence(a, a + d, 0.5, GridSpec(1, 1024, 20.0))
        assert eq.residual < 1e-8

    def test_guard(self, grid):
        with pytest.raises(UnderflowGuardError):
            born_normal_equivalence(-2.0, 2.0, 0.5, grid)


class TestDistanceRealisation:
    @pytest.mark.parametrize("target", [0.1, 0.5, ARCCOS_OVERLAP, 1.2, 1.5])
    def test_targets(self, grid, target):
        sep, got = separation_for_distance(target, 0.5, grid)
        assert got == pytest.approx(target, abs=1e-3)
        # closed form inverse: cos(rho) = exp(-s^2 / 8 sigma^2)
        assert sep == pytest.approx(math.sqrt(-8 * 0.25 * math.log(math.cos(target))), rel=1e-8)

    def test_overlap_distance_is_unit_separation(self, grid):
        sep, _ = separation_for_distance(ARCCOS_OVERLAP, 0.5, grid)
        assert sep == pytest.approx(1.0, abs=1e-9)

    def test_unreachable(self, grid):
        with pytest.raises(ValueError):
            separation_for_distance(math.pi / 2, 0.5, grid)
        with pytest.raises(UnderflowGuardError):
            separation_for_distance(1.569, 0.5, grid)


class TestSharpLimit:
    WIDTHS = [0.5, 0.25, 0.125, 0.0625]

    def test_gaussian_probe(self, grid):
        lim = sharp_state_limit(CoherentParams(0.0, 0.0, 1.0), 0.0, self.WIDTHS, grid)
        assert lim.ratios == pytest.approx(GAUSSIAN_RATIOS, rel=1e-10)
        assert lim.analytic_limit == 2.0
        assert lim.orders[1] == pytest.approx(2.0, abs=0.1)

    def test_gaussian_probe_two_dimensional(self, grid2d):
        lim = sharp_state_limit(CoherentParams([0.0, 0.0], [0.0, 0.0], 1.0), [0.0, 0.0],
                                [0.5], grid2d)
        assert lim.ratios[0] == pytest.approx(GAUSSIAN_RATIOS[0] ** 2, rel=1e-9)
        assert lim.analytic_limit == 4.0

    def test_cell_probe(self, grid):
        lim = sharp_state_limit(CoherentParams(0.0, 0.0, 1.0), 0.0, self.WIDTHS, grid, "cell")
        assert lim.ratios == pytest.approx(CELL_RATIOS, abs=1e-4)
        assert np.all(lim.deviations < 0.02)
        assert lim.orders[-1] == pytest.approx(2.0, abs=0.25)

    def test_equal_width_is_flagged(self, grid):
        lim = sharp_state_limit(CoherentParams(0.0, 0.0, 1.0), 0.0, [1.0], grid)
        assert lim.flagged == (1.0,)
        assert lim.ratios[0] == pytest.approx(1.0, rel=1e-12)

    def test_off_centre_probe(self, grid):
        lim = sharp_state_limit(CoherentParams(0.0, 0.0, 1.0), 0.7, [0.2, 0.1], grid, "cell")
        assert np.all(lim.deviations < 2e-3)

    def test_validation(self, grid):
        params = CoherentParams(0.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            sharp_state_limit(params, 0.0, [0.25, 0.5], grid)
        with pytest.raises(ValueError):
            sharp_state_limit(params, 0.0, [0.5], grid, "box")
        with pytest.raises(ProbeUnderResolvedError):
            sharp_state_limit(params, 0.0, [0.5, 2 * grid.spacing], grid)
