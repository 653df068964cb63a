import numpy as np
import pytest
from hypothesis import given, strategies as st

from qclab.potentials import (
    PotentialSpec,
    gaussian_mean_force,
    linear_ramp,
    linearization_ratio,
    sinusoid,
)


class TestFamilies:
    def test_linear(self):
        V = PotentialSpec.linear(2.0)
        assert V.values(np.array([1.5])) == pytest.approx(-3.0)
        assert V.force_at([0.7]).tolist() == [2.0]

    def test_harmonic_centre(self):
        V = PotentialSpec.harmonic(2.0, center=1.0)
        assert V.values(np.array([3.0])) == pytest.approx(4.0)
        assert V.force_at([3.0]).tolist() == [-4.0]

    def test_coupled_is_translation_invariant(self):
        V = PotentialSpec.coupled(3.0)
        g = V.gradient((np.array(0.4), np.array(-0.1)))
        assert float(g[0] + g[1]) == 0.0
        assert V.values((np.array(1.4), np.array(0.9))) == pytest.approx(0.375)

    def test_custom_requires_gradient(self):
        with pytest.raises(ValueError):
            PotentialSpec("custom", func=lambda c: c[0])

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            PotentialSpec("quartic")

    def test_grid_evaluation(self, grid2d):
        V = PotentialSpec.harmonic(1.0)
        vals = V.values(grid2d.coords)
        assert vals.shape == grid2d.shape


class TestTables:
    def test_consistent_table(self, small_grid):
        x = small_grid.axis
        V = PotentialSpec.from_table(small_grid, 0.5 * x**2, x)
        assert V.force_at([1.0])[0] == pytest.approx(-1.0, abs=1e-3)

    def test_inconsistent_table(self, small_grid):
        x = small_grid.axis
        with pytest.raises(ValueError):
            PotentialSpec.from_table(small_grid, 0.5 * x**2, 2 * x)


class TestSchedules:
    def test_multiplicative(self):
        V = PotentialSpec.harmonic(1.0, schedule=linear_ramp(0.5))
        assert V.time_dependent
        assert V.values(np.array([2.0]), t=2.0) == pytest.approx(4.0)
        assert V.force_at([2.0], t=2.0)[0] == pytest.approx(-4.0)

    def test_additive_leaves_force(self):
        V = PotentialSpec.linear(1.0, schedule=sinusoid(1.0, 2.0, 0.0), schedule_mode="additive")
        assert V.force_at([0.0], t=0.3)[0] == 1.0
        assert V.values(np.array([0.0]), t=np.pi / 4) == pytest.approx(1.0)

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            PotentialSpec.free(schedule_mode="both")


class TestLinearization:
    @given(a=st.floats(-3, 3), s=st.floats(0.05, 2.0), k=st.floats(0.1, 5.0))
    def test_quadratic_potentials_are_exact(self, a, s, k):
        V = PotentialSpec.harmonic(k)
        assert gaussian_mean_force(V, [a], s) == pytest.approx(V.force_at([a]), abs=1e-9)
        assert linearization_ratio(V, [a], s) < 1e-9

    def test_quartic_grows_with_width(self):
        V = PotentialSpec.custom(lambda c: c[0] ** 4, lambda c: (4 * c[0] ** 3,))
        r = [linearization_ratio(V, [1.0], s) for s in (0.05, 0.1, 0.2)]
        assert r[0] < r[1] < r[2]
        # <x^3> - a^3 = 3 a s^2 for a normal density
        assert gaussian_mean_force(V, [1.0], 0.1)[0] == pytest.approx(-4 * (1 + 3 * 0.01), rel=1e-12)
