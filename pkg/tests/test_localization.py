"""Smooth cutoffs and Littlewood-Paley projectors."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlslab import localization as loc
from nlslab.radial_transform import l2_norm, sample_radial, to_frequency

from conftest import gaussian


class TestProfiles:
    def test_smooth_step_endpoints(self):
        s = loc.smooth_step(np.array([-1.0, 0.0, 0.5, 1.0, 2.0]))
        np.testing.assert_allclose(s, [0.0, 0.0, 0.5, 1.0, 1.0])

    def test_chi_le_plateaus(self):
        x = np.array([0.0, 0.5, 1.0, 1.1, 3.0])
        np.testing.assert_allclose(loc.chi_le(x, 1.0), [1, 1, 1, 0, 0], atol=0)

    def test_annulus_support(self):
        x = np.linspace(0, 10, 2001)
        a = loc.chi_annulus(x, 2.0)
        assert np.all(a[(x <= 2.0) | (x >= 4.4)] == 0)
        assert np.all(a[(x >= 2.2) & (x <= 4.0)] == 1)

    def test_band_rejects_reversed_edges(self):
        with pytest.raises(ValueError):
            loc.chi_band(1.0, 3.0, 2.0)

    def test_threshold_must_be_positive(self):
        with pytest.raises(ValueError):
            loc.chi_le(1.0, 0.0)
        with pytest.raises(ValueError):
            loc.CutoffSpec(-1.0)
        with pytest.raises(ValueError):
            loc.BandSpec(0.0)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.05, 50), st.lists(st.floats(0, 200), min_size=1, max_size=20))
    def test_values_in_unit_interval_and_monotone(self, a, xs):
        x = np.sort(np.asarray(xs))
        v = loc.chi_le(x, a)
        assert np.all((v >= 0) & (v <= 1))
        assert np.all(np.diff(v) <= 1e-15)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.1, 20))
    def test_dyadic_annuli_telescope(self, n0):
        # sum_{k} chi_{2^k n0} = chi_le(2^K n0) - chi_le(n0)
        x = np.linspace(0, 40 * n0, 4001)
        total = sum(loc.chi_annulus(x, n0 * 2**k) for k in range(4))
        np.testing.assert_allclose(total, loc.chi_le(x, 16 * n0) - loc.chi_le(x, n0), atol=1e-14)

    def test_cutoff_spec_kinds(self):
        x = np.array([0.5, 1.5, 5.0])
        assert list(loc.CutoffSpec(1.0, "below").profile(x)) == [1, 0, 0]
        assert list(loc.CutoffSpec(1.0, "above").profile(x)) == [0, 1, 1]
        assert list(loc.CutoffSpec(1.0, "band", upper=2.0).profile(x)) == [0, 1, 0]
        with pytest.raises(ValueError):
            loc.CutoffSpec(1.0, "band")

    def test_time_cutoff(self):
        assert loc.apply_time_cutoff(0.5, 1.0) == 1.0
        assert loc.apply_time_cutoff(-0.5, 1.0) == 1.0
        assert loc.apply_time_cutoff(1.2, 1.0) == 0.0

    def test_dyadic_range(self):
        assert loc.dyadic_range(1, 16) == [1, 2, 4, 8, 16]
        assert loc.dyadic_range(3, 20) == [4, 8, 16]
        with pytest.raises(ValueError):
            loc.dyadic_range(4, 2)


class TestProjectors:
    def test_low_plus_high_is_identity(self, grid4):
        f = sample_radial(grid4, lambda r: np.exp(-r**2) * np.cos(5 * r))
        total = loc.project(f, loc.low(3.0)) + loc.project(f, loc.high(3.0))
        assert np.abs(total.values - f.values).max() < 1e-12

    def test_side_preserved(self, grid4):
        f = sample_radial(grid4, gaussian())
        assert loc.project(f, loc.band(2.0)).side is f.side
        F = to_frequency(f)
        assert loc.project(F, loc.band(2.0)).side is F.side

    def test_band_is_contraction(self, grid4):
        f = sample_radial(grid4, gaussian(0.3))
        for n in (0.5, 1, 2, 4):
            assert l2_norm(loc.project(f, loc.band(n))) <= l2_norm(f)

    def test_spatial_cutoff_needs_physical_side(self, grid4):
        f = to_frequency(sample_radial(grid4, gaussian()))
        with pytest.raises(ValueError):
            loc.apply_cutoff(f, loc.CutoffSpec(1.0))

    def test_cutoff_bounded_in_sobolev_norm(self, grid4):
        # ||chi_le(., 10) f||_{H^gamma} <~ ||f||_{H^gamma} for a rough-ish packet
        from nlslab.norms import sobolev_norm

        f = sample_radial(grid4, lambda r: np.exp(-((r - 9) ** 2)) * np.cos(4 * r))
        cut = loc.apply_cutoff(f, loc.CutoffSpec(10.0))
        for gamma in (-1.0, 0.0, 1.0):
            assert sobolev_norm(cut, gamma) <= 3 * sobolev_norm(f, gamma)
