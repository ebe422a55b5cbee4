"""Free flow: spectral route, explicit-kernel oracle, closed forms."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlslab.experiments import smooth_bump
from nlslab.propagator import evolve_free, evolve_free_many, free_phase, kernel_evolve_oracle
from nlslab.radial_transform import build_grid, l2_norm, sample_radial, zeros

from conftest import gaussian


def gaussian_evolution(t, d):
    # S(t) e^{-r^2/2} = (1 + 2it)^{-d/2} exp(-r^2 / (2 (1 + 2it)))
    z = 1 + 2j * t
    return lambda r: z ** (-d / 2) * np.exp(-(r**2) / (2 * z))


class TestSpectralFlow:
    @pytest.mark.parametrize("t", [0.1, 1.0, 2.0])
    def test_gaussian_closed_form(self, grid4, t):
        f = sample_radial(grid4, gaussian())
        exact = gaussian_evolution(t, 4)(grid4.r_nodes)
        assert np.abs(evolve_free(f, t).values - exact).max() < 1e-10

    def test_gaussian_closed_form_d3(self, grid3):
        f = sample_radial(grid3, gaussian())
        exact = gaussian_evolution(0.7, 3)(grid3.r_nodes)
        assert np.abs(evolve_free(f, 0.7).values - exact).max() < 1e-10

    def test_time_zero_identity(self, grid4):
        f = sample_radial(grid4, gaussian())
        assert evolve_free(f, 0.0) is f

    def test_non_finite_time(self, grid4):
        with pytest.raises(ValueError):
            evolve_free(sample_radial(grid4, gaussian()), math.nan)

    def test_many_matches_single(self, grid4):
        f = sample_radial(grid4, gaussian(0.2))
        ts = [0.0, 0.5, 2.0]
        many = evolve_free_many(f, ts)
        for row, t in zip(many, ts):
            np.testing.assert_allclose(row, evolve_free(f, t).values, atol=1e-13)

    def test_phase_convention(self):
        # e^{-i t rho^2}: outgoing waves for t > 0
        assert free_phase(np.array([2.0]), 0.25)[0] == pytest.approx(np.exp(-1j))

    @settings(max_examples=20, deadline=None)
    @given(st.floats(-5, 5), st.floats(-5, 5))
    def test_group_law_and_unitarity(self, t, s):
        g = build_grid(4, 256, 16.0)
        f = sample_radial(g, lambda r: np.exp(-(r**2)) * (1 + 1j * r))
        once = evolve_free(f, t + s)
        twice = evolve_free(evolve_free(f, s), t)
        assert np.abs(once.values - twice.values).max() < 1e-9
        assert l2_norm(once) == pytest.approx(l2_norm(f), rel=1e-10)


class TestKernelOracle:
    def test_agrees_with_spectral_flow(self):
        # the spectral route lives on a ball; its fastest components reflect
        # and refocus at the origin, so the ball must be large against 2 K t
        g = build_grid(4, 2048, 64.0)
        bump = smooth_bump(3.0)
        f = sample_radial(g, bump)
        spectral = evolve_free(f, 0.5).values
        oracle = kernel_evolve_oracle(f, 0.5, profile=bump).values
        near = g.r_nodes < 12
        assert np.abs(spectral[near] - oracle[near]).max() / np.abs(spectral).max() < 1e-5

    def test_gaussian_closed_form(self):
        g = build_grid(4, 1024, 64.0)
        f = sample_radial(g, lambda r: np.exp(-(r**2) / 2) * (r < 12))
        t = 2.0
        out = kernel_evolve_oracle(f, t).values
        exact = gaussian_evolution(t, 4)(g.r_nodes)
        assert np.abs(out - exact)[g.r_nodes < 10].max() < 1e-6

    def test_rejects_time_zero(self, grid4):
        with pytest.raises(ValueError, match="singular"):
            kernel_evolve_oracle(sample_radial(grid4, gaussian()), 0.0)

    def test_rejects_support_near_boundary(self, grid4):
        f = sample_radial(grid4, lambda r: np.exp(-((r - 25) ** 2)))
        with pytest.raises(ValueError, match="boundary"):
            kernel_evolve_oracle(f, 1.0)

    def test_rejects_under_resolved_grid(self):
        g = build_grid(4, 64, 64.0)
        f = sample_radial(g, smooth_bump(3.0))
        with pytest.raises(ValueError, match="under-resolves"):
            kernel_evolve_oracle(f, 0.1)

    def test_zero_field(self, grid4):
        assert np.all(kernel_evolve_oracle(zeros(grid4), 1.0).values == 0)
