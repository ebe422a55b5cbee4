"""Fitting, verdicts, data families and small end-to-end suites."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlslab.cli import execute, parse_config
from nlslab.experiments import (
    EXPERIMENTS,
    Check,
    DecayFit,
    ExperimentReport,
    _half_dyadic,
    fit_power_law,
    smooth_bump,
    wave_train,
)
from nlslab.nls_solver import GuardError


def config(exp_id, sweeps=None, tolerances=None, seed=0):
    doc = {"experiment_id": exp_id, "seed": seed}
    if sweeps:
        doc["sweeps"] = sweeps
    if tolerances:
        doc["tolerances"] = tolerances
    return parse_config(json.dumps(doc))


class TestFitPowerLaw:
    def test_exact_law(self):
        pl = fit_power_law([(t, 3 * t**-2) for t in (1, 2, 4, 8)])
        assert pl.slope == pytest.approx(-2.0, abs=1e-10)
        assert pl.intercept == pytest.approx(math.log(3), abs=1e-10)
        assert pl.r_squared == pytest.approx(1.0)

    def test_constant(self):
        pl = fit_power_law([(t, 5.0) for t in (1, 2, 3, 4)])
        assert pl.slope == pytest.approx(0.0, abs=1e-12)
        assert pl.r_squared == 1.0

    def test_insufficient_spread(self):
        with pytest.raises(ValueError, match="spread"):
            fit_power_law([(1, 1), (2, 2), (1, 1), (2, 2)])

    @pytest.mark.parametrize("samples", [[(1, 1), (2, 2), (3, 3)], [(1, -1), (2, 2), (3, 3), (4, 4)], [(0, 1), (2, 2), (3, 3), (4, 4)]])
    def test_rejects(self, samples):
        with pytest.raises(ValueError):
            fit_power_law(samples)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-5, 5), st.floats(0.01, 100), st.lists(st.floats(0.1, 1000), min_size=4, max_size=12, unique=True))
    def test_recovers_synthetic_slope(self, slope, amp, xs):
        xs = sorted(xs)
        if math.log(xs[-1] / xs[0]) < 0.5 or len({round(math.log(x), 6) for x in xs}) < 3:
            return
        pl = fit_power_law([(x, amp * x**slope) for x in xs])
        assert pl.slope == pytest.approx(slope, abs=1e-10)


class TestVerdicts:
    def test_match_and_at_most(self):
        samples = [(t, t**-1.05) for t in (1, 2, 4, 8)]
        assert DecayFit.from_samples("a", "ref", samples, -1.0, 0.1).verdict
        assert not DecayFit.from_samples("a", "ref", samples, -1.2, 0.1).verdict
        assert DecayFit.from_samples("a", "ref", samples, -1.0, 0.0, mode="at_most").verdict
        assert not DecayFit.from_samples("a", "ref", samples, -1.5, 0.3, mode="at_most").verdict

    def test_poor_fit_fails(self):
        samples = [(1, 1.0), (2, 0.1), (4, 1.0), (8, 0.1)]
        fit = DecayFit.from_samples("noisy", "ref", samples, fit_power_law(samples).slope, 1.0)
        assert fit.r_squared < 0.95 and not fit.verdict

    def test_check_relations(self):
        assert Check("x", 1.0, 1.0, "<=").passed
        assert not Check("x", 1.0, 1.0, "<").passed
        assert Check("x", 2.0, 1.0, ">=").passed
        assert not Check("x", math.nan, 1.0, "<=").passed

    def test_report_record(self):
        rep = ExperimentReport("demo", {"a": 1})
        rep.fits.append(DecayFit.from_samples("f", "ref", [(t, t**-1) for t in (1, 2, 4, 8)], -1, 0.1))
        rep.checks.append(Check("c", 0.5, 1.0, "<="))
        rec = rep.to_record()
        assert rec["verdict"] == "pass" and rec["fits"][0]["paper_ref"] == "ref"
        assert rep.fit("f").verdict and rep.check("c").passed
        with pytest.raises(KeyError):
            rep.fit("missing")


class TestDataFamilies:
    def test_bump(self):
        b = smooth_bump(2.0)
        np.testing.assert_allclose(b(np.array([0.0, 2.0, 3.0])), [1.0, 0.0, 0.0])

    def test_wave_train_window(self):
        w = wave_train(10.0)
        assert w(np.array([0.1]))[0] == 0 and w(np.array([20.0]))[0] == 0
        assert abs(w(np.array([4.0]))[0]) == pytest.approx(4.0**-1.5)

    def test_half_dyadic(self):
        assert _half_dyadic(1, 4) == pytest.approx([1, math.sqrt(2), 2, 2 * math.sqrt(2), 4])


class TestSuitesSmall:
    """Down-scaled configurations; the full-size runs live in the acceptance suite."""

    def test_registry(self):
        assert set(EXPERIMENTS) == {
            "run_linear_decay", "run_weighted_strichartz", "run_mismatch",
            "run_embedding", "run_global_decomposition", "run_conservation",
        }

    def test_dispersive_small(self):
        cfg = config("run_linear_decay", {
            "parts": ["dispersive"],
            "dispersive": {"node_count": 2048, "radius_max": 300.0, "times": [1, 1.41, 2, 2.83, 4, 5.66]},
        })
        rep = execute(cfg)
        fit = rep.fit("dispersive t-slope r=4")
        assert fit.fitted_slope == pytest.approx(-1.0, abs=0.1)

    def test_dispersive_guard(self):
        cfg = config("run_linear_decay", {
            "parts": ["dispersive"],
            "dispersive": {"node_count": 512, "radius_max": 30.0, "times": [1, 2, 4, 8]},
        })
        with pytest.raises(GuardError, match="guard"):
            execute(cfg)

    def test_mismatch_theory_slopes(self):
        rep = execute(config("run_mismatch", {"mismatch": {"sigma": [0.5, 1.0]}}))
        assert [f.theory_slope for f in rep.fits] == [-0.5, -1.0]

    def test_mismatch_overlap_rejected(self):
        with pytest.raises(ValueError, match="overlap"):
            execute(config("run_mismatch", {"mismatch": {"separations": [0.0, 4.0, 8.0, 16.0]}}))

    def test_embedding_rejects_bad_tuple(self):
        with pytest.raises(ValueError, match="violate"):
            execute(config("run_embedding", {"embedding": {"tuples": [[-2.0, 1e300, 1.0, 2.0]]}}))

    def test_conservation_small(self):
        cfg = config("run_conservation", {"conservation": {
            "node_count": 256, "radius_max": 16.0, "horizon": 0.5, "snapshots": 5, "dt": 2e-3,
            "picard_time_points": 201, "picard_dt": 2e-4, "picard_iterations": 5,
        }})
        rep = execute(cfg)
        assert rep.check("mass drift").passed
        assert rep.check("Picard vs split-step").passed
        assert rep.check("energy drift").passed

    def test_weighted_rejects_inadmissible_triple(self):
        with pytest.raises(ValueError, match="not admissible"):
            execute(config("run_weighted_strichartz", {"weighted": {"triple": [1.5, 4.0, 0.0]}}))
