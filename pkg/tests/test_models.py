import numpy as np
import pytest
from hypothesis import given, strategies as st

from overton.core import ManipulatorGroup, ModelKind, ModelSpec, OpinionState, schedule_opinion
from overton.models import (
    HARD_HORIZON,
    StopKind,
    StopReason,
    StopRule,
    arwhk_step,
    awhk_step,
    default_horizon,
    dw_step,
    hk_step,
    run_simulation,
    rwhk_step,
    sample_weight_matrix,
)
from overton.rng import SplitMix64, derive_seed

from conftest import equispaced_100

NONE = ManipulatorGroup.none()


def stubborn(k, f):
    return ManipulatorGroup(k, f, f, 0)


class TestHKStep:
    def test_local_consensus(self):
        out = hk_step(OpinionState([-0.05, 0.0, 0.05]), NONE, 0.1)
        np.testing.assert_allclose(out.opinions, 0.0, atol=1e-17)
        assert out.time == 1

    def test_manipulator_weight(self):
        out = hk_step(OpinionState([0.0, 0.0]), stubborn(1, 0.05), 0.1)
        np.testing.assert_allclose(out.opinions, 0.05 / 3, rtol=1e-15)

    def test_isolated_agents_stay(self):
        out = hk_step(OpinionState([-0.9, 0.9]), NONE, 0.1)
        np.testing.assert_array_equal(out.opinions, [-0.9, 0.9])

    def test_uses_schedule_at_state_time(self):
        g = ManipulatorGroup(1, -1.0, 1.0, 100)
        # at t=50 the group sits at 0, within reach of the agent at 0.05
        out = hk_step(OpinionState([0.05], 50), g, 0.1)
        assert out.opinions[0] == pytest.approx(0.025)

    @given(st.integers(1, 30), st.integers(0, 10), st.floats(-1, 1), st.floats(0.01, 1.0),
           st.booleans())
    def test_one_ball_gives_local_consensus(self, n, k, c, eps, manip_above):
        # n agents and the group inside a ball of diameter 0.98 eps
        c = float(np.clip(c, -1 + eps, 1 - eps))
        x = c + np.linspace(-0.49 * eps, 0.49 * eps, n)
        f = c + (0.49 if manip_above else -0.49) * eps
        out = hk_step(OpinionState(x), stubborn(k, f), eps)
        assert np.ptp(out.opinions) <= 1e-15


class TestDWStep:
    def test_inside_threshold(self):
        out = dw_step(OpinionState([0.0]), stubborn(1, 0.08), 0.1, SplitMix64(1))
        assert out.opinions[0] == 0.04

    def test_outside_threshold(self):
        out = dw_step(OpinionState([0.0]), stubborn(1, 0.5), 0.1, SplitMix64(1))
        assert out.opinions[0] == 0.0

    def test_consumes_one_draw_per_agent(self):
        rng = SplitMix64(3)
        dw_step(OpinionState(np.zeros(7)), stubborn(2, 0.1), 0.1, rng)
        assert rng.counter == 7

    def test_manipulator_follows_schedule(self):
        g = ManipulatorGroup(5, -1.0, 1.0, 10)
        traj = run_simulation(ModelSpec("DW", 0.1), OpinionState(equispaced_100()), g,
                              stop=StopRule(StopKind.FIXED_HORIZON), horizon=12,
                              snapshot_times=range(13), rng=SplitMix64(0))
        assert traj.manipulator_opinions == [schedule_opinion(g, t) for t in range(13)]

    def test_partner_draw_frequencies(self):
        """Partners are uniform over the N+K-1 others; the group counts K times."""
        n, k, reps = 3, 6, 4000
        # agents far apart so nobody moves; infer partners from the raw draws
        rng = SplitMix64(11)
        u = rng.uniforms(n * reps).reshape(reps, n)
        m = n + k - 1
        r = np.minimum((u * m).astype(int), m - 1)
        r += r >= np.arange(n)
        share_manip = np.mean(r >= n)
        assert share_manip == pytest.approx(k / m, abs=0.02)


class TestWeightedSteps:
    W1 = np.ones((1, 2))

    @pytest.mark.parametrize("step", [awhk_step, arwhk_step])
    def test_attractive_branch(self, step):
        out = step(OpinionState([0.0]), stubborn(1, 0.05), 0.1, self.W1, SplitMix64(0))
        assert out.opinions[0] == 0.025

    @pytest.mark.parametrize("step", [rwhk_step, arwhk_step])
    def test_repulsive_branch(self, step):
        out = step(OpinionState([0.0]), stubborn(1, 0.5), 0.1, self.W1, SplitMix64(0))
        assert out.opinions[0] == -0.25

    def test_attractive_ignores_far(self):
        out = awhk_step(OpinionState([0.5]), stubborn(1, -0.5), 0.1, self.W1, SplitMix64(0))
        assert out.opinions[0] == 0.5

    def test_repulsive_ignores_near(self):
        out = rwhk_step(OpinionState([0.0]), stubborn(1, 0.05), 0.1, self.W1, SplitMix64(0))
        assert out.opinions[0] == 0.0

    @pytest.mark.parametrize("step", [awhk_step, rwhk_step, arwhk_step])
    @pytest.mark.parametrize("x,f", [(1.0, 0.95), (1.0, -0.9), (-1.0, 0.3), (-1.0, -0.97)])
    def test_extremes_are_fixed(self, step, x, f):
        out = step(OpinionState([x]), stubborn(1, f), 0.1, self.W1, SplitMix64(0))
        assert out.opinions[0] == x

    def test_weight_shape_checked(self):
        with pytest.raises(ValueError):
            awhk_step(OpinionState([0.0]), stubborn(1, 0.0), 0.1, np.ones((1, 1)), SplitMix64(0))


def test_weight_matrix_contract():
    a = sample_weight_matrix(3, 2, SplitMix64(9))
    b = sample_weight_matrix(3, 2, SplitMix64(9))
    assert a.shape == (3, 5)
    np.testing.assert_array_equal(a, b)
    assert a.min() >= 0.0 and a.max() <= 1.0


class TestBoundedness:
    """Random weighted steps never leave [-1, 1]; the clamp assertion would raise."""

    @given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=1, max_size=20), st.integers(0, 30),
           st.floats(-1, 1), st.floats(0.01, 2.0), st.integers(0, 2**64 - 1),
           st.sampled_from([awhk_step, rwhk_step, arwhk_step]))
    def test_random_steps(self, xs, k, f, eps, seed, step):
        if len(xs) + k < 2:
            xs = xs + [0.0]
        rng = SplitMix64(seed)
        w = sample_weight_matrix(len(xs), k, rng)
        s = OpinionState(xs)
        for _ in range(5):
            s = step(s, stubborn(k, f), eps, w, rng)
            assert s.opinions.min() >= -1.0 and s.opinions.max() <= 1.0


class TestConsensusFixedPoint:
    @pytest.mark.parametrize("kind", list(ModelKind))
    @pytest.mark.parametrize("c", [-0.7, 0.0, 0.33])
    def test_all_models(self, kind, c):
        x = np.full(20, c)
        traj = run_simulation(ModelSpec(kind, 0.1), OpinionState(x), NONE,
                              stop=StopRule(StopKind.FIXED_HORIZON), horizon=30, rng=SplitMix64(1))
        np.testing.assert_array_equal(traj.final.opinions, x)


class TestRunSimulation:
    def test_hk_wide_confidence_consensus(self):
        traj = run_simulation(ModelSpec("HK", 0.6), OpinionState(equispaced_100()), NONE)
        assert traj.stop_reason is StopReason.CONVERGED
        assert np.ptp(traj.final.opinions) < 1e-3

    def test_hk_narrow_confidence_fragments(self):
        traj = run_simulation(ModelSpec("HK", 0.1), OpinionState(equispaced_100()), NONE)
        vals = np.unique(np.round(traj.final.opinions, 6))
        assert len(vals) >= 2
        assert np.all(np.diff(vals) > 0.1)

    def test_dw_deterministic_given_stream(self):
        g = ManipulatorGroup(10, -1.0, 1.0, 100)
        run = lambda: run_simulation(ModelSpec("DW", 0.1), OpinionState(equispaced_100()), g,
                                     rng=SplitMix64(derive_seed(5)))
        a, b = run(), run()
        assert a.final == b.final and a.stop_time == b.stop_time

    def test_weighted_runs_to_horizon_with_snapshots(self):
        g = ManipulatorGroup(50, -0.9, 0.9, 40)
        traj = run_simulation(ModelSpec("AWHK", 0.1), OpinionState(equispaced_100()), g,
                              snapshot_times=[40], rng=SplitMix64(2))
        assert traj.stop_time == default_horizon(ModelKind.AWHK) == 500
        assert [s.time for s in traj.snapshots] == [40, 500]
        assert traj.weights.shape == (100, 150)
        assert traj.stop_reason in (StopReason.HORIZON, StopReason.OSCILLATING)

    def test_segmented_run_matches_single_run(self):
        g = ManipulatorGroup(20, -0.9, 0.9, 40)
        spec = ModelSpec("ARWHK", 0.1)
        a = run_simulation(spec, OpinionState(equispaced_100()), g, snapshot_times=range(0, 501, 7),
                           rng=SplitMix64(8))
        b = run_simulation(spec, OpinionState(equispaced_100()), g, rng=SplitMix64(8))
        assert a.final == b.final
        for s in a.snapshots[:-1]:
            assert s.time % 7 == 0

    def test_snapshots_match_step_by_step(self):
        g = ManipulatorGroup(15, -0.6, 1.0, 80)
        x0 = OpinionState(-0.6 + 1.2 * np.arange(1, 101) / 101)
        traj = run_simulation(ModelSpec("HK", 0.1), x0, g, stop=StopRule(StopKind.FIXED_HORIZON),
                              horizon=30, snapshot_times=range(31))
        s = x0
        for t in range(30):
            s = hk_step(s, g, 0.1)
            assert traj.at(t + 1) == s

    def test_hard_horizon_reached(self):
        assert default_horizon(ModelKind.HK) == default_horizon(ModelKind.DW) == HARD_HORIZON

    def test_stop_gated_until_ramp_ends(self):
        g = ManipulatorGroup(15, -0.6, 1.0, 80)
        traj = run_simulation(ModelSpec("HK", 0.1), OpinionState(-0.6 + 1.2 * np.arange(1, 101) / 101), g)
        assert traj.stop_time >= 80

    def test_stop_rule_compatibility(self):
        with pytest.raises(ValueError):
            run_simulation(ModelSpec("HK", 0.1), OpinionState([0.0]), NONE,
                           stop=StopRule(StopKind.ROUNDED_CLUSTERS))
        with pytest.raises(ValueError):
            run_simulation(ModelSpec("AWHK", 0.1), OpinionState([0.0]), NONE,
                           stop=StopRule(StopKind.MAX_CHANGE), rng=SplitMix64(0))
        with pytest.raises(ValueError):
            run_simulation(ModelSpec("DW", 0.1), OpinionState([0.0]), NONE)

    def test_given_weight_matrix_used(self):
        w = np.zeros((2, 3))
        traj = run_simulation(ModelSpec("AWHK", 0.5, weights=w), OpinionState([0.1, 0.2]),
                              stubborn(1, 0.3), horizon=5, rng=SplitMix64(0))
        assert traj.weights is not None and np.all(traj.weights == 0)
