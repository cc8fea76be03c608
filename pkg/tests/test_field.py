import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neucf.errors import NumericalBlowup, TargetBehindField
from neucf.field import (
    N_NEURONS,
    FieldInputs,
    FieldParams,
    FieldState,
    compose_inputs,
    desirability,
    initial_state,
    lateral_kernel,
    step_field,
    step_pause,
    target_direction,
    winner,
)

DIAG = math.hypot(52, 47)
QUIET = FieldParams(noise_sigma=0.0)


class _ReplayRng:
    """Feeds pre-recorded noise vectors; used for the mirror equivariance check."""

    def __init__(self, rows):
        self.rows = list(rows)

    def standard_normal(self, n):
        return self.rows.pop(0)


def settle(params, inputs, seconds, state=None, rng=None, kernel=None):
    state = state or initial_state(params)
    rng = rng or np.random.default_rng(0)
    kernel = lateral_kernel(params) if kernel is None else kernel
    for _ in range(int(seconds / params.dt)):
        state = step_field(state, inputs, params, rng, kernel)
    return state


class TestCompose:
    def test_no_beacons_all_zero(self):
        inp = compose_inputs([], 0.0, (0.0, 0.0), QUIET, DIAG)
        for vec in (inp.sensory, inp.outcome, inp.cost, inp.pause):
            assert np.all(vec == 0.0)

    def test_target_straight_up(self):
        inp = compose_inputs([((0.0, 30.0), 1.0)], 0.0, (0.0, 0.0), QUIET, DIAG)
        assert inp.sensory.argmax() == 90
        assert np.all(inp.pause == 0.0)
        assert inp.cost.min() == inp.cost[90]
        assert inp.cost[90] == pytest.approx(-QUIET.cost_amp * 30.0 / DIAG)

    def test_two_equidistant_targets_mirror_symmetric(self):
        r = 20.0
        t45 = (r * math.cos(math.radians(45)), r * math.sin(math.radians(45)))
        t135 = (r * math.cos(math.radians(135)), r * math.sin(math.radians(135)))
        inp = compose_inputs([(t45, 1.0), (t135, 1.0)], 0.0, (0.0, 0.0), QUIET, DIAG)
        for vec in (inp.sensory, inp.outcome, inp.cost):
            assert np.max(np.abs(vec - vec[::-1])) <= 1e-12

    def test_pause_uniform_while_stop_visible(self):
        inp = compose_inputs([], 0.6, (0.0, 0.0), QUIET, DIAG)
        assert np.all(inp.pause == -QUIET.pause_amp * 0.6)

    def test_behind_raises(self):
        with pytest.raises(TargetBehindField):
            compose_inputs([((0.0, -10.0), 1.0)], 0.0, (0.0, 0.0), QUIET, DIAG)

    def test_behind_skipped_when_lenient(self):
        inp = compose_inputs([((0.0, -10.0), 1.0)], 0.0, (0.0, 0.0), QUIET, DIAG, strict=False)
        assert np.all(inp.sensory == 0.0)

    def test_slightly_behind_clamps_to_lattice_ends(self):
        assert target_direction((0.0, 0.0), (10.0, -0.5)) == 0.0
        assert target_direction((0.0, 0.0), (-10.0, -0.5)) == 180.0


class TestStepField:
    def test_resting_level_is_exact_fixed_point(self):
        state = settle(QUIET, FieldInputs.zero(), 1.0)
        assert np.all(state.u == QUIET.h)

    def test_single_input_wins_at_its_direction(self):
        inp = compose_inputs([((0.0, 25.0), 1.0)], 0.0, (0.0, 0.0), QUIET, DIAG)
        state = settle(QUIET, inp, 2.0)
        assert state.u.argmax() == 90
        assert winner(state, QUIET.theta_init) == 90

    def test_symmetric_inputs_stay_mirror_symmetric(self):
        r = 20.0
        t45 = (r * math.cos(math.radians(45)), r * math.sin(math.radians(45)))
        t135 = (r * math.cos(math.radians(135)), r * math.sin(math.radians(135)))
        inp = compose_inputs([(t45, 1.0), (t135, 1.0)], 0.0, (0.0, 0.0), QUIET, DIAG)
        state = initial_state(QUIET)
        kernel = lateral_kernel(QUIET)
        rng = np.random.default_rng(0)
        for _ in range(200):
            state = step_field(state, inp, QUIET, rng, kernel)
            assert np.max(np.abs(state.u - state.u[::-1])) <= 1e-9

    def test_mirror_equivariance_with_reflected_noise(self):
        params = FieldParams(noise_sigma=0.05)
        rng = np.random.default_rng(42)
        draws = [rng.standard_normal(N_NEURONS) for _ in range(150)]
        inp = compose_inputs([((10.0, 17.0), 1.0)], 0.0, (0.0, 0.0), params, DIAG)
        mirrored = FieldInputs(
            inp.sensory[::-1].copy(), inp.outcome[::-1].copy(), inp.cost[::-1].copy(), inp.pause[::-1].copy()
        )
        a = settle(params, inp, 1.5, rng=_ReplayRng(draws))
        b = settle(params, mirrored, 1.5, rng=_ReplayRng([d[::-1] for d in draws]))
        assert np.max(np.abs(a.u - b.u[::-1])) <= 1e-9

    def test_seeded_runs_bitwise_identical(self):
        params = FieldParams(noise_sigma=0.05)
        inp = compose_inputs([((20.0, 20.0), 1.0)], 0.0, (0.0, 0.0), params, DIAG)
        a = settle(params, inp, 1.0, rng=np.random.default_rng(9))
        b = settle(params, inp, 1.0, rng=np.random.default_rng(9))
        assert np.array_equal(a.u, b.u)

    def test_noiseless_is_deterministic_function(self):
        inp = compose_inputs([((20.0, 20.0), 1.0)], 0.0, (0.0, 0.0), QUIET, DIAG)
        a = settle(QUIET, inp, 1.0, rng=np.random.default_rng(1))
        b = settle(QUIET, inp, 1.0, rng=np.random.default_rng(2))
        assert np.array_equal(a.u, b.u)

    def test_blowup_detected(self):
        state = initial_state(QUIET)
        bad = FieldInputs.zero()
        bad.sensory += 1e7
        with pytest.raises(NumericalBlowup):
            for _ in range(100):
                state = step_field(state, bad, QUIET, np.random.default_rng(0))

    def test_stability_invariant_enforced(self):
        with pytest.raises(ValueError):
            FieldParams(tau=0.1, dt=0.03)

    def test_pause_dominance(self):
        """A visible stop cue empties the active set within a second and keeps
        it empty for as long as the cue persists."""
        params = QUIET
        inp = compose_inputs([((20.0, 20.0), 1.0)], 0.0, (0.0, 0.0), params, DIAG)
        state = settle(params, inp, 1.5)
        assert len(desirability(state, params.theta_init).active_set) > 0
        level = 0.0
        kernel = lateral_kernel(params)
        rng = np.random.default_rng(0)
        empty_since = None
        for k in range(int(3.0 / params.dt)):
            level = step_pause(level, True, params)
            inp_p = compose_inputs([((20.0, 20.0), 1.0)], level, (0.0, 0.0), params, DIAG)
            state = step_field(state, inp_p, params, rng, kernel)
            empty = len(desirability(state, params.theta_init).active_set) == 0
            if empty and empty_since is None:
                empty_since = (k + 1) * params.dt
            if not empty:
                empty_since = None
        assert empty_since is not None and empty_since <= 1.0


class TestReadout:
    def make_state(self, u):
        return FieldState(u=np.asarray(u, float), inputs=FieldInputs.zero(), t=0.0)

    def test_all_below_threshold(self):
        state = self.make_state(np.full(N_NEURONS, -1.0))
        des = desirability(state, 0.5)
        assert des.active_set == ()
        assert np.all(des.d == 0.0)
        assert winner(state, 0.5) is None

    def test_single_active_neuron(self):
        u = np.full(N_NEURONS, -1.0)
        u[90] = 1.0
        des = desirability(self.make_state(u), 0.5)
        assert des.active_set == (90,)
        assert des.d[90] == 1.0
        assert winner(self.make_state(u), 0.5) == 90

    def test_equal_excess_splits_evenly(self):
        u = np.full(N_NEURONS, -1.0)
        u[45] = u[135] = 0.8
        des = desirability(self.make_state(u), 0.5)
        assert des.d[45] == pytest.approx(0.5, abs=1e-12)
        assert des.d[135] == pytest.approx(0.5, abs=1e-12)

    def test_tie_breaks_to_lower_index(self):
        u = np.full(N_NEURONS, -1.0)
        u[45] = u[135] = 0.8
        assert winner(self.make_state(u), 0.5) == 45

    @given(
        st.lists(st.floats(-2.0, 4.0), min_size=N_NEURONS, max_size=N_NEURONS)
    )
    @settings(max_examples=60)
    def test_weights_sum_to_one_when_active(self, raw):
        state = self.make_state(raw)
        des = desirability(state, 0.5)
        if des.active_set:
            assert des.d.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(des.d >= 0.0)
        else:
            assert np.all(des.d == 0.0)
