from __future__ import annotations

import random

import pytest

from adastream.errors import InvalidRunError
from adastream.kb import default_space
from adastream.stream import StreamState
from adastream.units import to_us

SPACE = default_space()
LR = SPACE.config("LR")
HR = SPACE.config("HR")

# Per-switch delay that makes one switch per 30 s run cost 9% of the run:
# solves 1 - x/30 = 0.91.
DELAY_S = (1 - 0.91) * 30
DELAY_US = to_us(DELAY_S)
RUN_US = to_us(30)


def test_delay_derivation():
    assert DELAY_US == 2_700_000


def test_apply_same_config_is_free():
    state = StreamState(LR)
    changed = state.apply_config(LR, DELAY_US)
    assert not changed
    assert state.pending is None
    assert state.reconfig_remaining_us == 0
    state.step(to_us(1))
    assert state.reconfig_total_us() == 0


def test_apply_new_config_opens_reconfiguration():
    state = StreamState(LR)
    changed = state.apply_config(HR, DELAY_US)
    assert changed
    assert state.pending == HR
    assert state.reconfig_remaining_us == 2_700_000
    assert state.effective_config == HR
    assert state.active == LR


def test_reapply_pending_does_not_extend_delay():
    state = StreamState(LR)
    state.apply_config(HR, DELAY_US)
    state.step(to_us(1))
    assert state.reconfig_remaining_us == 1_700_000
    changed = state.apply_config(HR, DELAY_US)
    assert not changed
    assert state.reconfig_remaining_us == 1_700_000
    assert state.pending == HR


def test_replace_pending_mid_flight_keeps_deadline():
    state = StreamState(LR)
    state.apply_config(HR, DELAY_US)
    state.step(to_us(1))
    changed = state.apply_config(LR, DELAY_US)  # reverse course
    assert changed
    assert state.pending == LR
    assert state.reconfig_remaining_us == 1_700_000
    state.step(to_us(2))
    # reconfiguration completed on the original deadline, landing on LR
    assert state.active == LR and state.pending is None
    assert state.switches == 0  # no net config change
    assert state.reconfig_total_us() == 2_700_000


def test_step_streams_at_active_config():
    state = StreamState(LR)
    out = state.step(to_us(1))
    assert state.streamed_us == {"LR": 1_000_000}
    assert out.segments == (("LR", 1_000_000),)
    assert out.reconfig_us == 0


def test_step_splits_across_switch_completion():
    state = StreamState(LR)
    state.apply_config(HR, DELAY_US)
    out = state.step(to_us(3))
    # 2.7 s reconfiguring, then 0.3 s streamed at the new config
    assert out.reconfig_us == 2_700_000
    assert out.segments == (("HR", 300_000),)
    assert out.completed_switch
    assert state.active == HR and state.pending is None
    assert state.switches == 1


def test_step_entirely_inside_reconfiguration():
    state = StreamState(LR)
    state.apply_config(HR, to_us(5))
    out = state.step(to_us(1))
    assert state.reconfig_remaining_us == to_us(4)
    assert out.segments == ()
    assert state.streamed_us == {}


def test_step_rejects_non_positive_dt():
    state = StreamState(LR)
    with pytest.raises(ValueError):
        state.step(0)
    with pytest.raises(ValueError):
        state.step(-5)


def test_zero_delay_switch_is_instant():
    state = StreamState(LR)
    changed = state.apply_config(HR, 0)
    assert changed
    assert state.active == HR and state.pending is None
    assert state.switches == 1
    assert state.reconfig_total_us() == 0


def test_static_run_finalizes_with_full_streaming():
    state = StreamState(LR)
    for _ in range(30):
        state.step(to_us(1))
    record = state.finalize_run("static-LR", 0, RUN_US)
    assert record.reconfig_us == 0
    assert record.streamed_us == {"LR": RUN_US}
    assert record.switches == 0


def test_single_switch_run_accounting():
    state = StreamState(LR)
    state.step(to_us(10))
    state.apply_config(HR, DELAY_US)
    state.step(to_us(20))
    record = state.finalize_run("adaptive", 0, RUN_US)
    assert record.reconfig_us == 2_700_000
    assert record.streamed_total_us == RUN_US - 2_700_000  # 27.3 s
    assert record.streamed_us == {"LR": 10_000_000, "HR": 17_300_000}
    assert record.switches == 1


def test_run_ending_mid_reconfiguration_clips_open_interval():
    state = StreamState(LR)
    state.step(to_us(29))
    state.apply_config(HR, DELAY_US)
    state.step(to_us(1))
    record = state.finalize_run("adaptive", 0, RUN_US)
    assert record.reconfig_us == 1_000_000
    assert record.streamed_us == {"LR": 29_000_000}
    # the switch carries into the next run
    state.start_run()
    state.step(to_us(2))
    assert state.active == HR
    assert state.reconfig_total_us() == 1_700_000
    assert state.streamed_us == {"HR": 300_000}


def test_finalize_rejects_clock_mismatch():
    state = StreamState(LR)
    state.step(to_us(29))
    with pytest.raises(InvalidRunError):
        state.finalize_run("adaptive", 0, RUN_US)


def test_time_conservation_over_random_interleavings():
    for seed in range(50):
        rng = random.Random(seed)
        state = StreamState(LR)
        switches_seen = 0
        reconfig_seen = 0
        for _ in range(200):
            if rng.random() < 0.3:
                target = rng.choice(SPACE.configs)
                state.apply_config(target, to_us(rng.choice([0, 1.3, 2.7, 5.0])))
            else:
                state.step(rng.randint(1, 3_000_000))
            assert sum(state.streamed_us.values()) + state.reconfig_total_us() == state.clock_us
            assert state.switches >= switches_seen
            assert state.reconfig_total_us() >= reconfig_seen
            switches_seen = state.switches
            reconfig_seen = state.reconfig_total_us()


def test_static_scenario_always_tp_one():
    # no apply_config after start: reconfig stays zero for any step pattern
    for seed in range(10):
        rng = random.Random(seed)
        state = StreamState(HR)
        total = 0
        while total < RUN_US:
            dt = min(rng.randint(1, 2_000_000), RUN_US - total)
            state.step(dt)
            total += dt
        record = state.finalize_run("static-HR", 0, RUN_US)
        assert record.reconfig_us == 0
        assert record.streamed_us == {"HR": RUN_US}
