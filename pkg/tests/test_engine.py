import random

import pytest

from hybridsim.engine import (MODE_DES, MODE_FTI, MS, SEC, Engine,
                              mode_trace_fti_intervals)
from hybridsim.errors import SchedulingInPast

from oracles import interval_union


def make_engine(**kw):
    kw.setdefault("pace", False)
    return Engine(**kw)


def test_schedule_at_current_clock():
    e = make_engine()
    e.schedule(0, "FlowStart", lambda t: None)
    assert e.queue_size() == 1


def test_schedule_tie_break_by_sequence():
    e = make_engine()
    order = []
    e.schedule(5 * SEC, "A", lambda t: order.append("first"))
    e.schedule(5 * SEC, "B", lambda t: order.append("second"))
    e.run(6 * SEC)
    assert order == ["first", "second"]


def test_schedule_in_past_rejected():
    e = make_engine()
    e.schedule(2 * SEC, "A", lambda t: None)
    e.run(2 * SEC)
    with pytest.raises(SchedulingInPast):
        e.schedule(1 * SEC, "B", lambda t: None)


def test_cancel_pending_then_again():
    e = make_engine()
    h = e.schedule(1 * SEC, "A", lambda t: None)
    assert e.cancel(h) is True
    assert e.queue_size() == 0
    assert e.cancel(h) is False


def test_cancel_after_execution():
    e = make_engine()
    h = e.schedule(1 * SEC, "A", lambda t: None)
    e.run(2 * SEC)
    assert e.cancel(h) is False


def test_des_jumps_without_pacing():
    e = make_engine()
    seen = []
    e.schedule(int(9.7 * SEC), "A", lambda t: seen.append(t))
    rep = e.run(10 * SEC)
    assert seen == [int(9.7 * SEC)]
    assert rep.final_clock == 10 * SEC
    assert rep.wall_seconds < 0.5


def test_empty_queue_run():
    e = make_engine()
    rep = e.run(10 * SEC)
    assert rep.final_clock == 10 * SEC
    assert rep.total_events == 0


def test_notify_switches_to_fti_and_back():
    e = make_engine(quiescence_timeout=2 * SEC)
    e.schedule(3 * SEC, "ControlMessageDelivery",
               lambda t: e.notify_control_activity(t))
    rep = e.run(10 * SEC)
    assert rep.mode_trace == [(0, MODE_DES), (3 * SEC, MODE_FTI),
                              (5 * SEC, MODE_DES)]


def test_repeated_activity_extends_fti():
    e = make_engine(quiescence_timeout=2 * SEC)
    for t in (3 * SEC, 4 * SEC):
        e.schedule(t, "ControlMessageDelivery",
                   lambda now: e.notify_control_activity(now))
    rep = e.run(10 * SEC)
    assert rep.fti_intervals() == [(3 * SEC, 6 * SEC)]


def test_same_timestamp_notifies_single_quiescence_check():
    e = make_engine(quiescence_timeout=2 * SEC)

    def notify_twice(now):
        e.notify_control_activity(now)
        e.notify_control_activity(now)

    e.schedule(1 * SEC, "ControlMessageDelivery", notify_twice)
    rep = e.run(10 * SEC)
    assert rep.events_executed.get("QuiescenceCheck", 0) == 1
    assert rep.fti_intervals() == [(1 * SEC, 3 * SEC)]


def test_mode_virtual_durations_sum_to_final_clock():
    e = make_engine(quiescence_timeout=1 * SEC)
    for t in (0, 2 * SEC, int(2.5 * SEC), 7 * SEC):
        e.schedule(t, "ControlMessageDelivery",
                   lambda now: e.notify_control_activity(now))
    rep = e.run(10 * SEC)
    assert sum(rep.virtual_ns.values()) == rep.final_clock


def test_determinism_identical_runs():
    def trace():
        e = make_engine(quiescence_timeout=1 * SEC)
        executed = []
        rng = random.Random(42)
        for i in range(50):
            t = rng.randrange(0, 8 * SEC)
            kind = rng.choice(["FlowStart", "ControlMessageDelivery"])
            if kind == "ControlMessageDelivery":
                e.schedule(t, kind, lambda now, i=i: (
                    executed.append((now, i)), e.notify_control_activity(now)))
            else:
                e.schedule(t, kind, lambda now, i=i: executed.append((now, i)))
        rep = e.run(10 * SEC)
        return executed, rep.mode_trace

    assert trace() == trace()


def test_clock_monotone_under_random_load():
    e = make_engine()
    rng = random.Random(7)
    clocks = []

    def record(now):
        clocks.append(e.clock)
        # events may schedule more events at or after the clock
        if rng.random() < 0.3:
            e.schedule(e.clock + rng.randrange(0, SEC), "FlowStart", record)

    for _ in range(30):
        e.schedule(rng.randrange(0, 5 * SEC), "FlowStart", record)
    e.run(10 * SEC)
    assert clocks == sorted(clocks)


def test_mode_trace_matches_interval_oracle_small():
    rng = random.Random(123)
    for _ in range(25):
        n = rng.randrange(1, 8)
        times = sorted(rng.randrange(0, 8 * SEC) for _ in range(n))
        timeout = rng.randrange(SEC // 10, 3 * SEC)
        end = 10 * SEC
        e = make_engine(quiescence_timeout=timeout)
        for t in times:
            e.schedule(t, "ControlMessageDelivery",
                       lambda now: e.notify_control_activity(now))
        rep = e.run(end)
        assert rep.fti_intervals(end) == interval_union(times, timeout, end)


def test_fti_pacing_disabled_is_fast():
    e = make_engine(quiescence_timeout=2 * SEC)
    e.schedule(0, "ControlMessageDelivery",
               lambda t: e.notify_control_activity(t))
    rep = e.run(3 * SEC)
    assert rep.wall_seconds < 1.0
    assert rep.virtual_ns[MODE_FTI] == 2 * SEC


def test_fti_steps_advance_fixed_increment():
    e = make_engine(fti_step=1 * MS, quiescence_timeout=100 * MS)
    e.notify_control_activity(0)
    before = e.clock
    e.step()
    assert e.clock - before == 1 * MS


def test_mode_trace_helper():
    trace = [(0, MODE_DES), (SEC, MODE_FTI), (3 * SEC, MODE_DES)]
    assert mode_trace_fti_intervals(trace, 5 * SEC) == [(SEC, 3 * SEC)]
