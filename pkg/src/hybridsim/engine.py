"""Discrete-event core with a hybrid virtual clock.

The clock advances in one of two modes:

* DES: jump straight to the timestamp of the next event (fast-forward).
* FTI: advance in small fixed increments, optionally paced against the
  wall clock, so that real-time control-plane behavior is reproduced.

Control-plane activity (reported through ``notify_control_activity``)
switches the engine to FTI; a user-configurable quiescence timeout
without further activity switches it back to DES.

Virtual time is an integer count of nanoseconds since experiment start.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

from .errors import SchedulingInPast

# Virtual-time unit helpers (nanoseconds).
US = 1_000
MS = 1_000_000
SEC = 1_000_000_000

MODE_DES = "DES"
MODE_FTI = "FTI"

# Event kinds (informational; dispatch is by callback).
FLOW_START = "FlowStart"
FLOW_STOP = "FlowStop"
RATE_RECOMPUTE = "RateRecompute"
CONTROL_DELIVERY = "ControlMessageDelivery"
STATS_POLL = "StatsPoll"
QUIESCENCE_CHECK = "QuiescenceCheck"
MEASUREMENT_SAMPLE = "MeasurementSample"


@dataclass
class Event:
    timestamp: int
    sequence: int
    kind: str
    fn: object  # callable(now: int)
    cancelled: bool = False
    executed: bool = False

    def sort_key(self):
        return (self.timestamp, self.sequence)


class EventHandle:
    """Returned by schedule(); permits cancellation."""

    __slots__ = ("event",)

    def __init__(self, event: Event):
        self.event = event


@dataclass
class EngineReport:
    final_clock: int = 0
    wall_seconds: float = 0.0
    events_executed: dict = field(default_factory=dict)
    mode_trace: list = field(default_factory=list)  # [(virtual ns, mode)]
    virtual_ns: dict = field(default_factory=dict)  # mode -> virtual ns
    wall_by_mode: dict = field(default_factory=dict)  # mode -> wall seconds
    lag_ns: int = 0
    mode_wall_stamps: list = field(default_factory=list)  # [(virtual ns, mode, wall s)]

    @property
    def total_events(self) -> int:
        return sum(self.events_executed.values())

    def fti_phase_walls(self) -> list:
        """Wall-clock duration of each completed FTI phase."""
        out = []
        start = None
        for _, mode, wall in self.mode_wall_stamps:
            if mode == MODE_FTI and start is None:
                start = wall
            elif mode == MODE_DES and start is not None:
                out.append(wall - start)
                start = None
        return out

    def fti_intervals(self, end: int | None = None) -> list:
        """FTI intervals [start, stop) derived from the mode trace."""
        if end is None:
            end = self.final_clock
        return mode_trace_fti_intervals(self.mode_trace, end)


def mode_trace_fti_intervals(trace, end: int) -> list:
    out = []
    start = None
    for t, mode in trace:
        if mode == MODE_FTI and start is None:
            start = t
        elif mode == MODE_DES and start is not None:
            out.append((start, t))
            start = None
    if start is not None:
        out.append((start, end))
    return out


class Engine:
    """Single-threaded hybrid DES/FTI event loop.

    All simulation state is owned by the thread that calls run(). With
    ``pace=False`` the FTI mode keeps its exact event ordering but skips
    the wall-clock sleeps (useful for tests and batch runs; pacing only
    ever affects duration, never ordering).
    """

    def __init__(self, fti_step: int = 1 * MS, quiescence_timeout: int = 2 * SEC,
                 pace: bool = True):
        if fti_step <= 0 or quiescence_timeout <= 0:
            raise ValueError("fti_step and quiescence_timeout must be positive")
        self.clock: int = 0
        self.mode: str = MODE_DES
        self.fti_step = fti_step
        self.quiescence_timeout = quiescence_timeout
        self.pace = pace
        self.last_control_activity: int | None = None
        self._wall_anchor: tuple[float, int] | None = None  # (wall s, virtual ns)
        self._heap: list = []
        self._seq = 0
        self._quiescence_handle: EventHandle | None = None
        self._end: int | None = None
        self.lag_ns = 0
        self.events_executed: dict[str, int] = {}
        self.mode_trace: list = [(0, MODE_DES)]
        self.mode_wall_stamps: list = [(0, MODE_DES, time.perf_counter())]
        self._wall_by_mode = {MODE_DES: 0.0, MODE_FTI: 0.0}
        self.activity_notifications = 0

    # -- scheduling ----------------------------------------------------

    def schedule(self, at: int, kind: str, fn) -> EventHandle:
        if at < self.clock:
            raise SchedulingInPast(f"cannot schedule at {at} (clock={self.clock})")
        ev = Event(at, self._seq, kind, fn)
        self._seq += 1
        heapq.heappush(self._heap, (ev.sort_key(), ev))
        return EventHandle(ev)

    def cancel(self, handle: EventHandle) -> bool:
        ev = handle.event
        if ev.cancelled or ev.executed:
            return False
        ev.cancelled = True
        return True

    def queue_size(self) -> int:
        return sum(1 for _, ev in self._heap if not ev.cancelled)

    def _peek(self) -> Event | None:
        while self._heap:
            _, ev = self._heap[0]
            if ev.cancelled:
                heapq.heappop(self._heap)
                continue
            return ev
        return None

    # -- mode control ---------------------------------------------------

    def notify_control_activity(self, now: int) -> str:
        """Record control-plane activity at virtual time ``now``.

        Switches DES->FTI if needed and (re)schedules the single pending
        quiescence check at now + quiescence_timeout.
        """
        self.activity_notifications += 1
        self.last_control_activity = now
        transition = "none"
        if self.mode == MODE_DES:
            self.mode = MODE_FTI
            self._wall_anchor = (time.perf_counter(), now)
            self._record_mode(now, MODE_FTI)
            transition = "des_to_fti"
        if self._quiescence_handle is not None:
            self.cancel(self._quiescence_handle)
        at = max(now + self.quiescence_timeout, self.clock)
        expected = now
        self._quiescence_handle = self.schedule(
            at, QUIESCENCE_CHECK, lambda t, exp=expected: self._quiescence_check(exp))
        return transition

    def _quiescence_check(self, expected_last: int):
        if self.last_control_activity != expected_last:
            return  # superseded by newer activity
        if self.mode == MODE_FTI:
            self.mode = MODE_DES
            self._wall_anchor = None
            # transition time is the quiescence deadline itself
            self._record_mode(expected_last + self.quiescence_timeout, MODE_DES)

    def _record_mode(self, at: int, mode: str):
        self.mode_trace.append((at, mode))
        self.mode_wall_stamps.append((at, mode, time.perf_counter()))

    # -- stepping -------------------------------------------------------

    def _execute(self, ev: Event):
        ev.executed = True
        self.events_executed[ev.kind] = self.events_executed.get(ev.kind, 0) + 1
        ev.fn(ev.timestamp)

    def step(self) -> str:
        if self.mode == MODE_DES:
            ev = self._peek()
            if ev is None:
                return "idle"
            heapq.heappop(self._heap)
            self.clock = ev.timestamp
            self._execute(ev)
            return "event"
        # FTI branch
        target = self.clock + self.fti_step
        if self._end is not None:
            target = min(target, self._end)
        if self.pace and self._wall_anchor is not None:
            wall0, virt0 = self._wall_anchor
            deadline = wall0 + (target - virt0) / SEC
            now_wall = time.perf_counter()
            if now_wall < deadline:
                time.sleep(deadline - now_wall)
            else:
                self.lag_ns += int((now_wall - deadline) * SEC)
        self.clock = target
        while True:
            ev = self._peek()
            if ev is None or ev.timestamp > self.clock:
                break
            heapq.heappop(self._heap)
            self._execute(ev)
            if self.mode == MODE_DES:
                # quiescence flipped us back; drain the remaining due
                # events in DES (they are data-plane work already due)
                continue
        return "fti"

    # -- run loop --------------------------------------------------------

    def run(self, end: int) -> EngineReport:
        self._end = end
        wall_start = time.perf_counter()
        while self.clock < end:
            nxt = self._peek()
            if self.mode == MODE_DES:
                if nxt is None or nxt.timestamp > end:
                    break
            mode_before = self.mode
            t0 = time.perf_counter()
            self.step()
            self._wall_by_mode[mode_before] += time.perf_counter() - t0
        self.clock = max(self.clock, end)
        self._end = None
        report = EngineReport(
            final_clock=self.clock,
            wall_seconds=time.perf_counter() - wall_start,
            events_executed=dict(self.events_executed),
            mode_trace=list(self.mode_trace),
            virtual_ns=self._virtual_breakdown(self.clock),
            wall_by_mode=dict(self._wall_by_mode),
            lag_ns=self.lag_ns,
            mode_wall_stamps=list(self.mode_wall_stamps),
        )
        return report

    def _virtual_breakdown(self, end: int) -> dict:
        out = {MODE_DES: 0, MODE_FTI: 0}
        trace = self.mode_trace
        for i, (t, mode) in enumerate(trace):
            t_next = trace[i + 1][0] if i + 1 < len(trace) else end
            t_next = min(t_next, end)
            if t_next > t:
                out[mode] += t_next - t
        return out
