import copy
from collections import deque

import numpy as np
import pytest

from evcharge.station import ChargeEntry, StationState

# criterion number -> (description, passed, detail); filled by test_acceptance
ACCEPTANCE_RESULTS: dict = {}


def station_with(charging_secs, waiting_secs=(), slots=3, power=1000.0, now=0.0):
    """Station at ``now`` whose slots/queue hold charges of the given durations (s)."""
    cs = StationState(0, 0, slots, power, clock=now)
    for i, secs in enumerate(charging_secs):
        cs.charging[i] = ChargeEntry(100 + i, secs * power, secs * power, now, now)
    for i, secs in enumerate(waiting_secs):
        cs.waiting.append(ChargeEntry(200 + i, secs * power, secs * power, now + i))
    return cs


def replay_free_times(cs: StationState) -> list[float]:
    """Drain a copy of ``cs`` with ``tick`` and read when each slot finally goes idle."""
    sim = copy.deepcopy(cs)
    free = [sim.clock if e is None else None for e in sim.charging]
    while True:
        nxt = sim.next_completion()
        if nxt is None:
            break
        before = list(sim.charging)
        events = sim.tick(nxt - sim.clock)
        for ev in events:
            if ev.kind == "complete":
                slot = next(i for i, e in enumerate(before) if e is not None and e.ev_id == ev.ev_id)
                free[slot] = ev.time
    return free


def random_station(rng: np.random.Generator, max_slots=4, max_evs=8) -> StationState:
    """Reachable station state built from a random arrival history (integer seconds)."""
    slots = int(rng.integers(1, max_slots + 1))
    cs = StationState(0, 0, slots, 1000.0)
    t = 0.0
    for ev_id in range(int(rng.integers(0, max_evs + 1))):
        t += float(rng.integers(0, 300))
        cs.arrive(ev_id, float(rng.integers(1, 1000)) * 1000.0, t)
    cs.advance_to(t + float(rng.integers(0, 200)))
    return cs


def replay_wait(slot_free, reservations, t_dec):
    """Queue replay: earlier arrivals and the deciding vehicle, FCFS over the slots.

    Walks time from event to event, releasing finished slots and seating the
    queue head on the lowest-index idle slot.
    """
    busy_until = list(slot_free)
    arrivals = deque(sorted(r for r in reservations if r[0] < t_dec))
    arrivals.append((t_dec, None))
    queue = deque()
    now = min([*busy_until, arrivals[0][0]])
    while True:
        while arrivals and arrivals[0][0] <= now:
            queue.append(arrivals.popleft())
        idle = [i for i, t in enumerate(busy_until) if t <= now]
        while queue and idle:
            arrival, duration = queue.popleft()
            slot = idle.pop(0)
            if duration is None:
                return now - t_dec
            busy_until[slot] = now + duration
        upcoming = [t for t in busy_until if t > now] + ([arrivals[0][0]] if arrivals else [])
        now = min(upcoming)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        desc, ok, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {desc}  ({detail})")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
