"""Vehicle-side station selection and reservation logic.

Decisions only ever see :class:`~evcharge.domain.Publication` values, i.e.
station state plus anonymous (arrival, duration) pairs; no other vehicle's
state is reachable from here.
"""
from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass
from typing import Optional, Sequence

from .domain import EvState, InfoMap, Publication, ReservationEntry, charge_duration, new_token
from .roadnet import RoadGraph, route_length_from, travel_time


class Policy(enum.Enum):
    MIN_QUEUING_TIME = "min_queuing_time"
    MIN_EXPECTED_WAIT = "min_expected_wait"
    NEAREST_ONLY = "nearest_only"


@dataclass(frozen=True)
class Choice:
    cs_id: int
    travel_time: float
    route_length: float
    estimate: Optional[float]  # queuing time or expected wait that won; None on fallback
    fallback: bool = False  # no usable information, nearest station taken
    unreachable: bool = False  # nothing reachable on the current battery


@dataclass(frozen=True)
class _Candidate:
    cs_id: int
    length: float
    travel_time: float


def _candidates(ev: EvState, graph: RoadGraph, stations: Optional[Sequence[int]] = None):
    """Stations with their route length and travel time, split by battery reachability."""
    nodes = graph.cs_nodes if stations is None else stations
    all_cands = []
    for cs_id, node in enumerate(nodes):
        length = route_length_from(graph, ev.location, node)
        all_cands.append(_Candidate(cs_id, length, travel_time(length, ev.speed)))
    reachable = [c for c in all_cands if c.length * ev.consumption_rate <= ev.battery_cur * (1 + 1e-12)]
    return reachable, all_cands


def _nearest(cands, unreachable=False) -> Choice:
    best = min(cands, key=lambda c: (c.length, c.cs_id))
    return Choice(best.cs_id, best.travel_time, best.length, None, fallback=True, unreachable=unreachable)


def select_cs_nearest(ev: EvState, graph: RoadGraph) -> Choice:
    reachable, all_cands = _candidates(ev, graph)
    return _nearest(reachable or all_cands, unreachable=not reachable)


def select_cs_min_queue(info: InfoMap, ev: EvState, graph: RoadGraph) -> Choice:
    """Reachable station with the smallest recorded queuing time.

    Without any recorded publication among the reachable stations the
    nearest one by road distance is taken instead.
    """
    reachable, all_cands = _candidates(ev, graph)
    if not reachable:
        return _nearest(all_cands, unreachable=True)
    scored = [(info.get(c.cs_id).instantaneous_queuing_time, c.travel_time, c.cs_id, c)
              for c in reachable if c.cs_id in info]
    if not scored:
        return _nearest(reachable)
    value, _, _, best = min(scored, key=lambda s: s[:3])
    return Choice(best.cs_id, best.travel_time, best.length, value)


def expected_waiting_time(pub: Publication, t_arr_dec: float) -> float:
    """Wait at a station for a vehicle arriving at ``t_arr_dec``.

    Reservations arriving strictly earlier are served FCFS on whichever slot
    frees first; the answer is how long the earliest free slot stays busy
    after ``t_arr_dec``.
    """
    if not pub.slot_available_times:
        raise ValueError("publication lists no slots")
    free = sorted(pub.slot_available_times)
    for arrival, duration in sorted(pub.reservations):
        if arrival < t_arr_dec:
            head = free[0]
            finish = (head if head > arrival else arrival) + duration
            heapq.heapreplace(free, finish)
    return max(0.0, free[0] - t_arr_dec)


def select_cs_min_expected_wait(info: InfoMap, ev: EvState, graph: RoadGraph, now: float) -> Choice:
    reachable, all_cands = _candidates(ev, graph)
    if not reachable:
        return _nearest(all_cands, unreachable=True)
    scored = []
    for c in reachable:
        pub = info.get(c.cs_id)
        if pub is None:
            continue
        wait = expected_waiting_time(pub, now + c.travel_time)
        scored.append((wait, c.travel_time, c.cs_id, c))
    if not scored:
        return _nearest(reachable)
    value, _, _, best = min(scored, key=lambda s: s[:3])
    return Choice(best.cs_id, best.travel_time, best.length, value)


def select(policy: Policy, info: InfoMap, ev: EvState, graph: RoadGraph, now: float) -> Choice:
    if policy is Policy.MIN_QUEUING_TIME:
        return select_cs_min_queue(info, ev, graph)
    if policy is Policy.MIN_EXPECTED_WAIT:
        return select_cs_min_expected_wait(info, ev, graph, now)
    return select_cs_nearest(ev, graph)


def make_reservation(ev: EvState, travel_time_s: float, power: float, now: float,
                     token: Optional[int] = None) -> Optional[ReservationEntry]:
    """Reservation for arriving after ``travel_time_s`` and charging to full at ``power``.

    The charge covers the current deficit plus the energy burnt on the way.
    Returns None when there would be nothing to charge.
    """
    en_route = ev.speed * travel_time_s * ev.consumption_rate
    duration = charge_duration(ev.battery_max - ev.battery_cur + en_route, power)
    if duration <= 0:
        return None
    return ReservationEntry(new_token() if token is None else token, now + travel_time_s, duration)
