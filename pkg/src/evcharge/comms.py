"""Publish/subscribe dissemination through road-side units.

Station-to-RSU links are lossless and instantaneous. Only the vehicle-RSU
hop depends on geometry: a vehicle hears a push when it sits inside the RSU
disk at a publication instant, and pulls the RSU cache once per continuous
contact episode.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .domain import EvState, InfoMap, Publication
from .roadnet import distance
from .station import StationState


class CommMode(enum.Enum):
    PUSH = "push"
    PULL = "pull"
    ADVANCED_PULL = "apull"
    IDEAL = "ideal"

    @property
    def caches(self) -> bool:
        return self in (CommMode.PULL, CommMode.ADVANCED_PULL)


@dataclass(frozen=True)
class RadioParams:
    rsu_radius: float  # R
    ev_range: float  # L
    require_l_below_r: bool = False

    def __post_init__(self):
        if not (self.rsu_radius > 0 and self.ev_range > 0):
            raise ValueError("radio ranges must be positive")
        if self.require_l_below_r and not self.ev_range < self.rsu_radius:
            raise ValueError("analysis comparison requires L < R")

    @property
    def query_range(self) -> float:
        return min(self.rsu_radius, self.ev_range)


@dataclass(frozen=True)
class PublicationSchedule:
    interval: float
    phase: float = 0.0

    def __post_init__(self):
        if not self.interval > 0:
            raise ValueError("publication interval must be positive")
        if not 0 <= self.phase < self.interval:
            raise ValueError("phase must lie in [0, interval)")

    def instants(self, horizon: float) -> Iterable[float]:
        k = 0
        while (t := self.phase + k * self.interval) < horizon:
            yield t
            k += 1


@dataclass
class RsuState:
    rsu_id: int
    position: tuple[float, float]
    radius: float
    cache: InfoMap = field(default_factory=InfoMap)
    served: set = field(default_factory=set)  # vehicles already answered in their current contact

    def covers(self, xy, reach=None) -> bool:
        return distance(self.position, xy) <= (self.radius if reach is None else reach)

    def end_contact(self, ev_id: int) -> None:
        self.served.discard(ev_id)


def publish_round(stations: Sequence[StationState], rsus: Sequence[RsuState], now: float,
                  cache: bool = True) -> list[Publication]:
    """Snapshot every station and hand the set to every RSU.

    With ``cache`` False (push mode) RSUs only relay the round and keep nothing.
    """
    pubs = [cs.publish_snapshot(now) for cs in stations]
    if cache:
        for rsu in rsus:
            for pub in pubs:
                rsu.cache.store(pub, now)
    return pubs


def push_deliver(rsu: RsuState, evs: Sequence[EvState], positions: Sequence, pubs: Sequence[Publication],
                 now: float) -> list[int]:
    """Deliver the aggregated round to every vehicle within R; returns the ids served.

    One delivery per vehicle per RSU per instant, whatever the number of stations.
    """
    served = []
    for ev, xy in zip(evs, positions):
        if distance(rsu.position, xy) <= rsu.radius:
            for pub in pubs:
                ev.info_map.store(pub, now)
            served.append(ev.id)
    return served


def pull_query(ev: EvState, rsu: RsuState, now: float) -> bool:
    """Answer a vehicle's query with the whole RSU cache, once per contact.

    Nothing is sent (and nothing counted) when the cache is empty or holds
    no snapshot newer than what the vehicle already has.
    """
    if ev.id in rsu.served:
        return False
    rsu.served.add(ev.id)
    if not rsu.cache.has_newer_than(ev.info_map):
        return False
    ev.info_map.merge(rsu.cache, now)
    return True


def forward_reservation(ev: EvState, rsu: RsuState, stations: Sequence[StationState]) -> bool:
    """Relay the vehicle's unpublished reservation to its target station."""
    pending = ev.pending_reservation
    if pending is None or pending.published:
        return False
    stations[pending.cs_id].record_reservation(pending.entry)
    pending.published = True
    return True


def ideal_query(stations: Sequence[StationState], now: float) -> InfoMap:
    """Fresh snapshots of every station, as a central controller would answer."""
    info = InfoMap()
    for cs in stations:
        info.store(cs.publish_snapshot(now), now)
    return info
