"""Core entity types, unit conversions and battery arithmetic.

Everything inside the package is SI: joules, watts, seconds, meters and
meters per second. Conversions happen only at the configuration boundary.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

J_PER_KWH = 3.6e6
W_PER_KW = 1e3
MPS_PER_KMH = 1 / 3.6


class ConfigurationError(ValueError):
    """Raised for physically meaningless parameters (zero power, zero range...)."""


def kwh_to_j(kwh: float) -> float:
    return kwh * J_PER_KWH


def j_to_kwh(joules: float) -> float:
    return joules / J_PER_KWH


def kw_to_w(kw: float) -> float:
    return kw * W_PER_KW


def w_to_kw(watts: float) -> float:
    return watts / W_PER_KW


def kmh_to_mps(kmh: float) -> float:
    return kmh * MPS_PER_KMH


def mps_to_kmh(mps: float) -> float:
    return mps / MPS_PER_KMH


class Mode(enum.Enum):
    ROAMING = "roaming"
    HEADING = "heading"  # driving towards the selected station
    WAITING = "waiting"
    CHARGING = "charging"
    STRANDED = "stranded"


# Legal forward transitions of the charging cycle.
_TRANSITIONS = {
    Mode.ROAMING: {Mode.HEADING, Mode.STRANDED},
    Mode.HEADING: {Mode.WAITING, Mode.STRANDED},
    Mode.WAITING: {Mode.CHARGING},
    Mode.CHARGING: {Mode.ROAMING},
    Mode.STRANDED: set(),
}


@dataclass(frozen=True)
class ReservationEntry:
    """Charging reservation as kept in a station's book.

    The token is an opaque counter value; it identifies the reservation for
    later updates but carries no vehicle identity or position.
    """

    token: int
    arrival_time: float
    charge_duration: float

    def __post_init__(self):
        if not self.charge_duration > 0:
            raise ValueError("charge_duration must be positive")


_token_counter = itertools.count(1)


def new_token() -> int:
    return next(_token_counter)


@dataclass(frozen=True)
class Publication:
    """One station condition snapshot as seen by RSUs and vehicles."""

    cs_id: int
    issued_at: float
    instantaneous_queuing_time: float
    slot_available_times: tuple[float, ...]
    reservations: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if any(t < self.issued_at - 1e-9 for t in self.slot_available_times):
            raise ValueError("slot available time earlier than issue time")


class InfoMap:
    """Latest publication per station, with the time it was received.

    Older snapshots never replace newer ones, so the stored ``issued_at``
    per station is monotone over a run.
    """

    def __init__(self):
        self._entries: dict[int, tuple[Publication, float]] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, cs_id: int) -> bool:
        return cs_id in self._entries

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._entries))

    def get(self, cs_id: int) -> Optional[Publication]:
        entry = self._entries.get(cs_id)
        return entry[0] if entry else None

    def received_at(self, cs_id: int) -> Optional[float]:
        entry = self._entries.get(cs_id)
        return entry[1] if entry else None

    def publications(self) -> list[Publication]:
        return [self._entries[k][0] for k in sorted(self._entries)]

    def is_newer(self, pub: Publication) -> bool:
        current = self._entries.get(pub.cs_id)
        return current is None or pub.issued_at > current[0].issued_at

    def store(self, pub: Publication, now: float) -> bool:
        """Keep ``pub`` unless an equal or newer snapshot is held. Returns True if stored."""
        if not self.is_newer(pub):
            return False
        self._entries[pub.cs_id] = (pub, now)
        return True

    def merge(self, other: "InfoMap", now: float) -> int:
        return sum(self.store(pub, now) for pub in other.publications())

    def has_newer_than(self, other: "InfoMap") -> bool:
        """True if this map holds any snapshot that ``other`` lacks or holds in an older version."""
        return any(other.is_newer(pub) for pub in self.publications())


@dataclass
class PendingReservation:
    entry: ReservationEntry
    cs_id: int
    published: bool = False


@dataclass
class EvState:
    """Mutable state of one vehicle, advanced in place by the engine."""

    id: int
    location: object  # roadnet.Location
    speed: float
    battery_max: float
    battery_cur: float
    consumption_rate: float  # J per meter
    soc_threshold: float = 0.40
    mode: Mode = Mode.ROAMING
    target_cs: Optional[int] = None
    route: object = None  # roadnet.Route
    route_pos: int = 0  # index of the next node of ``route`` still to reach
    info_map: InfoMap = field(default_factory=InfoMap)
    pending_reservation: Optional[PendingReservation] = None
    clock: float = 0.0

    def __post_init__(self):
        if self.battery_max <= 0:
            raise ConfigurationError("battery_max must be positive")
        if not 0 <= self.battery_cur <= self.battery_max:
            raise ValueError("battery_cur outside [0, battery_max]")

    def set_mode(self, mode: Mode, target_cs: Optional[int] = None) -> None:
        if mode is not self.mode and mode not in _TRANSITIONS[self.mode]:
            raise ValueError(f"illegal transition {self.mode.value} -> {mode.value}")
        self.mode = mode
        if mode is Mode.HEADING:
            self.target_cs = target_cs
        elif mode is Mode.ROAMING:
            self.target_cs = None
        if mode is not Mode.HEADING:
            self.pending_reservation = None


def soc(ev: EvState) -> float:
    return ev.battery_cur / ev.battery_max


def charge_duration(deficit: float, power: float) -> float:
    """Seconds needed to deliver ``deficit`` joules at constant ``power`` watts."""
    if not power > 0 or not math.isfinite(power):
        raise ConfigurationError(f"charging power must be positive, got {power}")
    if deficit < 0:
        raise ValueError("energy deficit must be non-negative")
    return deficit / power


def consumption_per_meter(mec: float, mtd: float) -> float:
    """Energy per meter given a full battery ``mec`` (J) lasting ``mtd`` meters."""
    if not mtd > 0:
        raise ConfigurationError(f"maximum travel distance must be positive, got {mtd}")
    return mec / mtd
