"""Charging-station runtime: FCFS slots, energy accounting, reservations and estimators."""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Optional

from .domain import ConfigurationError, Publication, ReservationEntry, charge_duration

DEFAULT_RESERVATION_GRACE = 600.0


@dataclass
class ChargeEntry:
    ev_id: int
    deficit: float  # J requested on arrival
    remaining: float  # J still to deliver
    arrival_time: float
    start_time: Optional[float] = None


@dataclass(frozen=True)
class StationEvent:
    kind: str  # "start" | "complete" | "budget_exhausted"
    time: float
    cs_id: int
    ev_id: Optional[int] = None
    energy: float = 0.0
    arrival_time: Optional[float] = None


@dataclass
class StationState:
    cs_id: int
    node: int
    slots: int
    power: float  # W
    energy_budget: float = math.inf  # J
    reservation_grace: float = DEFAULT_RESERVATION_GRACE
    clock: float = 0.0
    charging: list = field(default_factory=list)  # one Optional[ChargeEntry] per slot
    waiting: list = field(default_factory=list)  # ChargeEntry, FCFS
    reservations: dict = field(default_factory=dict)  # token -> ReservationEntry
    energy_consumed: float = 0.0
    budget_exhausted: bool = False

    def __post_init__(self):
        if self.slots < 1:
            raise ConfigurationError("a station needs at least one slot")
        if not self.power > 0:
            raise ConfigurationError("charging power must be positive")
        if not self.charging:
            self.charging = [None] * self.slots

    # -- queue views -------------------------------------------------------

    @property
    def n_charging(self) -> int:
        return sum(entry is not None for entry in self.charging)

    @property
    def n_waiting(self) -> int:
        return len(self.waiting)

    def ev_ids(self) -> list[int]:
        return [e.ev_id for e in self.charging if e is not None] + [e.ev_id for e in self.waiting]

    def committed_energy(self) -> float:
        return self.energy_consumed + sum(e.remaining for e in self.charging if e is not None)

    # -- estimators --------------------------------------------------------

    def min_remaining_charge_time(self) -> float:
        """Shortest remaining charge among occupied slots; 0 while any slot is free."""
        if self.n_charging < self.slots:
            return 0.0
        return min(charge_duration(e.remaining, self.power) for e in self.charging)

    def instantaneous_queuing_time(self) -> float:
        waiting = sum(charge_duration(e.remaining, self.power) for e in self.waiting)
        return waiting + self.min_remaining_charge_time()

    def available_charging_times(self, now: Optional[float] = None) -> list[float]:
        """Absolute time each slot frees up once the waiting queue has drained FCFS.

        Slots keep absolute finish times; every waiting vehicle goes to the
        slot finishing first (lowest index on ties).
        """
        now = self.clock if now is None else now
        finish = [now if e is None else now + charge_duration(e.remaining, self.power) for e in self.charging]
        for entry in self.waiting:
            slot = min(range(len(finish)), key=finish.__getitem__)
            finish[slot] += charge_duration(entry.remaining, self.power)
        return finish

    # -- dynamics ----------------------------------------------------------

    def _admit(self, now: float, events: list) -> None:
        while self.waiting and not self.budget_exhausted:
            try:
                slot = self.charging.index(None)
            except ValueError:
                return
            head = self.waiting[0]
            if self.committed_energy() + head.remaining > self.energy_budget * (1 + 1e-12):
                self.budget_exhausted = True
                events.append(StationEvent("budget_exhausted", now, self.cs_id))
                return
            self.waiting.pop(0)
            head.start_time = now
            self.charging[slot] = head
            events.append(StationEvent("start", now, self.cs_id, head.ev_id, arrival_time=head.arrival_time))

    def next_completion(self) -> Optional[float]:
        rem = [e.remaining for e in self.charging if e is not None]
        if not rem:
            return None
        return self.clock + min(rem) / self.power

    def tick(self, dt: float) -> list[StationEvent]:
        """Charge for ``dt`` seconds, completing and back-filling at exact instants."""
        if dt < 0:
            raise ValueError("dt must be non-negative")
        events: list[StationEvent] = []
        end = self.clock + dt
        tol = self.power * 1e-9
        while True:
            self._admit(self.clock, events)
            occupied = [e for e in self.charging if e is not None]
            if not occupied:
                break
            step = min(min(e.remaining for e in occupied) / self.power, end - self.clock)
            step = max(step, 0.0)
            drawn = self.power * step
            finished = False
            for slot, entry in enumerate(self.charging):
                if entry is None:
                    continue
                delivered = min(entry.remaining, drawn)
                entry.remaining -= delivered
                self.energy_consumed += delivered
                if entry.remaining <= tol:
                    self.energy_consumed += entry.remaining
                    entry.remaining = 0.0
                    self.charging[slot] = None
                    finished = True
                    events.append(StationEvent("complete", self.clock + step, self.cs_id, entry.ev_id,
                                               energy=entry.deficit, arrival_time=entry.arrival_time))
            self.clock += step
            if not finished and self.clock >= end:
                break
        self.clock = end
        return events

    def advance_to(self, now: float) -> list[StationEvent]:
        return self.tick(max(0.0, now - self.clock))

    def arrive(self, ev_id: int, deficit: float, now: float, token: Optional[int] = None) -> list[StationEvent]:
        """Park a vehicle needing ``deficit`` joules; clears its reservation if any."""
        events = self.advance_to(now)
        if token is not None:
            self.reservations.pop(token, None)
        entry = ChargeEntry(ev_id, deficit, deficit, now)
        keys = [(e.arrival_time, e.ev_id) for e in self.waiting]
        self.waiting.insert(bisect.bisect(keys, (now, ev_id)), entry)
        self._admit(now, events)
        # a zero-deficit arrival completes on the spot
        events += self.tick(0.0)
        return events

    # -- reservations and publication ---------------------------------------

    def record_reservation(self, entry: ReservationEntry) -> None:
        self.reservations[entry.token] = entry

    def cancel_reservation(self, token: int) -> None:
        self.reservations.pop(token, None)

    def purge_reservations(self, now: float) -> None:
        stale = [t for t, r in self.reservations.items() if r.arrival_time + self.reservation_grace < now]
        for token in stale:
            del self.reservations[token]

    def publish_snapshot(self, now: Optional[float] = None) -> Publication:
        now = self.clock if now is None else now
        self.purge_reservations(now)
        pairs = sorted((r.arrival_time, r.charge_duration) for r in self.reservations.values())
        return Publication(
            cs_id=self.cs_id,
            issued_at=now,
            instantaneous_queuing_time=self.instantaneous_queuing_time(),
            slot_available_times=tuple(self.available_charging_times(now)),
            reservations=tuple(pairs),
        )
