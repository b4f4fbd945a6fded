"""Single-run discrete-event loop.

Vehicles move edge by edge; every vehicle event (node reached, RSU disk
entered, SOC threshold crossed, battery exhausted) advances that vehicle
lazily to the event time and reschedules its next events. Stale events are
dropped through a per-entity version counter. Stations are advanced to the
exact completion instants of their charges.

Per-run seeds come from ``SeedSequence(entropy=seed, spawn_key=(run_index,))``
and every vehicle gets its own child stream, so a run can be re-executed on
its own and vehicle draws do not depend on event interleaving.
"""
from __future__ import annotations

import heapq
import itertools
import json
from collections import Counter
from typing import Optional

import numpy as np

from ..comms import CommMode, RsuState, forward_reservation, ideal_query, publish_round, pull_query, push_deliver
from ..decision import Policy, make_reservation, select
from ..domain import EvState, Mode, PendingReservation, j_to_kwh
from ..roadnet import (
    Location,
    RoadGraph,
    advance,
    disk_entry_time,
    distance,
    distance_to_next_node,
    generate_grid,
    load_graph,
    place_points,
    position_after,
    shortest_path,
)
from ..station import StationEvent, StationState
from .config import ScenarioConfig
from .metrics import MetricsReport

# Event kinds double as same-time priorities.
STATION, PUBLISH, EV_NODE, EV_CONTACT, EV_SOC, EV_STRAND = range(6)
KIND_NAMES = {STATION: "station", PUBLISH: "publish", EV_NODE: "node", EV_CONTACT: "contact",
              EV_SOC: "soc_threshold", EV_STRAND: "strand"}

_E_TOL = 1e-6  # J


def build_graph(config: ScenarioConfig) -> RoadGraph:
    """Road graph with exactly ``cs_count`` stations and ``rsu_count`` RSUs placed."""
    if config.graph_file:
        graph = load_graph(config.graph_file)
        cs_fixed = tuple(config.cs_nodes) or tuple(graph.cs_nodes)
        rsu_fixed = tuple(config.rsu_nodes) or tuple(graph.rsu_nodes)
    else:
        graph = generate_grid(config.grid_width, config.grid_height, config.grid_spacing, 0, 0)
        cs_fixed, rsu_fixed = tuple(config.cs_nodes), tuple(config.rsu_nodes)
    return place_points(graph, config.cs_count, config.rsu_count, config.placement_seed, cs_fixed, rsu_fixed)


def run_seed_sequence(master_seed: int, run_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(run_index,))


class Simulation:
    def __init__(self, config: ScenarioConfig, run_index: int = 0, graph: Optional[RoadGraph] = None,
                 trace: Optional[list] = None):
        self.cfg = config
        self.run_index = run_index
        self.graph = graph if graph is not None else build_graph(config)
        self.mode = config.comm_mode
        self.policy = Policy.MIN_EXPECTED_WAIT if self.mode is CommMode.ADVANCED_PULL else Policy.MIN_QUEUING_TIME
        self.pull_like = self.mode.caches
        self.query_range = min(config.rsu_radius, config.ev_range)
        self.trace = trace

        self.stations = [
            StationState(i, node, config.slots, config.power, config.energy_budget, config.reservation_grace)
            for i, node in enumerate(self.graph.cs_nodes)
        ]
        self.rsus = [RsuState(i, self.graph.xy(node), config.rsu_radius) for i, node in enumerate(self.graph.rsu_nodes)]

        seq = run_seed_sequence(config.seed, run_index)
        self.rngs = [np.random.default_rng(child) for child in seq.spawn(config.ev_count)]
        self.nodes = self.graph.nodes
        self.threshold_energy = config.soc_threshold * config.battery_max
        vmin, vmax = config.speed_range
        self._speed_range = (vmin, vmax)

        self.evs = []
        for i, rng in enumerate(self.rngs):
            node = self.nodes[int(rng.integers(len(self.nodes)))]
            soc0 = rng.uniform(config.initial_soc_min, config.initial_soc_max)
            ev = EvState(i, Location.at(node), rng.uniform(vmin, vmax), config.battery_max,
                         soc0 * config.battery_max, config.consumption_rate, config.soc_threshold)
            self._new_trip(ev, draw_speed=False)
            self.evs.append(ev)

        self._heap: list = []
        self._seq = itertools.count()
        self._ev_version = [0] * len(self.evs)
        self._cs_version = [0] * len(self.stations)
        self._contacts: list[set] = [set() for _ in self.evs]
        self._tokens = itertools.count(1)
        self._forwarded_token: dict[int, int] = {}
        self._charge_start: dict[int, float] = {}
        self.now = 0.0

        self.waiting_samples: list[float] = []
        self.queue_wait_samples: list[float] = []
        self.freshness_samples: list[float] = []
        self.obtain_info_count = 0
        self.charged_ev_count = 0
        self.stranded: set = set()
        self.decisions = 0
        self.fallback_decisions = 0
        self.reservations_forwarded = 0
        self.energy_received = 0.0  # J, tallied from the vehicle side
        self.event_counts: Counter = Counter()

    # -- scheduling ----------------------------------------------------------

    def _push(self, time: float, kind: int, entity: int, sub: int = 0, payload=None) -> None:
        heapq.heappush(self._heap, (time, kind, entity, sub, next(self._seq), payload))

    def _log(self, kind: str, **ids) -> None:
        if self.trace is not None:
            self.trace.append({"time": self.now, "type": kind, **ids})

    def _new_trip(self, ev: EvState, draw_speed: bool = True) -> None:
        rng = self.rngs[ev.id]
        here = ev.location.u
        target = here
        while target == here:
            target = self.nodes[int(rng.integers(len(self.nodes)))]
        if draw_speed:
            ev.speed = rng.uniform(*self._speed_range)
        ev.route = shortest_path(self.graph, ev.location, target)
        ev.route_pos = 0

    def _schedule_ev(self, ev: EvState) -> None:
        self._ev_version[ev.id] += 1
        version = self._ev_version[ev.id]
        now = self.now
        ahead = distance_to_next_node(ev, self.graph)
        alpha = ev.consumption_rate
        self._push(now + ahead / ev.speed, EV_NODE, ev.id, 0, version)
        if ev.mode is Mode.ROAMING:
            excess = ev.battery_cur - self.threshold_energy
            if _E_TOL < excess < alpha * ahead:
                self._push(now + excess / (alpha * ev.speed), EV_SOC, ev.id, 0, version)
        if ev.battery_cur < alpha * ahead - _E_TOL:
            self._push(now + ev.battery_cur / (alpha * ev.speed), EV_STRAND, ev.id, 0, version)
        if self.pull_like and self.rsus and ahead > 0:
            p0 = ev.location.xy(self.graph)
            p1 = self.graph.xy(ev.route.nodes[ev.route_pos])
            inside = self._contacts[ev.id]
            for rsu in self.rsus:
                if rsu.rsu_id in inside:
                    continue
                dt = disk_entry_time(p0, p1, ev.speed, rsu.position, self.query_range)
                if dt is not None:
                    self._push(now + dt, EV_CONTACT, ev.id, rsu.rsu_id, version)

    def _schedule_station(self, cs: StationState) -> None:
        self._cs_version[cs.cs_id] += 1
        t = cs.next_completion()
        if t is not None:
            self._push(t, STATION, cs.cs_id, 0, self._cs_version[cs.cs_id])

    # -- stations ------------------------------------------------------------

    def _sync_station(self, cs: StationState) -> None:
        events = cs.advance_to(self.now)
        if events:
            self._station_events(events)
        self._schedule_station(cs)

    def _sync_all(self) -> None:
        for cs in self.stations:
            self._sync_station(cs)

    def _station_events(self, events: list[StationEvent]) -> None:
        for event in events:
            self.event_counts[f"cs_{event.kind}"] += 1
            self._log(f"charge_{event.kind}", cs=event.cs_id, ev=event.ev_id)
            if event.kind == "budget_exhausted":
                continue
            ev = self.evs[event.ev_id]
            if event.kind == "start":
                ev.set_mode(Mode.CHARGING)
                self._charge_start[ev.id] = event.time
                self.queue_wait_samples.append(event.time - event.arrival_time)
            elif event.kind == "complete":
                self.energy_received += ev.battery_max - ev.battery_cur
                ev.battery_cur = ev.battery_max
                ev.set_mode(Mode.ROAMING)
                ev.clock = self.now
                self._charge_start.pop(ev.id, None)
                self.charged_ev_count += 1
                self.waiting_samples.append(event.time - event.arrival_time)
                self._new_trip(ev)
                self._schedule_ev(ev)

    # -- communication -------------------------------------------------------

    def _publish(self) -> None:
        self._sync_all()
        pubs = publish_round(self.stations, self.rsus, self.now, cache=self.pull_like)
        self._log("publish", round=len(pubs))
        if self.mode is CommMode.PUSH:
            active = [ev for ev in self.evs if ev.mode is not Mode.STRANDED]
            positions = [position_after(ev, self.graph, self.now - ev.clock) for ev in active]
            for rsu in self.rsus:
                served = push_deliver(rsu, active, positions, pubs, self.now)
                self.obtain_info_count += len(served)
                for ev_id in served:
                    self._log("deliver", ev=ev_id, rsu=rsu.rsu_id)
        nxt = self.now + self.cfg.publication_interval
        if nxt < self.cfg.duration:
            self._push(nxt, PUBLISH, 0)

    def _update_contacts(self, ev: EvState, forced: Optional[int]) -> None:
        xy = ev.location.xy(self.graph)
        inside = {rsu.rsu_id for rsu in self.rsus if distance(rsu.position, xy) <= self.query_range}
        if forced is not None:
            inside.add(forced)
        before = self._contacts[ev.id]
        for rsu_id in before - inside:
            self.rsus[rsu_id].end_contact(ev.id)
        self._contacts[ev.id] = inside
        for rsu_id in sorted(inside - before):
            self._encounter(ev, self.rsus[rsu_id])

    def _encounter(self, ev: EvState, rsu: RsuState) -> None:
        if pull_query(ev, rsu, self.now):
            self.obtain_info_count += 1
            self._log("deliver", ev=ev.id, rsu=rsu.rsu_id)
        if self.mode is CommMode.ADVANCED_PULL and forward_reservation(ev, rsu, self.stations):
            self.reservations_forwarded += 1
            self._forwarded_token[ev.id] = ev.pending_reservation.entry.token
            self._log("reservation", ev=ev.id, rsu=rsu.rsu_id, cs=ev.pending_reservation.cs_id)

    # -- vehicles ------------------------------------------------------------

    def _decide(self, ev: EvState) -> None:
        if self.mode is CommMode.IDEAL:
            self._sync_all()
            info = ideal_query(self.stations, self.now)
        else:
            info = ev.info_map
        choice = select(self.policy, info, ev, self.graph, self.now)
        self.decisions += 1
        self.fallback_decisions += choice.fallback
        if choice.unreachable:
            self.event_counts["unreachable_decision"] += 1
        if len(info):
            if self.mode is not CommMode.IDEAL:
                self._sync_all()
            for cs_id in info:
                true_q = self.stations[cs_id].instantaneous_queuing_time()
                self.freshness_samples.append(abs(true_q - info.get(cs_id).instantaneous_queuing_time))
        ev.route = shortest_path(self.graph, ev.location, self.graph.cs_nodes[choice.cs_id])
        ev.route_pos = 0
        ev.set_mode(Mode.HEADING, choice.cs_id)
        self._log("decision", ev=ev.id, cs=choice.cs_id, fallback=choice.fallback)
        if self.mode is CommMode.ADVANCED_PULL:
            cs = self.stations[choice.cs_id]
            entry = make_reservation(ev, ev.route.length / ev.speed, cs.power, self.now, token=next(self._tokens))
            if entry is not None:
                ev.pending_reservation = PendingReservation(entry, choice.cs_id)
                for rsu_id in sorted(self._contacts[ev.id]):
                    self._encounter(ev, self.rsus[rsu_id])
                    break
        if not ev.route.nodes:
            advance(ev, self.graph, 0.0)

    def _arrive(self, ev: EvState) -> None:
        self._ev_version[ev.id] += 1
        cs = self.stations[ev.target_cs]
        self._log("arrive", ev=ev.id, cs=cs.cs_id)
        token = self._forwarded_token.pop(ev.id, None)
        events = cs.arrive(ev.id, ev.battery_max - ev.battery_cur, self.now, token)
        self._station_events(events)
        self._schedule_station(cs)

    def _ev_event(self, ev: EvState, kind: int, sub: int) -> None:
        advance(ev, self.graph, self.now - ev.clock)
        ev.clock = self.now
        if ev.mode is Mode.STRANDED:
            self._ev_version[ev.id] += 1
            self.stranded.add(ev.id)
            self._log("stranded", ev=ev.id)
            return
        if self.pull_like and self.rsus:
            self._update_contacts(ev, sub if kind == EV_CONTACT else None)
        if ev.mode is Mode.ROAMING and ev.battery_cur <= self.threshold_energy + _E_TOL:
            self._decide(ev)
        if ev.mode is Mode.WAITING:
            self._arrive(ev)
            return
        if ev.mode is Mode.ROAMING and ev.route_pos >= len(ev.route.nodes):
            self._new_trip(ev)
        self._schedule_ev(ev)

    # -- main loop -----------------------------------------------------------

    def run(self) -> MetricsReport:
        cfg = self.cfg
        if self.mode is not CommMode.IDEAL and cfg.publication_phase < cfg.duration:
            self._push(cfg.publication_phase, PUBLISH, 0)
        for ev in self.evs:
            self._push(0.0, EV_NODE, ev.id, 0, 0)
        while self._heap:
            time, kind, entity, sub, _, payload = heapq.heappop(self._heap)
            if time >= cfg.duration:
                break
            if kind == STATION:
                if payload != self._cs_version[entity]:
                    continue
                self.now = time
                self.event_counts[KIND_NAMES[kind]] += 1
                self._sync_station(self.stations[entity])
            elif kind == PUBLISH:
                self.now = time
                self.event_counts[KIND_NAMES[kind]] += 1
                self._publish()
            else:
                if payload != self._ev_version[entity]:
                    continue
                self.now = time
                self.event_counts[KIND_NAMES[kind]] += 1
                self._ev_event(self.evs[entity], kind, sub)
        return self._finish()

    def _finish(self) -> MetricsReport:
        self.now = self.cfg.duration
        for cs in self.stations:
            self._station_events(cs.advance_to(self.now))
        # charges still in progress at the horizon
        for ev_id, start in self._charge_start.items():
            ev = self.evs[ev_id]
            partial = min(ev.battery_max - ev.battery_cur, self.stations[ev.target_cs].power * (self.now - start))
            self.energy_received += partial

        def mean(xs):
            return float(np.mean(xs)) if xs else None

        return MetricsReport(
            run_index=self.run_index,
            seed_entropy=self.cfg.seed,
            average_waiting_time=mean(self.waiting_samples),
            average_queue_wait=mean(self.queue_wait_samples),
            obtain_info_count=self.obtain_info_count,
            average_information_freshness=mean(self.freshness_samples),
            utilization_kwh=[j_to_kwh(cs.energy_consumed) for cs in self.stations],
            charged_ev_count=self.charged_ev_count,
            stranded_count=len(self.stranded),
            decisions=self.decisions,
            fallback_decisions=self.fallback_decisions,
            reservations_forwarded=self.reservations_forwarded,
            energy_received_kwh=j_to_kwh(self.energy_received),
            event_counts=dict(sorted(self.event_counts.items())),
        )


def run(config: ScenarioConfig, run_index: int = 0, graph: Optional[RoadGraph] = None,
        trace: Optional[list] = None) -> MetricsReport:
    return Simulation(config, run_index, graph, trace).run()


def write_trace(trace: list, path) -> None:
    with open(path, "w") as fh:
        for record in trace:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
