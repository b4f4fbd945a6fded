"""Road graph, shortest-path routing and vehicle movement.

Graph file format (whitespace-delimited, ``#`` starts a comment)::

    node <id> <x> <y>
    edge <id_u> <id_v> [length]
    poi <CS|RSU> <node_id>

Coordinates and lengths are meters; an edge without a length gets the
Euclidean distance between its end nodes.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .domain import ConfigurationError, EvState, Mode

EPS = 1e-9
ARRIVAL_EPS = 1e-6  # meters; snaps floating residue at node arrivals


class RoutingError(RuntimeError):
    pass


class GraphFormatError(ValueError):
    pass


@dataclass
class RoadGraph:
    coords: dict[int, tuple[float, float]]
    adjacency: dict[int, dict[int, float]]
    cs_nodes: list[int] = field(default_factory=list)
    rsu_nodes: list[int] = field(default_factory=list)

    def __post_init__(self):
        self._dist_cache: dict[int, dict[int, float]] = {}

    @classmethod
    def from_edges(cls, coords, edges, cs_nodes=(), rsu_nodes=()):
        adjacency = {n: {} for n in coords}
        for edge in edges:
            u, v = edge[0], edge[1]
            if u not in coords or v not in coords:
                raise GraphFormatError(f"edge {u}-{v} references an unknown node")
            if u == v:
                raise GraphFormatError(f"self loop at node {u}")
            length = edge[2] if len(edge) > 2 and edge[2] is not None else _euclid(coords[u], coords[v])
            if not length > 0:
                raise GraphFormatError(f"edge {u}-{v} has non-positive length")
            adjacency[u][v] = float(length)
            adjacency[v][u] = float(length)
        graph = cls(dict(coords), adjacency, list(cs_nodes), list(rsu_nodes))
        graph.validate()
        return graph

    @property
    def nodes(self) -> list[int]:
        return sorted(self.coords)

    def edge_length(self, u: int, v: int) -> float:
        return self.adjacency[u][v]

    def edges(self) -> list[tuple[int, int, float]]:
        return [(u, v, w) for u in sorted(self.adjacency) for v, w in sorted(self.adjacency[u].items()) if u < v]

    def validate(self) -> None:
        for node in list(self.cs_nodes) + list(self.rsu_nodes):
            if node not in self.coords:
                raise GraphFormatError(f"point of interest on unknown node {node}")
        if not self.coords:
            raise GraphFormatError("empty graph")
        start = next(iter(self.coords))
        if len(self.distances_to(start)) != len(self.coords):
            raise RoutingError("road graph is not connected")

    def distances_to(self, target: int) -> dict[int, float]:
        """Shortest road distance from every node to ``target`` (Dijkstra, cached)."""
        cached = self._dist_cache.get(target)
        if cached is not None:
            return cached
        dist = {target: 0.0}
        heap = [(0.0, target)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for v, w in self.adjacency[u].items():
                nd = d + w
                if nd < dist.get(v, math.inf):
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        self._dist_cache[target] = dist
        return dist

    def node_distance(self, a: int, b: int) -> float:
        return self.distances_to(b).get(a, math.inf)

    def xy(self, node: int) -> tuple[float, float]:
        return self.coords[node]


@dataclass(frozen=True)
class Location:
    """A point on the road graph: ``offset`` meters from ``u`` towards ``v``.

    A vehicle sitting on a node has ``u == v`` and offset 0.
    """

    u: int
    v: int
    offset: float = 0.0

    @classmethod
    def at(cls, node: int) -> "Location":
        return cls(node, node, 0.0)

    @property
    def on_node(self) -> bool:
        return self.u == self.v

    def xy(self, graph: RoadGraph) -> tuple[float, float]:
        if self.on_node:
            return graph.coords[self.u]
        (x0, y0), (x1, y1) = graph.coords[self.u], graph.coords[self.v]
        frac = self.offset / graph.edge_length(self.u, self.v)
        return (x0 + (x1 - x0) * frac, y0 + (y1 - y0) * frac)


@dataclass(frozen=True)
class Route:
    """Ordered nodes to visit after ``start``; ``length`` is the total in meters."""

    start: Location
    nodes: tuple[int, ...]
    length: float

    @property
    def target(self) -> Optional[int]:
        return self.nodes[-1] if self.nodes else (self.start.u if self.start.on_node else None)


def _euclid(a, b) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])


def distance(a, b) -> float:
    """Straight-line distance between two (x, y) points in meters."""
    return _euclid(a, b)


def _lexmin_path(graph: RoadGraph, source: int, target: int) -> list[int]:
    # Greedy on the distance-to-target field: picking the smallest admissible
    # successor at every step yields the lexicographically smallest shortest path.
    dist = graph.distances_to(target)
    if source not in dist:
        raise RoutingError(f"node {target} unreachable from {source}")
    path = [source]
    node = source
    while node != target:
        tol = EPS * max(1.0, dist[node])
        node = min(v for v, w in graph.adjacency[node].items() if abs(w + dist[v] - dist[node]) <= tol)
        path.append(node)
    return path


def shortest_path(graph: RoadGraph, start: Location, target: int) -> Route:
    if target not in graph.coords:
        raise RoutingError(f"unknown target node {target}")
    if start.on_node:
        path = _lexmin_path(graph, start.u, target)
        return Route(start, tuple(path[1:]), graph.node_distance(start.u, target))
    dist = graph.distances_to(target)
    edge_len = graph.edge_length(start.u, start.v)
    options = []
    for first, lead in ((start.u, start.offset), (start.v, edge_len - start.offset)):
        if first not in dist:
            raise RoutingError(f"node {target} unreachable")
        options.append((lead + dist[first], _lexmin_path(graph, first, target)))
    best = min(options[0][0], options[1][0])
    tol = EPS * max(1.0, best)
    candidates = [path for total, path in options if total - best <= tol]
    return Route(start, tuple(min(candidates)), best)


def route_length_from(graph: RoadGraph, start: Location, target: int) -> float:
    if start.on_node:
        return graph.node_distance(start.u, target)
    dist = graph.distances_to(target)
    edge_len = graph.edge_length(start.u, start.v)
    return min(start.offset + dist[start.u], edge_len - start.offset + dist[start.v])


def travel_time(route_or_length, speed: float) -> float:
    if not speed > 0:
        raise ConfigurationError(f"speed must be positive, got {speed}")
    length = route_or_length.length if isinstance(route_or_length, Route) else route_or_length
    return length / speed


def distance_to_next_node(ev: EvState, graph: RoadGraph) -> float:
    """Meters from the vehicle's location to the next node of its route (0 if route done)."""
    route = ev.route
    if route is None or ev.route_pos >= len(route.nodes):
        return 0.0
    nxt = route.nodes[ev.route_pos]
    loc = ev.location
    if loc.on_node:
        return graph.edge_length(loc.u, nxt)
    if nxt == loc.v:
        return graph.edge_length(loc.u, loc.v) - loc.offset
    return loc.offset


def remaining_route_length(ev: EvState, graph: RoadGraph) -> float:
    route = ev.route
    if route is None or ev.route_pos >= len(route.nodes):
        return 0.0
    total = distance_to_next_node(ev, graph)
    nodes = route.nodes
    for a, b in zip(nodes[ev.route_pos:], nodes[ev.route_pos + 1:]):
        total += graph.edge_length(a, b)
    return total


def _step_towards(loc: Location, nxt: int, meters: float, graph: RoadGraph) -> Location:
    if loc.on_node:
        return Location(loc.u, nxt, meters)
    if nxt == loc.v:
        return Location(loc.u, loc.v, loc.offset + meters)
    return Location(loc.u, loc.v, loc.offset - meters)


def advance(ev: EvState, graph: RoadGraph, dt: float) -> EvState:
    """Move ``ev`` along its route for ``dt`` seconds, drawing energy per meter.

    Stops at the end of the route. A heading vehicle reaching its station
    switches to WAITING; a vehicle whose battery runs out halts as STRANDED.
    The leftover time after either event is the caller's to schedule.
    """
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if ev.mode not in (Mode.ROAMING, Mode.HEADING):
        ev.clock += dt
        return ev
    budget = ev.speed * dt
    alpha = ev.consumption_rate
    route = ev.route
    while budget > 0 and route is not None and ev.route_pos < len(route.nodes):
        to_next = distance_to_next_node(ev, graph)
        energy_left_m = ev.battery_cur / alpha if alpha > 0 else math.inf
        step = min(budget, to_next, energy_left_m)
        if to_next - step <= ARRIVAL_EPS and energy_left_m >= to_next - ARRIVAL_EPS:
            step = to_next
            ev.location = Location.at(route.nodes[ev.route_pos])
            ev.route_pos += 1
        else:
            ev.location = _step_towards(ev.location, route.nodes[ev.route_pos], step, graph)
        ev.battery_cur = max(0.0, ev.battery_cur - alpha * step)
        budget -= step
        if ev.battery_cur <= 0 and (ev.route_pos < len(route.nodes) or ev.mode is Mode.ROAMING):
            ev.set_mode(Mode.STRANDED)
            break
    ev.clock += dt
    if ev.mode is Mode.HEADING and route is not None and ev.route_pos >= len(route.nodes):
        ev.set_mode(Mode.WAITING)
    return ev


def position_after(ev: EvState, graph: RoadGraph, seconds: float) -> tuple[float, float]:
    """Coordinates after ``seconds`` more of movement, without mutating ``ev``.

    Only valid while the vehicle stays on its current edge.
    """
    loc = ev.location
    if ev.mode not in (Mode.ROAMING, Mode.HEADING) or ev.route is None or ev.route_pos >= len(ev.route.nodes):
        return loc.xy(graph)
    nxt = ev.route.nodes[ev.route_pos]
    moved = min(ev.speed * seconds, distance_to_next_node(ev, graph))
    return _step_towards(loc, nxt, moved, graph).xy(graph)


def disk_entry_time(p0, p1, speed: float, center, radius: float) -> Optional[float]:
    """Seconds until a point moving from ``p0`` to ``p1`` first enters a disk.

    Returns 0 if ``p0`` is already inside, None if the segment misses it.
    """
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    fx, fy = p0[0] - center[0], p0[1] - center[1]
    c = fx * fx + fy * fy - radius * radius
    if c <= 0:
        return 0.0
    seg = math.hypot(dx, dy)
    if seg == 0:
        return None
    ux, uy = dx / seg, dy / seg
    b = fx * ux + fy * uy
    disc = b * b - c
    if disc < 0 or b >= 0:
        return None
    s = -b - math.sqrt(disc)
    if s > seg:
        return None
    return s / speed


# ---- graph files and synthetic maps ---------------------------------------

def load_graph(path) -> RoadGraph:
    coords, edges, cs, rsu = {}, [], [], []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            kind = parts[0]
            if kind == "node" and len(parts) == 4:
                coords[int(parts[1])] = (float(parts[2]), float(parts[3]))
            elif kind == "edge" and len(parts) in (3, 4):
                edges.append((int(parts[1]), int(parts[2]), float(parts[3]) if len(parts) == 4 else None))
            elif kind == "poi" and len(parts) == 3 and parts[1].upper() in ("CS", "RSU"):
                (cs if parts[1].upper() == "CS" else rsu).append(int(parts[2]))
            else:
                raise GraphFormatError(f"line {lineno}: cannot parse {raw!r}")
        except ValueError as exc:
            if isinstance(exc, GraphFormatError):
                raise
            raise GraphFormatError(f"line {lineno}: {exc}") from exc
    return RoadGraph.from_edges(coords, edges, cs, rsu)


def _num(value: float) -> str:
    """Shortest text that parses back to the same float."""
    value = float(value)
    return str(int(value)) if value.is_integer() else repr(value)


def dump_graph(graph: RoadGraph) -> str:
    lines = ["# road graph: node <id> <x> <y> / edge <u> <v> [length] / poi <CS|RSU> <node>"]
    lines += [f"node {n} {_num(x)} {_num(y)}" for n, (x, y) in sorted(graph.coords.items())]
    lines += [f"edge {u} {v} {_num(w)}" for u, v, w in graph.edges()]
    lines += [f"poi CS {n}" for n in graph.cs_nodes]
    lines += [f"poi RSU {n}" for n in graph.rsu_nodes]
    return "\n".join(lines) + "\n"


def grid_graph(width: int, height: int, spacing: float) -> RoadGraph:
    """``width`` x ``height`` nodes on a square lattice, row-major ids."""
    if width < 1 or height < 1 or width * height < 2:
        raise ConfigurationError("grid needs at least two nodes")
    if not spacing > 0:
        raise ConfigurationError("grid spacing must be positive")
    coords = {r * width + c: (c * spacing, r * spacing) for r in range(height) for c in range(width)}
    edges = []
    for r in range(height):
        for c in range(width):
            n = r * width + c
            if c + 1 < width:
                edges.append((n, n + 1, spacing))
            if r + 1 < height:
                edges.append((n, n + width, spacing))
    return RoadGraph.from_edges(coords, edges)


def place_points(graph: RoadGraph, cs_count: int, rsu_count: int, seed: int,
                 cs_nodes: Sequence[int] = (), rsu_nodes: Sequence[int] = ()) -> RoadGraph:
    """Assign CS and RSU nodes, filling unspecified ones by a seeded permutation.

    All points land on distinct nodes. For a fixed seed, a smaller
    ``rsu_count`` selects a prefix of the larger placement.
    """
    fixed = list(cs_nodes) + list(rsu_nodes)
    free = [n for n in graph.nodes if n not in fixed]
    order = [free[i] for i in np.random.default_rng(seed).permutation(len(free))]
    need_cs = max(0, cs_count - len(cs_nodes))
    need_rsu = max(0, rsu_count - len(rsu_nodes))
    if need_cs + need_rsu > len(order):
        raise ConfigurationError("not enough nodes for the requested stations and RSUs")
    # Stations draw from the front and RSUs from the back, so changing one
    # count never moves the other kind.
    cs = list(cs_nodes)[:cs_count] + order[:need_cs]
    rsu = list(rsu_nodes)[:rsu_count] + order[::-1][:need_rsu]
    out = RoadGraph(graph.coords, graph.adjacency, cs, rsu)
    out.validate()
    return out


def generate_grid(width: int, height: int, spacing: float, cs_count: int, rsu_count: int,
                  seed: int = 0) -> RoadGraph:
    return place_points(grid_graph(width, height, spacing), cs_count, rsu_count, seed)


def iter_paths(graph: RoadGraph, source: int, target: int) -> Iterable[list[int]]:
    """All simple paths, for brute-force checks on small graphs."""
    stack = [(source, [source])]
    while stack:
        node, path = stack.pop()
        if node == target:
            yield path
            continue
        for nxt in graph.adjacency[node]:
            if nxt not in path:
                stack.append((nxt, path + [nxt]))
