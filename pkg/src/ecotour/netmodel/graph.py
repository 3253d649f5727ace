import math
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import NamedTuple

from ..errors import InvalidInstance
from .energy import EnergyParams, edge_energy


class Arc(NamedTuple):
    turns: int
    energy: float
    time: float


class Turn(Enum):
    LEFT = "left"
    RIGHT = "right"
    STRAIGHT = "straight"


def classify_turn(bearing_in, bearing_out, threshold=45.0):
    """Classify the manoeuvre between two headings given counter-clockwise in degrees.

    The signed difference is normalised to (-180, 180]. A difference of exactly
    +-threshold already counts as a turn.
    """
    delta = (bearing_out - bearing_in) % 360.0
    if delta > 180.0:
        delta -= 360.0
    if delta >= threshold:
        return Turn.LEFT
    if delta <= -threshold:
        return Turn.RIGHT
    return Turn.STRAIGHT


def is_conflicting_left(degree_in, degree_out):
    """A left turn conflicts with other traffic when the junction has 2+ in or out arcs."""
    return degree_in >= 2 or degree_out >= 2


def compass_to_ccw(bearing):
    """Convert a compass bearing (clockwise from north) to counter-clockwise from east."""
    return (90.0 - bearing) % 360.0


class LineGraph:
    """Directed graph whose nodes are road segments and whose arcs are turning movements.

    Every arc carries (turns, energy, time). Immutable after construction.
    """

    __slots__ = ("nodes", "arcs", "succ", "pred", "terminals", "terminal_set",
                 "depot", "origin", "_index", "__weakref__")

    def __init__(self, nodes, arcs, terminals, depot=0, origin=None, check_cycles=True):
        nodes = tuple(sorted(set(nodes)))
        node_set = set(nodes)
        clean = {}
        for (u, v), arc in arcs.items():
            if u not in node_set or v not in node_set:
                raise InvalidInstance(f"arc ({u}, {v}) references an unknown node")
            if u == v:
                raise InvalidInstance(f"self loop at node {u}")
            arc = Arc(int(arc[0]), float(arc[1]), float(arc[2]))
            if arc.turns < 0:
                raise InvalidInstance(f"arc ({u}, {v}) has negative turn count")
            if not arc.time >= 0:
                raise InvalidInstance(f"arc ({u}, {v}) has negative travel time")
            if not math.isfinite(arc.energy):
                raise InvalidInstance(f"arc ({u}, {v}) has non-finite energy")
            clean[(u, v)] = arc
        terminal_set = frozenset(terminals)
        if depot not in terminal_set:
            raise InvalidInstance("depot must be a terminal")
        if not terminal_set <= node_set:
            raise InvalidInstance("every terminal must be a node")
        succ = {u: [] for u in nodes}
        pred = {u: [] for u in nodes}
        for u, v in sorted(clean):
            succ[u].append(v)
            pred[v].append(u)
        self.nodes = nodes
        self.arcs = MappingProxyType(clean)
        self.succ = MappingProxyType({u: tuple(vs) for u, vs in succ.items()})
        self.pred = MappingProxyType({u: tuple(vs) for u, vs in pred.items()})
        self.depot = depot
        self.terminal_set = terminal_set
        self.terminals = (depot,) + tuple(sorted(terminal_set - {depot}))
        self.origin = MappingProxyType(dict(origin)) if origin else None
        self._index = {u: i for i, u in enumerate(nodes)}
        if check_cycles:
            from ..paths import find_negative_cycle
            cycle = find_negative_cycle(self, "energy")
            if cycle is not None:
                from ..errors import NegativeCycle
                raise NegativeCycle(cycle, f"negative-energy cycle through nodes {cycle}")

    @property
    def n_terminals(self):
        return len(self.terminal_set)

    def index(self, u):
        return self._index[u]

    def arc(self, u, v):
        return self.arcs[(u, v)]

    def has_arc(self, u, v):
        return (u, v) in self.arcs

    def is_terminal(self, v):
        return v in self.terminal_set

    def max_time(self):
        return max((a.time for a in self.arcs.values()), default=0.0)

    def with_arcs(self, changes, check_cycles=True):
        """Copy with some arcs replaced, given as {(u, v): (turns, energy, time)}."""
        arcs = dict(self.arcs)
        arcs.update(changes)
        return LineGraph(self.nodes, arcs, self.terminal_set, self.depot, self.origin, check_cycles)

    def __repr__(self):
        return f"LineGraph(nodes={len(self.nodes)}, arcs={len(self.arcs)}, terminals={self.n_terminals})"


class TimeWindowTable:
    """Service windows [start, end] in seconds after leaving the depot.

    Nodes without an entry are unconstrained, i.e. [0, inf).
    """

    __slots__ = ("_windows",)

    def __init__(self, windows=None):
        clean = {}
        for v, (s, e) in (windows or {}).items():
            s, e = float(s), float(e)
            if not (0 <= s <= e):
                raise InvalidInstance(f"window of node {v} must satisfy 0 <= s <= e, got [{s}, {e}]")
            clean[v] = (s, e)
        self._windows = MappingProxyType(clean)

    def window(self, v):
        return self._windows.get(v, (0.0, math.inf))

    def start(self, v):
        return self.window(v)[0]

    def end(self, v):
        return self.window(v)[1]

    def items(self):
        return self._windows.items()

    def as_dict(self):
        return dict(self._windows)

    def replace(self, changes):
        merged = dict(self._windows)
        merged.update(changes)
        return TimeWindowTable(merged)

    def _constrained(self):
        return {v: w for v, w in self._windows.items() if w != (0.0, math.inf)}

    def __eq__(self, other):
        # an explicit [0, inf) entry means the same as no entry
        return isinstance(other, TimeWindowTable) and self._constrained() == other._constrained()

    def __repr__(self):
        return f"TimeWindowTable({dict(self._windows)})"


@dataclass(frozen=True)
class RoadEdge:
    id: int
    tail: int
    head: int
    length: float
    speed: float
    gradient: float = 0.0
    bearing: float = 0.0
    energy: float | None = None       # kWh, derived from the force model when missing
    travel_time: float | None = None  # s, length / speed when missing


@dataclass(frozen=True)
class RoadNetwork:
    nodes: dict
    edges: tuple
    terminal_edges: frozenset
    depot_edge: int
    windows: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise InvalidInstance("duplicate road edge ids")
        known = set(ids)
        if self.depot_edge not in self.terminal_edges:
            raise InvalidInstance("depot edge must be a terminal edge")
        missing = set(self.terminal_edges) - known
        if missing:
            raise InvalidInstance(f"terminal edges {sorted(missing)} do not exist")
        for e in self.edges:
            if not e.length > 0:
                raise InvalidInstance(f"edge {e.id} must have positive length")
            if not e.speed > 0:
                raise InvalidInstance(f"edge {e.id} must have positive speed")


def build_line_graph(net, threshold=45.0, params=None, count_all_lefts=False):
    """Turn a road network into its line graph and matching time windows.

    The depot edge becomes node 0, the remaining edges keep their input order.
    Arc energy and time are the averages of the two joined segments; an arc
    counts one turn when it is a left turn at a junction with conflicting traffic
    (or any left turn when `count_all_lefts`).
    """
    params = params or EnergyParams()
    order = [net.depot_edge] + [e.id for e in net.edges if e.id != net.depot_edge]
    node_of = {eid: i for i, eid in enumerate(order)}
    by_id = {e.id: e for e in net.edges}

    energy = {}
    time = {}
    for e in net.edges:
        energy[e.id] = e.energy if e.energy is not None else edge_energy(e.length, params, e.speed, e.gradient)
        time[e.id] = e.travel_time if e.travel_time is not None else e.length / e.speed

    into, out_of = {}, {}
    for e in net.edges:
        into.setdefault(e.head, []).append(e.id)
        out_of.setdefault(e.tail, []).append(e.id)

    arcs = {}
    for a in net.edges:
        for bid in out_of.get(a.head, ()):
            b = by_id[bid]
            if b.id == a.id:
                continue
            left = classify_turn(a.bearing, b.bearing, threshold) is Turn.LEFT
            conflict = is_conflicting_left(len(into.get(a.head, ())), len(out_of.get(a.head, ())))
            turns = int(left and (conflict or count_all_lefts))
            arcs[(node_of[a.id], node_of[b.id])] = Arc(
                turns, 0.5 * (energy[a.id] + energy[b.id]), 0.5 * (time[a.id] + time[b.id]))

    terminals = {node_of[t] for t in net.terminal_edges}
    origin = {node_of[eid]: eid for eid in order}
    graph = LineGraph(range(len(order)), arcs, terminals, depot=0, origin=origin)
    windows = TimeWindowTable({node_of[eid]: w for eid, w in net.windows.items()})
    return graph, windows
