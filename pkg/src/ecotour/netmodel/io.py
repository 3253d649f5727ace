"""JSON instance files.

Two versioned schemas are understood, told apart by their "format" field:

``ecotour/line-graph/1``
    {"depot": 0, "nodes": [...], "arcs": [{"tail", "head", "turns", "energy", "time"}],
     "terminals": [{"id", "start", "end"}], "energy_unit": "kWh" | "J"}

``ecotour/road-network/1``
    {"nodes": [{"id", "lat", "lon", "elevation"}],
     "edges": [{"id", "tail", "head", "length", "speed", "bearing", ...}],
     "terminal_edges": [...], "depot_edge": id, "windows": {"edge id": [start, end]},
     "bearing_convention": "ccw" | "compass", "turn_threshold": 45, "energy_params": {...}}

A window end of null means "no deadline".
"""
import json
import math
from dataclasses import dataclass, field

from ..errors import InvalidInstance, ParseError
from .energy import JOULES_PER_KWH, EnergyParams
from .graph import LineGraph, RoadEdge, RoadNetwork, TimeWindowTable, build_line_graph, compass_to_ccw

LINE_GRAPH_FORMAT = "ecotour/line-graph/1"
ROAD_NETWORK_FORMAT = "ecotour/road-network/1"


@dataclass
class Instance:
    graph: LineGraph
    windows: TimeWindowTable
    name: str = ""
    revisit_cap: int | None = None
    meta: dict = field(default_factory=dict)


def _end(value):
    return math.inf if value is None else float(value)


def _require(obj, key, where):
    try:
        return obj[key]
    except (KeyError, TypeError):
        raise ParseError(f"missing field '{key}' in {where}") from None


def line_graph_from_dict(data, name=""):
    scale = 1.0
    unit = data.get("energy_unit", "kWh")
    if unit == "J":
        scale = 1.0 / JOULES_PER_KWH
    elif unit != "kWh":
        raise ParseError(f"unknown energy unit {unit!r}")
    arcs = {}
    for k, a in enumerate(_require(data, "arcs", "instance")):
        where = f"arc #{k}"
        key = (int(_require(a, "tail", where)), int(_require(a, "head", where)))
        arcs[key] = (int(_require(a, "turns", where)), float(_require(a, "energy", where)) * scale,
                     float(_require(a, "time", where)))
    windows = {}
    terminals = []
    for k, t in enumerate(_require(data, "terminals", "instance")):
        v = int(_require(t, "id", f"terminal #{k}"))
        terminals.append(v)
        windows[v] = (float(t.get("start", 0.0)), _end(t.get("end")))
    nodes = data.get("nodes")
    if nodes is None:
        nodes = sorted({u for uv in arcs for u in uv} | set(terminals))
    graph = LineGraph(nodes, arcs, terminals, depot=int(data.get("depot", 0)))
    return Instance(graph, TimeWindowTable(windows), name=data.get("name", name),
                    revisit_cap=data.get("revisit_cap"), meta=dict(data.get("meta", {})))


def line_graph_to_dict(instance):
    g, tw = instance.graph, instance.windows
    terminals = []
    for v in g.terminals:
        s, e = tw.window(v)
        terminals.append({"id": v, "start": s, "end": None if math.isinf(e) else e})
    data = {
        "format": LINE_GRAPH_FORMAT,
        "name": instance.name,
        "depot": g.depot,
        "energy_unit": "kWh",
        "nodes": list(g.nodes),
        "arcs": [{"tail": u, "head": v, "turns": a.turns, "energy": a.energy, "time": a.time}
                 for (u, v), a in sorted(g.arcs.items())],
        "terminals": terminals,
    }
    if instance.revisit_cap is not None:
        data["revisit_cap"] = instance.revisit_cap
    if instance.meta:
        data["meta"] = instance.meta
    return data


def road_network_from_dict(data):
    convention = data.get("bearing_convention", "ccw")
    if convention not in ("ccw", "compass"):
        raise ParseError(f"unknown bearing convention {convention!r}")
    nodes = {}
    for k, n in enumerate(data.get("nodes", [])):
        nodes[int(_require(n, "id", f"node #{k}"))] = n
    edges = []
    for k, e in enumerate(_require(data, "edges", "road network")):
        where = f"edge #{k}"
        tail, head = int(_require(e, "tail", where)), int(_require(e, "head", where))
        length = float(_require(e, "length", where))
        gradient = e.get("gradient")
        if gradient is None:
            zt = nodes.get(tail, {}).get("elevation")
            zh = nodes.get(head, {}).get("elevation")
            if zt is not None and zh is not None and length > 0:
                gradient = math.asin(max(-1.0, min(1.0, (zh - zt) / length)))
            else:
                gradient = 0.0
        bearing = float(e.get("bearing", 0.0))
        if convention == "compass":
            bearing = compass_to_ccw(bearing)
        edges.append(RoadEdge(
            id=int(_require(e, "id", where)), tail=tail, head=head, length=length,
            speed=float(_require(e, "speed", where)), gradient=float(gradient), bearing=bearing,
            energy=e.get("energy"), travel_time=e.get("travel_time")))
    windows = {int(k): (float(w[0]), _end(w[1])) for k, w in data.get("windows", {}).items()}
    return RoadNetwork(nodes=nodes, edges=tuple(edges),
                       terminal_edges=frozenset(int(t) for t in _require(data, "terminal_edges", "road network")),
                       depot_edge=int(_require(data, "depot_edge", "road network")), windows=windows)


def load_instance(path):
    """Read a JSON instance file of either schema into a line-graph Instance."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, path=str(path)) from None
    if not isinstance(data, dict):
        raise ParseError("top level must be an object", path=str(path))
    fmt = data.get("format")
    name = str(path)
    try:
        if fmt == LINE_GRAPH_FORMAT:
            return line_graph_from_dict(data, name=name)
        if fmt == ROAD_NETWORK_FORMAT:
            net = road_network_from_dict(data)
            params = EnergyParams(**data.get("energy_params", {}))
            graph, windows = build_line_graph(net, float(data.get("turn_threshold", 45.0)), params)
            return Instance(graph, windows, name=data.get("name", name), revisit_cap=data.get("revisit_cap"))
    except (TypeError, ValueError) as exc:
        raise InvalidInstance(f"{path}: {exc}") from None
    raise ParseError(f"unknown or missing format {fmt!r}", path=str(path))


def save_instance(instance, path):
    with open(path, "w") as fh:
        json.dump(line_graph_to_dict(instance), fh, indent=1)
