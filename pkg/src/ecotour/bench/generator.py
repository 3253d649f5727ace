"""Synthetic instances shaped like urban delivery routes.

Arc energies are built as h_uv = base_uv + k * (phi_v - phi_u) with base_uv > 0,
so every cycle has positive total energy while a sizeable share of single arcs
(downhill ones) recover energy. All energies are multiples of 1/64 so sums are
exact in floating point.
"""
import math

import numpy as np

from ..errors import GenerationFailed, InvalidInstance
from ..netmodel import Instance, LineGraph, TimeWindowTable
from ..paths import find_negative_cycle, shortest_time_path, shortest_time

ENERGY_GRID = 64


def _dyadic(rng, lo, hi, size):
    return rng.integers(int(lo * ENERGY_GRID), int(hi * ENERGY_GRID) + 1, size=size) / ENERGY_GRID


def random_strong_digraph(rng, nodes, edges):
    """Random arc set on range(nodes) containing a Hamiltonian cycle, hence strongly connected."""
    if edges < nodes:
        raise InvalidInstance("need at least as many arcs as nodes")
    if edges > nodes * (nodes - 1):
        raise InvalidInstance("too many arcs for a simple digraph")
    order = [int(v) for v in rng.permutation(nodes)]
    arcs = {(order[k], order[(k + 1) % nodes]) for k in range(nodes)} if nodes > 1 else set()
    while len(arcs) < edges:
        u, v = (int(a) for a in rng.integers(0, nodes, size=2))
        if u != v:
            arcs.add((u, v))
    return sorted(arcs)


def gen_instance(nodes, edges, terminals, tw_tightness=1.0, seed=0, negative_share=0.35,
                 turn_prob=0.4, time_range=(5, 20), window_slack=(0.2, 1.0), open_start=False,
                 max_retries=20):
    """Random strongly connected instance with `terminals` terminals (depot included).

    Windows are centred on the arrival times of a random reference tour, so the
    untightened instance is feasible; `tw_tightness` then scales every window's
    span above its start.
    """
    if nodes < 1 or terminals < 1 or terminals > nodes or not 0 < tw_tightness:
        raise InvalidInstance("invalid generator parameters")
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        arcs = random_strong_digraph(rng, nodes, edges)
        m = len(arcs)
        base = _dyadic(rng, 0.25, 4.0, m)
        phi = _dyadic(rng, 0.0, 4.0, nodes)
        best = None
        for k in np.arange(0.25, 8.01, 0.25):
            h = np.array([base[n] + k * (phi[v] - phi[u]) for n, (u, v) in enumerate(arcs)])
            share = float(np.mean(h < 0))
            if best is None or abs(share - negative_share) < abs(best[0] - negative_share):
                best = (share, h)
        energy = best[1]
        turns = (rng.random(m) < turn_prob).astype(int)
        times = rng.integers(time_range[0], time_range[1] + 1, size=m).astype(float)
        arc_map = {uv: (int(turns[n]), float(energy[n]), float(times[n])) for n, uv in enumerate(arcs)}
        others = [int(v) for v in rng.choice(np.arange(1, nodes), size=terminals - 1, replace=False)]
        graph = LineGraph(range(nodes), arc_map, {0, *others}, check_cycles=False)
        if find_negative_cycle(graph, "energy") is not None:
            continue
        windows = _reference_windows(graph, rng, window_slack, open_start)
        if tw_tightness != 1.0:
            windows = tighten(windows, tw_tightness)
        meta = {"generator": "gen_instance", "seed": seed, "nodes": nodes, "edges": edges,
                "terminals": terminals, "tightness": tw_tightness}
        return Instance(LineGraph(graph.nodes, graph.arcs, graph.terminal_set), windows,
                        name=f"gen-n{nodes}-m{edges}-t{terminals}-s{seed}", meta=meta)
    raise GenerationFailed(f"no valid instance after {max_retries} attempts")


def _reference_windows(graph, rng, slack, open_start):
    order = [int(v) for v in rng.permutation([v for v in graph.terminals if v != graph.depot])]
    clock = 0.0
    prev = graph.depot
    arrival = {}
    for v in order:
        clock += shortest_time(graph, prev, v)
        arrival[v] = clock
        prev = v
    horizon = clock + shortest_time(graph, prev, graph.depot)
    # fastest paths may pass a terminal before its turn; starts must not exceed that first pass
    walk = reference_route(graph, order)
    first = {}
    clock = 0.0
    for a, b in zip(walk, walk[1:]):
        clock += graph.arcs[(a, b)].time
        first.setdefault(b, clock)
    windows = {}
    for v, a in arrival.items():
        width = float(rng.uniform(*slack)) * max(horizon, 1.0)
        start = 0.0 if open_start else max(0.0, math.floor(min(a, first[v]) - float(rng.uniform(0, 1)) * width))
        end = math.ceil(a + float(rng.uniform(0, 1)) * width)
        windows[v] = (start, float(end))
    return TimeWindowTable(windows)


def tighten(windows, factor):
    """Scale each window's span above its start: e' = s + factor * (e - s)."""
    out = {}
    for v, (s, e) in windows.items():
        out[v] = (s, e if math.isinf(e) else s + factor * (e - s))
    return TimeWindowTable(out)


def reference_route(graph, order):
    """Expand a terminal order into a closed walk with fastest paths."""
    walk = [graph.depot]
    for v in list(order) + [graph.depot]:
        walk.extend(shortest_time_path(graph, walk[-1], v)[1:])
    return tuple(walk)
