"""Exhaustive reference solvers for tiny instances."""
import itertools
import math
import time

from ..errors import InstanceTooLarge
from ..netmodel import ParetoArchive, evaluate_tour
from ..paths import completion_bounds, shortest_time_tree

SERVICE_MODES = ("first", "any")


def _check_size(graph, cap, max_nodes, max_terminals, max_cap):
    if len(graph.nodes) > max_nodes:
        raise InstanceTooLarge(f"{len(graph.nodes)} nodes exceeds the enumerator limit of {max_nodes}")
    if graph.n_terminals > max_terminals:
        raise InstanceTooLarge(f"{graph.n_terminals} terminals exceeds the enumerator limit of {max_terminals}")
    if cap > max_cap:
        raise InstanceTooLarge(f"revisit cap {cap} exceeds the enumerator limit of {max_cap}")


class _Entry:
    __slots__ = ("cost", "nodes")

    def __init__(self, cost, nodes):
        self.cost = cost
        self.nodes = nodes


def _finish(graph, windows, archive):
    return [evaluate_tour(e.nodes, graph, windows) if graph.n_terminals else e for e in archive]


def brute_force_pareto(graph, windows, revisit_cap=None, service="first", prune=True,
                       max_nodes=14, max_terminals=5, max_cap=3, time_limit=None):
    """Exact Pareto set of on-time tours by depth-first enumeration of closed walks.

    Every node may appear at most `revisit_cap` times (the closing return to the
    depot is not counted). With service="first" a terminal is served on its first
    visit; with service="any" each visit may serve or pass. Waiting happens only
    at the serving visit. Pruning uses sound completion bounds to the depot and
    fastest-arrival deadline checks; `prune=False` turns both off.
    Returns Tours sorted by turns.
    """
    if service not in SERVICE_MODES:
        raise ValueError(f"service must be one of {SERVICE_MODES}")
    cap = revisit_cap if revisit_cap is not None else min(graph.n_terminals, max_cap)
    _check_size(graph, cap, max_nodes, max_terminals, max_cap)
    deadline = None if time_limit is None else time.monotonic() + time_limit
    depot = graph.depot
    terms = list(graph.terminals)
    bit = {v: 1 << k for k, v in enumerate(terms)}
    full = (1 << len(terms)) - 1
    win = {v: windows.window(v) for v in terms}
    succ = graph.succ
    arcs = graph.arcs
    bounds = completion_bounds(graph, depot) if prune else None
    fastest = {u: shortest_time_tree(graph, u) for u in graph.nodes} if prune else None
    archive = ParetoArchive()
    counts = {v: 0 for v in graph.nodes}
    path = [depot]
    steps = 0

    def late(u, clock, served):
        tree = fastest[u]
        for v in terms:
            if not served & bit[v]:
                if v not in tree or clock + tree[v][0] > win[v][1]:
                    return True
        return False

    def visit(u, clock, turns, energy, served):
        nonlocal steps
        steps += 1
        if deadline is not None and steps % 4096 == 0 and time.monotonic() > deadline:
            raise TimeoutError("enumeration time limit reached")
        if prune:
            b = bounds.get(u)
            if b is None or archive.is_dominated((turns + b[0], energy + b[1])):
                return
            if late(u, clock, served):
                return
        for v in succ[u]:
            a = arcs[(u, v)]
            nt, ne, nc = turns + a.turns, energy + a.energy, clock + a.time
            if v == depot and served == full:
                path.append(v)
                archive.add(_Entry((nt, ne), tuple(path)))
                path.pop()
                continue
            if counts[v] >= cap:
                continue
            counts[v] += 1
            path.append(v)
            if v in bit and not served & bit[v]:
                s, e = win[v]
                if nc <= e:
                    visit(v, max(nc, s), nt, ne, served | bit[v])
                if service == "any":
                    visit(v, nc, nt, ne, served)
            else:
                visit(v, nc, nt, ne, served)
            path.pop()
            counts[v] -= 1

    counts[depot] = 1
    s0, e0 = win[depot]
    if e0 >= 0:
        visit(depot, max(0.0, s0), 0, 0.0, bit[depot])
    return _finish(graph, windows, archive)


def _simple_paths(graph, src, dst, forbidden):
    """All simple paths src -> dst whose interior avoids `forbidden`."""
    out = []
    stack = [(src, (src,))]
    while stack:
        u, p = stack.pop()
        for v in graph.succ[u]:
            if v == dst:
                out.append(p + (v,))
            elif v not in p and v not in forbidden:
                stack.append((v, p + (v,)))
    return out


def enumerate_by_permutation(graph, windows, revisit_cap=None, service="first", max_terminals=4):
    """Second, independent reference: terminal service orders times simple connecting paths.

    Optimal tours can always be written as simple paths between consecutive
    service events (removing a cycle never raises cost or delays arrival), so
    enumerating these gives the same Pareto costs as the walk enumerator.
    """
    if graph.n_terminals > max_terminals:
        raise InstanceTooLarge("too many terminals for permutation enumeration")
    cap = revisit_cap if revisit_cap is not None else graph.n_terminals
    depot = graph.depot
    others = [v for v in graph.terminals if v != depot]
    archive = ParetoArchive()
    seg_cache = {}

    def segments(a, b, pending):
        key = (a, b, pending if service == "first" else None)
        if key not in seg_cache:
            forbid = set(pending) if service == "first" else set()
            forbid.discard(b)
            seg_cache[key] = _simple_paths(graph, a, b, forbid)
        return seg_cache[key]

    def cost_of(seq):
        t = e = c = 0
        for u, v in zip(seq, seq[1:]):
            arc = graph.arcs[(u, v)]
            t += arc.turns
            e += arc.energy
            c += arc.time
        return t, e, c

    def rec(order, k, walk, clock, turns, energy):
        if k == len(order):
            for seg in segments(walk[-1], depot, frozenset()):
                full = walk + list(seg[1:])
                if _within_cap(full, cap):
                    t, e, _ = cost_of(seg)
                    archive.add(_Entry((turns + t, energy + e), tuple(full)))
            return
        target = order[k]
        pending = frozenset(order[k:])
        for seg in segments(walk[-1], target, pending):
            t, e, c = cost_of(seg)
            arrive = clock + c
            s, end = windows.window(target)
            if arrive > end:
                continue
            full = walk + list(seg[1:])
            if not _within_cap(full, cap):
                continue
            rec(order, k + 1, full, max(arrive, s), turns + t, energy + e)

    s0 = windows.start(depot)
    for order in itertools.permutations(others):
        rec(list(order), 0, [depot], max(0.0, s0), 0, 0.0)
    return _finish(graph, windows, archive)


def _within_cap(walk, cap):
    counts = {}
    for v in walk[:-1] if len(walk) > 1 and walk[-1] == walk[0] else walk:
        counts[v] = counts.get(v, 0) + 1
        if counts[v] > cap:
            return False
    return True


def exists_feasible_tour(graph, windows, time_limit=None):
    """Search for a tour meeting every window under first-visit service.

    Depth-first over terminal orders joined by fastest paths, simulating the
    clock along each path so that terminals passed on the way are served (and
    waited for) where they are first reached. A positive answer is certified by
    re-evaluating the walk. A negative answer is exact when fastest paths between
    terminals pass no other terminal, as on complete graphs obeying the triangle
    inequality. Returns (found, walk) where walk is the certified closed walk.
    """
    depot = graph.depot
    arcs = graph.arcs
    trees = {}
    deadline = None if time_limit is None else time.monotonic() + time_limit

    def tree(u):
        if u not in trees:
            trees[u] = shortest_time_tree(graph, u)
        return trees[u]

    def travel(path, clock, served):
        """Clock and newly served terminals after following `path`, or None if some is late."""
        served = set(served)
        for a, b in zip(path, path[1:]):
            clock += arcs[(a, b)].time
            if b in graph.terminal_set and b not in served:
                s, e = windows.window(b)
                if clock > e:
                    return None
                clock = max(clock, s)
                served.add(b)
        return clock, frozenset(served)

    def rec(u, clock, served, walk):
        if deadline is not None and time.monotonic() > deadline:
            raise TimeoutError("feasibility search time limit reached")
        remaining = graph.terminal_set - served
        t = tree(u)
        if not remaining:
            return walk + t[depot][1][1:] if depot in t else None
        for v in remaining:
            if v not in t or clock + t[v][0] > windows.end(v):
                return None
        for v in sorted(remaining, key=lambda v: (windows.end(v), v)):
            path = t[v][1]
            step = travel(path, clock, served)
            if step is None:
                continue
            found = rec(v, step[0], step[1], walk + path[1:])
            if found is not None:
                return found
        return None

    s0, e0 = windows.window(depot)
    walk = rec(depot, max(0.0, s0), frozenset({depot}), (depot,))
    if walk is None:
        return False, None
    tour = evaluate_tour(walk, graph, windows)
    if tour.penalty > 0:
        raise AssertionError(f"feasibility certificate failed for {walk}")
    return True, walk


def min_cost(tours, alpha, beta):
    return min((alpha * t.cost.turns + beta * t.cost.energy for t in tours), default=math.inf)
