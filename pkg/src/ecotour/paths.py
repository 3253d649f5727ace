"""Shortest paths on the line graph.

Single-objective queries use Johnson's method (Bellman-Ford potentials, then
Dijkstra) because arc energies can be negative. Bi-objective queries use a
label-correcting search over (turns, energy) labels; label-setting would rely on
non-negative weights, which regenerative braking breaks.
"""
import heapq
import math
import threading
import time
import weakref
from collections import deque
from typing import NamedTuple

from .errors import NegativeCycle, Unreachable

TIME_TIE_DIGITS = 6


def weight_function(weight):
    """Map a weight spec to a function of an Arc.

    `weight` is "energy", "turns", "time" or an (alpha, beta) pair meaning
    alpha * turns + beta * energy.
    """
    if weight == "energy":
        return lambda a: a.energy
    if weight == "turns":
        return lambda a: a.turns
    if weight == "time":
        return lambda a: a.time
    alpha, beta = weight
    return lambda a: alpha * a.turns + beta * a.energy


def find_negative_cycle(graph, weight="energy"):
    """Return the nodes of some negative cycle, or None. Bellman-Ford from a virtual source."""
    w = weight_function(weight)
    dist = {u: 0.0 for u in graph.nodes}
    pred = {u: None for u in graph.nodes}
    arcs = [(u, v, w(a)) for (u, v), a in graph.arcs.items()]
    changed = None
    for _ in range(len(graph.nodes)):
        changed = None
        for u, v, c in arcs:
            nd = dist[u] + c
            if nd < dist[v] and dist[v] - nd > 1e-12 * max(1.0, abs(nd)):
                dist[v] = nd
                pred[v] = u
                changed = v
        if changed is None:
            return None
    x = changed
    for _ in range(len(graph.nodes)):
        x = pred[x]
    cycle = [x]
    y = pred[x]
    while y != x:
        cycle.append(y)
        y = pred[y]
    cycle.reverse()
    return cycle


def bellman_ford_potentials(graph, weight="energy"):
    """Potentials phi with w(u, v) + phi(u) - phi(v) >= 0 for every arc."""
    w = weight_function(weight)
    dist = {u: 0.0 for u in graph.nodes}
    arcs = [(u, v, w(a)) for (u, v), a in graph.arcs.items()]
    for _ in range(len(graph.nodes)):
        changed = False
        for u, v, c in arcs:
            nd = dist[u] + c
            if nd < dist[v]:
                dist[v] = nd
                changed = True
        if not changed:
            return dist
    cycle = find_negative_cycle(graph, weight)
    if cycle is None:  # only rounding noise kept relaxing
        return dist
    raise NegativeCycle(cycle)


def dijkstra(graph, src, weight, reverse=False):
    """Plain Dijkstra for non-negative weights. Returns (dist, pred) dicts."""
    w = weight_function(weight) if not callable(weight) else weight
    arcs = graph.arcs
    nbrs = graph.pred if reverse else graph.succ
    dist = {src: 0.0}
    pred = {src: None}
    done = set()
    heap = [(0.0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v in nbrs[u]:
            c = w(arcs[(v, u)] if reverse else arcs[(u, v)])
            nd = d + c
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, pred


def _walk_back(pred, src, dst):
    path = [dst]
    while path[-1] != src:
        path.append(pred[path[-1]])
    path.reverse()
    return tuple(path)


class AllPairs:
    """Result of an all-pairs query: distances and predecessor trees per source."""

    def __init__(self, dist, pred):
        self._dist = dist
        self._pred = pred

    @property
    def sources(self):
        return list(self._dist)

    def distance(self, u, v):
        return self._dist[u].get(v, math.inf)

    def reachable(self, u, v):
        return v in self._dist[u]

    def path(self, u, v):
        if v not in self._dist[u]:
            raise Unreachable(u, v)
        return _walk_back(self._pred[u], u, v)


def johnson_shortest_paths(graph, weight="energy", sources=None):
    """Shortest paths from each source (default: every terminal) to every node.

    Raises NegativeCycle when the weight admits one.
    """
    w = weight_function(weight)
    phi = bellman_ford_potentials(graph, weight)

    shifted = {}
    for (u, v), a in graph.arcs.items():
        shifted[(u, v)] = max(0.0, w(a) + phi[u] - phi[v])

    dist_all = {}
    pred_all = {}
    for s in (graph.terminals if sources is None else sources):
        dist = {s: 0.0}
        pred = {s: None}
        done = set()
        heap = [(0.0, s)]
        while heap:
            d, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            for v in graph.succ[u]:
                nd = d + shifted[(u, v)]
                if nd < dist.get(v, math.inf):
                    dist[v] = nd
                    pred[v] = u
                    heapq.heappush(heap, (nd, v))
        # undo the reweighting by re-summing the original weights along each tree path,
        # which is exact and avoids potential differences cancelling badly
        real = {s: 0.0}
        for v in dist:
            chain = []
            x = v
            while x not in real:
                chain.append(x)
                x = pred[x]
            for y in reversed(chain):
                real[y] = real[pred[y]] + w(graph.arcs[(pred[y], y)])
        dist_all[s] = real
        pred_all[s] = pred
    return AllPairs(dist_all, pred_all)


_time_trees = weakref.WeakKeyDictionary()
_time_lock = threading.Lock()


def _time_key(d):
    return round(d, TIME_TIE_DIGITS)


def shortest_time_tree(graph, src):
    """Fastest paths from `src` to every reachable node.

    Ties on duration go to the path with fewer arcs, then to the
    lexicographically smaller node sequence. Cached per graph and source.
    """
    with _time_lock:
        per_graph = _time_trees.setdefault(graph, {})
        tree = per_graph.get(src)
    if tree is not None:
        return tree
    arcs = graph.arcs
    best = {src: (0.0, 0, (src,))}
    done = set()
    heap = [(0.0, 0, (src,), 0.0)]
    while heap:
        _, hops, path, d = heapq.heappop(heap)
        u = path[-1]
        if u in done:
            continue
        done.add(u)
        for v in graph.succ[u]:
            if v in done:
                continue
            nd = d + arcs[(u, v)].time
            cand = (_time_key(nd), hops + 1, path + (v,))
            old = best.get(v)
            if old is None or cand < (_time_key(old[0]), old[1], old[2]):
                best[v] = (nd, hops + 1, path + (v,))
                heapq.heappush(heap, cand + (nd,))
    tree = {v: (d, p) for v, (d, _, p) in best.items()}
    with _time_lock:
        _time_trees.setdefault(graph, {})[src] = tree
    return tree


def shortest_time_path(graph, src, dst):
    """Minimum-duration node sequence from src to dst (see shortest_time_tree for ties)."""
    tree = shortest_time_tree(graph, src)
    if dst not in tree:
        raise Unreachable(src, dst)
    return tree[dst][1]


def shortest_time(graph, src, dst):
    tree = shortest_time_tree(graph, src)
    return tree[dst][0] if dst in tree else math.inf


class BankPath(NamedTuple):
    nodes: tuple
    turns: int
    energy: float
    duration: float

    @property
    def cost(self):
        return (self.turns, self.energy)


class BiPathResult(NamedTuple):
    paths: tuple
    complete: bool


_bounds_cache = weakref.WeakKeyDictionary()
_bounds_lock = threading.Lock()


def completion_bounds(graph, dst):
    """Per-node lower bounds (turns, energy) on any path to `dst`; nodes that cannot reach it are absent."""
    with _bounds_lock:
        entry = _bounds_cache.setdefault(graph, {})
        if "phi" not in entry:
            entry["phi"] = bellman_ford_potentials(graph, "energy")
        phi = entry["phi"]
        cached = entry.get(dst)
    if cached is not None:
        return cached
    turns, _ = dijkstra(graph, dst, "turns", reverse=True)
    # energy: Dijkstra on the reduced costs of the reversed graph, undone through phi
    arcs = graph.arcs
    reduced = {}
    for (u, v), a in arcs.items():
        reduced[(u, v)] = max(0.0, a.energy + phi[u] - phi[v])
    dist = {dst: 0.0}
    done = set()
    heap = [(0.0, dst)]
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        for u in graph.pred[v]:
            nd = d + reduced[(u, v)]
            if nd < dist.get(u, math.inf):
                dist[u] = nd
                heapq.heappush(heap, (nd, u))
    energy = {u: d - phi[u] + phi[dst] for u, d in dist.items()}
    # guard against rounding making the bound slightly too optimistic or too tight
    bounds = {u: (turns[u], energy[u] - 1e-9 * (1.0 + abs(energy[u]))) for u in energy}
    with _bounds_lock:
        _bounds_cache.setdefault(graph, {})[dst] = bounds
    return bounds


def biobjective_paths(graph, src, dst, time_budget=None, prune=True):
    """Pareto-optimal (turns, energy) paths from src to dst.

    Label-correcting search with per-node non-dominated label sets. Equal-cost
    labels keep the one discovered first. When `time_budget` (seconds) runs out
    the paths found so far are returned with complete=False.
    """
    if src == dst:
        return BiPathResult((BankPath((src,), 0, 0.0, 0.0),), True)
    deadline = None if time_budget is None else time.monotonic() + time_budget
    bounds = completion_bounds(graph, dst) if prune else None
    if bounds is not None and src not in bounds:
        raise Unreachable(src, dst)
    arcs = graph.arcs
    succ = graph.succ

    lt = [0]
    le = [0.0]
    lm = [0.0]
    ln = [src]
    lp = [-1]
    alive = [True]
    at = {src: [0]}
    targets = []
    queue = deque([0])
    complete = True
    pops = 0

    while queue:
        k = queue.popleft()
        if not alive[k]:
            continue
        pops += 1
        if deadline is not None and pops % 128 == 0 and time.monotonic() > deadline:
            complete = False
            break
        u = ln[k]
        t0, e0, m0 = lt[k], le[k], lm[k]
        for v in succ[u]:
            a = arcs[(u, v)]
            nt = t0 + a.turns
            ne = e0 + a.energy
            if bounds is not None:
                b = bounds.get(v)
                if b is None:
                    continue
                bt, be = nt + b[0], ne + b[1]
                if any(lt[j] <= bt and le[j] <= be for j in targets):
                    continue
            bucket = at.setdefault(v, [])
            rejected = False
            for j in bucket:
                if lt[j] <= nt and le[j] <= ne:
                    rejected = True
                    break
            if rejected:
                continue
            keep = []
            for j in bucket:
                if nt <= lt[j] and ne <= le[j]:
                    alive[j] = False
                else:
                    keep.append(j)
            idx = len(lt)
            lt.append(nt)
            le.append(ne)
            lm.append(m0 + a.time)
            ln.append(v)
            lp.append(k)
            alive.append(True)
            keep.append(idx)
            at[v] = keep
            if v == dst:
                targets = keep
            else:
                queue.append(idx)

    final = at.get(dst, [])
    if not final and complete:
        raise Unreachable(src, dst)
    out = []
    for j in sorted(final, key=lambda j: (lt[j], le[j])):
        nodes = []
        x = j
        while x != -1:
            nodes.append(ln[x])
            x = lp[x]
        nodes.reverse()
        out.append(BankPath(tuple(nodes), lt[j], le[j], lm[j]))
    return BiPathResult(tuple(out), complete)


class BankEntry(NamedTuple):
    paths: tuple
    complete: bool


class PathBank:
    """Shared memo of Pareto path sets between terminal pairs.

    Concurrent computations of one key are allowed; the first stored result wins.
    """

    def __init__(self, graph, budget=30.0):
        self.graph = graph
        self.budget = budget
        self.searches = 0
        self._entries = {}
        self._lock = threading.Lock()

    def get(self, u, v, budget=None):
        with self._lock:
            entry = self._entries.get((u, v))
        if entry is not None:
            return entry
        if u == v:
            result = BiPathResult((BankPath((u,), 0, 0.0, 0.0),), True)
        else:
            result = biobjective_paths(self.graph, u, v, self.budget if budget is None else budget)
            self.searches += 1
        entry = BankEntry(result.paths, result.complete)
        with self._lock:
            return self._entries.setdefault((u, v), entry)

    def paths(self, u, v):
        return self.get(u, v).paths

    def cached(self, u, v):
        return self._entries.get((u, v))

    def __contains__(self, key):
        return key in self._entries

    def __len__(self):
        return len(self._entries)


def bank_get_or_compute(bank, u, v, budget=None):
    return bank.get(u, v, budget)
