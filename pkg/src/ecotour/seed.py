"""Initial tours from scalarized TSP reductions over the terminals.

For a weight pair (alpha, beta) every ordered terminal pair is joined by its
cheapest alpha*turns + beta*energy path. The resulting complete matrix is
shifted to be non-negative, a TSP heuristic orders the terminals, and the
order is expanded back into a closed walk on the line graph.
"""
import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import NegativeCycle, NotATour, Unreachable
from .exact.scalarization import segment_weights
from .paths import PathBank, johnson_shortest_paths, shortest_time_path, shortest_time_tree
from .search.state import SearchState, Theta, update_sets

EXACT_TSP_MAX = 10
KICKS = 30


@dataclass
class ReducedTsp:
    """Complete cost matrix over the terminals, depot at index 0.

    matrix[i, j] is the scalarized cost of paths[(i, j)] plus shift.
    """
    terminals: tuple
    matrix: np.ndarray
    paths: dict
    shift: float
    alpha: float
    beta: float

    def tour_cost(self, perm):
        order = list(perm) + [perm[0]]
        return float(sum(self.matrix[a, b] for a, b in zip(order, order[1:])))

    def expand(self, perm):
        """Closed walk on the line graph realising a depot-anchored permutation."""
        order = list(perm) + [perm[0]]
        walk = [self.terminals[order[0]]]
        for a, b in zip(order, order[1:]):
            walk.extend(self.paths[(a, b)][1:])
        return tuple(walk)


def shift_matrix(raw):
    """Add max(0, -min off-diagonal entry) to every off-diagonal entry."""
    raw = np.asarray(raw, dtype=float)
    n = len(raw)
    off = ~np.eye(n, dtype=bool)
    low = raw[off].min() if n > 1 else 0.0
    shift = max(0.0, -float(low))
    out = raw.copy()
    out[off] += shift
    out[~off] = 0.0
    return out, shift


def reduce_to_tsp(graph, alpha, beta):
    """Scalarized shortest paths between all terminal pairs.

    Raises NegativeCycle when the weighted arc cost admits one and Unreachable
    when some terminal cannot reach another.
    """
    terms = graph.terminals
    ap = johnson_shortest_paths(graph, (alpha, beta), sources=terms)
    n = len(terms)
    raw = np.zeros((n, n))
    paths = {}
    for i, u in enumerate(terms):
        for j, v in enumerate(terms):
            if i == j:
                continue
            paths[(i, j)] = ap.path(u, v)
            raw[i, j] = ap.distance(u, v)
    matrix, shift = shift_matrix(raw)
    return ReducedTsp(terms, matrix, paths, shift, alpha, beta)


# TSP heuristic

def _cycle_cost(m, perm):
    return float(m[perm, np.roll(perm, -1)].sum())


def held_karp(m):
    """Exact directed TSP by dynamic programming over subsets; tour starts at 0."""
    n = len(m)
    if n <= 2:
        return list(range(n))
    full = 1 << (n - 1)
    best = np.full((full, n), math.inf)
    parent = np.full((full, n), -1, dtype=int)
    for j in range(1, n):
        best[1 << (j - 1), j] = m[0, j]
    for mask in range(1, full):
        for j in range(1, n):
            bit = 1 << (j - 1)
            if not mask & bit or best[mask, j] == math.inf:
                continue
            cost = best[mask, j]
            for k in range(1, n):
                kb = 1 << (k - 1)
                if mask & kb:
                    continue
                c = cost + m[j, k]
                if c < best[mask | kb, k]:
                    best[mask | kb, k] = c
                    parent[mask | kb, k] = j
    mask = full - 1
    last = int(np.argmin([best[mask, j] + m[j, 0] if j else math.inf for j in range(n)]))
    perm = []
    while last > 0:
        perm.append(last)
        mask, last = mask ^ (1 << (last - 1)), parent[mask, last]
    return [0] + perm[::-1]


def nearest_neighbour(m):
    n = len(m)
    perm = [0]
    left = set(range(1, n))
    while left:
        here = perm[-1]
        nxt = min(left, key=lambda j: (m[here, j], j))
        perm.append(nxt)
        left.remove(nxt)
    return perm


def _improve(m, perm):
    """Segment exchange A B C -> A C B until no move improves; keeps arc directions.

    Moving a short segment is the Or-opt special case of the same move.
    """
    n = len(perm)
    improved = True
    while improved:
        improved = False
        for i in range(n - 2):
            a, b = perm[i], perm[i + 1]
            for j in range(i + 1, n - 1):
                c, d = perm[j], perm[j + 1]
                removed_ab_cd = m[a, b] + m[c, d]
                for k in range(j + 1, n):
                    e, f = perm[k], perm[(k + 1) % n]
                    delta = m[a, d] + m[e, b] + m[c, f] - removed_ab_cd - m[e, f]
                    if delta < -1e-9:
                        perm = perm[:i + 1] + perm[j + 1:k + 1] + perm[i + 1:j + 1] + perm[k + 1:]
                        improved = True
                        break
                if improved:
                    break
            if improved:
                break
    return perm


def _double_bridge(perm, rng):
    n = len(perm)
    cuts = sorted(int(x) for x in rng.choice(np.arange(1, n), size=3, replace=False))
    p, q, r = cuts
    return perm[:p] + perm[q:r] + perm[p:q] + perm[r:]


def tsp_heuristic(matrix, time_budget=None, rng_seed=0, kicks=KICKS):
    """Depot-anchored terminal order for a directed cost matrix.

    Exact for up to EXACT_TSP_MAX cities. Larger instances get a nearest-neighbour
    start improved by direction-preserving segment exchanges, then a fixed number
    of double-bridge kicks, each followed by the same improvement. The time budget
    only truncates the kicks.
    """
    m = np.asarray(matrix, dtype=float)
    n = len(m)
    if n <= EXACT_TSP_MAX:
        return held_karp(m)
    deadline = None if time_budget is None else time.monotonic() + time_budget
    rng = np.random.default_rng(rng_seed)
    best = _improve(m, nearest_neighbour(m))
    best_cost = _cycle_cost(m, best)
    for _ in range(kicks):
        if deadline is not None and time.monotonic() > deadline:
            break
        cand = _improve(m, _double_bridge(best, rng))
        c = _cycle_cost(m, cand)
        if c < best_cost - 1e-9:
            best, best_cost = cand, c
    return best


def brute_force_tsp(matrix):
    """Optimal order by enumerating all permutations; for tests on small matrices."""
    m = np.asarray(matrix, dtype=float)
    n = len(m)
    return min(([0] + list(p) for p in itertools.permutations(range(1, n))),
               key=lambda p: _cycle_cost(m, p))


# initial sets

@dataclass
class InitialSets:
    X: list
    Y: list
    Z: object
    bank: PathBank
    weights: list = field(default_factory=list)
    state: SearchState = None


def _deadline_walk(graph, windows):
    """Terminals by window end, joined by fastest paths."""
    order = sorted(graph.terminal_set - {graph.depot}, key=lambda v: (windows.end(v), v))
    walk = (graph.depot,)
    for v in order + [graph.depot]:
        walk = walk + shortest_time_path(graph, walk[-1], v)[1:]
    return walk


def weight_sweep(exponents=range(-6, 7)):
    """Endpoint weights, then omega = 2^k as (omega / (1 + omega), 1 / (1 + omega))."""
    out = [(1.0, 0.0), (0.0, 1.0)]
    for k in exponents:
        w = 2.0 ** k
        out.append((w / (1 + w), 1 / (1 + w)))
    return out


def generate_initial_sets(graph, windows, budget=None, rng_seed=0, theta=None, max_weights=None,
                          bank=None, state=None):
    """Populate X, Y and Z from TSP reductions over a sweep of weights.

    The sweep runs the endpoint and geometric weights first, then bisects
    between neighbouring points of Z with the slope rule, until the budget (in
    seconds) or `max_weights` reductions are used up. A fastest-path walk in
    window-end order and a travel-time TSP seed the late side. With
    `max_weights` set and no budget the result depends only on the seed.
    """
    rng = np.random.default_rng(rng_seed)
    theta = theta or Theta()
    if state is None:
        bank = bank or PathBank(graph)
        state = SearchState(graph, windows, theta, rng, bank)
    deadline = None if budget is None else time.monotonic() + budget
    tried = []

    def out_of_budget():
        if deadline is not None and time.monotonic() > deadline:
            return True
        return max_weights is not None and len(tried) >= max_weights

    def emit(walk):
        try:
            update_sets([state.evaluate(walk)], state)
        except NotATour:
            pass

    try:
        emit(_deadline_walk(graph, windows))
    except Unreachable:
        pass

    def run(weight):
        tried.append(weight)
        try:
            if weight == "time":
                terms = graph.terminals
                n = len(terms)
                raw = np.zeros((n, n))
                paths = {}
                for i, u in enumerate(terms):
                    tree = shortest_time_tree(graph, u)
                    for j, v in enumerate(terms):
                        if i != j:
                            if v not in tree:
                                raise Unreachable(u, v)
                            raw[i, j], paths[(i, j)] = tree[v]
                red = ReducedTsp(terms, raw, paths, 0.0, 0.0, 0.0)
            else:
                red = reduce_to_tsp(graph, *weight)
        except (NegativeCycle, Unreachable):
            return
        seed = int(rng.integers(2 ** 31))
        remaining = None if deadline is None else max(0.0, deadline - time.monotonic())
        emit(red.expand(tsp_heuristic(red.matrix, remaining, seed)))

    queue = weight_sweep() + ["time"]
    for w in queue:
        if out_of_budget():
            break
        run(w)
    done = {w for w in tried if w != "time"}
    progress = True
    while progress and not out_of_budget():
        progress = False
        pts = state.Z.costs()
        for a, b in zip(pts, pts[1:]):
            if out_of_budget():
                break
            try:
                alpha, beta, _ = segment_weights(a, b)
            except ValueError:
                continue
            if (alpha, beta) in done:
                continue
            done.add((alpha, beta))
            run((alpha, beta))
            progress = True
    state.refresh_z_stats()
    return InitialSets(state.X, state.Y, state.Z, state.bank, tried, state)
