"""Neighbourhood operators of the local search.

Tours are closed walks starting and ending at the depot. Operators work on the
cyclic body nodes[:-1] and on the positions of terminal occurrences in it; two
consecutive occurrences form an adjacent terminal pair. Every operator returns
a list of evaluated Tours (possibly late); none ever drops a terminal.
"""
import itertools
import math
import time

from ..errors import NotATour, Unreachable
from ..netmodel import pareto_filter, path_cost
from ..paths import shortest_time, shortest_time_path
from .select import gain, gain_corner, select_tour_kde
from .state import safe_evaluate

MIN_S3OPT_TERMINALS = 6
QUAD_PAIRS = 4
QUAD_ATTEMPTS = 50


def _deadline(state):
    return time.monotonic() + state.operator_limit


def _expired(deadline):
    return deadline is not None and time.monotonic() > deadline


def terminal_positions(body, terminal_set):
    return [i for i, v in enumerate(body) if v in terminal_set]


def segment(body, i, j):
    """Cyclic subpath body[i..j], endpoints included."""
    if j >= i:
        return tuple(body[i:j + 1])
    return tuple(body[i:]) + tuple(body[:j + 1])


def concat(*parts):
    """p + q where q starts at the last node of p; repeated joint nodes are kept once."""
    out = list(parts[0])
    for q in parts[1:]:
        if not q:
            continue
        if out and q[0] != out[-1]:
            raise NotATour(f"cannot join a path ending at {out[-1]} with one starting at {q[0]}")
        out.extend(q[1:])
    return tuple(out)


def close_at_depot(cycle, depot):
    """Rotate a closed walk (first node == last node) so it starts and ends at the depot."""
    body = list(cycle[:-1])
    if depot not in body:
        raise NotATour("walk does not pass the depot")
    k = body.index(depot)
    body = body[k:] + body[:k]
    return tuple(body) + (depot,)


def lateness(tour, windows):
    """Lateness per terminal at its first visit."""
    return {v: max(0.0, a - windows.end(v)) for v, a in tour.first_arrival.items()}


def _seg_cost(graph, seq):
    t, e, _ = path_cost(graph, seq)
    return t, e, len(seq) - 1


def _bank_paths(state, u, v):
    try:
        return [p.nodes for p in state.bank.paths(u, v)]
    except Unreachable:
        return []


def _random_bank_path(state, u, v):
    paths = _bank_paths(state, u, v)
    if not paths:
        return None
    return paths[int(state.rng.integers(len(paths)))]


def _finish(state, walks):
    out = []
    seen = set()
    for w in walks:
        if w is None or w in seen:
            continue
        seen.add(w)
        tour = safe_evaluate(state, w)
        if tour is not None:
            out.append(tour)
    return out


# S3Opt and S3OptTW

def _s3_candidates(state, body, pos, allowed_first, keep_pair, deadline):
    """Yield (a, b, q1) for pair indices a=(i1,i2), b=(i3,i4) meeting the adjacency and
    inner-terminal conditions, with q1 a bank path from body[i1] to body[i4]."""
    m = len(pos)
    for a in range(m):
        if not allowed_first(a) or not keep_pair(a):
            continue
        for b in range(m):
            if b == a or not keep_pair(b):
                continue
            inside = (a - (b + 1)) % m - 1
            if inside < 2:
                continue
            if _expired(deadline):
                return
            for q1 in _bank_paths(state, body[pos[a]], body[pos[(b + 1) % m]]):
                yield a, b, q1


def _s3_reconnect(state, body, pos, a, b, q1):
    """All tours of step 2 for one candidate, one per adjacent pair inside p[i4 -> i1]."""
    m = len(pos)
    i1, i2 = pos[a], pos[(a + 1) % m]
    i3, i4 = pos[b], pos[(b + 1) % m]
    walks = []
    k = (b + 1) % m
    while k != a:
        i5, i6 = pos[k], pos[(k + 1) % m]
        q3 = _random_bank_path(state, body[i3], body[i6])
        q2 = _random_bank_path(state, body[i5], body[i2])
        if q3 is not None and q2 is not None:
            cycle = concat(segment(body, i2, i3), q3, segment(body, i6, i1), q1,
                           segment(body, i4, i5), q2)
            walks.append(close_at_depot(cycle, state.graph.depot))
        k = (k + 1) % m
    return walks


def s3opt(state):
    """Steiner 3-opt on a density-selected tour of Z, guided by frontier gain."""
    if len(state.Z) == 0:
        return []
    deadline = _deadline(state)
    p = select_tour_kde(state.Z.items(), state.rng)
    body = p.nodes[:-1]
    pos = terminal_positions(body, state.graph.terminal_set)
    if len(pos) < MIN_S3OPT_TERMINALS:
        return []
    m = len(pos)
    graph = state.graph

    def above_average(k):
        t, e, n = _seg_cost(graph, segment(body, pos[k], pos[(k + 1) % m]))
        high_e = e >= n * state.z_mean_energy
        high_t = t >= n * state.z_mean_turns
        return (high_e and high_t) if state.filter_mode == "all" else (high_e or high_t)

    keep = [above_average(k) for k in range(m)]
    cands = []
    for a, b, q1 in _s3_candidates(state, body, pos, lambda a: True, lambda k: keep[k], deadline):
        i2, i3 = pos[(a + 1) % m], pos[b]
        i4, i1 = pos[(b + 1) % m], pos[a]
        t1, e1, _ = _seg_cost(graph, q1)
        t2, e2, _ = _seg_cost(graph, segment(body, i4, i1))
        t3, e3, _ = _seg_cost(graph, segment(body, i2, i3))
        cands.append(((t1 + t2 + t3, e1 + e2 + e3), a, b, q1))
    if not cands:
        return []
    frontier = state.Z.costs()
    corner = gain_corner(frontier + [c[0] for c in cands])
    best = None
    best_gain = -math.inf
    for c in cands:
        g = gain(frontier, c[0], corner)
        if g > best_gain:
            best, best_gain = c, g
    if best is None:
        return []
    _, a, b, q1 = best
    return _finish(state, _s3_reconnect(state, body, pos, a, b, q1))


def s3opt_tw(state):
    """Steiner 3-opt on a random late tour of X; the first cut ends at a late terminal."""
    if not state.X:
        return []
    deadline = _deadline(state)
    p = state.X[int(state.rng.integers(len(state.X)))]
    body = p.nodes[:-1]
    pos = terminal_positions(body, state.graph.terminal_set)
    if len(pos) < MIN_S3OPT_TERMINALS:
        return []
    m = len(pos)
    late = {v for v, x in lateness(p, state.windows).items() if x > 0}
    walks = []
    for a, b, q1 in _s3_candidates(state, body, pos, lambda a: body[pos[(a + 1) % m]] in late,
                                   lambda k: True, deadline):
        walks.extend(_s3_reconnect(state, body, pos, a, b, q1))
        if len(walks) >= state.emit_cap or _expired(deadline):
            break
    return pareto_filter(_finish(state, walks))


# RepairTW

def kept_terminals(graph, nodes, drop):
    """Terminal occurrences of a closed walk left after removing the terminals in `drop`."""
    return tuple(v for v in nodes if v in graph.terminal_set and v not in drop)


def _drop_terminals(state, nodes, drop):
    """Remove every occurrence of the terminals in `drop`, joining the remaining
    terminal occurrences by fastest paths where something was removed."""
    graph = state.graph
    body = nodes[:-1]
    pos = terminal_positions(body, graph.terminal_set)
    kept = [i for i in pos if body[i] not in drop]
    kept_set = set(kept)
    walk = (body[0],)
    for k, i in enumerate(kept):
        j = kept[k + 1] if k + 1 < len(kept) else len(body)
        removed = any(x not in kept_set for x in pos if i < x < j)
        head = body[j] if j < len(body) else body[0]
        if removed:
            walk = concat(walk, shortest_time_path(graph, body[i], head))
        else:
            walk = concat(walk, tuple(body[i:j]) + (head,))
    return walk


def _schedule(state, nodes):
    """First-visit arrival and lateness for the terminals present in a closed walk."""
    graph = state.graph
    clock = 0.0
    late = {}
    s, _ = state.windows.window(nodes[0])
    clock = max(clock, s)
    late[nodes[0]] = 0.0
    for u, v in zip(nodes, nodes[1:]):
        clock += graph.arcs[(u, v)].time
        if v in graph.terminal_set and v not in late:
            s, e = state.windows.window(v)
            late[v] = max(0.0, clock - e)
            clock = max(clock, s)
    return late


def _terminal_pairs(nodes, terminal_set):
    """Consecutive terminal positions of a linear closed walk (closing depot included)."""
    pos = [i for i, v in enumerate(nodes) if v in terminal_set]
    return list(zip(pos, pos[1:]))


def _nearest_neighbour_path(state, start, targets):
    graph = state.graph
    path = (start,)
    left = set(targets)
    while left:
        here = path[-1]
        nxt = min(sorted(left), key=lambda v: (_fastest(graph, here, v), v))
        path = concat(path, shortest_time_path(graph, here, nxt))
        left -= set(path)
    return path


def _fastest(graph, u, v):
    try:
        return shortest_time(graph, u, v)
    except Unreachable:
        return math.inf


def repair_tw(state):
    """Destroy the late terminals of a random tour of X, then reinsert the largest
    subset that fits between two kept terminals."""
    if not state.X:
        return []
    graph = state.graph
    rng = state.rng
    p = state.X[int(rng.integers(len(state.X)))]
    others = set(graph.terminal_set) - {graph.depot}
    violated = {v for v, x in lateness(p, state.windows).items() if x > 0 and v != graph.depot}
    if not violated or violated == others:
        return []
    try:
        q = _drop_terminals(state, p.nodes, violated)
    except (Unreachable, NotATour):
        return []
    sched = _schedule(state, q)
    missing = set(graph.terminal_set) - set(sched)
    if not missing and not any(sched.values()):
        return _finish(state, [q])
    on_time = {v for v, x in sched.items() if x == 0}
    best = []
    best_size = 0
    for i, j in _terminal_pairs(q, graph.terminal_set):
        fits = set()
        for k in sorted(missing):
            try:
                trial = concat(q[:i + 1], shortest_time_path(graph, q[i], k),
                               shortest_time_path(graph, k, q[j]), q[j:])
            except Unreachable:
                continue
            ts = _schedule(state, trial)
            if ts.get(k, 1.0) == 0 and all(ts.get(v, 0.0) == 0 for v in on_time):
                fits.add(k)
        if len(fits) > best_size:
            best, best_size = [(i, j, fits)], len(fits)
        elif len(fits) == best_size and best_size > 0:
            best.append((i, j, fits))
    if best_size == 0:
        return []
    i_star, _, insert = best[int(rng.integers(len(best)))]
    anchor = q[i_star]
    try:
        r = _drop_terminals(state, p.nodes, insert)
    except (Unreachable, NotATour):
        return []
    r_sched = _schedule(state, r)
    r_missing = set(graph.terminal_set) - set(r_sched)
    if not r_missing and not any(r_sched.values()):
        return _finish(state, [r])
    try:
        p1 = _nearest_neighbour_path(state, anchor, r_missing)
    except Unreachable:
        return []
    walks = []
    for i, j in _terminal_pairs(r, graph.terminal_set):
        if r[i] != anchor:
            continue
        try:
            p2 = shortest_time_path(graph, p1[-1], r[j])
        except Unreachable:
            continue
        walks.append(concat(r[:i + 1], p1, p2, r[j:]))
    return _finish(state, walks)


# FixedPerm

def is_skewed(tour, state, conjunction=True):
    n = len(tour.nodes) - 1
    ed = state.edges
    k = state.theta.skew
    off_e = abs(tour.energy - n * ed.mean_energy) > k * ed.std_energy
    off_t = abs(tour.turns - n * ed.mean_turns) > k * ed.std_turns
    return (off_e and off_t) if conjunction else (off_e or off_t)


def _sample_product(options, cap, rng):
    total = math.prod(len(o) for o in options)
    if total <= cap:
        return list(itertools.product(*options))
    picks = set()
    out = []
    for _ in range(cap):
        combo = tuple(int(rng.integers(len(o))) for o in options)
        if combo not in picks:
            picks.add(combo)
            out.append(tuple(o[c] for o, c in zip(options, combo)))
    return out


def fixed_perm(state, source="Z"):
    """Keep the terminal order of a skewed tour; swap in bank paths on the pairs whose
    connecting path costs most above the network average."""
    pool = state.Z.items() if source == "Z" else list(state.Y)
    rng = state.rng
    skewed = [t for t in pool if is_skewed(t, state)]
    if skewed:
        p = skewed[int(rng.integers(len(skewed)))]
    else:
        p = select_tour_kde(state.Z.items(), rng)
        if p is None:
            return []
    deadline = _deadline(state)
    graph = state.graph
    pairs = _terminal_pairs(p.nodes, graph.terminal_set)
    use_energy = rng.random() < 0.5
    mean = state.edges.mean_energy if use_energy else state.edges.mean_turns
    prio = []
    for i, j in pairs:
        t, e, n = _seg_cost(graph, p.nodes[i:j + 1])
        prio.append(max(0.0, (e if use_energy else t) - n * mean))
    order = [int(k) for k in rng.permutation(len(pairs))]
    order.sort(key=lambda k: -prio[k])
    options = [[p.nodes[i:j + 1]] for i, j in pairs]
    for k in order[:state.theta.top_pairs]:
        if _expired(deadline):
            break
        i, j = pairs[k]
        for path in _bank_paths(state, p.nodes[i], p.nodes[j]):
            if path not in options[k]:
                options[k].append(path)
    walks = [concat(*combo) for combo in _sample_product(options, state.emit_cap, rng)]
    return _finish(state, walks)


# Quad and RandPermute

def _disjoint_pairs(m, rng):
    for _ in range(QUAD_ATTEMPTS):
        ks = sorted(int(k) for k in rng.choice(m, size=QUAD_PAIRS, replace=False))
        gaps = [(ks[(n + 1) % QUAD_PAIRS] - ks[n]) % m for n in range(QUAD_PAIRS)]
        if min(gaps) >= 2:
            return ks
    return None


def quad(state):
    """Double-bridge reconnection of four disjoint adjacent terminal pairs of a random tour of Z."""
    if len(state.Z) == 0:
        return []
    rng = state.rng
    zs = state.Z.items()
    p = zs[int(rng.integers(len(zs)))]
    body = p.nodes[:-1]
    pos = terminal_positions(body, state.graph.terminal_set)
    m = len(pos)
    if m < 2 * QUAD_PAIRS:
        return []
    ks = _disjoint_pairs(m, rng)
    if ks is None:
        return []
    (i8, i1), (i2, i3), (i4, i5), (i6, i7) = [(pos[k], pos[(k + 1) % m]) for k in ks]
    joins = [_bank_paths(state, body[x], body[y]) for x, y in ((i2, i7), (i8, i5), (i6, i3), (i4, i1))]
    if any(not j for j in joins):
        return []
    a, b = segment(body, i1, i2), segment(body, i3, i4)
    c, d = segment(body, i5, i6), segment(body, i7, i8)
    walks = []
    for j1, j2, j3, j4 in _sample_product(joins, state.quad_cap, rng):
        walks.append(close_at_depot(concat(a, j1, d, j2, c, j3, b, j4), state.graph.depot))
    return _finish(state, walks)


def rand_permute(state):
    """Random terminal order joined by random bank paths."""
    graph = state.graph
    others = sorted(set(graph.terminal_set) - {graph.depot})
    for _ in range(2):
        order = [graph.depot] + [others[int(k)] for k in state.rng.permutation(len(others))] + [graph.depot]
        walk = (graph.depot,)
        for u, v in zip(order, order[1:]):
            path = _random_bank_path(state, u, v) if u != v else (u,)
            if path is None:
                walk = None
                break
            walk = concat(walk, path)
        if walk is not None:
            return _finish(state, [walk])
    return []
