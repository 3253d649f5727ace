"""Asymmetric TSPTW instances in the Solomon-Potvin-Bengio text layout.

A file holds the node count n, then n rows of n travel times, then n rows
"ready due" with each node's window. Blank lines and lines starting with '#'
or '!' are ignored. Node 0 is the depot.
"""
import hashlib
import math
from pathlib import Path

import numpy as np

from ..errors import ParseError
from ..netmodel import Instance, LineGraph, TimeWindowTable

MAX_REVISIT_CAP = 4

# sizes of the six benchmark cases used by the bench suite
SPB_SIZES = {"rc_204.1": 46, "rc_206.4": 38, "rc_208.1": 38, "rc_203.3": 37, "rc_206.2": 37,
             "rc_208.3": 36}


def _tokens(text, path):
    """(value, line number) for every number in the file."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#!":
            continue
        for tok in line.split():
            try:
                out.append((float(tok), lineno))
            except ValueError:
                raise ParseError(f"not a number: {tok!r}", line=lineno, path=path) from None
    return out


def parse_spb(text, path=None):
    """Travel-time matrix and (ready, due) windows from SPB text."""
    toks = _tokens(text, path)
    if not toks:
        raise ParseError("empty file", line=1, path=path)
    n_val, n_line = toks[0]
    if n_val != int(n_val) or n_val < 2:
        raise ParseError(f"bad node count {n_val}", line=n_line, path=path)
    n = int(n_val)
    need = 1 + n * n + 2 * n
    if len(toks) < need:
        last = toks[-1][1]
        raise ParseError(f"expected {need - 1} numbers after the node count, found {len(toks) - 1}",
                         line=last, path=path)
    if len(toks) > need:
        raise ParseError("trailing data after the window table", line=toks[need][1], path=path)
    times = np.array([v for v, _ in toks[1:1 + n * n]]).reshape(n, n)
    for k, (v, line) in enumerate(toks[1:1 + n * n]):
        if v < 0:
            raise ParseError("negative travel time", line=line, path=path)
    windows = []
    for k in range(n):
        (a, _), (b, lb) = toks[1 + n * n + 2 * k], toks[2 + n * n + 2 * k]
        if b < a:
            raise ParseError(f"window of node {k} closes before it opens", line=lb, path=path)
        windows.append((a, b))
    return times, windows


def load_spb(path, terminal_fraction=0.1, rng_seed=0):
    """Instance from an SPB file with a seeded terminal sample and random turn and energy costs.

    ceil(fraction * n) terminals are drawn uniformly without replacement, the
    depot always among them. Terminals keep the file's windows, other nodes get
    none. Each arc gets 0/1 turns with probability 1/2 and energy uniform on
    [0, 10). The revisit cap is min(number of non-depot terminals, 4).
    """
    if not 0 < terminal_fraction <= 1:
        raise ValueError("terminal_fraction must be in (0, 1]")
    path = Path(path)
    times, windows = parse_spb(path.read_text(), str(path))
    n = len(times)
    rng = np.random.default_rng(rng_seed)
    k = max(1, math.ceil(terminal_fraction * n - 1e-9))
    others = [int(v) for v in rng.choice(np.arange(1, n), size=k - 1, replace=False)] if k > 1 else []
    terminals = {0, *others}
    turns = rng.integers(0, 2, size=(n, n))
    energy = rng.uniform(0.0, 10.0, size=(n, n))
    arcs = {(u, v): (int(turns[u, v]), float(energy[u, v]), float(times[u, v]))
            for u in range(n) for v in range(n) if u != v}
    graph = LineGraph(range(n), arcs, terminals, check_cycles=False)
    tw = TimeWindowTable({v: windows[v] for v in terminals})
    cap = min(len(terminals) - 1, MAX_REVISIT_CAP)
    digest = instance_hash(graph, tw)
    return Instance(graph, tw, name=path.stem, revisit_cap=max(1, cap),
                    meta={"source": str(path), "fraction": terminal_fraction, "seed": rng_seed,
                          "hash": digest})


def instance_hash(graph, windows):
    h = hashlib.sha256()
    for (u, v), a in sorted(graph.arcs.items()):
        h.update(f"{u},{v},{a.turns},{a.energy!r},{a.time!r};".encode())
    h.update(repr(sorted(graph.terminal_set)).encode())
    h.update(repr(sorted(windows.items())).encode())
    return h.hexdigest()


def format_spb(times, windows):
    n = len(times)
    lines = [str(n)]
    lines += [" ".join(f"{float(x):g}" for x in row) for row in times]
    lines += [f"{a:g} {b:g}" for a, b in windows]
    return "\n".join(lines) + "\n"


def synthetic_spb(n, seed=0, horizon_slack=1.5, width=(60.0, 240.0)):
    """Random Euclidean SPB-style instance whose windows admit the nearest-neighbour route.

    Returns (times, windows). Travel times are rounded to one decimal. Windows
    are placed around arrival times of a nearest-neighbour route, so the full
    TSPTW is feasible.
    """
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0, 100, size=(n, 2))
    times = np.round(np.hypot(*(xy[:, None, :] - xy[None, :, :]).transpose(2, 0, 1)), 1)
    np.fill_diagonal(times, 0.0)
    order = [0]
    left = set(range(1, n))
    clock = {0: 0.0}
    t = 0.0
    while left:
        here = order[-1]
        nxt = min(left, key=lambda j: (times[here, j], j))
        t += times[here, nxt]
        clock[nxt] = t
        order.append(nxt)
        left.remove(nxt)
    horizon = (t + times[order[-1], 0]) * horizon_slack
    windows = [(0.0, round(horizon, 1))]
    for v in range(1, n):
        w = rng.uniform(*width)
        a = max(0.0, clock[v] - rng.uniform(0, w))
        windows.append((round(a, 1), round(max(clock[v], a + w), 1)))
    return times, windows


def write_synthetic_suite(directory, seed=0):
    """Write one synthetic SPB file per benchmark size; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, (name, n) in enumerate(SPB_SIZES.items()):
        times, windows = synthetic_spb(n, seed + k)
        p = directory / f"{name}.txt"
        p.write_text(format_spb(times, windows))
        paths.append(p)
    return paths
