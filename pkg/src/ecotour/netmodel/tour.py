import math
from typing import NamedTuple

from ..errors import NotATour


class CostVector(NamedTuple):
    turns: int
    energy: float

    def scalarized(self, alpha, beta):
        return alpha * self.turns + beta * self.energy


def dominates(a, b):
    """Weak Pareto dominance for minimisation: a is no worse than b in both objectives."""
    return a[0] <= b[0] and a[1] <= b[1]


def strictly_dominates(a, b):
    return dominates(a, b) and (a[0] < b[0] or a[1] < b[1])


class Tour:
    """A closed walk from the depot back to the depot, with its evaluation cached.

    Equality and hashing use the node sequence only.
    """

    __slots__ = ("nodes", "cost", "penalty", "wait", "duration", "first_arrival")

    def __init__(self, nodes, cost, penalty, wait, duration, first_arrival):
        self.nodes = nodes
        self.cost = cost
        self.penalty = penalty
        self.wait = wait
        self.duration = duration
        self.first_arrival = first_arrival

    @property
    def turns(self):
        return self.cost.turns

    @property
    def energy(self):
        return self.cost.energy

    @property
    def feasible(self):
        return self.penalty == 0

    def __len__(self):
        return len(self.nodes)

    def __eq__(self, other):
        return isinstance(other, Tour) and self.nodes == other.nodes

    def __hash__(self):
        return hash(self.nodes)

    def __repr__(self):
        return (f"Tour({list(self.nodes)}, cost=({self.cost.turns}, {self.cost.energy:g}), "
                f"penalty={self.penalty:g})")


def path_cost(graph, nodes):
    """(turns, energy, time) summed over consecutive arcs of a node sequence."""
    turns = 0
    energy = 0.0
    time = 0.0
    arcs = graph.arcs
    for u, v in zip(nodes, nodes[1:]):
        a = arcs.get((u, v))
        if a is None:
            raise NotATour(f"({u}, {v}) is not an arc")
        turns += a.turns
        energy += a.energy
        time += a.time
    return turns, energy, time


def evaluate_tour(nodes, graph, windows):
    """Evaluate a closed walk under first-visit service.

    The clock starts at 0 on leaving the depot. The first time a terminal is
    reached its arrival time is recorded and, if its window has not opened yet,
    the vehicle waits until it does. Later passes neither wait nor serve.
    The penalty is the summed lateness past window ends; the wait is summed over
    terminals whose window is met.
    """
    nodes = tuple(nodes)
    depot = graph.depot
    if not nodes or nodes[0] != depot or nodes[-1] != depot:
        raise NotATour("a tour must start and end at the depot")
    arcs = graph.arcs
    terminal_set = graph.terminal_set
    window = windows.window

    first = {}
    turns = 0
    energy = 0.0
    clock = 0.0
    penalty = 0.0
    wait = 0.0

    def serve(v):
        nonlocal clock, penalty, wait
        s, e = window(v)
        first[v] = clock
        if clock > e:
            penalty += clock - e
        elif clock < s:
            wait += s - clock
            clock = s

    serve(depot)
    prev = depot
    for v in nodes[1:]:
        a = arcs.get((prev, v))
        if a is None:
            raise NotATour(f"({prev}, {v}) is not an arc")
        turns += a.turns
        energy += a.energy
        clock += a.time
        if v in terminal_set and v not in first:
            serve(v)
        prev = v
    if len(first) != len(terminal_set):
        missing = sorted(terminal_set - set(first))
        raise NotATour(f"terminals {missing} are not visited")
    return Tour(nodes, CostVector(turns, energy), penalty, wait, clock, first)


def visit_counts(nodes):
    """Visits per node of a closed walk; the closing return to the depot is not a new visit."""
    counts = {}
    for v in nodes[:-1] if len(nodes) > 1 else nodes:
        counts[v] = counts.get(v, 0) + 1
    return counts


def has_revisit(nodes):
    return any(c > 1 for c in visit_counts(nodes).values())


def any_visit_schedule(nodes, graph, windows):
    """Best schedule when any visit may serve a terminal and waiting happens only when serving.

    Returns (feasible, finish_time). Exhaustive over the choice of serving
    visit per terminal, which is fine for the short walks this is used on.
    """
    nodes = tuple(nodes)
    times = [graph.arc(u, v).time for u, v in zip(nodes, nodes[1:])]
    occ = {}
    body = nodes[:-1] if len(nodes) > 1 else nodes
    for i, v in enumerate(body):
        if v in graph.terminal_set:
            occ.setdefault(v, []).append(i)
    if set(occ) != set(graph.terminal_set):
        return False, math.inf
    terms = sorted(occ)
    best = math.inf

    def simulate(choice):
        served_at = {i: v for v, i in choice.items()}
        clock = 0.0
        for i, v in enumerate(body):
            if i > 0:
                clock += times[i - 1]
            if i in served_at:
                s, e = windows.window(v)
                if clock > e:
                    return math.inf
                clock = max(clock, s)
        return clock + (times[-1] if len(nodes) > 1 else 0.0)

    def rec(k, choice):
        nonlocal best
        if k == len(terms):
            best = min(best, simulate(choice))
            return
        v = terms[k]
        for i in occ[v]:
            choice[v] = i
            rec(k + 1, choice)
        del choice[v]

    rec(0, {})
    return best < math.inf, best
