"""Small hand-built instances used by tests, docs and the CLI demo."""
from .netmodel import Instance, LineGraph, TimeWindowTable

# (tail, head): (turns, energy) of the 12-segment toy network; every arc takes 10 minutes
TOY_ARCS = {
    (0, 1): (0, 1), (0, 7): (1, 1), (1, 2): (1, 2), (1, 9): (0, 0), (1, 10): (0, 3),
    (2, 3): (0, 1), (3, 4): (1, 3), (3, 8): (1, 1), (4, 5): (1, 3), (5, 6): (0, 2),
    (6, 0): (1, 2), (7, 5): (1, -1), (8, 1): (1, 1), (8, 7): (1, -2), (9, 0): (0, 1),
    (10, 11): (1, 3), (11, 3): (0, 2),
}

# the six named tours of the toy network with their (turns, energy) and feasibility
TOY_TOURS = {
    "p1": ((0, 1, 10, 11, 3, 4, 5, 6, 0), (4, 19), False),
    "p2": ((0, 1, 2, 3, 4, 5, 6, 0), (4, 14), True),
    "p3": ((0, 1, 2, 3, 8, 7, 5, 6, 0), (5, 6), False),
    "p4": ((0, 7, 5, 6, 0, 1, 2, 3, 8, 1, 9, 0), (6, 11), True),
    "p5": ((0, 7, 5, 6, 0, 1, 2, 3, 4, 5, 6, 0), (7, 18), True),
    "p6": ((0, 7, 5, 6, 0, 1, 2, 3, 8, 7, 5, 6, 0), (8, 10), True),
}


def toy_network(slow_link=False, deadline=50.0):
    """Twelve road segments, terminals {0, 3, 5}, 10 minutes per move, segment 5 due by `deadline`.

    With `slow_link` the move 4 -> 5 takes 20 minutes, which makes every
    on-time tour revisit some node.
    """
    arcs = {uv: (t, h, 10.0) for uv, (t, h) in TOY_ARCS.items()}
    if slow_link:
        arcs[(4, 5)] = arcs[(4, 5)][:2] + (20.0,)
    graph = LineGraph(range(12), arcs, {0, 3, 5})
    windows = TimeWindowTable({5: (0.0, deadline)})
    return Instance(graph, windows, name="toy-network" + ("-slow" if slow_link else ""))


REPAIR_TIMES = {
    (0, 1): 10, (1, 0): 10, (1, 2): 10, (2, 3): 45, (3, 4): 30, (4, 5): 40, (5, 6): 5,
    (6, 1): 5, (1, 5): 5, (6, 4): 20, (2, 4): 20, (4, 3): 10, (3, 1): 10, (1, 3): 5,
}
REPAIR_DEADLINES = {0: 1000.0, 1: 200.0, 3: 50.0, 4: 100.0, 5: 120.0, 6: 125.0}


def repair_network():
    """Seven-node network where the tour [0,1,2,3,4,5,6,1,0] is late at terminals 3, 5 and 6."""
    arcs = {uv: (0, 1.0, float(t)) for uv, t in REPAIR_TIMES.items()}
    graph = LineGraph(range(7), arcs, set(REPAIR_DEADLINES))
    windows = TimeWindowTable({v: (0.0, e) for v, e in REPAIR_DEADLINES.items()})
    return Instance(graph, windows, name="repair-network")


def waiting_example():
    """Complete graph on terminals 0, 1, 2 with 10-minute moves; windows [30, 60] at 1 and [10, 30] at 2."""
    nodes = range(3)
    arcs = {(u, v): (0, 1.0, 10.0) for u in nodes for v in nodes if u != v}
    graph = LineGraph(nodes, arcs, set(nodes))
    windows = TimeWindowTable({1: (30.0, 60.0), 2: (10.0, 30.0)})
    return Instance(graph, windows, name="waiting-example")


def unconstrained(instance):
    """Same graph with every window removed."""
    return Instance(instance.graph, TimeWindowTable(), name=instance.name + "-open")

