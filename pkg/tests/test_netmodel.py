import json
import math

import numpy as np
import pytest
from mpmath import mp, mpf

from ecotour.errors import InvalidInstance, NegativeCycle, NotATour, ParseError
from ecotour.fixtures import TOY_ARCS, TOY_TOURS, toy_network, waiting_example
from ecotour.netmodel import (EnergyParams, LineGraph, ParetoArchive, RoadEdge, RoadNetwork,
                              TimeWindowTable, Turn, build_line_graph, classify_turn, dominated_area,
                              dominates, edge_energy, evaluate_tour, is_conflicting_left, load_instance,
                              lower_hull, pareto_filter, path_cost, save_instance, supported_subset)
from ecotour.netmodel.energy import JOULES_PER_KWH


# turn rules

@pytest.mark.parametrize("bin_, bout, expected", [
    (0, 90, Turn.LEFT), (0, 0, Turn.STRAIGHT), (0, 315, Turn.RIGHT), (0, 270, Turn.RIGHT),
    (350, 30, Turn.STRAIGHT), (350, 50, Turn.LEFT), (90, 0, Turn.RIGHT), (0, 180, Turn.LEFT),
])
def test_classify_turn(bin_, bout, expected):
    assert classify_turn(bin_, bout, 45) is expected


def test_classify_turn_sweep_matches_normalised_difference():
    for a in range(0, 360, 7):
        for b in range(360):
            d = ((b - a + 180) % 360) - 180
            d = 180 if d == -180 else d
            want = Turn.LEFT if d >= 45 else Turn.RIGHT if d <= -45 else Turn.STRAIGHT
            assert classify_turn(a, b, 45) is want


@pytest.mark.parametrize("din, dout, expected", [(2, 1, True), (1, 1, False), (1, 3, True), (0, 0, False)])
def test_conflicting_left(din, dout, expected):
    assert is_conflicting_left(din, dout) is expected


# energy

def test_flat_road_energy_closed_form():
    mp.dps = 40
    bracket = mpf(27216) * mpf("9.8") * mpf("0.0058") + mpf("0.5") * mpf("1.1") * mpf("0.6") * mpf("5.4") * 100
    want = bracket * 100 / mpf(JOULES_PER_KWH)
    got = edge_energy(100.0, EnergyParams(), speed=10.0, gradient=0.0)
    assert abs(got - float(want)) <= 1e-9 * float(want)


def test_regen_branch_scales_by_point_seven():
    p = EnergyParams(rolling_coeff=0.0, air_density=0.0)
    raw = p.mass * p.gravity * math.sin(-math.pi / 2) * 50.0 / JOULES_PER_KWH
    assert edge_energy(50.0, p, speed=0.0, gradient=-math.pi / 2) == pytest.approx(0.7 * raw, rel=1e-12)
    assert edge_energy(50.0, p, speed=0.0, gradient=-math.pi / 2) < 0


def test_zero_distance_and_monotone_length():
    assert edge_energy(0.0, EnergyParams(), 10.0) == 0.0
    vals = [edge_energy(d, EnergyParams(), 10.0, 0.01) for d in (1, 10, 100, 1000)]
    assert vals == sorted(vals)


def test_energy_params_validation():
    with pytest.raises(ValueError):
        EnergyParams(mass=-1)
    with pytest.raises(ValueError):
        EnergyParams(regen_efficiency=1.5)


# line graph

def _chain(energies=(4.0, 6.0)):
    edges = (RoadEdge(10, 0, 1, 100.0, 10.0, bearing=0.0, energy=energies[0], travel_time=10.0),
             RoadEdge(11, 1, 2, 100.0, 10.0, bearing=0.0, energy=energies[1], travel_time=20.0))
    return RoadNetwork({0: None, 1: None, 2: None}, edges, frozenset({10, 11}), 10)


def test_line_graph_averages_energy_and_time():
    g, _ = build_line_graph(_chain())
    assert len(g.nodes) == 2
    assert g.arcs[(0, 1)].energy == 5.0
    assert g.arcs[(0, 1)].time == 15.0
    assert g.arcs[(0, 1)].turns == 0


def test_single_edge_line_graph():
    net = RoadNetwork({0: None, 1: None}, (RoadEdge(5, 0, 1, 10.0, 1.0, energy=1.0),), frozenset({5}), 5)
    g, _ = build_line_graph(net)
    assert len(g.nodes) == 1 and len(g.arcs) == 0


def test_line_graph_counts_only_conflicting_lefts():
    # junction 1: in from 0 (east), out north (left) and out east (straight) -> two outgoing arcs
    edges = (RoadEdge(1, 0, 1, 10.0, 1.0, bearing=0.0, energy=1.0),
             RoadEdge(2, 1, 2, 10.0, 1.0, bearing=90.0, energy=1.0),
             RoadEdge(3, 1, 3, 10.0, 1.0, bearing=0.0, energy=1.0),
             RoadEdge(4, 3, 4, 10.0, 1.0, bearing=90.0, energy=1.0))
    net = RoadNetwork({i: None for i in range(5)}, edges, frozenset({1}), 1)
    g, _ = build_line_graph(net)
    idx = {eid: v for v, eid in g.origin.items()}
    assert g.arcs[(idx[1], idx[2])].turns == 1      # left at a junction with two exits
    assert g.arcs[(idx[1], idx[3])].turns == 0      # straight
    assert g.arcs[(idx[3], idx[4])].turns == 0      # left in a plain corridor
    g_all, _ = build_line_graph(net, count_all_lefts=True)
    assert g_all.arcs[(idx[3], idx[4])].turns == 1
    for (u, v) in g.arcs:
        assert edges[[e.id for e in edges].index(g.origin[u])].head == \
            edges[[e.id for e in edges].index(g.origin[v])].tail


def test_negative_cycle_rejected():
    with pytest.raises(NegativeCycle):
        LineGraph(range(2), {(0, 1): (0, -2.0, 1.0), (1, 0): (0, 1.0, 1.0)}, {0})


def test_invalid_windows_and_terminals():
    with pytest.raises(InvalidInstance):
        TimeWindowTable({1: (5, 3)})
    with pytest.raises(InvalidInstance):
        LineGraph(range(2), {(0, 1): (0, 1.0, 1.0)}, {1})


# tours

def test_penalty_worked_example():
    inst = waiting_example()
    t = evaluate_tour((0, 1, 2, 1, 0), inst.graph, inst.windows)
    assert t.first_arrival[1] == 10.0
    assert t.first_arrival[2] == 40.0
    assert t.penalty == 10.0
    assert t.wait == 20.0


def test_open_windows_give_zero_penalty_and_wait():
    inst = toy_network()
    t = evaluate_tour(TOY_TOURS["p3"][0], inst.graph, TimeWindowTable())
    assert t.penalty == 0 and t.wait == 0


def _oracle_penalty(nodes, graph, windows):
    served, clock, pen = set(), 0.0, 0.0
    for k, v in enumerate(nodes):
        if k:
            clock += graph.arcs[(nodes[k - 1], v)].time
        if v in graph.terminal_set and v not in served:
            served.add(v)
            s, e = windows.window(v)
            pen += max(0.0, clock - e)
            clock = max(clock, s) if clock <= e else clock
    return pen


def test_penalty_matches_resimulation_on_random_walks():
    from ecotour.bench.generator import gen_instance
    rng = np.random.default_rng(3)
    for seed in range(10):
        inst = gen_instance(8, 20, 3, seed=seed)
        g = inst.graph
        for _ in range(20):
            walk = [0]
            while len(walk) < 40 and not (g.terminal_set <= set(walk) and walk[-1] == 0 and len(walk) > 1):
                walk.append(int(rng.choice(g.succ[walk[-1]])))
            if walk[-1] != 0 or not g.terminal_set <= set(walk):
                continue
            t = evaluate_tour(walk, g, inst.windows)
            assert t.penalty == pytest.approx(_oracle_penalty(walk, g, inst.windows))
            assert tuple(t.cost) == pytest.approx(path_cost(g, walk)[:2])


def test_toy_tours_costs_and_feasibility():
    inst = toy_network()
    for name, (nodes, cost, feasible) in TOY_TOURS.items():
        t = evaluate_tour(nodes, inst.graph, inst.windows)
        assert tuple(t.cost) == cost, name
        assert (t.penalty == 0) is feasible, name


def test_not_a_tour():
    inst = toy_network()
    with pytest.raises(NotATour):
        evaluate_tour((0, 1, 2, 3), inst.graph, inst.windows)
    with pytest.raises(NotATour):
        evaluate_tour((0, 1, 9, 0), inst.graph, inst.windows)
    with pytest.raises(NotATour):
        evaluate_tour((0, 2, 0), inst.graph, inst.windows)


# dominance and archives

def test_dominance_examples():
    assert not dominates((4, 14), (5, 6)) and not dominates((5, 6), (4, 14))
    assert dominates((4, 14), (4, 14))
    assert dominates((4, 14), (7, 18))


def test_archive_keeps_first_of_ties_and_drops_dominated():
    a = ParetoArchive()
    assert a.add((4, 14)) == (True, [])
    assert a.add((4, 14))[0] is False
    ok, removed = a.add((3, 10))
    assert ok and removed == [(4, 14)]
    a.add((5, 6))
    assert a.costs() == [(3, 10), (5, 6)]


def test_pareto_and_hull_helpers():
    pts = [(4, 14), (5, 6), (6, 11), (8, 10), (7, 18), (6, 6)]
    assert pareto_filter(pts) == [(4, 14), (5, 6)]
    assert lower_hull([(4, 14), (6, 11), (8, 10)]) == [(4, 14), (6, 11), (8, 10)]
    assert lower_hull([(0, 10), (1, 6), (2, 2)]) == [(0, 10), (2, 2)]
    assert supported_subset([(0, 10), (1, 7), (2, 2)]) == [(0, 10), (2, 2)]
    assert dominated_area([(2, 10), (5, 4)], (6, 11)) == 3 * 1 + 1 * 7


def test_instance_round_trip(tmp_path):
    inst = toy_network()
    p = tmp_path / "toy.json"
    save_instance(inst, p)
    back = load_instance(p)
    assert dict(back.graph.arcs) == dict(inst.graph.arcs)
    assert back.windows == inst.windows
    assert back.graph.terminal_set == inst.graph.terminal_set


def test_load_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{\n  \"format\": \n}")
    with pytest.raises(ParseError) as e:
        load_instance(p)
    assert e.value.line == 3
    p.write_text(json.dumps({"format": "nope"}))
    with pytest.raises(ParseError):
        load_instance(p)


def test_road_network_file(tmp_path):
    data = {"format": "ecotour/road-network/1",
            "nodes": [{"id": i, "lat": 0, "lon": 0, "elevation": 0} for i in range(3)],
            "edges": [{"id": 1, "tail": 0, "head": 1, "length": 100, "speed": 10, "bearing": 90},
                      {"id": 2, "tail": 1, "head": 2, "length": 100, "speed": 10, "bearing": 0},
                      {"id": 3, "tail": 2, "head": 0, "length": 100, "speed": 10, "bearing": 180}],
            "terminal_edges": [1, 2], "depot_edge": 1, "windows": {"2": [0, 100]},
            "bearing_convention": "compass"}
    p = tmp_path / "road.json"
    p.write_text(json.dumps(data))
    inst = load_instance(p)
    assert len(inst.graph.nodes) == 3
    assert inst.graph.n_terminals == 2
    assert set(TOY_ARCS)  # fixture import sanity
