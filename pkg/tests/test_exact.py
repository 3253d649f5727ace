from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from ecotour.bench.generator import gen_instance, tighten
from ecotour.bench.oracle import brute_force_pareto, min_cost
from ecotour.errors import InstanceTooLarge, ParseError
from ecotour.exact import (Status, below_segment, build_model, compute_big_m, expected_counts,
                           export_lp, format_lp, parse_lp, read_lp, scalarize, segment_weights,
                           solve_branch_and_bound, solve_milp)
from ecotour.fixtures import TOY_TOURS, toy_network
from ecotour.netmodel import (LineGraph, TimeWindowTable, any_visit_schedule, evaluate_tour,
                              lower_hull, path_cost)

DATA = Path(__file__).parent / "data"


def row_violations(m, values, tol=1e-6):
    bad = []
    for row in m.rows:
        lhs = sum(a * values[c] for c, a in zip(row.cols, row.coefs))
        ok = {"<=": lhs <= row.rhs + tol, ">=": lhs >= row.rhs - tol, "=": abs(lhs - row.rhs) <= tol}[row.sense]
        if not ok:
            bad.append(row.name)
    return bad


def assignment(m, nodes):
    """Variable values encoding a closed walk, copies numbered by visit order, first-visit service."""
    g = m.graph
    vals = np.zeros(m.n_vars)
    for (v, i), col in m.t.items():
        vals[col] = m.big_m.earliest[v] if not (v == g.depot and i == 1) else 0.0
    seen = {}
    copies = []
    for k, v in enumerate(nodes[:-1]):
        seen[v] = seen.get(v, 0) + 1
        copies.append(seen[v])
    copies.append(1)
    clock = 0.0
    served = set()
    remaining = g.n_terminals - 1
    for k, v in enumerate(nodes):
        if k:
            clock += g.arcs[(nodes[k - 1], v)].time
        if k < len(nodes) - 1:
            vals[m.t[(v, copies[k])]] = clock
        if v in g.terminal_set and v not in served and k < len(nodes) - 1:
            served.add(v)
            vals[m.w[(v, copies[k])]] = 1.0
            if v != g.depot:
                remaining -= 1
        if k < len(nodes) - 1:
            key = (v, copies[k], nodes[k + 1], copies[k + 1])
            vals[m.x[key]] += 1.0
            vals[m.y[key]] = remaining
    return vals


def test_expected_counts_match_model():
    inst = toy_network()
    g = inst.graph
    for k in (1, 2, 3):
        for prec in (False, True):
            m = build_model(g, inst.windows, 1.0, 1.0, copies=k, precedence=prec)
            depot_in = len(g.pred[g.depot])
            n_vars, n_rows = expected_counts(len(g.nodes), len(g.arcs), k, g.n_terminals, depot_in, prec)
            assert (m.n_vars, m.n_constraints) == (n_vars, n_rows)


def test_toy_tour_p6_assignment_and_window_flags():
    inst = toy_network()
    m = build_model(inst.graph, inst.windows, 0.5, 0.5, copies=3)
    nodes = TOY_TOURS["p6"][0]
    vals = assignment(m, nodes)
    assert vals[m.t[(5, 1)]] == 20 and vals[m.t[(5, 2)]] == 100
    assert row_violations(m, vals) == []
    assert m.objective_value(vals) == pytest.approx(0.5 * 8 + 0.5 * 10)
    assert (vals[m.w[(5, 1)]], vals[m.w[(5, 2)]], vals[m.w[(5, 3)]]) == (1, 0, 0)
    # serving 5 at its second copy would break its window
    vals[m.w[(5, 1)]], vals[m.w[(5, 2)]] = 0, 1
    assert "close_5_2" in row_violations(m, vals)


def test_late_tour_has_no_valid_assignment():
    inst = toy_network()
    m = build_model(inst.graph, inst.windows, 0.5, 0.5, copies=3)
    vals = assignment(m, TOY_TOURS["p1"][0])
    assert row_violations(m, vals)


def test_big_m_chain_by_hand():
    # 0 -> 1 -> 2 -> 3 -> 0, times 1, 2, 3, 4; terminals 0 and 2 with window [5, 8] at 2
    arcs = {(0, 1): (0, 1.0, 1.0), (1, 2): (0, 1.0, 2.0), (2, 3): (0, 1.0, 3.0), (3, 0): (0, 1.0, 4.0)}
    g = LineGraph(range(4), arcs, {0, 2})
    tw = TimeWindowTable({2: (5.0, 8.0)})
    bm = compute_big_m(g, tw, copies=1)
    assert bm.earliest == {0: 0.0, 1: 1.0, 2: 3.0, 3: 6.0}
    horizon = 8.0 + 1 * 4 * 4.0
    assert bm.deadline == {0: horizon, 2: 8.0}
    assert bm.latest == horizon + 7.0        # back from 2 to the depot takes 3 + 4
    assert bm.upper[2] == bm.latest - 8.0
    assert bm.lower[2] == 2.0
    assert bm.arc[(0, 1)] == bm.latest + 1.0 - 1.0
    assert bm.arc[(3, 0)] == bm.latest + 4.0


def test_uniform_tightening_never_increases_upper_slack():
    for seed in range(5):
        inst = gen_instance(10, 26, 4, seed=seed, open_start=True)
        base = compute_big_m(inst.graph, inst.windows, 2)
        for f in (0.9, 0.6, 0.4):
            t = compute_big_m(inst.graph, tighten(inst.windows, f), 2)
            for v in inst.graph.terminals:
                if v != inst.graph.depot:
                    assert t.upper[v] <= base.upper[v] + 1e-9


def test_model_too_large():
    inst = toy_network()
    with pytest.raises(InstanceTooLarge):
        build_model(inst.graph, inst.windows, 1, 1, copies=3, max_variables=100)


@pytest.mark.parametrize("engine", ["auto", "linprog"])
def test_branch_and_bound_min_energy_matches_oracle(engine):
    inst = toy_network()
    m = build_model(inst.graph, inst.windows, 0.0, 1.0, copies=2, precedence=True)
    res = solve_branch_and_bound(m, time_limit=120, engine=engine)
    assert res.status is Status.OPTIMAL
    ref = brute_force_pareto(inst.graph, inst.windows, revisit_cap=2)
    assert res.objective == pytest.approx(min_cost(ref, 0.0, 1.0), abs=1e-6)
    t = evaluate_tour(res.tour, inst.graph, inst.windows)
    assert t.energy == pytest.approx(res.objective, abs=1e-6)


def test_milp_and_builtin_agree_on_small_instances():
    for seed in range(3):
        inst = gen_instance(8, 18, 3, seed=seed, open_start=True)
        for a, b in ((1.0, 0.0), (0.3, 0.7)):
            m = build_model(inst.graph, inst.windows, a, b, copies=2, precedence=True)
            r1 = solve_branch_and_bound(m, time_limit=120)
            r2 = solve_milp(m, time_limit=120)
            assert r1.status is Status.OPTIMAL and r2.status is Status.OPTIMAL
            assert r1.objective == pytest.approx(r2.objective, abs=1e-6)
            turns, energy, _ = path_cost(inst.graph, r1.tour)
            assert a * turns + b * energy == pytest.approx(r1.objective, abs=1e-6)
            assert any_visit_schedule(r1.tour, inst.graph, inst.windows)[0]
            assert evaluate_tour(r1.tour, inst.graph, inst.windows).penalty == 0


def test_infeasible_windows():
    inst = toy_network(deadline=5.0)
    m = build_model(inst.graph, inst.windows, 1.0, 1.0, copies=1)
    assert solve_branch_and_bound(m, time_limit=60).status is Status.INFEASIBLE
    m = build_model(inst.graph, inst.windows, 1.0, 1.0, copies=2)
    assert solve_milp(m, time_limit=60).status is Status.INFEASIBLE


def test_precedence_and_copies_monotone():
    inst = toy_network(slow_link=True)
    objs = {}
    for k in (2, 3):
        for prec in (False, True):
            m = build_model(inst.graph, inst.windows, 0.5, 0.5, copies=k, precedence=prec)
            r = solve_milp(m, time_limit=120)
            assert r.status is Status.OPTIMAL
            objs[(k, prec)] = r.objective
    assert objs[(2, False)] == pytest.approx(objs[(2, True)])
    assert objs[(3, False)] == pytest.approx(objs[(3, True)])
    assert objs[(3, False)] <= objs[(2, False)] + 1e-9


def test_integral_root_needs_no_branching():
    g = LineGraph(range(2), {(0, 1): (1, 2.5, 10.0), (1, 0): (0, -1.0, 5.0)}, {0, 1})
    m = build_model(g, TimeWindowTable({1: (0.0, 30.0)}), 0.5, 0.5, copies=1)
    r = solve_branch_and_bound(m)
    assert r.status is Status.OPTIMAL and r.nodes <= 1
    assert r.tour == (0, 1, 0)


# LP files

def test_lp_golden_file():
    g = LineGraph(range(2), {(0, 1): (1, 2.5, 10.0), (1, 0): (0, -1.0, 5.0)}, {0, 1})
    m = build_model(g, TimeWindowTable({1: (0.0, 30.0)}), 0.5, 0.5, copies=1)
    assert format_lp(m) == (DATA / "two_node.lp").read_text()


def test_lp_round_trip_and_determinism(tmp_path):
    inst = toy_network()
    m = build_model(inst.graph, inst.windows, 0.25, 0.75, copies=3, precedence=True)
    p1, p2 = tmp_path / "a.lp", tmp_path / "b.lp"
    export_lp(m, p1)
    export_lp(build_model(inst.graph, inst.windows, 0.25, 0.75, copies=3, precedence=True), p2)
    assert p1.read_bytes() == p2.read_bytes()
    prob = read_lp(p1)
    assert len(prob.rows) == m.n_constraints
    assert set(prob.variables) == set(m.names)
    for k, c in enumerate(m.obj):
        assert prob.objective.get(m.names[k], 0.0) == pytest.approx(c, abs=1e-9)
    for row, (name, coefs, sense, rhs) in zip(m.rows, prob.rows):
        assert name == row.name and sense == row.sense
        assert rhs == pytest.approx(row.rhs, abs=1e-9)
        want = {}
        for c, a in zip(row.cols, row.coefs):
            want[m.names[c]] = want.get(m.names[c], 0.0) + a
        assert coefs.keys() == want.keys()
        for n, a in want.items():
            assert coefs[n] == pytest.approx(a, abs=1e-9)
    assert set(prob.binaries) == {m.names[k] for k, i in enumerate(m.integer) if i}


def test_lp_exported_file_solves_like_builtin(tmp_path):
    """Re-solve the parsed LP file with an independent assembly and compare optima."""
    from scipy.optimize import Bounds, LinearConstraint, milp
    inst = toy_network()
    m = build_model(inst.graph, inst.windows, 0.5, 0.5, copies=2)
    export_lp(m, tmp_path / "m.lp")
    prob = read_lp(tmp_path / "m.lp")
    names = prob.variables
    idx = {n: k for k, n in enumerate(names)}
    c = np.array([prob.objective.get(n, 0.0) for n in names])
    a = np.zeros((len(prob.rows), len(names)))
    lo = np.full(len(prob.rows), -np.inf)
    hi = np.full(len(prob.rows), np.inf)
    for r, (_, coefs, sense, rhs) in enumerate(prob.rows):
        for n, v in coefs.items():
            a[r, idx[n]] = v
        if sense in ("<=", "="):
            hi[r] = rhs
        if sense in (">=", "="):
            lo[r] = rhs
    lb = np.array([prob.bounds.get(n, (0.0, 1.0))[0] for n in names])
    ub = np.array([prob.bounds.get(n, (0.0, 1.0))[1] for n in names])
    integ = np.array([n in prob.binaries for n in names], dtype=int)
    res = milp(c, constraints=[LinearConstraint(a, lo, hi)], integrality=integ, bounds=Bounds(lb, ub))
    assert res.status == 0
    assert res.fun == pytest.approx(solve_milp(m).objective, abs=1e-6)


def test_lp_parse_errors():
    with pytest.raises(ParseError) as e:
        parse_lp("Minimize\n obj: x\nSubject To\n c1: x + y\nEnd\n")
    assert e.value.line == 4
    with pytest.raises(ParseError):
        parse_lp("x + y <= 3\n")


# scalarization

def test_segment_weights_from_table_costs():
    alpha, beta, omega = segment_weights((4, 14), (5, 6))
    assert omega == 8
    assert Fraction(alpha).limit_denominator(100) == Fraction(8, 9)
    assert Fraction(beta).limit_denominator(100) == Fraction(1, 9)
    assert below_segment((5, 9), (4, 14), (6, 6))
    assert not below_segment((5, 10), (4, 14), (6, 6))


def test_scalarize_toy_is_supported_subset():
    inst = toy_network()
    res = scalarize(inst.graph, inst.windows, revisit_cap=3, time_limit=120)
    assert res.complete
    ref = brute_force_pareto(inst.graph, inst.windows, revisit_cap=3)
    assert res.costs == lower_hull([tuple(t.cost) for t in ref])
    turns = [c[0] for c in res.costs]
    energies = [c[1] for c in res.costs]
    assert turns == sorted(set(turns)) and energies == sorted(set(energies), reverse=True)


def test_scalarize_single_point_when_extremes_coincide():
    inst = gen_instance(12, 32, 4, seed=0, open_start=True)
    res = scalarize(inst.graph, inst.windows, revisit_cap=3, time_limit=60)
    assert len(res.tours) == 1
    assert len(res.calls) == 4   # two lexicographic extremes, no recursion


@pytest.mark.parametrize("seed", [2])
def test_scalarize_builtin_engine_matches_hull(seed):
    inst = gen_instance(12, 32, 4, seed=seed, open_start=True)
    ref = brute_force_pareto(inst.graph, inst.windows, revisit_cap=3)
    res = scalarize(inst.graph, inst.windows, revisit_cap=3, time_limit=300, engine="auto")
    assert res.complete
    assert res.costs == lower_hull([tuple(t.cost) for t in ref])


def test_scalarize_infeasible_returns_empty():
    inst = toy_network(deadline=5.0)
    res = scalarize(inst.graph, inst.windows, revisit_cap=2, time_limit=60)
    assert res.tours == [] and res.complete
