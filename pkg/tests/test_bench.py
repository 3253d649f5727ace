import math

import numpy as np
import pytest

from ecotour.bench import (compare_frontiers, enumerate_by_permutation, exists_feasible_tour,
                           gen_instance, load_spb, parse_spb, synthetic_spb, write_synthetic_suite)
from ecotour.bench.generator import tighten
from ecotour.bench.oracle import brute_force_pareto
from ecotour.bench.spb import SPB_SIZES, format_spb
from ecotour.bench.suite import REPORT_COLUMNS, report_csv, run_suite
from ecotour.errors import ParseError
from ecotour.fixtures import toy_network, waiting_example
from ecotour.netmodel import evaluate_tour, strictly_dominates
from ecotour.paths import find_negative_cycle


# SPB files

SMALL = """# three nodes
3
0 5 7
5 0 4
! comment
7 4 0
0 100
10 40
0 60
"""


def test_parse_spb_small():
    times, windows = parse_spb(SMALL)
    assert times.shape == (3, 3) and times[0, 2] == 7
    assert windows == [(0, 100), (10, 40), (0, 60)]


@pytest.mark.parametrize("text, line", [
    ("3\n0 1 x\n", 2),
    ("3\n0 1 2\n1 0 2\n1 2 0\n0 10\n5 1\n0 3\n", 6),
    ("3\n0 1 2\n1 0 -2\n1 2 0\n0 1\n0 1\n0 1\n", 3),
    ("2\n0 1\n1 0\n0 5\n", 4),
    ("2\n0 1\n1 0\n0 5\n0 5\n9\n", 6),
    ("", 1),
])
def test_parse_spb_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as e:
        parse_spb(text, "bad.txt")
    assert e.value.line == line


def test_load_spb_terminal_share(tmp_path):
    times, windows = synthetic_spb(46, seed=1)
    p = tmp_path / "rc_204.1.txt"
    p.write_text(format_spb(times, windows))
    inst = load_spb(p, 0.10, rng_seed=3)
    g = inst.graph
    assert g.n_terminals == 5 and g.depot == 0 and 0 in g.terminal_set
    assert inst.revisit_cap == 4
    for v in g.nodes:
        if v not in g.terminal_set:
            assert not windows_constrained(inst.windows, v)
    for v in g.terminal_set:
        assert inst.windows.window(v) == pytest.approx(windows[v])
    assert load_spb(p, 0.10, rng_seed=3).meta["hash"] == inst.meta["hash"]
    assert load_spb(p, 0.10, rng_seed=4).meta["hash"] != inst.meta["hash"]
    assert load_spb(p, 0.20, rng_seed=3).graph.n_terminals == 10
    for a in g.arcs.values():
        assert a.turns in (0, 1) and 0 <= a.energy < 10


def windows_constrained(windows, v):
    s, e = windows.window(v)
    return s > 0 or e < math.inf


def test_synthetic_suite_is_feasible(tmp_path):
    paths = write_synthetic_suite(tmp_path, seed=0)
    assert sorted(p.stem for p in paths) == sorted(SPB_SIZES)
    for p in paths:
        times, windows = parse_spb(p.read_text())
        assert len(times) == SPB_SIZES[p.stem]
        inst = load_spb(p, 0.2, rng_seed=0)
        found, walk = exists_feasible_tour(inst.graph, inst.windows, time_limit=30)
        assert found
        assert evaluate_tour(walk, inst.graph, inst.windows).penalty == 0


# frontier comparison

def quadratic_report(cand, ref):
    cov = sum(any(c[0] <= r[0] and c[1] <= r[1] for c in cand) for r in ref) / len(ref)
    dom = sum(any(strictly_dominates(r, c) for r in ref) for c in cand) / len(cand)
    return cov, dom


@pytest.mark.parametrize("seed", range(20))
def test_compare_frontiers_matches_quadratic_scan(seed):
    rng = np.random.default_rng(seed)
    cand = [tuple(map(float, x)) for x in rng.integers(0, 8, size=(int(rng.integers(1, 12)), 2))]
    ref = [tuple(map(float, x)) for x in rng.integers(0, 8, size=(int(rng.integers(1, 12)), 2))]
    rep = compare_frontiers(cand, ref)
    cov, dom = quadratic_report(cand, ref)
    assert rep.coverage == pytest.approx(cov)
    assert rep.dominated_fraction == pytest.approx(dom)


def test_compare_identical_frontiers():
    z = [(2.0, 10.0), (5.0, 4.0)]
    rep = compare_frontiers(z, z)
    assert (rep.coverage, rep.dominated_fraction, rep.area_ratio) == (1.0, 0.0, 1.0)
    assert compare_frontiers([], z).coverage == 0.0


# reference enumerators

def test_toy_brute_force_frontier():
    inst = toy_network()
    costs = sorted(tuple(t.cost) for t in brute_force_pareto(inst.graph, inst.windows, revisit_cap=3))
    assert (4, 14) in costs
    assert all(not strictly_dominates(c, (4, 14)) for c in costs)


@pytest.mark.parametrize("seed", range(8))
def test_two_enumerators_agree(seed):
    inst = gen_instance(9, 22, 3, seed=seed)
    for service in ("first", "any"):
        a = brute_force_pareto(inst.graph, inst.windows, revisit_cap=3, service=service)
        b = enumerate_by_permutation(inst.graph, inst.windows, revisit_cap=3, service=service)
        assert sorted(tuple(t.cost) for t in a) == sorted(tuple(t.cost) for t in b)


@pytest.mark.parametrize("seed", range(5))
def test_pruning_does_not_change_result(seed):
    inst = gen_instance(8, 18, 3, seed=seed, tw_tightness=0.7)
    a = brute_force_pareto(inst.graph, inst.windows, revisit_cap=2, prune=True)
    b = brute_force_pareto(inst.graph, inst.windows, revisit_cap=2, prune=False)
    assert sorted(tuple(t.cost) for t in a) == sorted(tuple(t.cost) for t in b)


def test_feasibility_oracle_waits_at_passed_terminals():
    inst = waiting_example()
    found, walk = exists_feasible_tour(inst.graph, inst.windows)
    assert found and walk == (0, 2, 1, 0)
    inst = toy_network(deadline=5.0)
    assert exists_feasible_tour(inst.graph, inst.windows) == (False, None)


# generator

@pytest.mark.parametrize("seed", range(10))
def test_generator_invariants(seed):
    inst = gen_instance(15, 40, 4, seed=seed)
    g = inst.graph
    assert len(g.nodes) == 15 and g.n_terminals == 4 and g.depot == 0
    assert find_negative_cycle(g, "energy") is None
    for v in g.nodes:
        seen = {v}
        stack = [v]
        while stack:
            for w in g.succ[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        assert seen == set(g.nodes)
    found, _ = exists_feasible_tour(g, inst.windows, time_limit=30)
    assert found
    assert gen_instance(15, 40, 4, seed=seed).graph.arcs == g.arcs


def test_tighten_scales_span():
    inst = gen_instance(10, 26, 4, seed=2)
    t = tighten(inst.windows, 0.5)
    for v in inst.graph.terminals:
        s, e = inst.windows.window(v)
        s2, e2 = t.window(v)
        assert s2 == s
        if e < math.inf:
            assert e2 == pytest.approx(s + 0.5 * (e - s))


# suite

def test_run_suite_rows(tmp_path):
    times, windows = synthetic_spb(12, seed=0)
    (tmp_path / "tiny.txt").write_text(format_spb(times, windows))
    rows = run_suite(tmp_path, ("10", "20"), iterations=1, seed=0, exact_limit=30.0)
    assert [(r.scenario, r.instance) for r in rows] == [("10", "tiny"), ("20", "tiny")]
    for r in rows:
        assert r.status == "ok" and r.feasible == "yes" and r.Z_LS >= 1
    text = report_csv(rows)
    assert text.splitlines()[0] == ",".join(REPORT_COLUMNS)
    with pytest.raises(FileNotFoundError):
        run_suite(tmp_path / "none")


def test_run_suite_isolates_bad_files(tmp_path):
    (tmp_path / "bad.txt").write_text("3\n0 1\n")
    rows = run_suite(tmp_path, ("10",), iterations=1)
    assert rows[0].status.startswith("error: ParseError")
