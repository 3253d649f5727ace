"""Supported points of the frontier by recursive weighted-sum solves.

The two lexicographic extremes come first (fewest turns, then least energy,
and the reverse). Between two known points a and b the weights are the normal
of the segment ab; a solve that lands strictly below the segment yields a new
supported point and splits the interval, left part first.
"""
import time
from fractions import Fraction
from dataclasses import dataclass, field

from ..netmodel import any_visit_schedule, evaluate_tour, path_cost
from .bnb import Status, solve_branch_and_bound, solve_milp
from .model import DEFAULT_MAX_VARIABLES, build_model, compute_big_m

CUTOFF_TOL = 1e-7


def segment_weights(a, b):
    """Normalised weights whose level lines are parallel to the segment from a to b.

    With omega = |energy gap / turn gap| the weights are alpha = omega / (1 + omega)
    and beta = 1 / (1 + omega). Returns (alpha, beta, omega), omega as a Fraction.
    """
    dt = Fraction(b[0]) - Fraction(a[0])
    de = Fraction(a[1]) - Fraction(b[1])
    if dt <= 0 or de <= 0:
        raise ValueError("points must be mutually non-dominated with a left of b")
    omega = de / dt
    return float(omega / (1 + omega)), float(1 / (1 + omega)), omega


def below_segment(p, a, b):
    """Exact test that p lies strictly below the line through a and b."""
    dt = Fraction(b[0]) - Fraction(a[0])
    de = Fraction(a[1]) - Fraction(b[1])
    return de * Fraction(p[0]) + dt * Fraction(p[1]) < de * Fraction(a[0]) + dt * Fraction(a[1])


@dataclass
class SolveCall:
    alpha: float
    beta: float
    status: str
    objective: float | None
    nodes: int
    elapsed: float


@dataclass
class ScalarizationResult:
    tours: list = field(default_factory=list)
    calls: list = field(default_factory=list)
    complete: bool = True

    @property
    def costs(self):
        return [t.cost for t in self.tours]


class _Solver:
    def __init__(self, graph, windows, copies, precedence, engine, deadline, max_variables):
        self.graph = graph
        self.windows = windows
        self.copies = copies
        self.precedence = precedence
        self.engine = engine
        self.deadline = deadline
        self.max_variables = max_variables
        self.big_m = compute_big_m(graph, windows, copies)
        self.calls = []
        self.complete = True

    def remaining(self):
        if self.deadline is None:
            return None
        return max(0.0, self.deadline - time.monotonic())

    def solve(self, alpha, beta, cutoff=None, turn_cap=None, energy_cap=None):
        """Best tour for alpha*turns + beta*energy, optionally with side caps.
        Returns (nodes, turns, energy) or None."""
        m = build_model(self.graph, self.windows, alpha, beta, copies=self.copies,
                        big_m=self.big_m, precedence=self.precedence,
                        max_variables=self.max_variables)
        turn_terms = [(col, float(self.graph.arcs[(u, v)].turns)) for (u, _, v, _), col in m.x.items()]
        energy_terms = [(col, float(self.graph.arcs[(u, v)].energy)) for (u, _, v, _), col in m.x.items()]
        if turn_cap is not None:
            m.add_row("cap_turns", turn_terms, "<=", turn_cap + 1e-6)
        if energy_cap is not None:
            m.add_row("cap_energy", energy_terms, "<=", energy_cap + 1e-6 * max(1.0, abs(energy_cap)))
        if self.engine == "milp":
            res = solve_milp(m, time_limit=self.remaining(), cutoff=cutoff)
        else:
            res = solve_branch_and_bound(m, time_limit=self.remaining(), engine=self.engine, cutoff=cutoff)
        self.calls.append(SolveCall(alpha, beta, res.status.value, res.objective, res.nodes, res.elapsed))
        if res.status == Status.TIMED_OUT:
            self.complete = False
        if res.tour is None:
            return None
        turns, energy, _ = path_cost(self.graph, res.tour)
        return res.tour, turns, energy


def _lexmin(solver, first):
    if first == "turns":
        a = solver.solve(1.0, 0.0)
        if a is None:
            return None
        return solver.solve(0.0, 1.0, turn_cap=a[1]) or a
    a = solver.solve(0.0, 1.0)
    if a is None:
        return None
    return solver.solve(1.0, 0.0, energy_cap=a[2]) or a


def scalarize(graph, windows, revisit_cap=None, time_limit=None, precedence=True, engine="milp",
              max_variables=DEFAULT_MAX_VARIABLES):
    """All supported frontier points of the any-visit model with `revisit_cap` copies per node.

    Returned tours are evaluated with first-visit semantics; each was checked to
    admit an on-time service schedule. `complete` is False when the time limit
    cut a solve short, in which case the tours found so far are still supported
    but some may be missing.
    """
    n_t = graph.n_terminals
    copies = max(1, min(n_t, revisit_cap or n_t))
    deadline = None if time_limit is None else time.monotonic() + time_limit
    solver = _Solver(graph, windows, copies, precedence, engine, deadline, max_variables)
    result = ScalarizationResult()
    found = {}

    def keep(sol):
        nodes, turns, energy = sol
        key = (turns, energy)
        if key not in found:
            ok, _ = any_visit_schedule(nodes, graph, windows)
            if not ok:
                raise RuntimeError(f"solver returned a tour without an on-time schedule: {nodes}")
            found[key] = nodes
        return key

    def between(a, b):
        # a has fewer turns, b less energy
        if solver.remaining() == 0.0:
            solver.complete = False
            return
        alpha, beta, _ = segment_weights(a, b)
        level = alpha * a[0] + beta * a[1]
        sol = solver.solve(alpha, beta, cutoff=level - CUTOFF_TOL * max(1.0, abs(level)))
        if sol is None or not below_segment((sol[1], sol[2]), a, b):
            return
        p = keep(sol)
        between(a, p)
        between(p, b)

    low_t = _lexmin(solver, "turns")
    low_e = _lexmin(solver, "energy") if low_t is not None else None
    if low_t is not None:
        a = keep(low_t)
    if low_e is not None:
        b = keep(low_e)
        if low_t is not None and b != a:
            between(a, b)
    result.calls = solver.calls
    result.complete = solver.complete
    result.tours = [evaluate_tour(found[k], graph, windows) for k in sorted(found)]
    return result
