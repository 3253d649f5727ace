"""Node-copy MIP for the bi-objective tour problem under a fixed weighting.

Every node gets K copies. Binary x[u,i,v,j] moves from copy i of u to copy j of
v; a single-commodity flow y removes subtours; departure times t with big-M
ordering constraints forbid reusing a copy; binary w[v,i] marks the copy of a
terminal that is served inside its window.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from ..errors import InstanceTooLarge, Unreachable
from ..paths import biobjective_paths, shortest_time_tree

DEFAULT_MAX_VARIABLES = 200_000


@dataclass(frozen=True)
class BigM:
    arc: dict        # (u, v) -> M_uv
    upper: dict      # terminal -> M-bar (slack on the window end)
    lower: dict      # terminal -> M-underbar (slack on the window start)
    earliest: dict   # node -> shortest time from the depot
    latest: float    # common latest departure time
    deadline: dict   # terminal -> finite window end used in the model


def compute_big_m(graph, windows, copies=None, path_budget=None):
    """Big-M constants from earliest and latest departure times.

    earliest(v) is the fastest arrival from the depot. The common latest
    departure is the largest window end plus the longest duration among Pareto
    paths from any terminal back to the depot. Unbounded window ends are
    replaced by a horizon that no schedule without idle waiting can exceed.
    """
    tree = shortest_time_tree(graph, graph.depot)
    for v in graph.nodes:
        if v not in tree:
            raise Unreachable(graph.depot, v)
    earliest = {v: tree[v][0] for v in graph.nodes}
    k = copies or graph.n_terminals
    finite = [x for v in graph.terminals for x in windows.window(v) if math.isfinite(x)]
    horizon = max(finite, default=0.0) + k * len(graph.nodes) * graph.max_time()
    deadline = {}
    for v in graph.terminals:
        e = windows.end(v)
        deadline[v] = e if math.isfinite(e) else horizon
    back = 0.0
    for u in graph.terminals:
        if u == graph.depot:
            continue
        res = biobjective_paths(graph, u, graph.depot, path_budget)
        back = max(back, max(p.duration for p in res.paths))
    latest = max(deadline.values()) + back
    arc = {}
    for (u, v), a in graph.arcs.items():
        arc[(u, v)] = max(0.0, latest + a.time - earliest[v])
    upper = {v: max(0.0, latest - deadline[v]) for v in graph.terminals}
    lower = {v: max(0.0, windows.start(v) - earliest[v]) for v in graph.terminals}
    return BigM(arc, upper, lower, earliest, latest, deadline)


@dataclass
class Row:
    name: str
    cols: list
    coefs: list
    sense: str   # "<=", ">=" or "="
    rhs: float


@dataclass
class MipModel:
    graph: object
    windows: object
    alpha: float
    beta: float
    copies: int
    big_m: BigM
    precedence: bool = False
    names: list = field(default_factory=list)
    obj: list = field(default_factory=list)
    lb: list = field(default_factory=list)
    ub: list = field(default_factory=list)
    integer: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    x: dict = field(default_factory=dict)
    y: dict = field(default_factory=dict)
    t: dict = field(default_factory=dict)
    w: dict = field(default_factory=dict)
    _arrays: object = None

    @property
    def n_vars(self):
        return len(self.names)

    @property
    def n_constraints(self):
        return len(self.rows)

    def add_var(self, name, lb, ub, integer=False, obj=0.0):
        self.names.append(name)
        self.lb.append(lb)
        self.ub.append(ub)
        self.integer.append(integer)
        self.obj.append(obj)
        return len(self.names) - 1

    def add_row(self, name, terms, sense, rhs):
        cols = [c for c, _ in terms]
        coefs = [a for _, a in terms]
        self.rows.append(Row(name, cols, coefs, sense, float(rhs)))

    def arrays(self):
        """(c, A_ub, b_ub, A_eq, b_eq, lb, ub, integrality) with >= rows negated into <=."""
        if self._arrays is not None:
            return self._arrays
        ub_r, ub_c, ub_v, ub_b = [], [], [], []
        eq_r, eq_c, eq_v, eq_b = [], [], [], []
        for row in self.rows:
            if row.sense == "=":
                k = len(eq_b)
                eq_r += [k] * len(row.cols)
                eq_c += row.cols
                eq_v += row.coefs
                eq_b.append(row.rhs)
            else:
                sign = 1.0 if row.sense == "<=" else -1.0
                k = len(ub_b)
                ub_r += [k] * len(row.cols)
                ub_c += row.cols
                ub_v += [sign * a for a in row.coefs]
                ub_b.append(sign * row.rhs)
        n = self.n_vars
        a_ub = sparse.csr_matrix((ub_v, (ub_r, ub_c)), shape=(len(ub_b), n))
        a_eq = sparse.csr_matrix((eq_v, (eq_r, eq_c)), shape=(len(eq_b), n))
        self._arrays = (np.array(self.obj, float), a_ub, np.array(ub_b, float), a_eq,
                        np.array(eq_b, float), np.array(self.lb, float), np.array(self.ub, float),
                        np.array(self.integer, bool))
        return self._arrays

    def objective_value(self, values):
        return float(np.dot(self.obj, values))


def expected_counts(n_nodes, n_arcs, copies, n_terminals, depot_in_degree, precedence=False):
    """Closed-form (variables, constraints) of build_model."""
    k = copies
    n_vars = 2 * n_arcs * k * k + n_nodes * k + n_terminals * k
    n_rows = (n_nodes * k                              # copy flow balance
              + (n_nodes - 1)                          # commodity delivery
              + n_arcs * k * k                         # flow only on used moves
              + n_arcs * k * k - depot_in_degree * k   # departure ordering
              + 1                                      # leave the first depot copy once
              + n_nodes * k - 1                        # every other copy left at most once
              + n_terminals * k                        # served copy must be visited
              + n_terminals                            # some copy served
              + 2 * n_terminals * k)                   # window at the served copy
    if precedence:
        n_rows += (n_nodes - 1) * (k - 1)
    return n_vars, n_rows


def build_model(graph, windows, alpha, beta, copies=None, cap=None, big_m=None,
                precedence=False, max_variables=DEFAULT_MAX_VARIABLES):
    """Assemble the MIP for objective alpha * turns + beta * energy.

    The number of copies is min(n_T, cap) unless given explicitly.
    """
    n_t = graph.n_terminals
    k = copies if copies is not None else min(n_t, cap or n_t)
    k = max(1, k)
    n_vars, _ = expected_counts(len(graph.nodes), len(graph.arcs), k, n_t, 0)
    if n_vars > max_variables:
        raise InstanceTooLarge(f"model needs {n_vars} variables, limit is {max_variables}")
    bm = big_m or compute_big_m(graph, windows, k)
    m = MipModel(graph, windows, alpha, beta, k, bm, precedence)
    copies_r = range(1, k + 1)
    arcs = sorted(graph.arcs.items())
    depot = graph.depot

    for (u, v), a in arcs:
        c = alpha * a.turns + beta * a.energy
        for i in copies_r:
            for j in copies_r:
                m.x[(u, i, v, j)] = m.add_var(f"x_{u}_{i}_{v}_{j}", 0.0, 1.0, True, c)
    for (u, v), a in arcs:
        for i in copies_r:
            for j in copies_r:
                m.y[(u, i, v, j)] = m.add_var(f"y_{u}_{i}_{v}_{j}", 0.0, float(n_t - 1))
    for v in graph.nodes:
        for i in copies_r:
            lo = 0.0 if (v == depot and i == 1) else bm.earliest[v]
            m.t[(v, i)] = m.add_var(f"t_{v}_{i}", lo, bm.latest)
    for v in graph.terminals:
        for i in copies_r:
            m.w[(v, i)] = m.add_var(f"w_{v}_{i}", 0.0, 1.0, True)

    out_x = {key: [] for key in m.t}
    in_x = {key: [] for key in m.t}
    for (u, i, v, j), col in m.x.items():
        out_x[(u, i)].append(col)
        in_x[(v, j)].append(col)
    y_in = {v: [] for v in graph.nodes}
    y_out = {v: [] for v in graph.nodes}
    for (u, i, v, j), col in m.y.items():
        y_out[u].append(col)
        y_in[v].append(col)

    for v in graph.nodes:
        for i in copies_r:
            m.add_row(f"flow_{v}_{i}", [(c, 1.0) for c in in_x[(v, i)]] +
                      [(c, -1.0) for c in out_x[(v, i)]], "=", 0.0)
    for v in graph.nodes:
        if v == depot:
            continue
        rhs = 1.0 if v in graph.terminal_set else 0.0
        m.add_row(f"deliver_{v}", [(c, 1.0) for c in y_in[v]] + [(c, -1.0) for c in y_out[v]], "=", rhs)
    for key, ycol in m.y.items():
        m.add_row("carry_{}_{}_{}_{}".format(*key), [(ycol, 1.0), (m.x[key], -float(n_t - 1))], "<=", 0.0)
    for (u, v), a in arcs:
        big = bm.arc[(u, v)]
        for i in copies_r:
            for j in copies_r:
                if v == depot and j == 1:
                    continue
                m.add_row(f"order_{u}_{i}_{v}_{j}",
                          [(m.t[(u, i)], 1.0), (m.t[(v, j)], -1.0), (m.x[(u, i, v, j)], big)],
                          "<=", big - a.time)
    m.add_row("start", [(c, 1.0) for c in out_x[(depot, 1)]], "=", 1.0)
    for v in graph.nodes:
        for i in copies_r:
            if v == depot and i == 1:
                continue
            m.add_row(f"once_{v}_{i}", [(c, 1.0) for c in out_x[(v, i)]], "<=", 1.0)
    for v in graph.terminals:
        for i in copies_r:
            m.add_row(f"served_{v}_{i}", [(m.w[(v, i)], 1.0)] + [(c, -1.0) for c in out_x[(v, i)]], "<=", 0.0)
    for v in graph.terminals:
        m.add_row(f"serve_{v}", [(m.w[(v, i)], 1.0) for i in copies_r], ">=", 1.0)
    for v in graph.terminals:
        s = windows.start(v)
        e = bm.deadline[v]
        lo, hi = bm.lower[v], bm.upper[v]
        for i in copies_r:
            m.add_row(f"open_{v}_{i}", [(m.t[(v, i)], 1.0), (m.w[(v, i)], -lo)], ">=", s - lo)
            m.add_row(f"close_{v}_{i}", [(m.t[(v, i)], 1.0), (m.w[(v, i)], hi)], "<=", e + hi)
    if precedence:
        for v in graph.nodes:
            if v == depot:
                continue
            for i in range(1, k):
                m.add_row(f"layer_{v}_{i}", [(c, 1.0) for c in out_x[(v, i)]] +
                          [(c, -1.0) for c in out_x[(v, i + 1)]], ">=", 0.0)
    return m


def extract_walk(model, values, tol=1e-6):
    """Follow the chosen moves from the first depot copy and return the node sequence.

    Uses an Euler circuit over used copy-moves, so every selected move is walked
    exactly once even if a copy is entered more than once.
    """
    succ = {}
    used = 0
    for (u, i, v, j), col in sorted(model.x.items()):
        reps = int(round(values[col]))
        if reps > 0 and abs(values[col] - reps) < tol:
            succ.setdefault((u, i), []).extend([(v, j)] * reps)
            used += reps
    for key in succ:
        succ[key].reverse()
    start = (model.graph.depot, 1)
    stack = [start]
    circuit = []
    while stack:
        top = stack[-1]
        nxt = succ.get(top)
        if nxt:
            stack.append(nxt.pop())
        else:
            circuit.append(stack.pop())
    circuit.reverse()
    if len(circuit) - 1 != used:
        raise ValueError("selected moves do not form a single closed walk from the depot")
    return tuple(v for v, _ in circuit)
