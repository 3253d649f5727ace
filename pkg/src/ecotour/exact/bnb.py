"""Best-first branch and bound on LP relaxations.

LP relaxations are solved by HiGHS: a persistent highspy model re-optimised
from the previous basis when highspy is installed, otherwise scipy's linprog.
The tree search, branching rule and incumbent handling live here.
"""
import heapq
import itertools
import math
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .model import extract_walk

INT_TOL = 1e-6


class Status(Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    TIMED_OUT = "timed_out"


@dataclass
class SolveResult:
    status: Status
    tour: tuple | None = None
    objective: float | None = None
    bound: float | None = None
    values: np.ndarray | None = None
    nodes: int = 0
    elapsed: float = 0.0

    @property
    def has_solution(self):
        return self.tour is not None


class LinprogRelaxation:
    """Cold-started LP solves through scipy.optimize.linprog."""

    def __init__(self, model):
        self.arrays = model.arrays()

    def solve(self, lb, ub):
        c, a_ub, b_ub, a_eq, b_eq, _, _, _ = self.arrays
        res = linprog(c, A_ub=a_ub if a_ub.shape[0] else None, b_ub=b_ub if a_ub.shape[0] else None,
                      A_eq=a_eq if a_eq.shape[0] else None, b_eq=b_eq if a_eq.shape[0] else None,
                      bounds=np.column_stack([lb, ub]), method="highs")
        if res.status == 0:
            return res.fun, res.x
        if res.status == 2:
            return None, None
        raise RuntimeError(f"LP relaxation failed: {res.message}")


class HighsRelaxation:
    """One persistent HiGHS LP; each solve only changes column bounds and
    re-optimises from the previous basis with the dual simplex."""

    def __init__(self, model):
        import highspy
        self._hs = highspy
        c, a_ub, b_ub, a_eq, b_eq, lb, ub, _ = model.arrays()
        a = sparse.vstack([a_ub, a_eq]).tocsc()
        inf = highspy.kHighsInf
        row_lo = np.concatenate([np.full(len(b_ub), -inf), b_eq])
        row_hi = np.concatenate([b_ub, b_eq])
        lp = highspy.HighsLp()
        lp.num_col_ = a.shape[1]
        lp.num_row_ = a.shape[0]
        lp.col_cost_ = c
        lp.col_lower_ = lb
        lp.col_upper_ = ub
        lp.row_lower_ = row_lo
        lp.row_upper_ = row_hi
        lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
        lp.a_matrix_.start_ = a.indptr
        lp.a_matrix_.index_ = a.indices
        lp.a_matrix_.value_ = a.data
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("presolve", "off")
        h.setOptionValue("solver", "simplex")
        h.passModel(lp)
        self.h = h
        self.lb = np.array(lb, dtype=float)
        self.ub = np.array(ub, dtype=float)

    def solve(self, lb, ub):
        changed = np.flatnonzero((lb != self.lb) | (ub != self.ub))
        if len(changed):
            self.h.changeColsBounds(len(changed), changed.astype(np.int32), lb[changed], ub[changed])
            self.lb[changed] = lb[changed]
            self.ub[changed] = ub[changed]
        self.h.run()
        status = self.h.getModelStatus()
        ms = self._hs.HighsModelStatus
        if status == ms.kOptimal:
            return self.h.getInfo().objective_function_value, np.array(self.h.getSolution().col_value)
        if status == ms.kInfeasible:
            return None, None
        raise RuntimeError(f"LP relaxation failed: {self.h.modelStatusToString(status)}")


def make_relaxation(model, engine="auto"):
    if engine in ("auto", "highs"):
        try:
            return HighsRelaxation(model)
        except ImportError:
            if engine == "highs":
                raise
    return LinprogRelaxation(model)


def _pick_branch(groups, x, coef):
    """Most fractional binary among move variables, ties to the larger objective coefficient;
    window flags only once every move variable is integral."""
    best = None
    for group in groups:
        if len(group) == 0:
            continue
        f = np.abs(x[group] - np.round(x[group]))
        mask = f > INT_TOL
        if not mask.any():
            continue
        dist = np.where(mask, np.abs(f - 0.5), np.inf)
        m = dist.min()
        cand = group[np.abs(dist - m) <= 1e-12]
        best = int(cand[np.argmax(coef[cand])])
        break
    return best


def solve_branch_and_bound(model, time_limit=None, node_limit=None, incumbent=None, gap=1e-9,
                          engine="auto", cutoff=None):
    """Minimise the model exactly (up to `gap`) or until a limit is hit.

    `incumbent` may be a (objective, values) pair used as the starting upper bound.
    With `cutoff`, only solutions strictly below it are searched for; if none
    exists the status is INFEASIBLE.
    """
    t0 = time.monotonic()
    c, _, _, _, _, lb0, ub0, integrality = model.arrays()
    relax = make_relaxation(model, engine)
    integer_cols = np.flatnonzero(integrality)
    groups = (np.array(sorted(model.x.values()), dtype=int), np.array(sorted(model.w.values()), dtype=int))

    best_obj = math.inf
    best_x = None
    if incumbent is not None:
        best_obj, best_x = incumbent
    if cutoff is not None and cutoff < best_obj:
        best_obj, best_x = cutoff, None

    counter = itertools.count()
    explored = 0
    root_obj, root_x = relax.solve(lb0, ub0)
    if root_obj is None or root_obj >= best_obj - gap * max(1.0, abs(best_obj)):
        return SolveResult(Status.INFEASIBLE, nodes=1, elapsed=time.monotonic() - t0)
    heap = [(root_obj, next(counter), (), root_x)]
    timed_out = False
    limited = False
    while heap:
        bound, _, fixes, xs = heapq.heappop(heap)
        if bound >= best_obj - gap * max(1.0, abs(best_obj)):
            continue
        if time_limit is not None and time.monotonic() - t0 > time_limit:
            heapq.heappush(heap, (bound, next(counter), fixes, xs))
            timed_out = True
            break
        if node_limit is not None and explored >= node_limit:
            heapq.heappush(heap, (bound, next(counter), fixes, xs))
            limited = True
            break
        explored += 1
        col = _pick_branch(groups, xs, c)
        if col is None:
            best_obj, best_x = bound, xs
            continue
        for value in (math.floor(xs[col]), math.ceil(xs[col])):
            lb = lb0.copy()
            ub = ub0.copy()
            for k, val in fixes:
                lb[k] = ub[k] = val
            lb[col] = ub[col] = value
            obj, x = relax.solve(lb, ub)
            if obj is None or obj >= best_obj - gap * max(1.0, abs(best_obj)):
                continue
            heapq.heappush(heap, (obj, next(counter), fixes + ((col, value),), x))

    elapsed = time.monotonic() - t0
    lower = min((h[0] for h in heap), default=best_obj)
    if best_x is None:
        if timed_out or limited:
            return SolveResult(Status.TIMED_OUT, bound=lower, nodes=explored, elapsed=elapsed)
        return SolveResult(Status.INFEASIBLE, nodes=explored, elapsed=elapsed)
    values = _polish(best_x, integer_cols)
    tour = extract_walk(model, values)
    if timed_out:
        status = Status.TIMED_OUT
    elif limited:
        status = Status.FEASIBLE
    else:
        status = Status.OPTIMAL
        lower = best_obj
    return SolveResult(status, tour, best_obj, lower, values, explored, elapsed)


def _polish(x, integer_cols):
    out = np.array(x, dtype=float)
    out[integer_cols] = np.round(out[integer_cols])
    return out


def solve_milp(model, time_limit=None, cutoff=None, gap=1e-9):
    """Solve the model with the HiGHS MIP solver shipped in scipy."""
    from scipy.optimize import Bounds, LinearConstraint, milp

    t0 = time.monotonic()
    c, a_ub, b_ub, a_eq, b_eq, lb, ub, integrality = model.arrays()
    cons = []
    if a_ub.shape[0]:
        cons.append(LinearConstraint(a_ub, -np.inf, b_ub))
    if a_eq.shape[0]:
        cons.append(LinearConstraint(a_eq, b_eq, b_eq))
    if cutoff is not None:
        cons.append(LinearConstraint(c.reshape(1, -1), -np.inf, cutoff))
    options = {"mip_rel_gap": gap}
    if time_limit is not None:
        options["time_limit"] = max(time_limit, 1e-3)
    res = milp(c, constraints=cons, integrality=integrality.astype(int), bounds=Bounds(lb, ub),
               options=options)
    elapsed = time.monotonic() - t0
    if res.x is None:
        if res.status == 1:
            return SolveResult(Status.TIMED_OUT, elapsed=elapsed)
        return SolveResult(Status.INFEASIBLE, elapsed=elapsed)
    values = _polish(res.x, np.flatnonzero(integrality))
    tour = extract_walk(model, values)
    status = Status.OPTIMAL if res.status == 0 else Status.TIMED_OUT
    bound = getattr(res, "mip_dual_bound", None)
    return SolveResult(status, tour, float(res.fun), bound, values, int(getattr(res, "mip_node_count", 0) or 0),
                       elapsed)
