"""Benchmark suite over SPB files in two terminal-share scenarios."""
import csv
import io
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..exact.model import expected_counts
from ..exact.scalarization import scalarize
from ..search.local import run_local_search
from .compare import compare_frontiers
from .oracle import exists_feasible_tour
from .spb import load_spb

SCENARIOS = {"10": 0.10, "20": 0.20}
EXACT_MAX_VARIABLES = 40_000
REPORT_COLUMNS = ("scenario", "instance", "nodes", "edges", "n_T", "Z_MIP", "Z_LS", "feasible",
                  "mip_complete", "coverage_of_mip", "ls_dominated_by_mip", "status")


@dataclass
class SuiteTask:
    path: str
    scenario: str
    budget: float | None
    iterations: int | None
    seed: int
    exact_limit: float
    init_fraction: float
    out_dir: str | None = None


@dataclass
class SuiteRow:
    scenario: str
    instance: str
    nodes: int = 0
    edges: int = 0
    n_T: int = 0
    Z_MIP: int | str = "-"
    Z_LS: int = 0
    feasible: str = "unknown"
    mip_complete: str = "-"
    coverage_of_mip: float | str = "-"
    ls_dominated_by_mip: float | str = "-"
    status: str = "ok"
    ls_points: list = field(default_factory=list)
    mip_points: list = field(default_factory=list)

    def cells(self):
        out = []
        for c in REPORT_COLUMNS:
            v = getattr(self, c)
            out.append(f"{v:.4f}" if isinstance(v, float) else str(v))
        return out


def run_task(task):
    """One instance in one scenario; failures become a row with status 'error: ...'."""
    name = Path(task.path).stem
    row = SuiteRow(task.scenario, name)
    try:
        inst = load_spb(task.path, SCENARIOS[task.scenario], task.seed)
        g, tw = inst.graph, inst.windows
        row.nodes, row.edges, row.n_T = len(g.nodes), len(g.arcs), g.n_terminals - 1
        try:
            found, _ = exists_feasible_tour(g, tw, time_limit=60.0)
            row.feasible = "yes" if found else "no"
        except TimeoutError:
            row.feasible = "unknown"
        Z = run_local_search(g, tw, budget=task.budget, seed=task.seed, iterations=task.iterations,
                             init_fraction=task.init_fraction)
        row.Z_LS = len(Z)
        row.ls_points = [tuple(c) for c in Z.costs()]
        n_vars, _ = expected_counts(len(g.nodes), len(g.arcs), inst.revisit_cap, g.n_terminals, 0)
        if task.exact_limit > 0 and n_vars <= EXACT_MAX_VARIABLES:
            res = scalarize(g, tw, revisit_cap=inst.revisit_cap, time_limit=task.exact_limit)
            row.Z_MIP = len(res.tours)
            row.mip_complete = "yes" if res.complete else "no"
            row.mip_points = [tuple(t.cost) for t in res.tours]
            rep = compare_frontiers(row.ls_points, row.mip_points)
            row.coverage_of_mip = rep.coverage
            row.ls_dominated_by_mip = rep.dominated_fraction
        elif task.exact_limit > 0:
            row.mip_complete = "skipped"
        if task.out_dir:
            from ..report import plot_frontiers
            plot_frontiers({"local search": row.ls_points, "MIP": row.mip_points},
                           Path(task.out_dir) / f"{name}_{task.scenario}.png",
                           title=f"{name} ({task.scenario}% terminals)")
    except Exception as exc:  # isolate per-instance failures
        row.status = f"error: {type(exc).__name__}: {exc}".replace("\n", " ")
        traceback.print_exc()
    return row


def run_suite(directory, scenarios=("10", "20"), budget=None, iterations=None, seed=0,
              exact_limit=0.0, init_fraction=0.25, jobs=1, out_dir=None):
    """Rows for every *.txt SPB file in `directory` and each scenario, in sorted order."""
    files = sorted(Path(directory).glob("*.txt"))
    if not files:
        raise FileNotFoundError(f"no SPB files (*.txt) in {directory}")
    tasks = [SuiteTask(str(f), s, budget, iterations, seed, exact_limit, init_fraction,
                       None if out_dir is None else str(out_dir))
             for s in scenarios for f in files]
    if jobs <= 1:
        return [run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_task, tasks))


def report_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()
