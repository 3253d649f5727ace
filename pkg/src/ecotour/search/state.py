"""Working sets of the local search and their update rule."""
import math
from dataclasses import dataclass, field

import numpy as np

from ..netmodel import ParetoArchive, evaluate_tour
from ..errors import NotATour
from ..paths import PathBank


@dataclass(frozen=True)
class Theta:
    """Local search hyperparameters.

    top_pairs: adjacent terminal pairs enriched by FixedPerm
    skew: standard deviations defining a skewed tour
    set_cap: size limit of X and Y
    fixed_perm_reps, quad_reps, repair_reps: repetitions per iteration
    """
    top_pairs: int = 8
    skew: float = 0.1
    set_cap: int = 100
    fixed_perm_reps: int = 5
    quad_reps: int = 15
    repair_reps: int = 10

    def __post_init__(self):
        for name in ("top_pairs", "set_cap", "fixed_perm_reps", "quad_reps", "repair_reps"):
            value = getattr(self, name)
            if int(value) != value or value <= 0:
                raise ValueError(f"{name} must be a positive integer")
        if not self.skew > 0:
            raise ValueError("skew must be positive")

    @classmethod
    def from_sequence(cls, values):
        values = list(values)
        if len(values) != 6:
            raise ValueError("expected six hyperparameters")
        return cls(int(values[0]), float(values[1]), int(values[2]), int(values[3]),
                   int(values[4]), int(values[5]))

    def as_tuple(self):
        return (self.top_pairs, self.skew, self.set_cap, self.fixed_perm_reps, self.quad_reps,
                self.repair_reps)


@dataclass
class EdgeStats:
    mean_energy: float
    mean_turns: float
    std_energy: float
    std_turns: float

    @classmethod
    def of_graph(cls, graph):
        arcs = list(graph.arcs.values())
        if not arcs:
            return cls(0.0, 0.0, 0.0, 0.0)
        h = np.array([a.energy for a in arcs], dtype=float)
        t = np.array([a.turns for a in arcs], dtype=float)
        return cls(float(h.mean()), float(t.mean()), float(h.std()), float(t.std()))


@dataclass
class SearchState:
    graph: object
    windows: object
    theta: Theta
    rng: np.random.Generator
    bank: PathBank
    Z: ParetoArchive = field(default_factory=ParetoArchive)
    Y: list = field(default_factory=list)
    X: list = field(default_factory=list)
    edges: EdgeStats = None
    z_mean_energy: float = 0.0
    z_mean_turns: float = 0.0
    filter_mode: str = "all"
    emit_cap: int = 5000
    quad_cap: int = 100
    operator_limit: float = 300.0

    def __post_init__(self):
        if self.edges is None:
            self.edges = EdgeStats.of_graph(self.graph)

    def refresh_z_stats(self):
        """Mean energy and turns per move over all tours in Z."""
        moves = sum(len(t.nodes) - 1 for t in self.Z)
        if moves == 0:
            self.z_mean_energy = self.edges.mean_energy
            self.z_mean_turns = self.edges.mean_turns
            return
        self.z_mean_energy = sum(t.energy for t in self.Z) / moves
        self.z_mean_turns = sum(t.turns for t in self.Z) / moves

    def evaluate(self, nodes):
        return evaluate_tour(tuple(nodes), self.graph, self.windows)


def _penalty_key(t):
    return t.penalty + t.wait


def update_sets(tours, state):
    """Route new tours into Z, Y and X.

    On-time tours go through Pareto insertion into Z; a rejected tour and any
    tour it displaces go to Y. Late tours join X while they beat the largest
    penalty in X or X has room. Y is then ordered by a randomly chosen objective
    and X by penalty plus wait, and both are cut to the set cap.
    Returns the number of tours accepted into Z.
    """
    cap = state.theta.set_cap
    seen_y = {t.nodes for t in state.Y}
    seen_x = {t.nodes for t in state.X}
    max_penalty = max((t.penalty for t in state.X), default=math.inf)
    accepted = 0
    for tour in tours:
        if tour is None:
            continue
        if tour.penalty == 0:
            if tour in state.Z:
                continue
            ok, removed = state.Z.add(tour)
            accepted += ok
            for t in ([] if ok else [tour]) + list(removed):
                if t.nodes not in seen_y:
                    state.Y.append(t)
                    seen_y.add(t.nodes)
        elif tour.penalty < max_penalty or len(state.X) < cap:
            if tour.nodes in seen_x:
                continue
            state.X.append(tour)
            seen_x.add(tour.nodes)
            max_penalty = max(t.penalty for t in state.X)
    if state.rng.random() < 0.5:
        state.Y.sort(key=lambda t: (t.energy, t.turns, t.nodes))
    else:
        state.Y.sort(key=lambda t: (t.turns, t.energy, t.nodes))
    state.X.sort(key=lambda t: (_penalty_key(t), t.nodes))
    del state.Y[cap:]
    del state.X[cap:]
    return accepted


def safe_evaluate(state, nodes):
    """Evaluate a closed walk, returning None if it is not a tour."""
    try:
        return state.evaluate(nodes)
    except NotATour:
        return None
