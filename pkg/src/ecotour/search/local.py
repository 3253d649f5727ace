"""Main loop of the local search."""
import json
import time

import numpy as np

from ..paths import PathBank
from .operators import fixed_perm, quad, rand_permute, repair_tw, s3opt, s3opt_tw
from .state import SearchState, Theta, update_sets

INIT_FRACTION = 0.25


def _schedule(theta):
    """Operator calls of one iteration in order, with the source set for FixedPerm."""
    return ([("s3opt", s3opt, {})]
            + [("fixed_perm_z", fixed_perm, {"source": "Z"})] * theta.fixed_perm_reps
            + [("rand_permute", rand_permute, {})]
            + [("quad", quad, {})] * theta.quad_reps
            + [("s3opt_tw", s3opt_tw, {})]
            + [("repair_tw", repair_tw, {})] * theta.repair_reps
            + [("fixed_perm_y", fixed_perm, {"source": "Y"})] * theta.fixed_perm_reps)


def run_local_search(graph, windows, budget=None, seed=0, theta=None, iterations=None,
                     init=None, init_fraction=INIT_FRACTION, init_weights=None, log=None,
                     state=None, operator_limit=300.0, filter_mode="all"):
    """Improve a set of on-time tours until the budget runs out; returns Z.

    `budget` is wall-clock seconds for the whole run, a quarter of which goes to
    the initial tours unless `init` (an InitialSets) is given. `iterations`
    caps the main loop independently of the clock; with `budget=None`, a fixed
    `iterations` and a fixed `init_weights` count the result depends only on
    `seed`. `log` receives one JSON object per iteration.
    """
    from ..seed import generate_initial_sets

    theta = theta or Theta()
    start = time.monotonic()
    deadline = None if budget is None else start + budget
    if state is None:
        rng = np.random.default_rng(seed)
        state = SearchState(graph, windows, theta, rng, PathBank(graph), filter_mode=filter_mode,
                            operator_limit=operator_limit)
        if init is None:
            init_budget = None if budget is None else budget * init_fraction
            if budget == 0:
                init_weights = 0
            elif budget is None and init_weights is None:
                init_weights = 40
            init = generate_initial_sets(graph, windows, init_budget, seed, theta,
                                         max_weights=init_weights, state=state)
        else:
            state = init.state
    if budget == 0 or iterations == 0:
        return state.Z

    def out_of_time():
        return deadline is not None and time.monotonic() > deadline

    it = 0
    while not out_of_time() and (iterations is None or it < iterations):
        it += 1
        state.refresh_z_stats()
        counts = {}
        for name, op, kwargs in _schedule(theta):
            if out_of_time():
                break
            if deadline is not None:
                state.operator_limit = min(operator_limit, max(0.0, deadline - time.monotonic()))
            accepted = update_sets(op(state, **kwargs), state)
            counts[name] = counts.get(name, 0) + accepted
        if log is not None:
            record = {"iteration": it, "elapsed_s": round(time.monotonic() - start, 3),
                      "z": len(state.Z), "y": len(state.Y), "x": len(state.X),
                      "accepted": counts, "frontier": [[t, e] for t, e in state.Z.costs()]}
            log.write(json.dumps(record) + "\n")
    return state.Z
