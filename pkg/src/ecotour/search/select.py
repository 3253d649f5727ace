"""Frontier gain and density-guided tour selection."""
import math

import numpy as np

from ..netmodel import dominated_area, strictly_dominates


def gain_corner(points, margin=1.0):
    """Reference corner beyond every given point: (max turns + 1, max energy + margin)."""
    pts = list(points)
    return (max(p[0] for p in pts) + 1.0, max(p[1] for p in pts) + margin)


def gain(frontier, point, corner=None):
    """Area the point adds to the region dominated by `frontier`.

    Returns -inf when some frontier point strictly dominates it and 0.0 when it
    coincides with one. Any corner beyond all points gives the same ordering of
    candidates as long as it is shared within one comparison.
    """
    frontier = [(f[0], f[1]) for f in frontier]
    p = (point[0], point[1])
    for f in frontier:
        if strictly_dominates(f, p):
            return -math.inf
    if p in frontier:
        return 0.0
    if corner is None:
        corner = gain_corner(frontier + [p])
    return dominated_area(frontier + [p], corner) - dominated_area(frontier, corner)


def kde_density(points):
    """Gaussian kernel density of each point among `points`.

    Objectives are z-score normalised (a constant objective maps to 0) and the
    bandwidth is n^(-1/6) in each normalised dimension.
    """
    x = np.asarray(points, dtype=float).reshape(len(points), -1)
    n = len(x)
    std = x.std(axis=0)
    z = np.where(std > 0, (x - x.mean(axis=0)) / np.where(std > 0, std, 1.0), 0.0)
    h = n ** (-1.0 / 6.0)
    d2 = ((z[:, None, :] - z[None, :, :]) ** 2).sum(axis=2)
    return np.exp(-0.5 * d2 / (h * h)).mean(axis=1) / (2 * math.pi * h * h)


def selection_pmf(points):
    """Probability of picking each point, (1 - relative density) normalised."""
    n = len(points)
    if n == 1:
        return np.ones(1)
    dens = kde_density(points)
    rel = dens / dens.sum()
    w = 1.0 - rel
    return w / w.sum()


def select_tour_kde(tours, rng):
    tours = list(tours)
    if not tours:
        return None
    pmf = selection_pmf([(t.turns, t.energy) for t in tours])
    return tours[int(rng.choice(len(tours), p=pmf))]
