"""Comparison of a candidate frontier against a reference frontier."""
import bisect
from dataclasses import dataclass

from ..netmodel import dominated_area


def _points(items):
    return [(float(c[0]), float(c[1])) for c in
            (i.cost if hasattr(i, "cost") else i for i in items)]


@dataclass(frozen=True)
class FrontierReport:
    n_candidate: int
    n_reference: int
    coverage: float            # share of reference points matched or dominated by the candidate
    dominated_fraction: float  # share of candidate points strictly dominated by the reference
    area_ratio: float          # candidate dominated area / reference dominated area, shared corner

    def as_row(self):
        return {"n_candidate": self.n_candidate, "n_reference": self.n_reference,
                "coverage": self.coverage, "dominated_fraction": self.dominated_fraction,
                "area_ratio": self.area_ratio}


def _staircase(points):
    """Sorted turns and running minimum energy, for weak-dominance lookups."""
    pts = sorted(points)
    xs, best = [], []
    low = float("inf")
    for x, y in pts:
        low = min(low, y)
        xs.append(x)
        best.append(low)
    return xs, best


def _weakly_covered(stair, p):
    xs, best = stair
    k = bisect.bisect_right(xs, p[0])
    return k > 0 and best[k - 1] <= p[1]


def _strictly_covered(stair_pts, p):
    """Some point is no worse in both objectives and differs from p."""
    xs, best = _staircase([q for q in stair_pts if q != p])
    return _weakly_covered((xs, best), p)


def compare_frontiers(candidate, reference, corner=None):
    """Report on `candidate` against `reference` (tours or (turns, energy) pairs)."""
    cand = _points(candidate)
    ref = _points(reference)
    cstair = _staircase(cand)
    covered = sum(_weakly_covered(cstair, r) for r in ref)
    ref_set = set(ref)
    dominated = sum(_strictly_covered(ref_set, c) for c in cand)
    if corner is None and (cand or ref):
        allp = cand + ref
        corner = (max(p[0] for p in allp) + 1.0, max(p[1] for p in allp) + 1.0)
    ref_area = dominated_area(ref, corner) if ref else 0.0
    cand_area = dominated_area(cand, corner) if cand else 0.0
    if ref_area > 0:
        ratio = cand_area / ref_area
    else:
        ratio = 1.0 if cand_area == 0 else float("inf")
    return FrontierReport(len(cand), len(ref), covered / len(ref) if ref else 1.0,
                          dominated / len(cand) if cand else 0.0, ratio)
