import bisect

from .tour import dominates


def _cost(item):
    return item.cost if hasattr(item, "cost") else item


class ParetoArchive:
    """Mutually non-dominated collection kept sorted by turns (ascending).

    An item whose cost is weakly dominated by a member, including an exact tie,
    is rejected, so the first item found for a cost point is the one kept.
    """

    def __init__(self, items=()):
        self._items = []
        self._keys = []
        for item in items:
            self.add(item)

    def add(self, item):
        """Insert `item`. Returns (accepted, removed_items)."""
        c = _cost(item)
        key = (c[0], c[1])
        pos = bisect.bisect_right(self._keys, key)
        # members with smaller or equal turns sit left of pos; the one just left
        # has the least energy among them because the set is a staircase
        if pos > 0 and dominates(self._keys[pos - 1], key):
            return False, []
        end = pos
        while end < len(self._keys) and dominates(key, self._keys[end]):
            end += 1
        removed = self._items[pos:end]
        del self._items[pos:end]
        del self._keys[pos:end]
        self._items.insert(pos, item)
        self._keys.insert(pos, key)
        return True, removed

    def is_dominated(self, cost):
        """True when some member weakly dominates `cost`."""
        key = (cost[0], cost[1])
        pos = bisect.bisect_right(self._keys, key)
        return pos > 0 and dominates(self._keys[pos - 1], key)

    def costs(self):
        return list(self._keys)

    def items(self):
        return list(self._items)

    def __iter__(self):
        return iter(list(self._items))

    def __len__(self):
        return len(self._items)

    def __contains__(self, item):
        return item in self._items

    def __getitem__(self, i):
        return self._items[i]

    def __repr__(self):
        return f"ParetoArchive({self._keys})"


def pareto_filter(items):
    """Non-dominated subset, first occurrence kept on ties, sorted by turns."""
    return ParetoArchive(items).items()


def lower_hull(points):
    """Extreme points of the lower-left convex hull of a 2-D point set (minimisation).

    These are the points that are the unique optimum of some strictly positive
    weighted sum, plus the two lexicographic extremes. Collinear interior points
    are excluded.
    """
    pts = sorted(set((p[0], p[1]) for p in points))
    front = []
    for p in pts:
        if front and p[1] >= front[-1][1]:
            continue
        front.append(p)
    hull = []
    for p in front:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            cross = (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1)
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def supported_subset(items):
    """Items whose cost is an extreme point of the lower convex hull."""
    hull = set(lower_hull([_cost(i) for i in items]))
    seen = set()
    out = []
    for item in sorted(items, key=lambda i: tuple(_cost(i))):
        c = tuple(_cost(item))
        if c in hull and c not in seen:
            seen.add(c)
            out.append(item)
    return out


def dominated_area(points, corner):
    """Area of the region dominated by `points` and bounded by `corner` (2-D hypervolume)."""
    front = [p for p in pareto_filter([(p[0], p[1]) for p in points])
             if p[0] < corner[0] and p[1] < corner[1]]
    area = 0.0
    for k, (x, y) in enumerate(front):
        next_x = front[k + 1][0] if k + 1 < len(front) else corner[0]
        area += (min(next_x, corner[0]) - x) * (corner[1] - y)
    return area
