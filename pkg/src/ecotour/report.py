"""Frontier CSV files and static plots."""
import csv
import io

from .errors import ParseError

FRONTIER_COLUMNS = ("turns", "energy_kwh", "duration_s", "penalty_s", "node_sequence")


def frontier_csv(tours):
    """CSV text of a frontier, one row per tour sorted by (turns, energy)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FRONTIER_COLUMNS)
    for t in sorted(tours, key=lambda t: (t.turns, t.energy, t.nodes)):
        w.writerow([t.turns, repr(float(t.energy)), repr(float(t.duration)), repr(float(t.penalty)),
                    " ".join(str(v) for v in t.nodes)])
    return buf.getvalue()


def write_frontier(tours, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(frontier_csv(tours))


def read_frontier(path):
    """Rows of a frontier CSV as dicts with parsed values."""
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != FRONTIER_COLUMNS:
            raise ParseError(f"unexpected header {reader.fieldnames}", line=1, path=str(path))
        for lineno, row in enumerate(reader, 2):
            try:
                rows.append({"turns": int(row["turns"]), "energy_kwh": float(row["energy_kwh"]),
                             "duration_s": float(row["duration_s"]),
                             "penalty_s": float(row["penalty_s"]),
                             "node_sequence": tuple(int(v) for v in row["node_sequence"].split())})
            except (TypeError, ValueError) as exc:
                raise ParseError(str(exc), line=lineno, path=str(path)) from None
    return rows


def plot_frontiers(series, path, title=""):
    """Scatter (turns, energy) of each named frontier into a static image."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    markers = "os^Dv"
    for k, (name, points) in enumerate(series.items()):
        pts = sorted((p[0], p[1]) for p in points)
        if pts:
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker=markers[k % len(markers)],
                    linestyle="--", label=f"{name} ({len(pts)})", alpha=0.8)
    ax.set_xlabel("left turns")
    ax.set_ylabel("energy (kWh)")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
