"""Render projection CSVs written by `cpzreach` into one image per panel."""

import argparse
import csv
import sys
from collections import defaultdict
from pathlib import Path

HEADER = ["set_label", "k", "dim_i", "dim_j", "xi", "xj"]
DEFAULT_PANELS = [(1, 2), (3, 4), (4, 5)]
COLORS = {"X0": "#777777", "R_tilde": "#dd7a1e", "R_hat": "#1e5ac8", "R_bar": "#2a9d4b"}
ORDER = ["R_bar", "R_tilde", "R_hat", "X0"]


class PlotError(Exception):
    pass


def read_dump(path):
    with open(path, newline="") as f:
        rows = csv.reader(f)
        header = next(rows, None)
        if header is None:
            raise PlotError(f"{path}: empty file")
        if header != HEADER:
            raise PlotError(f"{path}: expected columns {HEADER}, found {header}")
        points = defaultdict(list)
        for n, row in enumerate(rows, start=2):
            if len(row) != len(HEADER):
                raise PlotError(f"{path}:{n}: expected {len(HEADER)} fields")
            label, k, i, j, xi, xj = row
            points[(int(i), int(j))].append((label, int(k), float(xi), float(xj)))
    if not points:
        raise PlotError(f"{path}: no data rows")
    return points


def parse_panel(text):
    try:
        i, j = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"panel must look like '1,2', got {text!r}")
    return i, j


def render(csv_paths, out_dir, panels, labels=None):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    merged = defaultdict(list)
    for path in csv_paths:
        for pair, rows in read_dump(path).items():
            merged[pair].extend(rows)
    present = {r[0] for rows in merged.values() for r in rows}
    for label in labels or []:
        if label not in present:
            raise PlotError(f"label {label!r} not found; available: {sorted(present)}")
    for pair in panels:
        if pair not in merged:
            raise PlotError(f"panel {pair} not in the input; available: {sorted(merged)}")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(csv_paths[0]).stem.replace("_projections", "")
    written = []
    for i, j in panels:
        rows = merged[(i, j)]
        wanted = labels or sorted({r[0] for r in rows}, key=lambda l: ORDER.index(l) if l in ORDER else -1)
        fig, ax = plt.subplots(figsize=(5, 4.5), dpi=120)
        for label in wanted:
            xs = [r[2] for r in rows if r[0] == label]
            ys = [r[3] for r in rows if r[0] == label]
            alpha = 0.9 if len(xs) == 1 else 0.15
            ax.scatter(xs, ys, s=4 if len(xs) > 1 else 30, alpha=alpha, color=COLORS.get(label), label=label, linewidths=0)
        ax.set_xlabel(f"x{i}")
        ax.set_ylabel(f"x{j}")
        leg = ax.legend(loc="best", markerscale=3)
        for h in leg.legend_handles:
            h.set_alpha(1.0)
        fig.tight_layout()
        path = out_dir / f"{stem}_x{i}x{j}.png"
        fig.savefig(path, metadata={"Software": None})
        plt.close(fig)
        written.append(path)
    return written


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("csv", nargs="+", help="projection CSV files")
    p.add_argument("-o", "--out-dir", default="figures")
    p.add_argument("-p", "--panel", action="append", type=parse_panel, help="coordinate pair like 1,2 (repeatable)")
    p.add_argument("-l", "--label", action="append", help="set label to draw (repeatable, default all)")
    args = p.parse_args(argv)
    try:
        for path in render(args.csv, args.out_dir, args.panel or DEFAULT_PANELS, args.label):
            print(path)
    except (PlotError, OSError) as e:
        print(f"plotview: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
