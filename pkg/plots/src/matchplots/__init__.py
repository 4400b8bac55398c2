"""Render benchmark CSVs into faceted match-ratio panels.

Input is the harness CSV schema (columns m,n,K,p,rho,s,algorithm,reps,
mean_match_ratio,stderr,mean_iters,mean_wall_ms).  Each facet -- a (p, rho)
combination for synthetic sweeps, or a K value for real-data splits -- gets
one panel plotting mean match ratio against the seed count for the two
algorithms, with the area between the curves shaded green where the
subgraph matcher is ahead and red where the baseline is.

Usage:  match-plots RESULTS.CSV OUTPUT_DIR [--facets p,rho|K] [--fixed-y]

One PNG is written per facet plus a combined grid (rho rows by p columns
for synthetic sweeps).  Rendering never touches the CSV, and re-rendering
the same CSV overwrites the same files with identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

REQUIRED_COLUMNS = (
    "m", "n", "K", "p", "rho", "s",
    "algorithm", "reps", "mean_match_ratio", "stderr",
)

CURVES = ("ssSGM", "SGM")
CURVE_COLORS = {"ssSGM": "tab:blue", "SGM": "tab:orange"}
AHEAD, BEHIND = "tab:green", "tab:red"


@dataclass(frozen=True)
class PanelSpec:
    """What to render: which CSV, which facet keys, where to put images."""

    csv_path: str
    output_dir: str
    facet_keys: tuple[str, ...] = ("p", "rho")
    fixed_y: bool = False

    def __post_init__(self) -> None:
        if self.facet_keys not in (("p", "rho"), ("K",)):
            raise ValueError("facet_keys must be ('p', 'rho') or ('K',)")


def read_rows(csv_path) -> list[dict[str, str]]:
    """Load the CSV, checking the schema and dropping skipped cells."""
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in REQUIRED_COLUMNS:
            if column not in header:
                raise ValueError(f"CSV is missing required column {column!r}")
        return [row for row in reader if row["algorithm"] in CURVES]


def facet_table(rows, facet_keys):
    """Group rows as {facet value tuple: {algorithm: [(s, ratio), ...]}}."""
    table: dict[tuple[str, ...], dict[str, list[tuple[int, float]]]] = {}
    for row in rows:
        facet = tuple(row[key] for key in facet_keys)
        series = table.setdefault(facet, {name: [] for name in CURVES})
        series[row["algorithm"]].append((int(row["s"]), float(row["mean_match_ratio"])))
    for series in table.values():
        for name in CURVES:
            series[name].sort()
    return table


def _facet_sort_key(facet):
    def one(value: str):
        try:
            return (0, float(value))
        except ValueError:
            return (1, value)

    return tuple(one(v) for v in facet)


def _facet_label(facet_keys, facet) -> str:
    return ", ".join(f"{k}={v}" for k, v in zip(facet_keys, facet))


def _facet_filename(facet_keys, facet) -> str:
    inner = "_".join(f"{k}{v}" for k, v in zip(facet_keys, facet))
    return f"panel_{inner}.png"


def _draw_panel(ax, series, title: str, fixed_y: bool) -> None:
    for name in CURVES:
        points = series[name]
        if points:
            xs = [s for s, _ in points]
            ys = [r for _, r in points]
            ax.plot(xs, ys, marker="o", label=name, color=CURVE_COLORS[name])
    sub = dict(series["ssSGM"])
    base = dict(series["SGM"])
    shared = sorted(set(sub) & set(base))
    if shared:
        xs = shared
        upper = [sub[s] for s in shared]
        lower = [base[s] for s in shared]
        ahead = [u >= l for u, l in zip(upper, lower)]
        behind = [u <= l for u, l in zip(upper, lower)]
        ax.fill_between(xs, lower, upper, where=ahead, interpolate=True,
                        color=AHEAD, alpha=0.3, linewidth=0)
        ax.fill_between(xs, lower, upper, where=behind, interpolate=True,
                        color=BEHIND, alpha=0.3, linewidth=0)
    ax.set_title(title)
    ax.set_xlabel("seeds")
    ax.set_ylabel("mean match ratio")
    if fixed_y:
        ax.set_ylim(0.0, 1.0)
    ax.legend(loc="best", fontsize="small")


def render(panel: PanelSpec) -> list[Path]:
    """Write one PNG per facet plus a combined grid; returns written paths.

    The grid follows the synthetic-figure layout: one row per rho value and
    one column per p value (a single row when faceting by K).
    """
    rows = read_rows(panel.csv_path)
    table = facet_table(rows, panel.facet_keys)
    if not table:
        raise ValueError("CSV contains no plottable rows")
    out_dir = Path(panel.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    facets = sorted(table, key=_facet_sort_key)
    for facet in facets:
        fig, ax = plt.subplots(figsize=(4.0, 3.0), constrained_layout=True)
        _draw_panel(ax, table[facet], _facet_label(panel.facet_keys, facet), panel.fixed_y)
        path = out_dir / _facet_filename(panel.facet_keys, facet)
        fig.savefig(path, dpi=110)
        plt.close(fig)
        written.append(path)

    if panel.facet_keys == ("p", "rho"):
        p_values = sorted({f[0] for f in facets}, key=lambda v: float(v))
        rho_values = sorted({f[1] for f in facets}, key=lambda v: float(v))
        n_rows, n_cols = len(rho_values), len(p_values)
    else:
        rho_values, p_values = [None], [f[0] for f in facets]
        n_rows, n_cols = 1, len(facets)
    fig, axes = plt.subplots(
        n_rows, n_cols, squeeze=False,
        figsize=(3.2 * n_cols, 2.6 * n_rows), constrained_layout=True,
    )
    for i, rho in enumerate(rho_values):
        for j, p in enumerate(p_values):
            facet = (p, rho) if panel.facet_keys == ("p", "rho") else (p,)
            ax = axes[i][j]
            if facet in table:
                _draw_panel(ax, table[facet], _facet_label(panel.facet_keys, facet),
                            panel.fixed_y)
            else:
                ax.set_axis_off()
    grid_path = out_dir / "grid.png"
    fig.savefig(grid_path, dpi=110)
    plt.close(fig)
    written.append(grid_path)
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="match-plots", description=__doc__)
    parser.add_argument("csv_path", help="benchmark results CSV")
    parser.add_argument("output_dir", help="directory for the rendered PNGs")
    parser.add_argument("--facets", default="p,rho", choices=("p,rho", "K"),
                        help="facet panels by (p, rho) cells or by K")
    parser.add_argument("--fixed-y", action="store_true",
                        help="force the y-axis to [0, 1] instead of auto-scaling")
    args = parser.parse_args(argv)
    try:
        panel = PanelSpec(
            csv_path=args.csv_path,
            output_dir=args.output_dir,
            facet_keys=tuple(args.facets.split(",")),
            fixed_y=args.fixed_y,
        )
        written = render(panel)
    except (ValueError, OSError) as exc:
        print(f"match-plots: error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
