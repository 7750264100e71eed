"""Render stacked on/off population panels from simulator CSV output.

The upper panel shows the both-switches-on run, the lower one the
switch-alpha-off run, one photon-number trace per resonator. Rendering is
headless and byte-deterministic for fixed inputs: fixed geometry and dpi,
fixed legend placement, and no timestamps or tool banners in the file.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # script pipelines and CI only, never a window

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.figure import Figure

EXIT_OK = 0
EXIT_USAGE = 2

FORMATS = ("png", "svg")
TIME_COLUMN = "t_ns"
POPULATION_PREFIX = "n_"

# fixed raster geometry; part of the determinism contract
FIGSIZE = (6.0, 6.4)
DPI = 150
SVG_HASHSALT = "plot_fig4"


class PlotDataError(Exception):
    """Input CSV is unreadable, malformed, or lacks a requested column."""


@dataclass(frozen=True)
class PlotSpec:
    """Input CSVs, columns to draw, and the output target.

    ``columns`` empty means every ``n_<label>`` column of the on-CSV, in
    header order. ``fmt`` empty means the output suffix decides (``png``
    when there is no suffix).
    """

    on_csv: Path
    off_csv: Path
    output: Path
    columns: tuple[str, ...] = ()
    fmt: str = ""
    xlabel: str = "t (ns)"
    ylabel: str = "photon number"


def read_series(path: Path) -> dict[str, np.ndarray]:
    """Parse one simulator CSV into a column -> samples map in header order."""
    try:
        with Path(path).open(newline="") as handle:
            rows = list(csv.reader(handle))
    except OSError as err:
        raise PlotDataError(str(err)) from err
    if not rows:
        raise PlotDataError(f"{path} is empty")
    header = rows[0]
    if not header or header[0] != TIME_COLUMN:
        raise PlotDataError(
            f"{path} does not start with a {TIME_COLUMN!r} column; not a simulator CSV"
        )
    if len(set(header)) != len(header):
        raise PlotDataError(f"{path} has duplicate column names")
    body = rows[1:]
    if not body:
        raise PlotDataError(f"{path} has a header but no samples")
    values = np.empty((len(body), len(header)))
    for i, row in enumerate(body):
        if len(row) != len(header):
            raise PlotDataError(
                f"{path} row {i + 2} has {len(row)} fields, header has {len(header)}"
            )
        for j, cell in enumerate(row):
            try:
                values[i, j] = float(cell)
            except ValueError as err:
                raise PlotDataError(
                    f"{path} row {i + 2}, column {header[j]!r}: {cell!r} is not a number"
                ) from err
    return {name: values[:, j] for j, name in enumerate(header)}


def population_columns(table: dict[str, np.ndarray]) -> tuple[str, ...]:
    return tuple(name for name in table if name.startswith(POPULATION_PREFIX))


def resolve_format(spec: PlotSpec) -> str:
    fmt = spec.fmt or Path(spec.output).suffix.lstrip(".").lower() or "png"
    if fmt not in FORMATS:
        raise PlotDataError(f"unsupported format {fmt!r}; choose one of {', '.join(FORMATS)}")
    return fmt


def _require_columns(table: dict[str, np.ndarray], columns: tuple[str, ...], path: Path) -> None:
    for name in columns:
        if name not in table:
            raise PlotDataError(f"column {name!r} not found in {path}")


def _legend_label(column: str) -> str:
    if column.startswith(POPULATION_PREFIX):
        return f"$n_{{{column[len(POPULATION_PREFIX):]}}}$"
    return column


def build_figure(
    on: dict[str, np.ndarray],
    off: dict[str, np.ndarray],
    spec: PlotSpec,
    columns: tuple[str, ...],
) -> Figure:
    """Stack the on run above the off run, one trace per requested column."""
    fig, (top, bottom) = plt.subplots(
        2, 1, sharex=True, figsize=FIGSIZE, constrained_layout=True
    )
    panels = ((top, on, "both switches on"), (bottom, off, "switch alpha off"))
    for axis, table, title in panels:
        times = table[TIME_COLUMN]
        lone = times.size == 1  # a single sample has no line to draw
        for column in columns:
            axis.plot(
                times,
                table[column],
                label=_legend_label(column),
                marker="o" if lone else None,
                linestyle="none" if lone else "-",
            )
        axis.set_title(title)
        axis.set_ylabel(spec.ylabel)
        axis.legend(loc="upper right", frameon=False)
    bottom.set_xlabel(spec.xlabel)
    return fig


def render(spec: PlotSpec) -> Path:
    """Write the two-panel figure and return its path."""
    fmt = resolve_format(spec)
    on = read_series(spec.on_csv)
    off = read_series(spec.off_csv)
    columns = spec.columns or population_columns(on)
    if not columns:
        raise PlotDataError(
            f"no {POPULATION_PREFIX}<label> columns in {spec.on_csv} and none requested"
        )
    _require_columns(on, columns, spec.on_csv)
    _require_columns(off, columns, spec.off_csv)
    fig = build_figure(on, off, spec, columns)
    # metadata overrides strip the writer banner (png) and the wall-clock
    # date (svg); the hash salt pins svg element ids
    save_args: dict[str, object]
    if fmt == "png":
        save_args = {"dpi": DPI, "metadata": {"Software": None}}
    else:
        save_args = {"metadata": {"Date": None}}
    try:
        with plt.rc_context({"svg.hashsalt": SVG_HASHSALT}):
            fig.savefig(spec.output, format=fmt, **save_args)
    except OSError as err:
        raise PlotDataError(f"cannot write {spec.output}: {err}") from err
    finally:
        plt.close(fig)
    return Path(spec.output)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot_fig4",
        description="Render stacked on/off photon-population panels from simulator CSV files.",
    )
    parser.add_argument("on_csv", type=Path, help="CSV of the both-switches-on run")
    parser.add_argument("off_csv", type=Path, help="CSV of the switch-alpha-off run")
    parser.add_argument("-o", "--out", type=Path, required=True, help="output image path")
    parser.add_argument(
        "--columns",
        default="",
        help="comma-separated columns to plot (default: every n_<label> column)",
    )
    parser.add_argument(
        "--format",
        dest="fmt",
        choices=FORMATS,
        default="",
        help="output format (default: from the output suffix)",
    )
    args = parser.parse_args(argv)
    columns = tuple(name.strip() for name in args.columns.split(",") if name.strip())
    spec = PlotSpec(
        on_csv=args.on_csv,
        off_csv=args.off_csv,
        output=args.out,
        columns=columns,
        fmt=args.fmt,
    )
    try:
        render(spec)
    except PlotDataError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
