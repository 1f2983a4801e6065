"""Learning-curve and role-frequency figures built from metrics logs.

Figures are plain ``matplotlib.figure.Figure`` objects. ``emit_plots`` writes
the tables behind every figure as CSV and renders from those tables, so
``render_from_tables`` on the same CSV files reproduces identical SVGs.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import matplotlib as mpl
import numpy as np
import pandas as pd
from matplotlib.axes import Axes
from matplotlib.figure import Figure

from rodelab.config.defaults import DEFAULT_ENCODING
from rodelab.config.plotting import (
    DEFAULT_LINE_STYLE,
    DEFAULT_LINE_WIDTH,
    DEFAULT_MARKER,
    DEFAULT_MARKER_SIZE,
    GRID_ALPHA,
    GRID_ENABLED,
    GRID_LINE_STYLE,
    GRID_LINE_WIDTH,
    LABEL_FONT_SIZE,
    LARGE_FIGURE_SIZE,
    PRIMARY_COLOR,
    PRIMARY_COMP_COLOR,
    ROLE_COLORMAP,
    SECONDARY_COLOR,
    SVG_HASH_SALT,
    THIN_LINE_WIDTH,
    TITLE_FONT_SIZE,
)
from rodelab.utils.metrics import read_metrics

logger = logging.getLogger(__name__)

EVAL_COLUMNS = ("step", "win_rate", "mean_return")
TRAIN_COLUMNS = ("step", "win_rate", "mean_return", "epsilon")
TABLE_NAMES = ("eval", "train", "roles")
LEARNING_CURVE_FILE = "learning_curve.svg"
ROLE_FREQUENCY_FILE = "role_frequencies.svg"


@dataclass
class PlotResult:
    """Files written by ``emit_plots``.

    Attributes:
        figures: SVG paths.
        tables: CSV paths keyed by table name.
        skipped: Malformed metrics lines that were ignored.

    """

    figures: list[Path] = field(default_factory=list)
    tables: dict[str, Path] = field(default_factory=dict)
    skipped: int = 0


# ------------------ Tables ------------------
def metrics_to_tables(records: Sequence[Mapping[str, Any]]) -> dict[str, pd.DataFrame]:
    """Split metrics records into ``eval``, ``train`` and ``roles`` frames.

    ``roles`` holds per-role selection frequencies from hierarchy-phase
    ``train`` records, one ``role_<j>`` column per role.
    """
    evals = [
        {k: r.get(k) for k in EVAL_COLUMNS} for r in records if r.get("event") == "eval"
    ]
    trains = [
        {k: r.get(k) for k in TRAIN_COLUMNS}
        for r in records
        if r.get("event") == "train"
    ]
    role_rows = []
    for r in records:
        freqs = r.get("role_frequencies") or []
        if r.get("event") == "train" and r.get("phase") == "hierarchy" and freqs:
            shares = {f"role_{j}": v for j, v in enumerate(freqs)}
            role_rows.append({"step": r["step"], **shares})
    n_roles = max((len(row) - 1 for row in role_rows), default=0)
    role_columns = ["step", *(f"role_{j}" for j in range(n_roles))]
    return {
        "eval": pd.DataFrame(evals, columns=list(EVAL_COLUMNS), dtype=np.float64),
        "train": pd.DataFrame(trains, columns=list(TRAIN_COLUMNS), dtype=np.float64),
        "roles": pd.DataFrame(role_rows, columns=role_columns, dtype=np.float64),
    }


def load_metrics(path: Path) -> tuple[dict[str, pd.DataFrame], int]:
    """Tables from a metrics file plus the count of skipped lines."""
    records, skipped = read_metrics(path)
    return metrics_to_tables(records), skipped


def write_tables(tables: Mapping[str, pd.DataFrame], out_dir: Path) -> dict[str, Path]:
    """Write each table to ``<out_dir>/<name>.csv``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, frame in tables.items():
        path = out_dir / f"{name}.csv"
        frame.to_csv(path, index=False, encoding=DEFAULT_ENCODING, lineterminator="\n")
        paths[name] = path
    return paths


def read_tables(table_dir: Path) -> dict[str, pd.DataFrame]:
    """Read the CSV tables written by ``write_tables``.

    Raises:
        FileNotFoundError: If a table is missing.

    """
    table_dir = Path(table_dir)
    tables = {}
    for name in TABLE_NAMES:
        path = table_dir / f"{name}.csv"
        if not path.is_file():
            msg = f"Missing plot table: {path}"
            raise FileNotFoundError(msg)
        tables[name] = pd.read_csv(path, encoding=DEFAULT_ENCODING).astype(np.float64)
    return tables


# ------------------ Figures ------------------
def _style_axis(ax: Axes, xlabel: str, ylabel: str) -> None:
    ax.set_xlabel(xlabel, fontsize=LABEL_FONT_SIZE)
    ax.set_ylabel(ylabel, fontsize=LABEL_FONT_SIZE)
    ax.grid(
        visible=GRID_ENABLED,
        alpha=GRID_ALPHA,
        linestyle=GRID_LINE_STYLE,
        linewidth=GRID_LINE_WIDTH,
    )


def _plot_series(ax: Axes, x: pd.Series, y: pd.Series, color: str, label: str) -> None:
    ok = y.notna().to_numpy()
    ax.plot(
        x.to_numpy()[ok],
        y.to_numpy()[ok],
        color=color,
        marker=DEFAULT_MARKER,
        markersize=DEFAULT_MARKER_SIZE,
        mec=SECONDARY_COLOR,
        linestyle=DEFAULT_LINE_STYLE,
        linewidth=DEFAULT_LINE_WIDTH,
        label=label,
    )


def make_learning_curve_figure(
    eval_table: pd.DataFrame, train_table: pd.DataFrame
) -> Figure:
    """Win rate and return against environment steps.

    Evaluation points are drawn with markers; the training window means as
    thin lines. A single evaluation point renders as a single marker.
    """
    fig = Figure(figsize=LARGE_FIGURE_SIZE, tight_layout=True)
    ax_win, ax_ret = fig.subplots(2, 1, sharex=True)
    if len(eval_table):
        _plot_series(
            ax_win, eval_table["step"], eval_table["win_rate"], PRIMARY_COLOR, "eval"
        )
        _plot_series(
            ax_ret, eval_table["step"], eval_table["mean_return"], PRIMARY_COLOR, "eval"
        )
    if len(train_table):
        for ax, column in ((ax_win, "win_rate"), (ax_ret, "mean_return")):
            ok = train_table[column].notna().to_numpy()
            ax.plot(
                train_table["step"].to_numpy()[ok],
                train_table[column].to_numpy()[ok],
                color=PRIMARY_COMP_COLOR,
                linestyle=DEFAULT_LINE_STYLE,
                linewidth=THIN_LINE_WIDTH,
                label="train",
            )
    ax_win.set_title("Learning curve", fontsize=TITLE_FONT_SIZE)
    _style_axis(ax_win, "", "Win rate")
    _style_axis(ax_ret, "Environment steps", "Mean return")
    if len(eval_table) or len(train_table):
        ax_win.legend(loc="best")
    return fig


def make_role_frequency_figure(role_table: pd.DataFrame) -> Figure:
    """Fraction of selections of each role over training."""
    fig = Figure(figsize=LARGE_FIGURE_SIZE, tight_layout=True)
    ax = fig.add_subplot(111)
    role_columns = [c for c in role_table.columns if c != "step"]
    cmap = mpl.colormaps[ROLE_COLORMAP]
    for j, column in enumerate(role_columns):
        ax.plot(
            role_table["step"].to_numpy(),
            role_table[column].to_numpy(),
            color=cmap(j % cmap.N),
            linestyle=DEFAULT_LINE_STYLE,
            linewidth=DEFAULT_LINE_WIDTH,
            label=column.replace("_", " "),
        )
    ax.set_title("Role selection frequency", fontsize=TITLE_FONT_SIZE)
    ax.set_ylim(-0.02, 1.02)
    _style_axis(ax, "Environment steps", "Fraction of selections")
    if role_columns:
        ax.legend(loc="best")
    return fig


def save_svg(figure: Figure, path: Path) -> Path:
    """Save ``figure`` as an SVG with stable element ids and no date stamp."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with mpl.rc_context({"svg.hashsalt": SVG_HASH_SALT}):
        figure.savefig(path, format="svg", metadata={"Date": None})
    return path


# ------------------ Entry points ------------------
def render_from_tables(tables: Mapping[str, pd.DataFrame], out_dir: Path) -> list[Path]:
    """Render both figures from tables into ``out_dir``."""
    out_dir = Path(out_dir)
    return [
        save_svg(
            make_learning_curve_figure(tables["eval"], tables["train"]),
            out_dir / LEARNING_CURVE_FILE,
        ),
        save_svg(
            make_role_frequency_figure(tables["roles"]), out_dir / ROLE_FREQUENCY_FILE
        ),
    ]


def emit_plots(metrics_path: Path, out_dir: Path) -> PlotResult:
    """Write CSV tables and SVG figures for a metrics file.

    Malformed lines are skipped and counted. An empty log still produces
    (empty) figures.
    """
    tables, skipped = load_metrics(metrics_path)
    if skipped:
        logger.warning(
            "Skipped %d malformed metrics line(s) in %s", skipped, metrics_path
        )
    if not any(len(t) for t in tables.values()):
        logger.warning("No plottable records in %s", metrics_path)
    paths = write_tables(tables, out_dir)
    figures = render_from_tables(read_tables(out_dir), out_dir)
    logger.info("Wrote %d figure(s) to %s", len(figures), out_dir)
    return PlotResult(figures=figures, tables=paths, skipped=skipped)
