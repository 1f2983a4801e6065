"""Tests for metrics figures and tables.

This test module covers:
- Splitting metrics records into eval, train and role tables
- SVG and CSV output of emit_plots
- Re-rendering from the written tables
- Empty and malformed logs
"""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from rodelab.config.defaults import METRICS_SCHEMA_VERSION
from rodelab.core.plotting.plotting import (
    LEARNING_CURVE_FILE,
    ROLE_FREQUENCY_FILE,
    emit_plots,
    make_learning_curve_figure,
    metrics_to_tables,
    read_tables,
    render_from_tables,
)
from rodelab.utils.metrics import MetricsWriter


def _train(step: int, phase: str, freqs: list[float]) -> dict[str, object]:
    return {
        "epsilon": 0.5,
        "repr_loss": None,
        "selector_loss": 1.0,
        "policy_loss": 2.0,
        "mean_return": float(step),
        "win_rate": 0.1,
        "role_frequencies": freqs,
        "fallbacks": 0,
        "step": step,
        "episode": step // 10,
        "phase": phase,
    }


def _write_log(path: Path) -> Path:
    with MetricsWriter(path) as writer:
        writer.write("train", **_train(10, "representation", []))
        writer.write(
            "phase", step=20, episode=2, phase="hierarchy", n_roles=2, roles=[[0], [1]]
        )
        writer.write("train", **_train(30, "hierarchy", [0.5, 0.5]))
        writer.write(
            "eval",
            step=40,
            episode=4,
            phase="hierarchy",
            win_rate=0.25,
            mean_return=5.0,
            role_frequencies=[0.75, 0.25],
            fallbacks=0,
            episodes=4,
        )
        writer.write("train", **_train(50, "hierarchy", [0.25, 0.75]))
    return path


# ====================================================================================
# TABLE TESTS
# ====================================================================================
class TestMetricsToTables:
    """Tests for splitting records."""

    def test_split(self, tmp_path: Path) -> None:
        """Eval, train and hierarchy role rows land in their tables."""
        path = _write_log(tmp_path / "metrics.jsonl")
        lines = path.read_text(encoding="utf-8").splitlines()
        records = [json.loads(line) for line in lines]

        tables = metrics_to_tables(records)

        assert tables["eval"]["win_rate"].tolist() == [0.25]
        assert tables["train"]["step"].tolist() == [10.0, 30.0, 50.0]
        assert list(tables["roles"].columns) == ["step", "role_0", "role_1"]
        assert tables["roles"]["role_1"].tolist() == [0.5, 0.75]

    def test_empty(self) -> None:
        """No records give empty tables with their columns."""
        tables = metrics_to_tables([])

        assert all(len(t) == 0 for t in tables.values())
        assert "win_rate" in tables["eval"].columns


# ====================================================================================
# OUTPUT TESTS
# ====================================================================================
class TestEmitPlots:
    """Tests for figure and table output."""

    def test_files_written(self, tmp_path: Path) -> None:
        """Two SVGs and three CSV tables are written."""
        result = emit_plots(_write_log(tmp_path / "metrics.jsonl"), tmp_path / "plots")

        names = [p.name for p in result.figures]
        assert names == [LEARNING_CURVE_FILE, ROLE_FREQUENCY_FILE]
        assert sorted(result.tables) == ["eval", "roles", "train"]
        assert all(p.is_file() for p in [*result.figures, *result.tables.values()])
        assert result.skipped == 0
        svg = result.figures[0].read_text(encoding="utf-8")
        assert svg.lstrip().startswith("<?xml")

    def test_rerender_identical(self, tmp_path: Path) -> None:
        """Rendering the written tables again reproduces the same SVG bytes."""
        out = tmp_path / "plots"
        result = emit_plots(_write_log(tmp_path / "metrics.jsonl"), out)

        again = render_from_tables(read_tables(out), tmp_path / "again")

        for first, second in zip(result.figures, again, strict=True):
            assert first.read_bytes() == second.read_bytes()

    def test_svg_has_no_date(self, tmp_path: Path) -> None:
        """SVG metadata carries no timestamp."""
        result = emit_plots(_write_log(tmp_path / "metrics.jsonl"), tmp_path / "plots")

        assert "<dc:date>" not in result.figures[0].read_text(encoding="utf-8")

    def test_empty_log(self, tmp_path: Path) -> None:
        """An empty log still renders empty figures."""
        path = tmp_path / "metrics.jsonl"
        path.write_text("", encoding="utf-8")

        result = emit_plots(path, tmp_path / "plots")

        assert len(result.figures) == 2
        assert all(p.is_file() for p in result.figures)

    def test_malformed_lines_counted(self, tmp_path: Path) -> None:
        """Bad lines are skipped and reported."""
        path = _write_log(tmp_path / "metrics.jsonl")
        with path.open("a", encoding="utf-8") as f:
            f.write("not json\n")
            bare = {"schema_version": METRICS_SCHEMA_VERSION, "event": "eval"}
            f.write(json.dumps(bare) + "\n")

        result = emit_plots(path, tmp_path / "plots")

        assert result.skipped == 2

    def test_missing_table(self, tmp_path: Path) -> None:
        """Reading tables from an empty directory fails."""
        with pytest.raises(FileNotFoundError, match="Missing plot table"):
            read_tables(tmp_path)


class TestFigures:
    """Tests for figure construction."""

    def test_single_eval_point(self) -> None:
        """One evaluation point draws one marker per panel."""
        tables = metrics_to_tables(
            [
                {
                    "event": "eval",
                    "step": 5,
                    "win_rate": 1.0,
                    "mean_return": 2.0,
                }
            ]
        )

        fig = make_learning_curve_figure(tables["eval"], tables["train"])

        win_axis = fig.axes[0]
        assert len(win_axis.lines) == 1
        assert win_axis.lines[0].get_xydata().tolist() == [[5.0, 1.0]]
