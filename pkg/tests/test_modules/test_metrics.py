"""Tests for the JSONL metrics log.

This test module covers:
- Record validation against the event schema
- Writing with a nondecreasing step and cleaned non-finite values
- Appending to an existing log or starting it fresh
- Reading back with malformed lines skipped and counted
"""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from rodelab.config.defaults import METRICS_SCHEMA_VERSION
from rodelab.utils.metrics import (
    MetricsSchemaError,
    MetricsWriter,
    read_metrics,
    validate_record,
)

EVAL_FIELDS = {
    "win_rate": 0.5,
    "mean_return": 3.0,
    "role_frequencies": [0.25, 0.75],
    "fallbacks": 0,
    "episodes": 4,
}


def _eval_record(**overrides: object) -> dict[str, object]:
    record = {
        "schema_version": METRICS_SCHEMA_VERSION,
        "event": "eval",
        "step": 10,
        "episode": 2,
        "phase": "hierarchy",
        **EVAL_FIELDS,
    }
    record.update(overrides)
    return record


# ====================================================================================
# VALIDATION TESTS
# ====================================================================================
class TestValidateRecord:
    """Tests for the record schema."""

    def test_valid_eval(self) -> None:
        """A complete eval record passes."""
        validate_record(_eval_record())

    def test_unknown_event(self) -> None:
        """Events outside the schema are rejected."""
        with pytest.raises(MetricsSchemaError, match="Unknown event"):
            validate_record(_eval_record(event="debug"))

    def test_missing_field(self) -> None:
        """Required fields are listed."""
        record = _eval_record()
        del record["win_rate"]

        with pytest.raises(MetricsSchemaError, match="missing \\['win_rate'\\]"):
            validate_record(record)

    def test_negative_step(self) -> None:
        """Steps are non-negative integers."""
        with pytest.raises(MetricsSchemaError, match="step"):
            validate_record(_eval_record(step=-1))

    def test_null_numbers_allowed(self) -> None:
        """Numeric fields may be null."""
        validate_record(_eval_record(win_rate=None, mean_return=None))

    def test_string_number_rejected(self) -> None:
        """Numeric fields reject strings."""
        with pytest.raises(MetricsSchemaError, match="mean_return"):
            validate_record(_eval_record(mean_return="3"))

    def test_schema_version(self) -> None:
        """Unknown schema versions are rejected."""
        with pytest.raises(MetricsSchemaError, match="schema version"):
            validate_record(_eval_record(schema_version=METRICS_SCHEMA_VERSION + 1))


# ====================================================================================
# WRITER TESTS
# ====================================================================================
class TestMetricsWriter:
    """Tests for appending records."""

    def test_write_and_read(self, tmp_path: Path) -> None:
        """Written records read back in order."""
        path = tmp_path / "run" / "metrics.jsonl"
        with MetricsWriter(path) as writer:
            writer.write(
                "phase",
                step=0,
                episode=0,
                phase="hierarchy",
                n_roles=2,
                roles=[[0], [1]],
            )
            writer.write("eval", step=5, episode=1, phase="hierarchy", **EVAL_FIELDS)

        records, skipped = read_metrics(path)

        assert skipped == 0
        assert [r["event"] for r in records] == ["phase", "eval"]
        assert records[1]["role_frequencies"] == [0.25, 0.75]
        assert writer.records_written == 2

    def test_step_cannot_decrease(self, tmp_path: Path) -> None:
        """Going back in steps raises."""
        with MetricsWriter(tmp_path / "m.jsonl") as writer:
            writer.write("eval", step=5, episode=1, phase="hierarchy", **EVAL_FIELDS)

            with pytest.raises(MetricsSchemaError, match="went backwards"):
                writer.write(
                    "eval", step=4, episode=2, phase="hierarchy", **EVAL_FIELDS
                )

    def test_non_finite_written_as_null(self, tmp_path: Path) -> None:
        """NaN and infinity become null."""
        path = tmp_path / "m.jsonl"
        fields = {**EVAL_FIELDS, "mean_return": float("nan"), "win_rate": float("inf")}
        with MetricsWriter(path) as writer:
            writer.write("eval", step=0, episode=0, phase="hierarchy", **fields)

        record = json.loads(path.read_text(encoding="utf-8"))

        assert record["mean_return"] is None
        assert record["win_rate"] is None

    def test_invalid_record_not_written(self, tmp_path: Path) -> None:
        """Schema violations leave the file untouched."""
        path = tmp_path / "m.jsonl"
        with MetricsWriter(path) as writer, pytest.raises(MetricsSchemaError):
            writer.write("eval", step=0, episode=0, phase="hierarchy")

        assert path.read_text(encoding="utf-8") == ""

    def test_sorted_keys(self, tmp_path: Path) -> None:
        """Each line is a JSON object with sorted keys."""
        path = tmp_path / "m.jsonl"
        with MetricsWriter(path) as writer:
            writer.write("eval", step=0, episode=0, phase="hierarchy", **EVAL_FIELDS)

        line = path.read_text(encoding="utf-8").splitlines()[0]

        keys = list(json.loads(line))
        assert keys == sorted(keys)


class TestAppend:
    """Tests for reopening an existing log."""

    def test_existing_records_kept(self, tmp_path: Path) -> None:
        """Reopening appends after the records already in the file."""
        path = tmp_path / "m.jsonl"
        with MetricsWriter(path) as writer:
            writer.write("eval", step=7, episode=1, phase="hierarchy", **EVAL_FIELDS)

        with MetricsWriter(path) as writer:
            writer.write("eval", step=7, episode=2, phase="hierarchy", **EVAL_FIELDS)

        records, _ = read_metrics(path)
        assert [r["episode"] for r in records] == [1, 2]

    def test_step_continues_from_file(self, tmp_path: Path) -> None:
        """The last logged step still bounds new records."""
        path = tmp_path / "m.jsonl"
        with MetricsWriter(path) as writer:
            writer.write("eval", step=7, episode=1, phase="hierarchy", **EVAL_FIELDS)

        with MetricsWriter(path) as writer:
            assert writer.last_step == 7
            with pytest.raises(MetricsSchemaError, match="went backwards"):
                writer.write(
                    "eval", step=3, episode=2, phase="hierarchy", **EVAL_FIELDS
                )

    def test_fresh_truncates(self, tmp_path: Path) -> None:
        """fresh=True starts the log over from step 0."""
        path = tmp_path / "m.jsonl"
        with MetricsWriter(path) as writer:
            writer.write("eval", step=7, episode=1, phase="hierarchy", **EVAL_FIELDS)

        with MetricsWriter(path, fresh=True) as writer:
            writer.write("eval", step=0, episode=0, phase="hierarchy", **EVAL_FIELDS)

        records, _ = read_metrics(path)
        assert [r["step"] for r in records] == [0]


class TestReadMetrics:
    """Tests for tolerant reading."""

    def test_malformed_lines_skipped(self, tmp_path: Path) -> None:
        """Bad JSON and schema violations are counted, blank lines ignored."""
        path = tmp_path / "m.jsonl"
        good = json.dumps(_eval_record())
        bad_schema = json.dumps(_eval_record(event="unknown"))
        path.write_text(
            f"{good}\n{{oops\n\n{bad_schema}\n[1, 2]\n{good}\n", encoding="utf-8"
        )

        records, skipped = read_metrics(path)

        assert len(records) == 2
        assert skipped == 3
