"""Line-delimited JSON metrics log."""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Mapping
from pathlib import Path
from typing import Any, TextIO

from rodelab.config.defaults import DEFAULT_ENCODING, METRICS_SCHEMA_VERSION

logger = logging.getLogger(__name__)

COMMON_FIELDS = ("schema_version", "event", "step", "episode", "phase")
EVENT_FIELDS: dict[str, tuple[str, ...]] = {
    "train": (
        "epsilon",
        "repr_loss",
        "selector_loss",
        "policy_loss",
        "mean_return",
        "win_rate",
        "role_frequencies",
        "fallbacks",
    ),
    "phase": ("n_roles", "roles"),
    "eval": ("win_rate", "mean_return", "role_frequencies", "fallbacks", "episodes"),
    "transfer": (
        "win_rate",
        "mean_return",
        "role_frequencies",
        "random_win_rate",
        "random_mean_return",
        "action_count",
    ),
}
NUMERIC_OR_NULL = {
    "epsilon",
    "repr_loss",
    "selector_loss",
    "policy_loss",
    "mean_return",
    "win_rate",
    "random_win_rate",
    "random_mean_return",
}


class MetricsSchemaError(ValueError):
    """A metrics record does not match the schema."""


def validate_record(record: Mapping[str, Any]) -> None:
    """Check required fields and value types of one record.

    Raises:
        MetricsSchemaError: Describing the first problem found.

    """
    if not isinstance(record, Mapping):
        msg = f"Record must be an object, got {type(record).__name__}"
        raise MetricsSchemaError(msg)
    event = record.get("event")
    if event not in EVENT_FIELDS:
        msg = f"Unknown event {event!r}"
        raise MetricsSchemaError(msg)
    missing = [k for k in (*COMMON_FIELDS, *EVENT_FIELDS[event]) if k not in record]
    if missing:
        msg = f"{event} record missing {missing}"
        raise MetricsSchemaError(msg)
    if record["schema_version"] != METRICS_SCHEMA_VERSION:
        msg = f"Unsupported schema version {record['schema_version']}"
        raise MetricsSchemaError(msg)
    for key in ("step", "episode"):
        if not isinstance(record[key], int) or record[key] < 0:
            msg = f"{key} must be a non-negative integer, got {record[key]!r}"
            raise MetricsSchemaError(msg)
    for key in NUMERIC_OR_NULL & set(record):
        value = record[key]
        if value is not None and not isinstance(value, (int, float)):
            msg = f"{key} must be a number or null, got {value!r}"
            raise MetricsSchemaError(msg)
    freqs = record.get("role_frequencies")
    if freqs is not None and not all(isinstance(v, (int, float)) for v in freqs):
        msg = "role_frequencies must be a list of numbers"
        raise MetricsSchemaError(msg)


def _clean(value: Any) -> Any:  # noqa: ANN401
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, list):
        return [_clean(v) for v in value]
    return value


class MetricsWriter:
    """Append-only metrics file with a nondecreasing ``step`` field.

    An existing file is extended, and new records continue from its last
    valid step. ``fresh=True`` starts the file over instead.
    """

    def __init__(self, path: Path, *, fresh: bool = False) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._last_step = 0
        if not fresh and self.path.is_file():
            records, _ = read_metrics(self.path)
            if records:
                self._last_step = records[-1]["step"]
        self._handle: TextIO = self.path.open(
            "w" if fresh else "a", encoding=DEFAULT_ENCODING, newline="\n"
        )
        self.records_written = 0

    @property
    def last_step(self) -> int:
        """Step of the most recent record, 0 for an empty log."""
        return self._last_step

    def write(
        self,
        event: str,
        *,
        step: int,
        episode: int,
        phase: str,
        **fields: Any,  # noqa: ANN401
    ) -> None:
        """Validate and append one record.

        Raises:
            MetricsSchemaError: On schema violations or a decreasing step.

        """
        if step < self._last_step:
            msg = f"Metrics step went backwards: {step} < {self._last_step}"
            raise MetricsSchemaError(msg)
        record = {
            "schema_version": METRICS_SCHEMA_VERSION,
            "event": event,
            "step": int(step),
            "episode": int(episode),
            "phase": phase,
            **{k: _clean(v) for k, v in fields.items()},
        }
        validate_record(record)
        self._handle.write(json.dumps(record, sort_keys=True) + "\n")
        self._handle.flush()
        self._last_step = step
        self.records_written += 1

    def close(self) -> None:
        """Close the file."""
        self._handle.close()

    def __enter__(self) -> MetricsWriter:
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


def read_metrics(path: Path) -> tuple[list[dict[str, Any]], int]:
    """Parse every valid record; malformed lines are counted and skipped.

    Returns:
        ``(records, skipped_count)``.

    """
    records: list[dict[str, Any]] = []
    skipped = 0
    with Path(path).open(encoding=DEFAULT_ENCODING) as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                validate_record(record)
            except (json.JSONDecodeError, MetricsSchemaError, TypeError) as e:
                logger.warning("Skipping metrics line %d: %s", line_no, e)
                skipped += 1
                continue
            records.append(record)
    return records, skipped
