"""Root logger configuration for command-line runs."""

from __future__ import annotations

import logging
import sys

LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"
DATE_FORMAT = "%H:%M:%S"


def configure_logging(level: str = "INFO") -> None:
    """Send records at ``level`` and above to stderr.

    Replaces handlers installed by an earlier call so repeated CLI
    invocations in one process do not duplicate output.
    """
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, DATE_FORMAT))
    root.addHandler(handler)
    root.setLevel(level.upper())
    # Font discovery chatter from matplotlib is never useful here.
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
