"""
log.py - Logging setup and AAA iteration traces

Contains the coloredlogs configuration used by the command line and IterationTrace, which writes one
JSON line per AAA iteration to a file for analysis and debugging.
"""

import json
import logging
import threading
from pathlib import Path
from typing import Any, Dict, Optional, TextIO, Union

import coloredlogs

from ..services.aaa import IterationRecord

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

logger = logging.getLogger(__name__)


def setup_logging(verbose: bool = False, quiet: bool = False) -> int:
    """Install coloredlogs on the root logger.

    Args:
        verbose: Log DEBUG messages.
        quiet: Log WARNING and above only; ignored when ``verbose`` is set.

    Returns:
        The level that was installed.
    """
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    coloredlogs.install(level=level, fmt=LOG_FORMAT, datefmt=LOG_DATE_FORMAT)
    return level


class IterationTrace:
    """JSON-lines sink for AAA iteration records.

    The instance is callable, so it can be passed directly as the ``trace`` hook of the fitting
    functions. Each line holds ``{iter, chosen_freq, max_err, sigma_min}`` plus any ``extra`` fields.

    Example:
        >>> with IterationTrace("trace.jsonl") as trace:  # doctest: +SKIP
        ...     aaa_fit(ds, trace=trace)
    """

    def __init__(self, path: Union[str, Path], extra: Optional[Dict[str, Any]] = None):
        self.path = Path(path)
        self.extra = dict(extra or {})
        self.count = 0
        self._stream: Optional[TextIO] = None
        self._lock = threading.Lock()

    def __enter__(self) -> "IterationTrace":
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._stream = open(self.path, "a", encoding="utf-8")
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def close(self) -> None:
        if self._stream is not None:
            self._stream.close()
            self._stream = None
            logger.debug(f"Wrote {self.count} trace records to {self.path}")

    def record(self, entry: IterationRecord) -> None:
        if self._stream is None:
            raise RuntimeError("IterationTrace is not open; use it as a context manager")
        line = json.dumps({**entry.to_dict(), **self.extra}) + "\n"
        with self._lock:
            self._stream.write(line)
            self._stream.flush()
            self.count += 1

    __call__ = record
