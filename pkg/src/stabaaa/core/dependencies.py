"""
Run context shared by the command handlers.

This module contains RunContext, the object stored on the click context by the top-level group. It
carries the global flags and opens the optional AAA iteration trace.
"""

from contextlib import nullcontext
from dataclasses import dataclass
from pathlib import Path
from typing import ContextManager, Optional

import click

from ..services.datamodel import FrequencyDataset, NormalizationRecord, load_dataset, normalize
from ..utils.hash import dataset_sha256
from ..utils.log import IterationTrace


@dataclass
class RunContext:
    verbose: bool = False
    quiet: bool = False
    trace_path: Optional[Path] = None
    normalize: bool = True

    def trace(self, **extra) -> ContextManager[Optional[IterationTrace]]:
        if self.trace_path is None:
            return nullcontext(None)
        return IterationTrace(self.trace_path, extra=extra)

    def load(self, path: Path, freq_unit: str) -> "LoadedDataset":
        """Read, fingerprint and (unless ``--no-normalize``) normalize an input CSV."""
        raw = load_dataset(path, freq_unit)
        if self.normalize:
            data, record = normalize(raw)
        else:
            data, record = raw, NormalizationRecord.identity()
        return LoadedDataset(raw=raw, data=data, record=record, sha256=dataset_sha256(raw))


@dataclass(frozen=True)
class LoadedDataset:
    raw: FrequencyDataset
    data: FrequencyDataset
    record: NormalizationRecord
    sha256: str


def get_run_context() -> RunContext:
    ctx = click.get_current_context()
    if not isinstance(ctx.obj, RunContext):
        ctx.obj = RunContext()
    return ctx.obj
