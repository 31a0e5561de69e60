"""Frequency-response datasets, normalization and error metrics.

This module contains FrequencyDataset, the immutable container of samples (jλ_v, h_v) taken on the
positive imaginary axis, together with CSV ingestion, the max-magnitude normalization applied before
fitting, and the E∞ / E₂ / E_RMS metrics every fitting algorithm reports.
"""

import csv
import io
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Callable, Final, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np

from ..config.settings import ERROR_MODES, FREQ_UNITS
from ..core.errors import CsvParseError, DataValidationError, DegenerateDataError

logger = logging.getLogger(__name__)

CSV_HEADER: Final[Tuple[str, str, str]] = ("freq", "re", "im")
CSV_FLOAT_FORMAT: Final[str] = "{:.17g}"

Source = Union[str, Path, bytes, BinaryIO, TextIO]
ModelEval = Callable[[np.ndarray], np.ndarray]


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class FrequencyDataset:
    """Samples of a SISO frequency response on the positive imaginary axis.

    Attributes:
        freqs: Angular frequencies λ_v, strictly increasing and positive.
        values: Complex responses h_v, one per frequency.
    """

    freqs: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        freqs = np.array(self.freqs, dtype=float).ravel()
        values = np.array(self.values, dtype=complex).ravel()
        if freqs.size < 2:
            raise DataValidationError(f"a dataset needs at least 2 samples, got {freqs.size}")
        if freqs.size != values.size:
            raise DataValidationError(f"{freqs.size} frequencies but {values.size} values")
        if not (np.all(np.isfinite(freqs)) and np.all(np.isfinite(values))):
            raise DataValidationError("dataset contains non-finite entries")
        if np.any(freqs <= 0):
            raise DataValidationError("frequencies must be strictly positive")
        if np.any(np.diff(freqs) <= 0):
            raise DataValidationError("frequencies must be strictly increasing and distinct")
        object.__setattr__(self, "freqs", _frozen(freqs))
        object.__setattr__(self, "values", _frozen(values))

    @classmethod
    def from_samples(cls, freqs: Sequence[float], values: Sequence[complex]) -> "FrequencyDataset":
        """Build a dataset from unordered samples, sorting by frequency and rejecting duplicates."""
        freqs_arr = np.asarray(freqs, dtype=float).ravel()
        values_arr = np.asarray(values, dtype=complex).ravel()
        if freqs_arr.size != values_arr.size:
            raise DataValidationError(f"{freqs_arr.size} frequencies but {values_arr.size} values")
        order = np.argsort(freqs_arr, kind="stable")
        freqs_arr = freqs_arr[order]
        duplicates = np.flatnonzero(np.diff(freqs_arr) == 0)
        if duplicates.size:
            raise DataValidationError(f"duplicate frequency {freqs_arr[duplicates[0]]!r}")
        return cls(freqs_arr, values_arr[order])

    @property
    def count(self) -> int:
        return int(self.freqs.size)

    @property
    def s(self) -> np.ndarray:
        """Sample points jλ_v."""
        return 1j * self.freqs

    def subset(self, indices: Sequence[int]) -> "FrequencyDataset":
        idx = np.sort(np.asarray(indices, dtype=int))
        return FrequencyDataset(self.freqs[idx], self.values[idx])

    def __len__(self) -> int:
        return self.count


@dataclass(frozen=True)
class NormalizationRecord:
    """Divisors applied by normalize: f_max in Hz, h_max in response units."""

    f_max: float
    h_max: float

    def __post_init__(self) -> None:
        if not (self.f_max > 0 and self.h_max > 0):
            raise DataValidationError("normalization divisors must be positive")

    @classmethod
    def identity(cls) -> "NormalizationRecord":
        return cls(1.0, 1.0)

    def to_dict(self) -> dict:
        return {"f_max": self.f_max, "h_max": self.h_max}


@dataclass(frozen=True)
class ErrorReport:
    """E∞, E₂ and E_RMS of a model against a dataset."""

    e_inf: float
    e_2: float
    e_rms: float
    argmax_index: int

    def to_dict(self) -> dict:
        return {"e_inf": self.e_inf, "e_2": self.e_2, "e_rms": self.e_rms, "argmax_index": self.argmax_index}


def _open_text(source: Source) -> TextIO:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def _parse_rows(reader: csv.reader) -> Tuple[List[float], List[complex]]:
    freqs: List[float] = []
    values: List[complex] = []

    try:
        header = next(reader)
    except StopIteration:
        raise CsvParseError("missing header", line=1) from None
    if tuple(cell.strip().lower() for cell in header) != CSV_HEADER:
        raise CsvParseError(f"expected header {','.join(CSV_HEADER)!r}, got {','.join(header)!r}", line=1)

    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 3:
            raise CsvParseError(f"expected 3 columns, got {len(row)}", line=line)
        try:
            f, re_part, im_part = (float(cell) for cell in row)
        except ValueError as e:
            raise CsvParseError(f"malformed number ({e})", line=line) from e
        if not all(math.isfinite(x) for x in (f, re_part, im_part)):
            raise CsvParseError("non-finite value", line=line)
        if f <= 0:
            raise DataValidationError(f"line {line}: frequency must be positive, got {f!r}")
        freqs.append(f)
        values.append(complex(re_part, im_part))

    return freqs, values


def load_dataset(source: Source, freq_unit: str = "hz") -> FrequencyDataset:
    """Read a ``freq,re,im`` CSV into a dataset with angular frequencies.

    Args:
        source: Path, raw bytes, or an open binary/text stream.
        freq_unit: Unit of the ``freq`` column, ``"hz"`` or ``"rad_s"``.

    Returns:
        FrequencyDataset sorted by frequency, with λ = 2πf when the column is in Hz.

    Raises:
        CsvParseError: If a row is malformed (the error carries the line number).
        DataValidationError: On non-positive or duplicate frequencies, or fewer than two samples.

    Examples:
        >>> ds = load_dataset(b"freq,re,im\\n1,1.0,0.0\\n2,0.5,-0.5\\n")
        >>> ds.values[1]
        (0.5-0.5j)
    """
    if freq_unit not in FREQ_UNITS:
        raise DataValidationError(f"unknown frequency unit {freq_unit!r}; expected one of {FREQ_UNITS}")

    stream = _open_text(source)
    try:
        freqs, values = _parse_rows(csv.reader(stream))
    finally:
        if isinstance(source, (str, Path)):
            stream.close()

    if len(freqs) < 2:
        raise DataValidationError(f"at least 2 samples are required, got {len(freqs)}")

    scale = 2.0 * math.pi if freq_unit == "hz" else 1.0
    ds = FrequencyDataset.from_samples(np.asarray(freqs) * scale, values)
    logger.info(f"Loaded {ds.count} samples spanning {ds.freqs[0]:.4g}..{ds.freqs[-1]:.4g} rad/s")
    return ds


def write_dataset(ds: FrequencyDataset, target: Union[str, Path, TextIO], freq_unit: str = "rad_s") -> None:
    """Write a dataset as ``freq,re,im`` CSV with 17 significant digits."""
    if freq_unit not in FREQ_UNITS:
        raise DataValidationError(f"unknown frequency unit {freq_unit!r}")
    freqs = ds.freqs / (2.0 * math.pi) if freq_unit == "hz" else ds.freqs

    def _write(stream: TextIO) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for f, h in zip(freqs, ds.values):
            writer.writerow([CSV_FLOAT_FORMAT.format(x) for x in (f, h.real, h.imag)])

    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="") as stream:
            _write(stream)
    else:
        _write(target)


def normalize(ds: FrequencyDataset) -> Tuple[FrequencyDataset, NormalizationRecord]:
    """Scale frequencies by f_max = max|λ/2π| and responses by h_max = max|h|.

    Raises:
        DegenerateDataError: If every response is zero.
    """
    h_max = float(np.max(np.abs(ds.values)))
    if h_max == 0.0:
        raise DegenerateDataError("all responses are zero; nothing to normalize")
    f_max = float(np.max(np.abs(ds.freqs / (2.0 * math.pi))))
    record = NormalizationRecord(f_max=f_max, h_max=h_max)
    logger.debug(f"Normalization f_max={f_max:.6g} Hz, h_max={h_max:.6g}")
    return apply_normalization(ds, record), record


def apply_normalization(ds: FrequencyDataset, record: NormalizationRecord) -> FrequencyDataset:
    """Scale a dataset by a stored record, e.g. to rebuild the data a saved model was fitted on."""
    return FrequencyDataset(ds.freqs / record.f_max, ds.values / record.h_max)


def denormalize(ds: FrequencyDataset, record: NormalizationRecord) -> FrequencyDataset:
    """Inverse of normalize."""
    return FrequencyDataset(ds.freqs * record.f_max, ds.values * record.h_max)


def sample_errors(
    model_eval: ModelEval, ds: FrequencyDataset, mode: str = "abs", indices: Optional[Sequence[int]] = None
) -> np.ndarray:
    """Pointwise deviations |Ĥ(jλ_v) − h_v|, divided by |h_v| in relative mode.

    With ``indices`` only those samples are compared, in the given order; any number of them,
    including one or none, is accepted.
    """
    if mode not in ERROR_MODES:
        raise DataValidationError(f"unknown error mode {mode!r}; expected one of {ERROR_MODES}")
    if indices is None:
        points, values = ds.s, ds.values
    else:
        idx = np.asarray(indices, dtype=int)
        points, values = ds.s[idx], ds.values[idx]
    if values.size == 0:
        return np.zeros(0)
    response = np.asarray(model_eval(points), dtype=complex)
    if response.shape != values.shape:
        response = np.array([complex(model_eval(s)) for s in points])
    errors = np.abs(response - values)
    if mode == "rel":
        magnitude = np.abs(values)
        # zero-magnitude samples keep the absolute deviation
        errors = np.divide(errors, magnitude, out=errors.copy(), where=magnitude > 0)
    return errors


def error_metrics(model_eval: ModelEval, ds: FrequencyDataset, mode: str = "abs") -> ErrorReport:
    """Compute E∞ = max|e_v|, E₂ = ‖e‖₂ and E_RMS = E₂/√V.

    Args:
        model_eval: Callable mapping an array of complex points s to model responses.
        ds: Dataset the model is compared against.
        mode: ``"abs"`` (default) or ``"rel"``.

    Returns:
        ErrorReport with the index of the worst sample.
    """
    errors = sample_errors(model_eval, ds, mode)
    argmax = int(np.argmax(errors))
    e_2 = float(np.sqrt(np.sum(errors**2)))
    return ErrorReport(e_inf=float(errors[argmax]), e_2=e_2, e_rms=e_2 / math.sqrt(ds.count), argmax_index=argmax)


def load_frequencies(source: Source, freq_unit: str = "hz") -> np.ndarray:
    """Read the ``freq`` column of a CSV (extra columns are ignored) as angular frequencies.

    Raises:
        CsvParseError: If the header lacks a leading ``freq`` column or a row is malformed.
    """
    if freq_unit not in FREQ_UNITS:
        raise DataValidationError(f"unknown frequency unit {freq_unit!r}; expected one of {FREQ_UNITS}")
    stream = _open_text(source)
    try:
        reader = csv.reader(stream)
        header = next(reader, None)
        if not header or header[0].strip().lower() != CSV_HEADER[0]:
            raise CsvParseError("expected a header starting with 'freq'", line=1)
        freqs: List[float] = []
        for row in reader:
            if not row or not row[0].strip():
                continue
            try:
                f = float(row[0])
            except ValueError as e:
                raise CsvParseError(f"malformed number ({e})", line=reader.line_num) from e
            if not (math.isfinite(f) and f > 0):
                raise CsvParseError(f"frequency must be positive and finite, got {row[0]!r}", line=reader.line_num)
            freqs.append(f)
    finally:
        if isinstance(source, (str, Path)):
            stream.close()
    if not freqs:
        raise DataValidationError("no frequencies to evaluate")
    return np.asarray(freqs) * (2.0 * math.pi if freq_unit == "hz" else 1.0)
