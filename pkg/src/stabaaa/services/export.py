"""JSON and CSV artifacts.

This module contains the versioned JSON documents written by the command line (models, stability
reports, metrics, pole maps), their pydantic schemas used to validate documents read back, the
plot-data and metrics CSV writers, and the asynchronous writer that stores a set of artifacts.

Complex numbers are stored as ``[re, im]`` pairs. Models are stored in normalized coordinates together
with the normalization record; ``denormalized_evaluator`` maps physical frequencies back.
"""

import asyncio
import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Annotated, Any, Callable, Dict, List, Literal, Mapping, Optional, Sequence, Tuple, Union

import aiofiles
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError

from ..config.settings import SCHEMA_VERSION
from ..core.errors import SchemaError
from .barycentric import BarycentricModel, DescriptorRealization
from .datamodel import CSV_FLOAT_FORMAT, CSV_HEADER, ErrorReport, FrequencyDataset, NormalizationRecord, sample_errors
from .pipeline import FittedModel, PoleMap, model_evaluator
from .stabaaa import PoleResidueModel

logger = logging.getLogger(__name__)

ComplexPair = Tuple[float, float]

PLOT_COLUMNS = ("freq", "abs_data", "abs_model", "abs_error")
METRICS_COLUMNS = ("algorithm", "k", "e_inf", "e_2", "e_rms", "stable", "seconds", "status")
POLES_COLUMNS = ("re", "im", "residue_re", "residue_im", "stable")


def _pairs(values: np.ndarray) -> List[ComplexPair]:
    return [(float(v.real), float(v.imag)) for v in np.asarray(values, dtype=complex).ravel()]


def _complex(pairs: Sequence[ComplexPair]) -> np.ndarray:
    array = np.asarray(pairs, dtype=float).reshape(-1, 2)
    return array[:, 0] + 1j * array[:, 1]


def _complex_matrix(rows: Sequence[Sequence[ComplexPair]]) -> np.ndarray:
    if not rows:
        return np.zeros((0, 0), dtype=complex)
    return np.array([_complex(row) for row in rows])


class NormalizationSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    f_max: float = Field(gt=0)
    h_max: float = Field(gt=0)


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_version: Literal[1] = Field(default=SCHEMA_VERSION, alias="schema")
    algorithm: str
    dataset_sha256: str = Field(pattern=r"^[0-9a-f]{64}$")
    normalization: NormalizationSchema
    diagnostics: Dict[str, Any] = Field(default_factory=dict)


class BarycentricDocument(_Document):
    kind: Literal["barycentric"] = "barycentric"
    support_freqs: List[float]
    support_values: List[ComplexPair]
    weights: List[ComplexPair]
    constant: float = 0.0


class PoleResidueDocument(_Document):
    kind: Literal["pole_residue"] = "pole_residue"
    poles: List[ComplexPair]
    residues: List[ComplexPair]
    constant: float = 0.0


class DescriptorDocument(_Document):
    kind: Literal["descriptor"] = "descriptor"
    E: List[List[ComplexPair]]
    A: List[List[ComplexPair]]
    B: List[ComplexPair]
    C: List[ComplexPair]


ModelDocument = Annotated[
    Union[BarycentricDocument, PoleResidueDocument, DescriptorDocument], Field(discriminator="kind")
]
_MODEL_ADAPTER: TypeAdapter = TypeAdapter(ModelDocument)


def model_document(
    model: FittedModel,
    record: NormalizationRecord,
    sha256: str,
    algorithm: str,
    diagnostics: Optional[Dict[str, Any]] = None,
) -> _Document:
    """Wrap a fitted model into its versioned document."""
    common = dict(
        algorithm=algorithm,
        dataset_sha256=sha256,
        normalization=NormalizationSchema(**record.to_dict()),
        diagnostics=json.loads(json.dumps(diagnostics or {}, default=_json_default)),
    )
    if isinstance(model, BarycentricModel):
        return BarycentricDocument(
            support_freqs=model.support.tolist(),
            support_values=_pairs(model.values),
            weights=_pairs(model.weights),
            constant=model.constant,
            **common,
        )
    if isinstance(model, PoleResidueModel):
        return PoleResidueDocument(
            poles=_pairs(model.poles), residues=_pairs(model.residues), constant=model.constant, **common
        )
    if isinstance(model, DescriptorRealization):
        return DescriptorDocument(
            E=[_pairs(row) for row in np.atleast_2d(model.E)],
            A=[_pairs(row) for row in np.atleast_2d(model.A)],
            B=_pairs(model.B),
            C=_pairs(model.C),
            **common,
        )
    raise TypeError(f"cannot export a model of type {type(model).__name__}")


def parse_model(text: Union[str, bytes]) -> _Document:
    """Validate a model JSON document.

    Raises:
        SchemaError: If the text is not JSON or does not match any model schema.
    """
    try:
        return _MODEL_ADAPTER.validate_json(text)
    except ValidationError as e:
        raise SchemaError(f"model document does not match schema {SCHEMA_VERSION}: {e}") from e


def document_to_model(doc: _Document) -> FittedModel:
    if isinstance(doc, BarycentricDocument):
        return BarycentricModel(
            np.asarray(doc.support_freqs, dtype=float),
            _complex(doc.support_values),
            _complex(doc.weights),
            constant=doc.constant,
        )
    if isinstance(doc, PoleResidueDocument):
        return PoleResidueModel(_complex(doc.poles), _complex(doc.residues), doc.constant)
    return DescriptorRealization(
        E=_complex_matrix(doc.E), A=_complex_matrix(doc.A), B=_complex(doc.B), C=_complex(doc.C)
    )


def load_model(path: Union[str, Path]) -> Tuple[FittedModel, NormalizationRecord, _Document]:
    """Read a model document from disk and rebuild the model it describes."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SchemaError(f"cannot read model file {path}: {e}") from e
    doc = parse_model(text)
    record = NormalizationRecord(f_max=doc.normalization.f_max, h_max=doc.normalization.h_max)
    return document_to_model(doc), record, doc


def denormalized_evaluator(model: FittedModel, record: NormalizationRecord) -> Callable[[np.ndarray], np.ndarray]:
    """s ↦ h_max·Ĥ(s/f_max) for s in physical rad/s."""
    evaluate = model_evaluator(model)

    def _evaluate(s: np.ndarray) -> np.ndarray:
        return record.h_max * np.asarray(evaluate(np.asarray(s, dtype=complex) / record.f_max))

    return _evaluate


def _versioned(sha256: str, payload: Mapping[str, Any]) -> Dict[str, Any]:
    return {"schema": SCHEMA_VERSION, "dataset_sha256": sha256, **payload}


def stability_document(poles: PoleMap, sha256: str, **extra: Any) -> Dict[str, Any]:
    if poles.report is not None:
        payload = poles.report.to_dict()
    else:
        margin = float(np.max(poles.poles.real)) if poles.poles.size else None
        payload = {"stable": poles.stable, "margin": margin, "poles": _pairs(poles.poles)}
    return _versioned(sha256, {**payload, **extra})


def metrics_document(report: ErrorReport, sha256: str, error_mode: str, **extra: Any) -> Dict[str, Any]:
    return _versioned(sha256, {"error_mode": error_mode, **report.to_dict(), **extra})


def poles_document(poles: PoleMap, sha256: str) -> Dict[str, Any]:
    """Pole/zero map: poles with residues, denominator zeros and the stability verdict."""
    return _versioned(
        sha256,
        {
            "poles": _pairs(poles.poles),
            "residues": _pairs(poles.residues) if poles.residues is not None else [],
            "constant": poles.constant,
            "infinite_count": poles.infinite_count,
            "zeros": _pairs(poles.zeros),
            "stable": poles.stable,
            "stability": poles.report.to_dict() if poles.report else None,
        },
    )


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(document: Union[_Document, Mapping[str, Any]]) -> str:
    if isinstance(document, BaseModel):
        return document.model_dump_json(by_alias=True, indent=2)
    return json.dumps(document, indent=2, default=_json_default)


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([CSV_FLOAT_FORMAT.format(v) if isinstance(v, float) else v for v in row])
    return buffer.getvalue()


def _unit_freqs(freqs: np.ndarray, freq_unit: str) -> np.ndarray:
    return freqs / (2.0 * math.pi) if freq_unit == "hz" else freqs


def plot_data_csv(
    model_eval: Callable[[np.ndarray], np.ndarray], ds: FrequencyDataset, freq_unit: str = "rad_s"
) -> str:
    """freq, |data|, |model|, |error| for magnitude and residual-error plots."""
    response = np.asarray(model_eval(ds.s), dtype=complex)
    errors = sample_errors(model_eval, ds)
    freqs = _unit_freqs(ds.freqs, freq_unit)
    rows = zip(freqs.tolist(), np.abs(ds.values).tolist(), np.abs(response).tolist(), errors.tolist())
    return _csv_text(PLOT_COLUMNS, list(rows))


def responses_csv(freqs: np.ndarray, response: np.ndarray, freq_unit: str = "rad_s") -> str:
    response = np.asarray(response, dtype=complex)
    freqs = _unit_freqs(np.asarray(freqs, dtype=float), freq_unit)
    return _csv_text(CSV_HEADER, list(zip(freqs.tolist(), response.real.tolist(), response.imag.tolist())))


def poles_csv(document: Mapping[str, Any]) -> str:
    residues = document["residues"] or [(float("nan"), float("nan"))] * len(document["poles"])
    rows = [(p[0], p[1], r[0], r[1], int(p[0] < 0)) for p, r in zip(document["poles"], residues)]
    return _csv_text(POLES_COLUMNS, rows)


def metrics_csv(rows: Sequence[Mapping[str, Any]]) -> str:
    return _csv_text(METRICS_COLUMNS, [[row.get(column, "") for column in METRICS_COLUMNS] for row in rows])


async def _write_one(path: Path, content: str) -> None:
    async with aiofiles.open(path, "w", encoding="utf-8") as file:
        await file.write(content)


async def save_artifacts(directory: Union[str, Path], artifacts: Mapping[str, str]) -> List[Path]:
    """Write ``{file name: text}`` into ``directory`` concurrently."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = [directory / name for name in artifacts]
    await asyncio.gather(*(_write_one(path, content) for path, content in zip(paths, artifacts.values())))
    logger.info(f"Wrote {len(paths)} artifact(s) to {directory}")
    return paths


def write_artifacts(directory: Union[str, Path], artifacts: Mapping[str, str]) -> List[Path]:
    return asyncio.run(save_artifacts(directory, artifacts))
