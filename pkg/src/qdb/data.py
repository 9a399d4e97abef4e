"""Published categorization-decision results and JSON/CSV record I/O."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

PRIOR_SUM_TOL = 0.01  # published priors are rounded to two decimals


class FaceType(str, enum.Enum):
    WIDE = "wide"
    NARROW = "narrow"


class Model(str, enum.Enum):
    QDB = "QDB"
    BAE = "BAE"
    MARKOV_BA = "MarkovBA"
    OBSERVED = "Observed"


class DataError(ValueError):
    """Base class for record loading problems."""


class RecordParseError(DataError):
    pass


class RecordValidationError(DataError):
    pass


@dataclass(frozen=True)
class ExperimentRecord:
    source_id: str
    face_type: FaceType
    p_g: float
    p_attack_given_good: float
    p_b: float
    p_attack_given_bad: float
    p_t_observed: float
    p_attack_observed: float

    def __post_init__(self):
        object.__setattr__(self, "face_type", FaceType(self.face_type))
        problems = validate_record(self)
        if problems:
            raise RecordValidationError("; ".join(problems))


@dataclass(frozen=True)
class ReferenceValues:
    source_id: str
    model: Model
    p_t: float
    p_attack: float

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        for name in ("p_t", "p_attack"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} out of [0, 1]")


RECORD_FIELDS = tuple(f.name for f in fields(ExperimentRecord))
PROB_FIELDS = RECORD_FIELDS[2:]

SOURCES = ("Townsend2000", "Busemeyer2009", "Wang2016-E1", "Wang2016-E2", "Wang2016-E3", "Average")

# (source, face): P(G), P(A|G), P(B), P(A|B), P_T, P(A)
_TABLE2 = {
    ("Townsend2000", "wide"): (0.84, 0.35, 0.16, 0.52, 0.37, 0.39),
    ("Townsend2000", "narrow"): (0.17, 0.41, 0.83, 0.63, 0.59, 0.69),
    ("Busemeyer2009", "wide"): (0.80, 0.37, 0.20, 0.53, 0.40, 0.39),
    ("Busemeyer2009", "narrow"): (0.20, 0.45, 0.80, 0.64, 0.60, 0.69),
    ("Wang2016-E1", "wide"): (0.78, 0.39, 0.22, 0.52, 0.42, 0.42),
    ("Wang2016-E1", "narrow"): (0.21, 0.41, 0.79, 0.58, 0.54, 0.59),
    ("Wang2016-E2", "wide"): (0.78, 0.33, 0.22, 0.53, 0.37, 0.37),
    ("Wang2016-E2", "narrow"): (0.24, 0.37, 0.76, 0.61, 0.55, 0.60),
    ("Wang2016-E3", "wide"): (0.77, 0.34, 0.23, 0.58, 0.40, 0.39),
    ("Wang2016-E3", "narrow"): (0.24, 0.33, 0.76, 0.66, 0.58, 0.62),
    ("Average", "wide"): (0.79, 0.36, 0.21, 0.54, 0.39, 0.39),
    ("Average", "narrow"): (0.21, 0.39, 0.79, 0.62, 0.57, 0.64),
}

# narrow faces only: (P_T, P(A)) per model
_TABLE5 = {
    "Townsend2000": {"QDB": (0.5923, 0.6756), "BAE": (0.56, 0.63), "MarkovBA": (0.576, 0.576)},
    "Busemeyer2009": {"QDB": (0.6027, 0.6860), "BAE": (0.56, 0.63), "MarkovBA": (0.621, 0.621)},
    "Wang2016-E1": {"QDB": (0.5444, 0.6278), "BAE": (0.5634, 0.6214), "MarkovBA": (0.532, 0.532)},
    "Wang2016-E2": {"QDB": (0.5528, 0.6361), "BAE": (0.6065, 0.6315), "MarkovBA": (0.5979, 0.5979)},
    "Wang2016-E3": {"QDB": (0.5810, 0.6644), "BAE": (0.6123, 0.6323), "MarkovBA": (0.5316, 0.5316)},
    "Average": {"QDB": (0.5721, 0.6554), "BAE": (0.580, 0.629), "MarkovBA": (0.572, 0.572)},
}

# QDB fitted conditionals as published: P(A|G), P(A|B)
PUBLISHED_QDB_CONDITIONALS = {
    "Townsend2000": (0.41, 0.6296),
    "Busemeyer2009": (0.4499, 0.6409),
    "Wang2016-E1": (0.41, 0.5802),
    "Wang2016-E2": (0.3702, 0.6104),
    "Wang2016-E3": (0.3296, 0.6604),
    "Average": (0.39, 0.6205),
}


def embedded_experiments() -> list[ExperimentRecord]:
    return [
        ExperimentRecord(src, FaceType(face), *_TABLE2[src, face])
        for src in SOURCES
        for face in ("wide", "narrow")
    ]


def narrow_experiments() -> list[ExperimentRecord]:
    return [r for r in embedded_experiments() if r.face_type is FaceType.NARROW]


def embedded_references() -> list[ReferenceValues]:
    out = []
    for src in SOURCES:
        obs = _TABLE2[src, "narrow"]
        out.append(ReferenceValues(src, Model.OBSERVED, obs[4], obs[5]))
        for model in ("QDB", "BAE", "MarkovBA"):
            out.append(ReferenceValues(src, Model(model), *_TABLE5[src][model]))
    return out


def reference(source_id: str, model: Model | str) -> ReferenceValues | None:
    model = Model(model)
    for ref in embedded_references():
        if ref.source_id == source_id and ref.model is model:
            return ref
    return None


def validate_record(r) -> list[str]:
    problems = []
    for name in PROB_FIELDS:
        v = getattr(r, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and 0.0 <= v <= 1.0):
            problems.append(f"{name} = {v!r} is not a probability in [0, 1]")
    if not problems and abs(r.p_g + r.p_b - 1.0) > PRIOR_SUM_TOL + 1e-12:
        problems.append(f"p_g + p_b = {r.p_g + r.p_b:.6g} differs from 1 by more than {PRIOR_SUM_TOL}")
    return problems


def _record_from_mapping(row: dict, rownum: int) -> ExperimentRecord:
    missing = [k for k in RECORD_FIELDS if k not in row or row[k] in (None, "")]
    if missing:
        raise RecordParseError(f"row {rownum}: missing field(s) {', '.join(missing)}")
    values = {"source_id": str(row["source_id"])}
    face = str(row["face_type"]).strip().lower()
    try:
        values["face_type"] = FaceType(face)
    except ValueError:
        raise RecordParseError(f"row {rownum}: face_type {row['face_type']!r} is not 'wide' or 'narrow'") from None
    for name in PROB_FIELDS:
        raw = row[name]
        if isinstance(raw, bool):
            raise RecordParseError(f"row {rownum}: field {name} = {raw!r} is not a number")
        try:
            values[name] = float(raw)
        except (TypeError, ValueError):
            raise RecordParseError(f"row {rownum}: field {name} = {raw!r} is not a number") from None
    try:
        return ExperimentRecord(**values)
    except RecordValidationError as exc:
        raise RecordValidationError(f"row {rownum}: {exc}") from None


def load_experiments(path) -> list[ExperimentRecord]:
    """Read records from a ``.json`` or ``.csv`` file.

    Rows are numbered from 1 in error messages (the CSV header is not counted).
    Columns beyond the record schema, such as those written by
    :func:`export_results`, are ignored.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        return []
    if path.suffix.lower() == ".csv":
        rows = list(csv.DictReader(io.StringIO(text, newline="")))
    else:
        try:
            rows = json.loads(text)
        except json.JSONDecodeError as exc:
            raise RecordParseError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(rows, list):
            raise RecordParseError(f"{path}: expected a JSON array of records")
    records = []
    for i, row in enumerate(rows, start=1):
        if not isinstance(row, dict):
            raise RecordParseError(f"row {i}: expected an object")
        records.append(_record_from_mapping(row, i))
    return records


RESULT_FIELDS = (
    "h_g", "h_b", "residual_good", "residual_bad",
    "pred_p_attack_given_good", "pred_p_attack_given_bad",
    "pred_p_uncertain_given_good", "pred_p_uncertain_given_bad",
    "pred_p_t", "pred_p_attack", "interference",
    "ref_qdb_p_t", "ref_qdb_p_attack", "delta_p_t", "delta_p_attack",
)

_number_or_null = {"type": ["number", "null"]}

RESULTS_JSON_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "array",
    "items": {
        "type": "object",
        "required": list(RECORD_FIELDS),
        "properties": {
            "source_id": {"type": "string"},
            "face_type": {"enum": ["wide", "narrow"]},
            **{k: {"type": "number", "minimum": 0, "maximum": 1} for k in PROB_FIELDS},
            "fit": {
                "type": "object",
                "required": list(RESULT_FIELDS),
                "properties": {k: _number_or_null for k in RESULT_FIELDS},
                "additionalProperties": False,
            },
        },
        "additionalProperties": False,
    },
}


def record_to_dict(r: ExperimentRecord) -> dict:
    d = asdict(r)
    d["face_type"] = r.face_type.value
    return d


def result_fields(record: ExperimentRecord, fitted) -> dict:
    """Flat mapping of fitted parameters, predictions and deltas to the published QDB row."""
    p = fitted.prediction
    ref = reference(record.source_id, Model.QDB) if record.face_type is FaceType.NARROW else None
    return {
        "h_g": fitted.params.h_g,
        "h_b": fitted.params.h_b,
        "residual_good": fitted.residual_good,
        "residual_bad": fitted.residual_bad,
        "pred_p_attack_given_good": p.p_attack_given_good,
        "pred_p_attack_given_bad": p.p_attack_given_bad,
        "pred_p_uncertain_given_good": p.p_uncertain_given_good,
        "pred_p_uncertain_given_bad": p.p_uncertain_given_bad,
        "pred_p_t": p.p_total_cd,
        "pred_p_attack": p.p_attack_d_alone,
        "interference": p.interference,
        "ref_qdb_p_t": ref.p_t if ref else None,
        "ref_qdb_p_attack": ref.p_attack if ref else None,
        "delta_p_t": p.p_total_cd - ref.p_t if ref else None,
        "delta_p_attack": p.p_attack_d_alone - ref.p_attack if ref else None,
    }


def format_results(
    records: Sequence[ExperimentRecord],
    format: str = "json",
    fits: Sequence | None = None,
) -> str:
    """Serialise records, optionally with their fits, as JSON or CSV text.

    The record schema columns always come first so the output can be read back
    by :func:`load_experiments`. JSON nests fit output under ``"fit"``; CSV
    appends it as extra columns. Floats are written at full precision.
    """
    if fits is not None and len(fits) != len(records):
        raise ValueError("need one fit per record")
    rows = []
    for i, r in enumerate(records):
        row = record_to_dict(r)
        if fits is not None:
            row["fit"] = result_fields(r, fits[i])
        rows.append(row)

    if format == "json":
        return json.dumps(rows, indent=2) + "\n"
    if format == "csv":
        header = list(RECORD_FIELDS) + (list(RESULT_FIELDS) if fits is not None else [])
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
        w.writeheader()
        for row in rows:
            flat = {k: v for k, v in row.items() if k != "fit"}
            flat.update(row.get("fit", {}))
            w.writerow({k: ("" if v is None else _fmt(v)) for k, v in flat.items()})
        return buf.getvalue()
    raise ValueError(f"unknown export format {format!r}")


def export_results(
    records: Sequence[ExperimentRecord],
    path,
    format: str = "json",
    fits: Sequence | None = None,
) -> None:
    Path(path).write_text(format_results(records, format, fits), encoding="utf-8")


def _fmt(v):
    return repr(v) if isinstance(v, float) else v


def records_from(rows: Iterable[dict]) -> list[ExperimentRecord]:
    return [_record_from_mapping(dict(row), i) for i, row in enumerate(rows, start=1)]
