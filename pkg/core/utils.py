"""File formats: set files, vertex files, frequency tables and reports."""

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from core.constructions import build, random_subset
from core.errors import (
    ConfigInvalidError,
    FieldMismatchError,
    FormatError,
    IoFailureError,
    LabError,
)
from core.gf import field_from_order
from core.logger import logger
from core.mat2 import Mat2
from core.setalg import FreqTable, MatSet
from models import ConstructionKind, ConstructionSpec, ExperimentReport, FieldSpec

SIGNIFICANT_DIGITS = 12

PathLike = Union[str, Path]


def _read_lines(path: PathLike) -> list[str]:
    try:
        return Path(path).read_text().splitlines()
    except OSError as e:
        raise IoFailureError(f"Cannot read {path}: {e}") from e


def _write_text(path: PathLike, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise IoFailureError(f"Cannot write {path}: {e}") from e


def format_set(A: MatSet) -> str:
    lines = [f"q={A.field.label()}"]
    lines.extend(m.format() for m in A)
    return "\n".join(lines) + "\n"


def parse_set(text: str) -> MatSet:
    """
    Parse a set file: a "q=p^k" header, then one "m11,m12,m21,m22" per line.

    Raises
    ------
    FormatError
        Missing header or a malformed matrix line
    """
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or not lines[0].startswith("q="):
        raise FormatError("Set file must start with a q=<p>^<k> header")
    try:
        field = field_from_order(lines[0][2:])
    except LabError as e:
        raise FormatError(f"Bad field header {lines[0]!r}: {e}") from e
    return MatSet.from_matrices(field, (Mat2.parse(line, field) for line in lines[1:]))


def read_set_file(path: PathLike) -> MatSet:
    return parse_set("\n".join(_read_lines(path)))


def write_set_file(path: PathLike, A: MatSet) -> None:
    _write_text(path, format_set(A))
    logger.debug(f"Wrote {len(A)} matrices to {path}")


def read_vertex_file(path: PathLike, field: FieldSpec) -> np.ndarray:
    """One packed vertex index per line."""
    indices = []
    for number, line in enumerate(_read_lines(path), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            value = int(line)
        except ValueError as e:
            raise FormatError(f"{path}:{number}: {line!r} is not a vertex index") from e
        if not 0 <= value < field.q**12:
            raise FormatError(f"{path}:{number}: vertex index {value} out of range")
        indices.append(value)
    return np.unique(np.array(indices, dtype=np.int64))


def write_vertex_file(path: PathLike, vertices: np.ndarray) -> None:
    _write_text(path, "".join(f"{int(v)}\n" for v in np.unique(vertices)))


def write_freq_table(path: PathLike, table: FreqTable) -> None:
    """Two-column "lambda_index,count" text of the nonzero entries."""
    lines = ["lambda_index,count"]
    lines.extend(f"{index},{count}" for index, count in table.items())
    _write_text(path, "\n".join(lines) + "\n")


def parse_parameters(text: str) -> dict[str, str]:
    """Parse "key=value;key=value"."""
    params = {}
    for item in filter(None, (part.strip() for part in text.split(";"))):
        if "=" not in item:
            raise ConfigInvalidError(f"Construction parameter {item!r} is not key=value")
        key, value = item.split("=", 1)
        params[key.strip()] = value.strip()
    return params


def load_set_source(source: str, field: FieldSpec) -> MatSet:
    """
    Resolve a set source.

    Accepted forms are a set file path, "construction:<kind>[:k=v;...]" and
    "random:<size>:<seed>[:gl2]".
    """
    if source.startswith("construction:"):
        _, _, rest = source.partition(":")
        kind_name, _, param_text = rest.partition(":")
        try:
            kind = ConstructionKind(kind_name)
        except ValueError as e:
            raise ConfigInvalidError(f"Unknown construction {kind_name!r}") from e
        return build(ConstructionSpec(kind=kind, parameters=parse_parameters(param_text)), field)
    if source.startswith("random:"):
        parts = source.split(":")
        try:
            size = int(parts[1])
            seed = int(parts[2]) if len(parts) > 2 else 0
        except (IndexError, ValueError) as e:
            raise ConfigInvalidError(f"Bad random set source {source!r}") from e
        return random_subset(field, size, seed=seed, invertible=parts[-1] == "gl2")
    A = read_set_file(source)
    if A.field != field:
        raise FieldMismatchError(f"{source} is over F_{A.field.q}, expected F_{field.q}")
    return A


def load_json_config(path: PathLike) -> dict[str, Any]:
    try:
        data = json.loads("\n".join(_read_lines(path)))
    except json.JSONDecodeError as e:
        raise ConfigInvalidError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigInvalidError(f"{path} must hold a JSON object")
    return data


def _stable(value: Any) -> Any:
    """Round floats to fixed significant digits, recursively."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return str(value)
        return float(f"{value:.{SIGNIFICANT_DIGITS}g}")
    if isinstance(value, dict):
        return {str(k): _stable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_stable(v) for v in value]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return _stable(float(value))
    return value


def report_to_json(report: ExperimentReport) -> str:
    payload = _stable(report.model_dump(mode="json"))
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def report_to_csv(report: ExperimentReport) -> str:
    """One row per trial; a single summary row when the report has no trials."""
    rows = report.rows or [
        {**report.measured, **{f"ratio_{k}": v for k, v in report.ratios.items()}}
    ]
    rows = [_stable(row) for row in rows]
    columns = sorted({key for row in rows for key in row})
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in columns})
    return buffer.getvalue()


def emit_report(report: ExperimentReport, fmt: str = "json", path: Optional[PathLike] = None) -> str:
    """
    Serialize a report with sorted keys and 12 significant digits.

    Raises
    ------
    IoFailureError
        The path cannot be written
    """
    if fmt not in ("json", "csv"):
        raise ConfigInvalidError(f"Unknown report format {fmt!r}")
    text = report_to_json(report) if fmt == "json" else report_to_csv(report)
    if path is not None:
        _write_text(path, text)
        logger.info(f"Report {report.experiment} written to {path}")
    return text
