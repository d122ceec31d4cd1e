"""CSV ingestion and result serialization.

Input format (dataset and query alike) is long-form CSV with header
``instance_id,time_index,<var>,...``: one row per (instance, time step).
An empty field or the literal ``NA`` is a missing cell, as is any
(instance, time) row that simply never appears.  The time-axis length N is
inferred as ``max(time_index) + 1`` and must be uniform across instances.
Instances keep their order of first appearance.

Output format is one row per dataset instance:
``instance_id,rotation,similarity,raw_distance,status``.  Real values are
written with ``%.12g``; filtered rows blank out similarity and
raw_distance, missing-data rows additionally blank out rotation.  Written
files round-trip through ``load_results`` exactly at that precision.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import (
    NO_ROTATION,
    STATUS_OK,
    QuerySequence,
    SimilarityIndexMatrix,
    TimeSeriesDataset,
    ValidationError,
)

#: Cell spellings read as a missing value (besides an absent row).
MISSING_TOKENS = ("", "NA")

_REAL_FORMAT = "%.12g"


class DataFormatError(ValueError):
    """A file exists but its contents do not form a valid table."""


@dataclass(frozen=True)
class LongFormatRecord:
    """One parsed CSV row: an instance's measurements at one time step."""

    instance_id: str
    time_index: int
    values: tuple[float, ...]  # NaN for missing cells


def _parse_long_csv(
    path, variable_names: Sequence[str]
) -> tuple[list[str], dict[str, dict[int, tuple[float, ...]]], int]:
    """Shared reader for dataset and query files.

    Returns ``(ids_in_order, rows_by_id, n_timesteps)`` and enforces the
    structural rules: known header, integer time indices, no duplicate
    (instance, time) pairs, uniform time-axis length.
    """
    names = [str(v) for v in variable_names]
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise DataFormatError(f"{path}: file is empty")
        header = [h.strip() for h in header]
        if header[:2] != ["instance_id", "time_index"]:
            raise DataFormatError(
                f"{path}: header must start with instance_id,time_index"
            )
        file_vars = header[2:]
        unknown = [v for v in file_vars if v not in names]
        if unknown:
            raise DataFormatError(
                f"{path}: unknown variable column(s) {', '.join(unknown)}"
            )
        absent = [v for v in names if v not in file_vars]
        if absent:
            raise DataFormatError(
                f"{path}: missing variable column(s) {', '.join(absent)}"
            )
        column_of = {v: file_vars.index(v) for v in names}

        ids: list[str] = []
        rows: dict[str, dict[int, tuple[float, ...]]] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(cell.strip() == "" for cell in row):
                continue
            if len(row) != len(header):
                raise DataFormatError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            instance_id = row[0].strip()
            if instance_id == "":
                raise DataFormatError(f"{path}:{lineno}: empty instance_id")
            try:
                time_index = int(row[1])
            except ValueError:
                raise DataFormatError(
                    f"{path}:{lineno}: time_index {row[1]!r} is not an integer"
                ) from None
            if time_index < 0:
                raise DataFormatError(
                    f"{path}:{lineno}: negative time_index {time_index}"
                )
            cells = row[2:]
            record = LongFormatRecord(
                instance_id=instance_id,
                time_index=time_index,
                values=tuple(
                    _parse_cell(cells[column_of[v]], path, lineno)
                    for v in names
                ),
            )
            if record.instance_id not in rows:
                ids.append(record.instance_id)
                rows[record.instance_id] = {}
            if record.time_index in rows[record.instance_id]:
                raise DataFormatError(
                    f"{path}:{lineno}: duplicate row for instance "
                    f"{record.instance_id!r} at time {record.time_index}"
                )
            rows[record.instance_id][record.time_index] = record.values

    if not ids:
        raise DataFormatError(f"{path}: no data rows")
    lengths = {i: max(rows[i]) + 1 for i in ids}
    n = max(lengths.values())
    ragged = [i for i in ids if lengths[i] != n]
    if ragged:
        raise DataFormatError(
            f"{path}: time axis must be uniform (N={n}); offending instance "
            f"id(s): {', '.join(ragged)}"
        )
    return ids, rows, n


def _parse_cell(cell: str, path, lineno: int) -> float:
    text = cell.strip()
    if text in MISSING_TOKENS:
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise DataFormatError(
            f"{path}:{lineno}: value {cell!r} is not a number"
        ) from None


def load_dataset(path, variable_names: Sequence[str]) -> TimeSeriesDataset:
    """Read a reference dataset from long-form CSV."""
    names = tuple(str(v) for v in variable_names)
    ids, rows, n = _parse_long_csv(path, names)
    values = np.full((len(ids), n, len(names)), np.nan)
    for i, instance_id in enumerate(ids):
        for t, row_values in rows[instance_id].items():
            values[i, t] = row_values
    return TimeSeriesDataset(
        values=values, instance_ids=tuple(ids), variable_names=names
    )


def load_query(path, variable_names: Sequence[str]) -> QuerySequence:
    """Read a query from long-form CSV; exactly one instance, no gaps."""
    names = tuple(str(v) for v in variable_names)
    ids, rows, n = _parse_long_csv(path, names)
    if len(ids) != 1:
        raise DataFormatError(
            f"{path}: query file must contain exactly one instance, "
            f"found {len(ids)}"
        )
    values = np.full((n, len(names)), np.nan)
    for t, row_values in rows[ids[0]].items():
        values[t] = row_values
    try:
        return QuerySequence(values=values, variable_names=names)
    except ValidationError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def write_results(matrix: SimilarityIndexMatrix, path) -> None:
    """Serialize an assessment result, one row per instance, stable bytes.

    Field formatting is fixed (``%.12g``, ``\\n`` line endings, UTF-8), so
    identical matrices always produce identical files.
    """
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            ["instance_id", "rotation", "similarity", "raw_distance", "status"]
        )
        for i, instance_id in enumerate(matrix.instance_ids):
            status = matrix.status[i]
            rotation = ""
            similarity = ""
            raw = ""
            if int(matrix.rotation_array[i]) != NO_ROTATION:
                rotation = str(int(matrix.rotation_array[i]))
            if status == STATUS_OK:
                similarity = _REAL_FORMAT % matrix.similarity_array[i]
                raw = _REAL_FORMAT % matrix.raw_combined[i]
            writer.writerow([instance_id, rotation, similarity, raw, status])


def load_results(path) -> SimilarityIndexMatrix:
    """Read back a results file written by ``write_results``.

    Blanked fields come back as NaN (or the no-rotation marker), so the
    reconstruction is exact at the written precision.
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        expected = ["instance_id", "rotation", "similarity", "raw_distance",
                    "status"]
        if header != expected:
            raise DataFormatError(f"{path}: unexpected results header {header}")
        ids: list[str] = []
        rotations: list[int] = []
        similarities: list[float] = []
        raws: list[float] = []
        statuses: list[str] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 5:
                raise DataFormatError(
                    f"{path}:{lineno}: expected 5 fields, got {len(row)}"
                )
            ids.append(row[0])
            rotations.append(int(row[1]) if row[1] != "" else NO_ROTATION)
            similarities.append(float(row[2]) if row[2] != "" else math.nan)
            raws.append(float(row[3]) if row[3] != "" else math.nan)
            statuses.append(row[4])
    return SimilarityIndexMatrix(
        rotation_array=np.asarray(rotations, dtype=np.int64),
        similarity_array=np.asarray(similarities),
        raw_combined=np.asarray(raws),
        status=tuple(statuses),
        instance_ids=tuple(ids),
    )


def parse_config_file(path) -> dict[str, str]:
    """Read a flat ``key = value`` config file.

    Blank lines and ``#`` comments are skipped.  Keys mirror the CLI flag
    names with underscores; values stay strings and are parsed by the same
    code that parses the corresponding flag.
    """
    known = {
        "query", "dataset", "out", "vars", "weights", "period",
        "rotation_vars", "rotate", "distance", "transform",
        "absolute_threshold", "top_k", "workers",
    }
    options: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise DataFormatError(
                    f"{path}:{lineno}: expected key = value, got {text!r}"
                )
            key, _, value = text.partition("=")
            key = key.strip().replace("-", "_")
            if key not in known:
                raise DataFormatError(f"{path}:{lineno}: unknown key {key!r}")
            options[key] = value.strip()
    return options
