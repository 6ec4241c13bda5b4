"""NSL-KDD file ingestion: parsing, binary relabeling, merging, CSV dumps.

Input files are comma-separated, one connection record per line, with either
42 fields (41 features + label) or 43 fields (plus a trailing difficulty
integer). The difficulty column is captured during parsing and dropped
afterwards. Relabeling maps every non-"normal" label to the anomaly class.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .schema import CATEGORICAL_BINARY, NOMINAL, NUMERIC, FeatureSchema, nslkdd_schema

NORMAL = 0
ANOMALY = 1

LABEL_NAMES = ("normal", "anomaly")

PROVENANCE_TRAIN = "train"
PROVENANCE_TEST = "test"
PROVENANCE_MERGED = "merged"


class IngestError(ValueError):
    """A malformed input file: wrong field count, bad numeric, missing cell."""


@dataclass(frozen=True)
class RawRecord:
    """One parsed line: numeric fields as floats, nominal and binary-flag
    fields kept as text, plus the raw label and the optional difficulty."""

    values: tuple
    raw_label: str
    difficulty: int | None


@dataclass(frozen=True)
class ClassCounts:
    normal: int
    anomaly: int

    @property
    def total(self) -> int:
        return self.normal + self.anomaly

    def __add__(self, other: "ClassCounts") -> "ClassCounts":
        return ClassCounts(self.normal + other.normal, self.anomaly + other.anomaly)


@dataclass(frozen=True)
class Dataset:
    """Relabeled records in columnar form.

    ``floats`` holds the numeric and binary-flag features (in feature order,
    positions ``schema.float_positions``); ``nominals`` holds the nominal
    string features (positions ``schema.nominal_positions``). Labels are 0
    for normal and 1 for anomaly.
    """

    schema: FeatureSchema
    floats: np.ndarray      # (n, #numeric + #binary) float64
    nominals: np.ndarray    # (n, #nominal) object
    labels: np.ndarray      # (n,) uint8
    provenance: str

    def __len__(self) -> int:
        return len(self.labels)

    def take(self, indices) -> "Dataset":
        """Row subset, preserving order of ``indices``."""
        idx = np.asarray(indices)
        return Dataset(self.schema, self.floats[idx], self.nominals[idx],
                       self.labels[idx], self.provenance)

    def float_column(self, position: int) -> np.ndarray:
        """Column of a numeric or binary feature by feature position."""
        return self.floats[:, self.schema.float_positions.index(position)]

    def nominal_column(self, position: int) -> np.ndarray:
        return self.nominals[:, self.schema.nominal_positions.index(position)]

    def row_values(self, i: int) -> list:
        """The 41 feature values of row ``i`` in schema order."""
        out = [None] * len(self.schema)
        for j, pos in enumerate(self.schema.float_positions):
            out[pos] = float(self.floats[i, j])
        for j, pos in enumerate(self.schema.nominal_positions):
            out[pos] = self.nominals[i, j]
        return out


def _normalize_label(raw: str) -> str:
    # KDD-family files vary in case and sometimes carry a trailing period.
    return raw.strip().lower().rstrip(".")


def _iter_lines(source) -> Iterable[str]:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            yield from fh
        return
    if isinstance(source, bytes):
        yield from io.StringIO(source.decode("utf-8"))
        return
    for line in source:
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        yield line


def parse_nslkdd(source, schema: FeatureSchema | None = None) -> list[RawRecord]:
    """Parse NSL-KDD text into raw records.

    ``source`` may be a path, bytes, or an iterable of lines. Accepts both
    the 42-field and the 43-field (trailing difficulty) line variants,
    detected per line. Numeric fields must parse as finite reals >= 0;
    binary flags must be numeric text; no cell may be empty. Raises
    IngestError naming the line and field otherwise.
    """
    schema = schema or nslkdd_schema()
    n_features = len(schema)
    kinds = schema.kinds
    names = schema.names
    records: list[RawRecord] = []

    for line_no, line in enumerate(_iter_lines(source), start=1):
        line = line.rstrip("\r\n")
        if not line:
            continue
        fields = line.split(",")
        if len(fields) == n_features + 1:
            difficulty = None
        elif len(fields) == n_features + 2:
            diff_text = fields[-1].strip()
            try:
                difficulty = int(diff_text)
            except ValueError:
                raise IngestError(
                    f"line {line_no}: difficulty field {diff_text!r} is not an integer"
                ) from None
        else:
            raise IngestError(
                f"line {line_no}: expected {n_features + 1} or {n_features + 2} "
                f"fields, found {len(fields)}"
            )

        values: list = [None] * n_features
        for pos in range(n_features):
            cell = fields[pos]
            if cell == "":
                raise IngestError(
                    f"line {line_no}: missing value in field {names[pos]!r}"
                )
            kind = kinds[pos]
            if kind == NOMINAL:
                values[pos] = cell
                continue
            try:
                x = float(cell)
            except ValueError:
                raise IngestError(
                    f"line {line_no}: field {names[pos]!r} value {cell!r} "
                    f"is not numeric"
                ) from None
            if not np.isfinite(x) or x < 0:
                raise IngestError(
                    f"line {line_no}: field {names[pos]!r} value {cell!r} "
                    f"must be a finite number >= 0"
                )
            # Binary flags stay as text in the raw record; the parse above
            # only validates them.
            values[pos] = cell if kind == CATEGORICAL_BINARY else x

        raw_label = fields[n_features].strip()
        if not raw_label:
            raise IngestError(f"line {line_no}: empty label")
        records.append(RawRecord(tuple(values), raw_label, difficulty))

    if not records:
        raise IngestError("empty source: no records found")
    return records


def relabel_binary(records: list[RawRecord], schema: FeatureSchema | None = None,
                   provenance: str = PROVENANCE_TRAIN) -> Dataset:
    """Build a binary-labeled dataset: "normal" stays normal, every attack
    name maps to anomaly. Feature values are carried over exactly."""
    schema = schema or nslkdd_schema()
    n = len(records)
    float_pos = schema.float_positions
    nominal_pos = schema.nominal_positions

    floats = np.empty((n, len(float_pos)), dtype=np.float64)
    nominals = np.empty((n, len(nominal_pos)), dtype=object)
    labels = np.empty(n, dtype=np.uint8)

    for i, rec in enumerate(records):
        vals = rec.values
        for j, pos in enumerate(float_pos):
            floats[i, j] = float(vals[pos])
        for j, pos in enumerate(nominal_pos):
            nominals[i, j] = vals[pos]
        labels[i] = NORMAL if _normalize_label(rec.raw_label) == "normal" else ANOMALY

    return Dataset(schema, floats, nominals, labels, provenance)


def merge(train: Dataset, test: Dataset) -> Dataset:
    """Concatenate two datasets (train rows first). Schemas must match."""
    if train.schema != test.schema:
        raise ValueError("cannot merge datasets with different schemas")
    return Dataset(
        train.schema,
        np.concatenate([train.floats, test.floats], axis=0),
        np.concatenate([train.nominals, test.nominals], axis=0),
        np.concatenate([train.labels, test.labels], axis=0),
        PROVENANCE_MERGED,
    )


def class_counts(dataset: Dataset) -> ClassCounts:
    n_anomaly = int(np.count_nonzero(dataset.labels))
    return ClassCounts(normal=len(dataset) - n_anomaly, anomaly=n_anomaly)


def ingest_pair(train_path, test_path, schema: FeatureSchema | None = None) -> Dataset:
    """Parse, relabel, and merge a train/test file pair."""
    schema = schema or nslkdd_schema()
    train = relabel_binary(parse_nslkdd(train_path, schema), schema, PROVENANCE_TRAIN)
    test = relabel_binary(parse_nslkdd(test_path, schema), schema, PROVENANCE_TEST)
    return merge(train, test)


def _format_float(x: float) -> str:
    return str(int(x)) if float(x).is_integer() and abs(x) < 1e15 else repr(float(x))


def write_dataset_csv(dataset: Dataset, destination) -> None:
    """Canonical dump: header of feature names plus "label", one row per
    record, labels written as normal/anomaly."""
    own = isinstance(destination, (str, os.PathLike))
    fh = open(destination, "w", encoding="utf-8", newline="\n") if own else destination
    try:
        fh.write(",".join(dataset.schema.names + ("label",)) + "\n")
        nominal_pos = set(dataset.schema.nominal_positions)
        for i in range(len(dataset)):
            vals = dataset.row_values(i)
            cells = [vals[p] if p in nominal_pos else _format_float(vals[p])
                     for p in range(len(vals))]
            cells.append(LABEL_NAMES[dataset.labels[i]])
            fh.write(",".join(cells) + "\n")
    finally:
        if own:
            fh.close()


def read_dataset_csv(source, schema: FeatureSchema | None = None,
                     provenance: str = PROVENANCE_MERGED) -> Dataset:
    """Read a canonical dump produced by :func:`write_dataset_csv`."""
    schema = schema or nslkdd_schema()
    lines = list(_iter_lines(source))
    if not lines:
        raise IngestError("empty source: no records found")
    header = lines[0].rstrip("\r\n").split(",")
    expected = list(schema.names) + ["label"]
    if header != expected:
        raise IngestError("header does not match the canonical dataset dump format")

    n_features = len(schema)
    float_pos = schema.float_positions
    nominal_pos = schema.nominal_positions
    rows_f, rows_n, labels = [], [], []
    for line_no, line in enumerate(lines[1:], start=2):
        line = line.rstrip("\r\n")
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != n_features + 1:
            raise IngestError(
                f"line {line_no}: expected {n_features + 1} fields, found {len(fields)}"
            )
        label = _normalize_label(fields[-1])
        if label not in LABEL_NAMES:
            raise IngestError(f"line {line_no}: unknown label {fields[-1]!r}")
        try:
            rows_f.append([float(fields[p]) for p in float_pos])
        except ValueError:
            raise IngestError(f"line {line_no}: non-numeric value in numeric field") from None
        rows_n.append([fields[p] for p in nominal_pos])
        labels.append(LABEL_NAMES.index(label))

    if not labels:
        raise IngestError("empty source: no records found")
    nominals = np.empty((len(rows_n), len(nominal_pos)), dtype=object)
    nominals[:] = rows_n
    return Dataset(schema, np.asarray(rows_f, dtype=np.float64), nominals,
                   np.asarray(labels, dtype=np.uint8), provenance)
