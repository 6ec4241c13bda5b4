"""Numeric encoding of datasets: one-hot nominal features, pass-through
numeric and binary-flag columns, and z-score standardization for the
network path.

Category lists and standardization statistics are always fitted on training
rows only; applying them elsewhere never re-fits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import Dataset
from .schema import NOMINAL, FeatureSchema

COL_NUMERIC = "numeric"
COL_BINARY = "binary"
COL_ONEHOT = "onehot"


@dataclass(frozen=True)
class Encoder:
    """Fitted encoding layout.

    One output column per numeric/binary feature; one output column per
    (nominal feature, category seen at fit time), named "feature.value".
    Categories are kept in first-seen order.
    """

    schema: FeatureSchema
    categories: dict[str, tuple[str, ...]]
    column_names: tuple[str, ...]
    column_kinds: tuple[str, ...]

    @property
    def width(self) -> int:
        return len(self.column_names)


@dataclass(frozen=True)
class EncodedMatrix:
    rows: np.ndarray            # (n, d) float64
    labels: np.ndarray          # (n,) uint8
    column_names: tuple[str, ...]
    column_kinds: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class Standardizer:
    """Per-column mean and population standard deviation, with the columns
    the transform actually touches (non-one-hot columns whose std > 0)."""

    mean: np.ndarray
    std: np.ndarray
    apply_mask: np.ndarray      # bool per column


def fit_encoder(train: Dataset) -> Encoder:
    """Collect nominal categories in first-seen order and lay out the
    output columns."""
    if len(train) == 0:
        raise ValueError("cannot fit an encoder on an empty dataset")
    schema = train.schema
    categories: dict[str, tuple[str, ...]] = {}
    for pos in schema.nominal_positions:
        col = train.nominal_column(pos)
        categories[schema.name_of(pos)] = tuple(dict.fromkeys(col))

    names: list[str] = []
    kinds: list[str] = []
    for pos, (name, kind) in enumerate(schema.features):
        if kind == NOMINAL:
            for value in categories[name]:
                names.append(f"{name}.{value}")
                kinds.append(COL_ONEHOT)
        else:
            names.append(name)
            kinds.append(COL_NUMERIC if kind == "numeric" else COL_BINARY)
    return Encoder(schema, categories, tuple(names), tuple(kinds))


def encode(encoder: Encoder, data: Dataset) -> EncodedMatrix:
    """Materialize the numeric matrix. Nominal values unseen at fit time
    encode as an all-zero block; row and label order are preserved."""
    schema = encoder.schema
    n = len(data)
    out = np.zeros((n, encoder.width), dtype=np.float64)

    col = 0
    for pos, (name, kind) in enumerate(schema.features):
        if kind == NOMINAL:
            values = data.nominal_column(pos)
            for value in encoder.categories[name]:
                out[:, col] = values == value
                col += 1
        else:
            out[:, col] = data.float_column(pos)
            col += 1
    return EncodedMatrix(out, data.labels.copy(), encoder.column_names,
                         encoder.column_kinds)


def fit_standardizer(train_rows: EncodedMatrix) -> Standardizer:
    """Population mean/std per column, fitted on training rows only.
    One-hot columns and constant columns are never touched."""
    rows = train_rows.rows
    mean = rows.mean(axis=0)
    std = rows.std(axis=0)  # population convention (divide by n)
    kinds = np.asarray(train_rows.column_kinds)
    apply_mask = (kinds != COL_ONEHOT) & (std > 0.0)
    return Standardizer(mean, std, apply_mask)


def standardize(standardizer: Standardizer, matrix: EncodedMatrix) -> EncodedMatrix:
    """Map each applicable column to (x - mean) / std; all other columns
    pass through unchanged."""
    rows = matrix.rows.copy()
    m = standardizer.apply_mask
    rows[:, m] = (rows[:, m] - standardizer.mean[m]) / standardizer.std[m]
    return EncodedMatrix(rows, matrix.labels, matrix.column_names,
                         matrix.column_kinds)


def write_matrix_csv(matrix: EncodedMatrix, destination) -> None:
    """Export with the generated column-name header plus a label column."""
    import os

    own = isinstance(destination, (str, os.PathLike))
    fh = open(destination, "w", encoding="utf-8", newline="\n") if own else destination
    try:
        fh.write(",".join(matrix.column_names + ("label",)) + "\n")
        for i in range(len(matrix)):
            cells = [repr(float(v)) for v in matrix.rows[i]]
            cells.append(str(int(matrix.labels[i])))
            fh.write(",".join(cells) + "\n")
    finally:
        if own:
            fh.close()
