"""Connection-weight variable importance for the trained network.

Each input column's raw importance is the sum over first-hidden-layer
units of |W| times that unit's downstream magnitude, where downstream
magnitudes propagate backwards from the output layer as sums of absolute
outgoing weights. Maxout piece tensors collapse to one matrix by taking
the elementwise maximum of absolute weights.

The emitted table carries the three conventional columns: relative
importance (max row normalized to 1), scaled importance (identical
normalization), and percentage (share of the raw total).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .encoding import Encoder
from .mlp import MlpModel


@dataclass(frozen=True)
class ImportanceRow:
    variable: str
    relative: float
    scaled: float
    percentage: float


@dataclass(frozen=True)
class ImportanceTable:
    rows: tuple[ImportanceRow, ...]


def _abs_piece_max(weights: np.ndarray) -> np.ndarray:
    """(pieces, fan_in, units) -> (fan_in, units) of max |w| over pieces."""
    return np.abs(weights).max(axis=0)


def variable_importance(model: MlpModel, encoder: Encoder) -> ImportanceTable:
    """Rank encoder output columns by aggregate connection weight."""
    if encoder.width != model.arch.input_dim:
        raise ValueError("encoder width does not match the model input size")
    for p in model.parameters():
        if not np.isfinite(p).all():
            raise ValueError("model parameters contain non-finite values")

    downstream = np.abs(model.out_w).sum(axis=1)            # per last-hidden unit
    for w in reversed(model.hidden_w[1:]):
        downstream = _abs_piece_max(w) @ downstream
    raw = _abs_piece_max(model.hidden_w[0]) @ downstream    # per input column

    top = raw.max()
    total = raw.sum()
    relative = raw / top if top > 0 else raw
    percentage = raw / total if total > 0 else raw

    rows = [ImportanceRow(name, float(relative[i]), float(relative[i]),
                          float(percentage[i]))
            for i, name in enumerate(encoder.column_names)]
    rows.sort(key=lambda r: (-r.relative, r.variable))
    return ImportanceTable(tuple(rows))


def emit_importance(table: ImportanceTable, destination) -> None:
    """Fixed-width text table, six decimal places per numeric column."""
    own = isinstance(destination, (str, os.PathLike))
    fh = open(destination, "w", encoding="utf-8", newline="\n") if own else destination
    try:
        width = max([len("variable")] + [len(r.variable) for r in table.rows])
        fh.write(f"{'variable':<{width}}  relative_importance  "
                 f"scaled_importance  percentage\n")
        for r in table.rows:
            fh.write(f"{r.variable:<{width}}  {r.relative:>19.6f}  "
                     f"{r.scaled:>17.6f}  {r.percentage:>10.6f}\n")
    finally:
        if own:
            fh.close()


def parse_importance(source) -> ImportanceTable:
    """Read back a table written by :func:`emit_importance`."""
    own = isinstance(source, (str, os.PathLike))
    fh = open(source, "r", encoding="utf-8") if own else source
    try:
        lines = fh.read().splitlines()
    finally:
        if own:
            fh.close()
    rows = []
    for line in lines[1:]:
        if not line.strip():
            continue
        parts = line.split()
        rows.append(ImportanceRow(parts[0], float(parts[1]), float(parts[2]),
                                  float(parts[3])))
    return ImportanceTable(tuple(rows))


def write_importance_csv(table: ImportanceTable, destination) -> None:
    own = isinstance(destination, (str, os.PathLike))
    fh = open(destination, "w", encoding="utf-8", newline="\n") if own else destination
    try:
        fh.write("variable,relative_importance,scaled_importance,percentage\n")
        for r in table.rows:
            fh.write(f"{r.variable},{r.relative:.6f},{r.scaled:.6f},"
                     f"{r.percentage:.6f}\n")
    finally:
        if own:
            fh.close()
