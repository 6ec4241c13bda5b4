"""Gain-ratio decision tree over the raw 41-feature space.

Numeric and binary-flag features split on thresholds taken at midpoints of
consecutive distinct sorted values ("<= t" goes left); nominal features
split multiway over the values observed at the node. The split criterion
is gain ratio (information gain over split information), with the classic
admissibility guard: a candidate must reach at least the mean gain of the
positive-gain candidates for its feature. No pruning; growth stops on
purity, depth, node size, or lack of an admissible candidate.

Everything is deterministic: ties break to the lowest feature index, then
the lowest threshold, and leaf-majority ties break to normal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ingest import ANOMALY, NORMAL, Dataset
from .schema import NOMINAL, FeatureSchema


def entropy(class_counts) -> float:
    """Shannon entropy (bits) of a class-count vector; 0 log 0 is 0."""
    counts = np.asarray(class_counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("entropy needs a non-empty count vector")
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def split_info(partition_sizes) -> float:
    """Entropy of the partition-size distribution induced by a split."""
    return entropy(partition_sizes)


def info_gain(parent_counts, partitions) -> float:
    """entropy(parent) minus the size-weighted child entropies."""
    parent = np.asarray(parent_counts, dtype=np.float64)
    total = parent.sum()
    weighted = 0.0
    for child in partitions:
        size = float(np.sum(child))
        if size > 0:
            weighted += (size / total) * entropy(child)
    return entropy(parent_counts) - weighted


def gain_ratio(parent_counts, partitions) -> float | None:
    """info_gain / split_info, or None when split_info is zero (the
    candidate is rejected rather than raising)."""
    sizes = [float(np.sum(child)) for child in partitions]
    si = split_info(sizes)
    if si == 0.0:
        return None
    return info_gain(parent_counts, partitions) / si


def _entropy2(anom: np.ndarray, total: np.ndarray) -> np.ndarray:
    """Vectorized binary entropy from anomaly counts and totals."""
    with np.errstate(divide="ignore", invalid="ignore"):
        p = anom / total
        q = 1.0 - p
        h = -(np.where(p > 0, p * np.log2(p), 0.0)
              + np.where(q > 0, q * np.log2(q), 0.0))
    return np.where(total > 0, h, 0.0)


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 20
    min_leaf: int = 2
    min_gain_ratio: float = 0.0

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if self.min_gain_ratio < 0:
            raise ValueError("min_gain_ratio must be >= 0")


@dataclass(frozen=True)
class SplitCandidate:
    """A scored split of one node by one feature."""

    feature: int
    kind: str                               # "numeric" or "nominal"
    threshold: float | None                 # numeric splits: go left iff <= t
    values: tuple[str, ...] | None          # nominal splits: child per value
    partitions: tuple[np.ndarray, ...]      # record indices per child
    gain: float
    split_info: float
    gain_ratio: float


@dataclass(frozen=True)
class Leaf:
    label: int
    counts: tuple[int, int]                 # (normal, anomaly) reaching here

    @property
    def size(self) -> int:
        return self.counts[0] + self.counts[1]

    def smoothed(self, label: int) -> float:
        # Laplace: (c + 1) / (n + 2)
        return (self.counts[label] + 1) / (self.size + 2)


@dataclass(frozen=True)
class Internal:
    feature: int
    kind: str
    threshold: float | None
    values: tuple[str, ...] | None
    children: tuple
    default_child: int


@dataclass(frozen=True)
class TreeModel:
    root: Leaf | Internal
    params: TreeParams
    schema: FeatureSchema

    def node_count(self) -> int:
        def walk(node):
            if isinstance(node, Leaf):
                return 1
            return 1 + sum(walk(c) for c in node.children)
        return walk(self.root)

    def depth(self) -> int:
        def walk(node):
            if isinstance(node, Leaf):
                return 0
            return 1 + max(walk(c) for c in node.children)
        return walk(self.root)


def _leaf(labels: np.ndarray) -> Leaf:
    n_anom = int(np.count_nonzero(labels))
    n_norm = len(labels) - n_anom
    label = ANOMALY if n_anom > n_norm else NORMAL  # tie goes to normal
    return Leaf(label, (n_norm, n_anom))


def _numeric_candidate(col: np.ndarray, labels: np.ndarray, idx: np.ndarray,
                       parent_h: float, feature: int) -> SplitCandidate | None:
    order = np.argsort(col, kind="stable")
    vals = col[order]
    cuts = np.nonzero(vals[1:] != vals[:-1])[0]
    if len(cuts) == 0:
        return None

    n = len(col)
    anom = (labels[order] == ANOMALY).astype(np.int64)
    cum_anom = np.cumsum(anom)
    total_anom = cum_anom[-1]

    left_n = cuts + 1
    right_n = n - left_n
    left_a = cum_anom[cuts]
    right_a = total_anom - left_a

    wl = left_n / n
    wr = right_n / n
    gains = parent_h - (wl * _entropy2(left_a, left_n)
                        + wr * _entropy2(right_a, right_n))

    positive = gains > 0
    if not positive.any():
        return None
    admissible = positive & (gains >= gains[positive].mean())
    if not admissible.any():
        return None

    si = -(wl * np.log2(wl) + wr * np.log2(wr))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(admissible, gains / si, -np.inf)
    best_ratio = ratios.max()
    if not np.isfinite(best_ratio):
        return None
    thresholds = (vals[cuts] + vals[cuts + 1]) / 2.0
    tied = np.nonzero(ratios == best_ratio)[0]
    pick = tied[np.argmin(thresholds[tied])]

    cut = cuts[pick]
    idx_sorted = idx[order]
    return SplitCandidate(
        feature=feature, kind="numeric", threshold=float(thresholds[pick]),
        values=None,
        partitions=(idx_sorted[:cut + 1], idx_sorted[cut + 1:]),
        gain=float(gains[pick]), split_info=float(si[pick]),
        gain_ratio=float(best_ratio),
    )


def _nominal_candidate(codes: np.ndarray, value_list: tuple[str, ...],
                       labels: np.ndarray, idx: np.ndarray,
                       parent_h: float, feature: int) -> SplitCandidate | None:
    n_codes = len(value_list)
    sizes = np.bincount(codes, minlength=n_codes)
    observed = np.nonzero(sizes)[0]
    if len(observed) < 2:
        return None

    anom = np.bincount(codes, weights=(labels == ANOMALY), minlength=n_codes)
    n = len(codes)
    w = sizes[observed] / n
    gain = parent_h - float((w * _entropy2(anom[observed], sizes[observed])).sum())
    if gain <= 0:
        return None
    si = float(-(w * np.log2(w)).sum())
    if si == 0.0:
        return None

    partitions = tuple(idx[codes == c] for c in observed)
    return SplitCandidate(
        feature=feature, kind="nominal", threshold=None,
        values=tuple(value_list[c] for c in observed),
        partitions=partitions,
        gain=gain, split_info=si, gain_ratio=gain / si,
    )


class _Grower:
    def __init__(self, data: Dataset, params: TreeParams):
        self.params = params
        self.schema = data.schema
        self.labels = data.labels
        self.floats = data.floats
        self.float_cols = {pos: j for j, pos in enumerate(data.schema.float_positions)}
        # Factorize nominal columns once; first-seen value order.
        self.nominal_codes: dict[int, np.ndarray] = {}
        self.nominal_values: dict[int, tuple[str, ...]] = {}
        for pos in data.schema.nominal_positions:
            col = data.nominal_column(pos)
            values = tuple(dict.fromkeys(col))
            lookup = {v: c for c, v in enumerate(values)}
            self.nominal_codes[pos] = np.fromiter(
                (lookup[v] for v in col), dtype=np.int64, count=len(col))
            self.nominal_values[pos] = values

    def best_split(self, idx: np.ndarray) -> SplitCandidate | None:
        labels = self.labels[idx]
        n_anom = int(np.count_nonzero(labels))
        parent_h = float(_entropy2(np.float64(n_anom), np.float64(len(idx))))
        best: SplitCandidate | None = None
        for pos in range(len(self.schema)):
            if self.schema.kind_of(pos) == NOMINAL:
                cand = _nominal_candidate(
                    self.nominal_codes[pos][idx], self.nominal_values[pos],
                    labels, idx, parent_h, pos)
            else:
                col = self.floats[idx, self.float_cols[pos]]
                cand = _numeric_candidate(col, labels, idx, parent_h, pos)
            if cand is None:
                continue
            if best is None or cand.gain_ratio > best.gain_ratio:
                best = cand
        return best

    def grow(self, idx: np.ndarray, depth: int) -> Leaf | Internal:
        labels = self.labels[idx]
        n_anom = int(np.count_nonzero(labels))
        pure = n_anom == 0 or n_anom == len(idx)
        if (pure or depth >= self.params.max_depth
                or len(idx) < self.params.min_leaf):
            return _leaf(labels)
        cand = self.best_split(idx)
        if cand is None or cand.gain_ratio < self.params.min_gain_ratio:
            return _leaf(labels)
        children = tuple(self.grow(part, depth + 1) for part in cand.partitions)
        sizes = [len(part) for part in cand.partitions]
        default_child = int(np.argmax(sizes))
        return Internal(cand.feature, cand.kind, cand.threshold, cand.values,
                        children, default_child)


def best_split(data: Dataset, feature: int,
               row_indices: np.ndarray | None = None) -> SplitCandidate | None:
    """Best admissible split of the given rows by one feature, or None."""
    grower = _Grower(data, TreeParams())
    idx = np.arange(len(data)) if row_indices is None else np.asarray(row_indices)
    labels = grower.labels[idx]
    parent_h = float(_entropy2(np.float64(np.count_nonzero(labels)),
                               np.float64(len(idx))))
    if data.schema.kind_of(feature) == NOMINAL:
        return _nominal_candidate(grower.nominal_codes[feature][idx],
                                  grower.nominal_values[feature],
                                  labels, idx, parent_h, feature)
    col = grower.floats[idx, grower.float_cols[feature]]
    return _numeric_candidate(col, labels, idx, parent_h, feature)


def train_tree(data: Dataset, params: TreeParams | None = None) -> TreeModel:
    """Grow a gain-ratio tree on the full dataset."""
    if len(data) == 0:
        raise ValueError("cannot train a tree on an empty dataset")
    params = params or TreeParams()
    grower = _Grower(data, params)
    root = grower.grow(np.arange(len(data)), depth=0)
    return TreeModel(root, params, data.schema)


def _route_row(node, row_floats, row_nominals, float_cols, nominal_cols) -> Leaf:
    while isinstance(node, Internal):
        if node.kind == "numeric":
            v = row_floats[float_cols[node.feature]]
            node = node.children[0] if v <= node.threshold else node.children[1]
        else:
            v = row_nominals[nominal_cols[node.feature]]
            try:
                node = node.children[node.values.index(v)]
            except ValueError:
                node = node.children[node.default_child]
    return node


def predict_tree(model: TreeModel, data: Dataset, row: int) -> tuple[int, float]:
    """Predict one row: (label, Laplace-smoothed leaf confidence)."""
    schema = model.schema
    float_cols = {pos: j for j, pos in enumerate(schema.float_positions)}
    nominal_cols = {pos: j for j, pos in enumerate(schema.nominal_positions)}
    leaf = _route_row(model.root, data.floats[row], data.nominals[row],
                      float_cols, nominal_cols)
    return leaf.label, leaf.smoothed(leaf.label)


def tree_anomaly_scores(model: TreeModel, data: Dataset) -> np.ndarray:
    """Smoothed anomaly probability per row, routed in batch."""
    schema = model.schema
    float_cols = {pos: j for j, pos in enumerate(schema.float_positions)}
    nominal_cols = {pos: j for j, pos in enumerate(schema.nominal_positions)}
    scores = np.empty(len(data), dtype=np.float64)

    def walk(node, idx: np.ndarray):
        if isinstance(node, Leaf):
            scores[idx] = node.smoothed(ANOMALY)
            return
        if node.kind == "numeric":
            col = data.floats[idx, float_cols[node.feature]]
            left = col <= node.threshold
            walk(node.children[0], idx[left])
            walk(node.children[1], idx[~left])
        else:
            col = data.nominals[idx, nominal_cols[node.feature]]
            assigned = np.full(len(idx), node.default_child, dtype=np.int64)
            for child_i, value in enumerate(node.values):
                assigned[col == value] = child_i
            for child_i, child in enumerate(node.children):
                sub = idx[assigned == child_i]
                if len(sub):
                    walk(child, sub)

    walk(model.root, np.arange(len(data)))
    return scores


class TreeClassifier:
    """fit/predict wrapper used by the cross-validation harness."""

    kind = "tree"

    def __init__(self, params: TreeParams | None = None):
        self.params = params or TreeParams()
        self.model: TreeModel | None = None

    def fit(self, train: Dataset, seed: int = 0) -> "TreeClassifier":
        # Training is fully deterministic; the seed is part of the harness
        # interface and unused here.
        self.model = train_tree(train, self.params)
        return self

    def predict_proba(self, data: Dataset) -> np.ndarray:
        if self.model is None:
            raise RuntimeError("classifier is not fitted")
        p_anom = tree_anomaly_scores(self.model, data)
        return np.column_stack([1.0 - p_anom, p_anom])

    def to_dict(self) -> dict:
        def node_dict(node):
            if isinstance(node, Leaf):
                return {"leaf": True, "label": int(node.label),
                        "counts": [int(c) for c in node.counts]}
            d = {"leaf": False,
                 "feature": self.model.schema.name_of(node.feature),
                 "kind": node.kind,
                 "default_child": node.default_child,
                 "children": [node_dict(c) for c in node.children]}
            if node.kind == "numeric":
                d["threshold"] = node.threshold
            else:
                d["values"] = list(node.values)
            return d

        if self.model is None:
            raise RuntimeError("classifier is not fitted")
        p = self.params
        return {"params": {"max_depth": p.max_depth, "min_leaf": p.min_leaf,
                           "min_gain_ratio": p.min_gain_ratio},
                "root": node_dict(self.model.root)}

    @classmethod
    def from_dict(cls, payload: dict, schema: FeatureSchema) -> "TreeClassifier":
        name_to_pos = {name: i for i, name in enumerate(schema.names)}

        def node_from(d):
            if d["leaf"]:
                return Leaf(int(d["label"]), tuple(int(c) for c in d["counts"]))
            children = tuple(node_from(c) for c in d["children"])
            return Internal(name_to_pos[d["feature"]], d["kind"],
                            d.get("threshold"),
                            tuple(d["values"]) if "values" in d else None,
                            children, int(d["default_child"]))

        params = TreeParams(**payload["params"])
        clf = cls(params)
        clf.model = TreeModel(node_from(payload["root"]), params, schema)
        return clf
