"""Naive Bayes classifier: class priors combined with per-feature
likelihoods under the conditional-independence assumption.

Numeric features get per-class Gaussian likelihoods with a variance floor
(several NSL-KDD columns are near-constant). Nominal and binary-flag
features get Laplace-smoothed categorical tables. All accumulation happens
in log space; the evidence term is realized as the posterior normalizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import ANOMALY, NORMAL, Dataset
from .schema import NOMINAL, NUMERIC, FeatureSchema

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class NbModel:
    priors: np.ndarray                       # (2,) class probability
    # Gaussian parameters per numeric feature: position -> (2,) arrays.
    means: dict[int, np.ndarray]
    variances: dict[int, np.ndarray]         # floored at var_floor
    # Categorical tables per nominal/binary feature:
    # position -> (value -> (2,) probability), plus the unseen-value mass.
    tables: dict[int, dict]
    unseen: dict[int, np.ndarray]
    alpha: float
    var_floor: float
    schema: FeatureSchema


def fit_nb(train: Dataset, alpha: float = 1.0, var_floor: float = 1e-9) -> NbModel:
    """Estimate priors, Gaussian moments, and smoothed value tables."""
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    if var_floor <= 0:
        raise ValueError("var_floor must be > 0")
    labels = train.labels
    n = len(train)
    n_anom = int(np.count_nonzero(labels))
    n_norm = n - n_anom
    if n_norm == 0 or n_anom == 0:
        raise ValueError("training set must contain both classes")
    class_n = np.array([n_norm, n_anom], dtype=np.float64)
    priors = class_n / n

    schema = train.schema
    by_class = [labels == NORMAL, labels == ANOMALY]

    means: dict[int, np.ndarray] = {}
    variances: dict[int, np.ndarray] = {}
    for pos in schema.numeric_positions:
        col = train.float_column(pos)
        mu = np.array([col[m].mean() for m in by_class])
        var = np.array([col[m].var() for m in by_class])  # population
        means[pos] = mu
        variances[pos] = np.maximum(var, var_floor)

    tables: dict[int, dict] = {}
    unseen: dict[int, np.ndarray] = {}
    for pos in schema.binary_positions + schema.nominal_positions:
        if schema.kind_of(pos) == NOMINAL:
            col = train.nominal_column(pos)
        else:
            col = train.float_column(pos)
        values = list(dict.fromkeys(col.tolist()))
        v = len(values)
        table: dict = {}
        denom = class_n + alpha * v
        for value in values:
            mask = col == value
            cnt = np.array([np.count_nonzero(mask & by_class[0]),
                            np.count_nonzero(mask & by_class[1])],
                           dtype=np.float64)
            table[value] = (cnt + alpha) / denom
        tables[pos] = table
        # A value never seen in training gets the bare smoothing mass.
        unseen[pos] = alpha / denom

    return NbModel(priors, means, variances, tables, unseen,
                   alpha, var_floor, schema)


def log_scores(model: NbModel, data: Dataset) -> np.ndarray:
    """Unnormalized per-class log scores, (n, 2)."""
    n = len(data)
    scores = np.tile(np.log(model.priors), (n, 1))

    for pos, mu in model.means.items():
        col = data.float_column(pos)[:, None]
        var = model.variances[pos][None, :]
        scores += -0.5 * (_LOG_2PI + np.log(var)) \
            - (col - mu[None, :]) ** 2 / (2.0 * var)

    schema = model.schema
    for pos, table in model.tables.items():
        if schema.kind_of(pos) == NOMINAL:
            col = data.nominal_column(pos)
        else:
            col = data.float_column(pos)
        # Map values to rows of a log-probability lookup table; the last
        # row holds the unseen-value mass.
        values = list(table.keys())
        logp = np.log(np.vstack([table[v] for v in values] + [model.unseen[pos]]))
        lookup = {v: i for i, v in enumerate(values)}
        codes = np.fromiter((lookup.get(v, len(values)) for v in col.tolist()),
                            dtype=np.int64, count=n)
        scores += logp[codes]

    if not np.isfinite(scores).all():
        raise FloatingPointError("non-finite log score accumulation")
    return scores


def posterior(model: NbModel, data: Dataset) -> np.ndarray:
    """Normalized class posteriors, (n, 2) rows summing to 1."""
    s = log_scores(model, data)
    m = s.max(axis=1, keepdims=True)
    e = np.exp(s - m)
    return e / e.sum(axis=1, keepdims=True)


def predict_nb(model: NbModel, data: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Argmax labels (posterior ties go to normal) and their confidences."""
    p = posterior(model, data)
    labels = np.where(p[:, ANOMALY] > p[:, NORMAL], ANOMALY, NORMAL).astype(np.uint8)
    conf = p[np.arange(len(p)), labels]
    return labels, conf


class BayesClassifier:
    """fit/predict wrapper used by the cross-validation harness."""

    kind = "nb"

    def __init__(self, alpha: float = 1.0, var_floor: float = 1e-9):
        self.alpha = alpha
        self.var_floor = var_floor
        self.model: NbModel | None = None

    def fit(self, train: Dataset, seed: int = 0) -> "BayesClassifier":
        # Counting and moments are order-independent; no randomness used.
        self.model = fit_nb(train, self.alpha, self.var_floor)
        return self

    def predict_proba(self, data: Dataset) -> np.ndarray:
        if self.model is None:
            raise RuntimeError("classifier is not fitted")
        return posterior(self.model, data)

    def to_dict(self) -> dict:
        m = self.model
        if m is None:
            raise RuntimeError("classifier is not fitted")
        return {
            "alpha": m.alpha,
            "var_floor": m.var_floor,
            "priors": m.priors.tolist(),
            "gaussian": {str(pos): {"mean": m.means[pos].tolist(),
                                    "var": m.variances[pos].tolist()}
                         for pos in m.means},
            "tables": {str(pos): {
                "text": m.schema.kind_of(pos) == NOMINAL,
                "unseen": m.unseen[pos].tolist(),
                "values": [[v if isinstance(v, str) else repr(v), p.tolist()]
                           for v, p in m.tables[pos].items()],
            } for pos in m.tables},
        }

    @classmethod
    def from_dict(cls, payload: dict, schema: FeatureSchema) -> "BayesClassifier":
        means = {int(pos): np.asarray(d["mean"])
                 for pos, d in payload["gaussian"].items()}
        variances = {int(pos): np.asarray(d["var"])
                     for pos, d in payload["gaussian"].items()}
        tables: dict[int, dict] = {}
        unseen: dict[int, np.ndarray] = {}
        for pos_s, d in payload["tables"].items():
            pos = int(pos_s)
            decode = (lambda v: v) if d["text"] else float
            tables[pos] = {decode(v): np.asarray(p) for v, p in d["values"]}
            unseen[pos] = np.asarray(d["unseen"])
        clf = cls(payload["alpha"], payload["var_floor"])
        clf.model = NbModel(np.asarray(payload["priors"]), means, variances,
                            tables, unseen, payload["alpha"],
                            payload["var_floor"], schema)
        return clf
