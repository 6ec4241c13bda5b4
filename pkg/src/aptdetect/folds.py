"""Stratified k-fold cross-validation and the train/validation holdout.

Fold assignment shuffles each class with a seeded generator and deals the
records round-robin, carrying the dealing position across classes so that
fold sizes differ by at most one record while each fold's class counts stay
within one of exact stratification. Per-fold model seeds derive from the
master seed XOR the fold index, so folds are reproducible in isolation.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ingest import ANOMALY, NORMAL, Dataset
from .metrics import ConfusionMatrix, aggregate_cv, confusion


class FoldError(RuntimeError):
    """A model failed inside one cross-validation fold."""

    def __init__(self, fold: int, cause: Exception):
        super().__init__(f"fold {fold}: {cause}")
        self.fold = fold
        self.cause = cause


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignment: np.ndarray      # (n,) fold index per record
    master_seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.nonzero(self.assignment == fold)[0]

    def train_indices(self, fold: int) -> np.ndarray:
        return np.nonzero(self.assignment != fold)[0]

    def fold_seed(self, fold: int) -> int:
        return self.master_seed ^ fold


@dataclass(frozen=True)
class FoldResult:
    fold: int
    test_indices: np.ndarray
    cm: ConfusionMatrix
    scores: np.ndarray          # anomaly probability per test record
    history: object | None = None


@dataclass(frozen=True)
class CvResult:
    per_fold: tuple[FoldResult, ...]
    pooled: ConfusionMatrix

    def pooled_scores(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Anomaly scores assembled back into original record order,
        plus the matching truth-label slots filled by the caller's data."""
        scores = np.empty(n, dtype=np.float64)
        covered = np.zeros(n, dtype=bool)
        for fr in self.per_fold:
            scores[fr.test_indices] = fr.scores
            covered[fr.test_indices] = True
        if not covered.all():
            raise ValueError("fold plan does not cover every record")
        return scores, covered


def _labels_of(data) -> np.ndarray:
    return data.labels if isinstance(data, Dataset) else np.asarray(data)


def stratified_folds(data, k: int, seed: int) -> FoldPlan:
    """Deal each class's shuffled records round-robin into k folds."""
    labels = _labels_of(data)
    if k < 2:
        raise ValueError("k must be >= 2")
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(labels), dtype=np.int64)
    cursor = 0
    for cls in np.unique(labels):
        members = np.nonzero(labels == cls)[0]
        if len(members) < k:
            raise ValueError(
                f"class {cls} has {len(members)} records, fewer than k={k}")
        shuffled = rng.permutation(members)
        assignment[shuffled] = (cursor + np.arange(len(members))) % k
        cursor = (cursor + len(members)) % k
    return FoldPlan(k, assignment, seed)


def holdout_split(indices, train_fraction: float, seed: int,
                  labels=None) -> tuple[np.ndarray, np.ndarray]:
    """Shuffle-split into (train, validation); stratified when per-index
    labels are given. The train side gets round(n * fraction) records."""
    idx = np.asarray(indices)
    n = len(idx)
    if n == 0:
        raise ValueError("cannot split an empty index list")
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must be in (0, 1)")

    target = int(np.floor(n * train_fraction + 0.5))
    rng = np.random.default_rng(seed)

    if labels is None:
        strata = [idx]
    else:
        lab = np.asarray(labels)
        strata = [idx[lab == cls] for cls in np.unique(lab)]

    # Largest-remainder apportionment of the train quota across strata.
    quotas = np.array([len(s) * train_fraction for s in strata])
    base = np.floor(quotas).astype(int)
    extras = target - int(base.sum())
    order = np.argsort(-(quotas - base), kind="stable")
    for j in order[:extras]:
        base[j] += 1

    train_parts, val_parts = [], []
    for stratum, quota in zip(strata, base):
        shuffled = rng.permutation(stratum)
        train_parts.append(shuffled[:quota])
        val_parts.append(shuffled[quota:])
    train = np.sort(np.concatenate(train_parts))
    val = np.sort(np.concatenate(val_parts))
    return train, val


def run_cv(data: Dataset, make_model: Callable[[], object],
           plan: FoldPlan) -> CvResult:
    """Fit a fresh model per fold on the other k-1 folds and score the
    held-out fold. Results are deterministic given (data, plan)."""
    results = []
    for fold in range(plan.k):
        test_idx = plan.test_indices(fold)
        train_idx = plan.train_indices(fold)
        model = make_model()
        try:
            model.fit(data.take(train_idx), seed=plan.fold_seed(fold))
        except Exception as exc:
            raise FoldError(fold, exc) from exc
        probs = model.predict_proba(data.take(test_idx))
        scores = probs[:, ANOMALY]
        predictions = np.where(probs[:, ANOMALY] > probs[:, NORMAL],
                               ANOMALY, NORMAL)
        cm = confusion(predictions, data.labels[test_idx])
        results.append(FoldResult(fold, test_idx, cm, scores,
                                  getattr(model, "history", None)))
    pooled = aggregate_cv([fr.cm for fr in results])
    return CvResult(tuple(results), pooled)


def write_foldplan(plan: FoldPlan, destination) -> None:
    """Two-column audit file: record index, fold index."""
    own = isinstance(destination, (str, os.PathLike))
    fh = open(destination, "w", encoding="utf-8", newline="\n") if own else destination
    try:
        fh.write("record_index,fold\n")
        for i, f in enumerate(plan.assignment):
            fh.write(f"{i},{int(f)}\n")
    finally:
        if own:
            fh.close()
