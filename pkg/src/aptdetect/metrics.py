"""Confusion-matrix accounting, the derived metric suite, ROC/AUC, and
lift charts. Anomaly is the positive class throughout: a true positive is
an alert raised on an actual attack record.

Metrics with a zero denominator are reported as None (flagged undefined),
never silently zeroed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ingest import ANOMALY


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be >= 0")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tp + other.tp, self.fp + other.fp,
                               self.tn + other.tn, self.fn + other.fn)


@dataclass(frozen=True)
class MetricsReport:
    """Accuracy, rates, precision, F-measure and the exact complements
    fpr = 1 - tnr, fnr = 1 - tpr. ``None`` marks an undefined metric.
    ``auc`` is attached by the caller when scores are available."""

    acc: float | None
    tpr: float | None
    tnr: float | None
    ppv: float | None
    f_measure: float | None
    fpr: float | None
    fnr: float | None
    auc: float | None = None


@dataclass(frozen=True)
class RocCurve:
    """Threshold sweep over descending unique scores; ties grouped.
    Starts at (0, 0) with threshold +inf and ends at (1, 1)."""

    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray

    def points(self) -> list[tuple[float, float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist(),
                        self.thresholds.tolist()))


@dataclass(frozen=True)
class LiftBin:
    size: int
    target_count: int
    min_confidence: float
    max_confidence: float


@dataclass(frozen=True)
class LiftChart:
    target: int                      # label code of the charted class
    bins: tuple[LiftBin, ...] = field(default_factory=tuple)


def confusion(predictions, truth) -> ConfusionMatrix:
    """Tally a confusion matrix from predicted and true label codes."""
    pred = np.asarray(predictions)
    true = np.asarray(truth)
    if len(pred) != len(true):
        raise ValueError("predictions and truth must have equal length")
    if len(pred) == 0:
        raise ValueError("cannot tally an empty prediction list")
    pos_pred = pred == ANOMALY
    pos_true = true == ANOMALY
    return ConfusionMatrix(
        tp=int(np.count_nonzero(pos_pred & pos_true)),
        fp=int(np.count_nonzero(pos_pred & ~pos_true)),
        tn=int(np.count_nonzero(~pos_pred & ~pos_true)),
        fn=int(np.count_nonzero(~pos_pred & pos_true)),
    )


def metrics(cm: ConfusionMatrix, auc: float | None = None) -> MetricsReport:
    """Compute the full metric set from a confusion matrix."""
    def ratio(num: int, den: int) -> float | None:
        return num / den if den > 0 else None

    tpr = ratio(cm.tp, cm.tp + cm.fn)
    tnr = ratio(cm.tn, cm.tn + cm.fp)
    ppv = ratio(cm.tp, cm.tp + cm.fp)
    acc = ratio(cm.tp + cm.tn, cm.total)
    if ppv is None or tpr is None or (ppv + tpr) == 0:
        f_measure = None
    else:
        f_measure = 2 * ppv * tpr / (ppv + tpr)
    fpr = None if tnr is None else 1.0 - tnr
    fnr = None if tpr is None else 1.0 - tpr
    return MetricsReport(acc=acc, tpr=tpr, tnr=tnr, ppv=ppv,
                         f_measure=f_measure, fpr=fpr, fnr=fnr, auc=auc)


def roc_curve(scores, truth) -> RocCurve:
    """ROC points from anomaly scores. One point per unique score value,
    swept in descending order; records tied on a score move together."""
    s = np.asarray(scores, dtype=np.float64)
    t = np.asarray(truth)
    if len(s) != len(t):
        raise ValueError("scores and truth must have equal length")
    n_pos = int(np.count_nonzero(t == ANOMALY))
    n_neg = len(t) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs both classes present in truth")

    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    pos_sorted = (t[order] == ANOMALY).astype(np.int64)

    cum_tp = np.cumsum(pos_sorted)
    cum_fp = np.cumsum(1 - pos_sorted)
    # Last index of each group of equal scores.
    last = np.nonzero(np.append(s_sorted[1:] != s_sorted[:-1], True))[0]

    fpr = np.concatenate([[0.0], cum_fp[last] / n_neg])
    tpr = np.concatenate([[0.0], cum_tp[last] / n_pos])
    thresholds = np.concatenate([[np.inf], s_sorted[last]])
    return RocCurve(fpr, tpr, thresholds)


def auc(curve: RocCurve) -> float:
    """Area under the ROC curve by the trapezoidal rule."""
    return float(np.trapz(curve.tpr, curve.fpr))


def lift_chart(scores, truth, target: int, n_bins: int = 10) -> LiftChart:
    """Decile-style lift bins.

    Records sort by target-class confidence descending (ties keep original
    order) and deal into ``n_bins`` contiguous bins of size n // n_bins,
    the first n % n_bins bins one record larger.
    """
    s = np.asarray(scores, dtype=np.float64)
    t = np.asarray(truth)
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    if len(s) < n_bins:
        raise ValueError("need at least one record per bin")

    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    hit_sorted = t[order] == target

    base, extra = divmod(len(s), n_bins)
    bins = []
    start = 0
    for b in range(n_bins):
        size = base + (1 if b < extra else 0)
        stop = start + size
        bins.append(LiftBin(
            size=size,
            target_count=int(np.count_nonzero(hit_sorted[start:stop])),
            min_confidence=float(s_sorted[stop - 1]),
            max_confidence=float(s_sorted[start]),
        ))
        start = stop
    return LiftChart(target=target, bins=tuple(bins))


def aggregate_cv(per_fold: list[ConfusionMatrix]) -> ConfusionMatrix:
    """Pool fold confusion matrices by elementwise summation."""
    if not per_fold:
        raise ValueError("no fold results to aggregate")
    total = per_fold[0]
    for cm in per_fold[1:]:
        total = total + cm
    return total
