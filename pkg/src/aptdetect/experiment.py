"""Experiment driver: ingest, cross-validate the selected models, fit the
final full-data models, evaluate, and write every artifact (CSV reports,
SVG plots, serialized models, JSON summary) into the output directory.

Every numeric output is a pure function of (input files, config, seed);
wall-clock timings live under their own key so the rest of the report can
be compared byte for byte across runs.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .bayes import BayesClassifier
from .config import ExperimentConfig, config_echo
from .folds import CvResult, FoldPlan, run_cv, stratified_folds, write_foldplan
from .importance import (ImportanceTable, emit_importance, variable_importance,
                         write_importance_csv)
from .ingest import (ANOMALY, LABEL_NAMES, NORMAL, ClassCounts, Dataset,
                     class_counts, ingest_pair, parse_nslkdd, read_dataset_csv,
                     relabel_binary, write_dataset_csv)
from .metrics import (LiftChart, MetricsReport, RocCurve, auc, lift_chart,
                      metrics, roc_curve)
from .mlp import MlpClassifier, TrainHistory, write_history_csv
from .persist import save_model
from .schema import nslkdd_schema
from .svgplot import write_bar_svg, write_lift_svg, write_roc_svg
from .tree import TreeClassifier

BAR_METRICS = ("acc", "tpr", "tnr", "ppv", "f_measure", "auc")


class StageFailure(RuntimeError):
    """A pipeline stage failed; carries the stage name and the cause."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class ModelReport:
    name: str
    cv: CvResult
    pooled: MetricsReport
    per_fold_metrics: tuple[MetricsReport, ...]
    scores: np.ndarray                  # pooled anomaly scores, record order
    roc: RocCurve
    auc: float
    lift: dict[str, LiftChart]
    final_model: object
    importance: ImportanceTable | None = None
    history: TrainHistory | None = None


@dataclass(frozen=True)
class ExperimentReport:
    config: dict
    seed: int
    counts: ClassCounts
    models: dict[str, ModelReport]
    timings: dict[str, float] = field(default_factory=dict)


def make_classifier(name: str, cfg: ExperimentConfig):
    if name == "tree":
        return TreeClassifier(cfg.tree)
    if name == "nb":
        return BayesClassifier(cfg.nb.alpha, cfg.nb.var_floor)
    if name == "mlp":
        return MlpClassifier(hidden=cfg.mlp.hidden_layers(),
                             config=cfg.mlp.train_config(),
                             validation_fraction=cfg.mlp.validation_fraction)
    raise ValueError(f"unknown model {name!r}")


def load_dataset_any(path, schema=None, provenance: str = "train") -> Dataset:
    """Read either a canonical dump (header row) or a raw NSL-KDD file."""
    schema = schema or nslkdd_schema()
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\r\n")
    if first == ",".join(schema.names + ("label",)):
        return read_dataset_csv(path, schema, provenance)
    return relabel_binary(parse_nslkdd(path, schema), schema, provenance)


def ingest_stage(cfg: ExperimentConfig) -> Dataset:
    if not cfg.train_path:
        raise ValueError("no training dataset path configured")
    if cfg.test_path:
        train = load_dataset_any(cfg.train_path, provenance="train")
        test = load_dataset_any(cfg.test_path, provenance="test")
        from .ingest import merge
        return merge(train, test)
    return load_dataset_any(cfg.train_path, provenance="train")


def evaluate_model(name: str, data: Dataset, cv: CvResult,
                   final_model, history: TrainHistory | None) -> ModelReport:
    scores, _ = cv.pooled_scores(len(data))
    curve = roc_curve(scores, data.labels)
    auc_value = auc(curve)
    pooled = metrics(cv.pooled, auc=auc_value)
    per_fold = []
    for fr in cv.per_fold:
        fold_auc = None
        truth = data.labels[fr.test_indices]
        if len(np.unique(truth)) == 2:
            fold_auc = auc(roc_curve(fr.scores, truth))
        per_fold.append(metrics(fr.cm, auc=fold_auc))
    lift = {
        "anomaly": lift_chart(scores, data.labels, ANOMALY,
                              n_bins=min(10, len(data))),
        "normal": lift_chart(1.0 - scores, data.labels, NORMAL,
                             n_bins=min(10, len(data))),
    }
    importance = None
    if name == "mlp":
        importance = variable_importance(final_model.model, final_model.encoder)
    return ModelReport(name=name, cv=cv, pooled=pooled,
                       per_fold_metrics=tuple(per_fold), scores=scores,
                       roc=curve, auc=auc_value, lift=lift,
                       final_model=final_model, importance=importance,
                       history=history)


def run_experiment(cfg: ExperimentConfig, out_dir: str | None = None,
                   write_plots: bool = True, write_models: bool = True,
                   log=None) -> ExperimentReport:
    """The full protocol. Writes artifacts when ``out_dir`` is given."""
    def say(message: str):
        if log:
            log(message)

    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    try:
        data = ingest_stage(cfg)
    except Exception as exc:
        raise StageFailure("ingest", exc) from exc
    counts = class_counts(data)
    timings["ingest"] = time.perf_counter() - t0
    say(f"ingested {len(data)} records "
        f"({counts.normal} normal, {counts.anomaly} anomaly)")

    try:
        plan = stratified_folds(data, cfg.k_folds, cfg.seed)
    except Exception as exc:
        raise StageFailure("folds", exc) from exc

    models: dict[str, ModelReport] = {}
    for name in cfg.selected_models():
        t0 = time.perf_counter()
        try:
            cv = run_cv(data, lambda: make_classifier(name, cfg), plan)
            final = make_classifier(name, cfg)
            final.fit(data, seed=cfg.seed ^ cfg.k_folds)
            history = getattr(final, "history", None)
            models[name] = evaluate_model(name, data, cv, final, history)
        except Exception as exc:
            raise StageFailure(name, exc) from exc
        timings[name] = time.perf_counter() - t0
        pooled = models[name].pooled
        say(f"{name}: acc={_fmt_pct(pooled.acc)} fpr={_fmt_pct(pooled.fpr)} "
            f"auc={models[name].auc:.4f} ({timings[name]:.1f}s)")

    report = ExperimentReport(config=config_echo(cfg), seed=cfg.seed,
                              counts=counts, models=models, timings=timings)
    if out_dir is not None:
        try:
            write_artifacts(report, data, plan, out_dir,
                            write_plots=write_plots, write_models=write_models)
        except Exception as exc:
            raise StageFailure("write", exc) from exc
        say(f"artifacts written to {out_dir}")
    return report


def _fmt_pct(v: float | None) -> str:
    return "NA" if v is None else f"{100 * v:.2f}%"


def _fmt(v: float | None) -> str:
    return "NA" if v is None else repr(float(v))


_METRIC_FIELDS = ("acc", "tpr", "tnr", "ppv", "f_measure", "fpr", "fnr")


def _metrics_row(m: MetricsReport) -> list[str]:
    row = [_fmt(getattr(m, f)) for f in _METRIC_FIELDS]
    row.append(_fmt(None if m.fpr is None else 100 * m.fpr))
    row.append(_fmt(None if m.fnr is None else 100 * m.fnr))
    row.append(_fmt(m.auc))
    return row


def write_artifacts(report: ExperimentReport, data: Dataset, plan: FoldPlan,
                    out_dir: str, write_plots: bool = True,
                    write_models: bool = True) -> None:
    os.makedirs(out_dir, exist_ok=True)

    def path(name: str) -> str:
        return os.path.join(out_dir, name)

    with open(path("metrics.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("model," + ",".join(_METRIC_FIELDS)
                 + ",fpr_pct,fnr_pct,auc\n")
        for name, mr in report.models.items():
            fh.write(name + "," + ",".join(_metrics_row(mr.pooled)) + "\n")

    with open(path("metrics_per_fold.csv"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write("model,fold,tp,fp,tn,fn," + ",".join(_METRIC_FIELDS)
                 + ",fpr_pct,fnr_pct,auc\n")
        for name, mr in report.models.items():
            for fr, fm in zip(mr.cv.per_fold, mr.per_fold_metrics):
                cm = fr.cm
                fh.write(f"{name},{fr.fold},{cm.tp},{cm.fp},{cm.tn},{cm.fn},"
                         + ",".join(_metrics_row(fm)) + "\n")

    write_foldplan(plan, path("foldplan.csv"))

    for name, mr in report.models.items():
        with open(path(f"roc_{name}.csv"), "w", encoding="utf-8",
                  newline="\n") as fh:
            fh.write("threshold,fpr,tpr\n")
            for fpr, tpr, thr in zip(mr.roc.fpr, mr.roc.tpr,
                                     mr.roc.thresholds):
                fh.write(f"{thr!r},{fpr!r},{tpr!r}\n")
        for cls_name, chart in mr.lift.items():
            with open(path(f"lift_{name}_{cls_name}.csv"), "w",
                      encoding="utf-8", newline="\n") as fh:
                fh.write("bin,size,target_count,min_confidence,"
                         "max_confidence\n")
                for i, b in enumerate(chart.bins, start=1):
                    fh.write(f"{i},{b.size},{b.target_count},"
                             f"{b.min_confidence!r},{b.max_confidence!r}\n")

        if mr.importance is not None:
            write_importance_csv(mr.importance, path("importance_mlp.csv"))
            emit_importance(mr.importance, path("importance_mlp.txt"))
        if mr.history is not None:
            write_history_csv(mr.history, path("history_mlp.csv"))
        if write_models:
            save_model(mr.final_model, path(f"model_{name}.bin"))

    if write_plots:
        for name, mr in report.models.items():
            write_roc_svg(path(f"roc_{name}.svg"),
                          [(name, mr.roc, mr.auc)],
                          f"ROC, {name} model (10-fold pooled scores)")
            for cls_name, chart in mr.lift.items():
                write_lift_svg(path(f"lift_{name}_{cls_name}.svg"), chart,
                               cls_name, f"Lift chart, {name} model")
        write_roc_svg(path("roc_all.svg"),
                      [(name, mr.roc, mr.auc)
                       for name, mr in report.models.items()],
                      "ROC comparison")
        write_bar_svg(path("metrics_bars.svg"), list(BAR_METRICS),
                      {name: [getattr(mr.pooled, f) for f in BAR_METRICS]
                       for name, mr in report.models.items()},
                      "Pooled cross-validation metrics")

    with open(path("report.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report_summary(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def report_summary(report: ExperimentReport) -> dict:
    """JSON-ready summary; timings are isolated under their own key."""
    def metrics_dict(m: MetricsReport) -> dict:
        d = {f: getattr(m, f) for f in _METRIC_FIELDS}
        d["auc"] = m.auc
        d["fpr_pct"] = None if m.fpr is None else 100 * m.fpr
        d["fnr_pct"] = None if m.fnr is None else 100 * m.fnr
        return d

    out = {
        "config": report.config,
        "seed": report.seed,
        "dataset": {"records": report.counts.total,
                    "normal": report.counts.normal,
                    "anomaly": report.counts.anomaly},
        "models": {},
        "timings": {k: round(v, 3) for k, v in report.timings.items()},
    }
    for name, mr in report.models.items():
        entry = {
            "pooled": metrics_dict(mr.pooled),
            "auc": mr.auc,
            "per_fold": [metrics_dict(m) for m in mr.per_fold_metrics],
            "confusion": {"tp": mr.cv.pooled.tp, "fp": mr.cv.pooled.fp,
                          "tn": mr.cv.pooled.tn, "fn": mr.cv.pooled.fn},
            "lift": {cls: [{"size": b.size, "target_count": b.target_count,
                            "min_confidence": b.min_confidence,
                            "max_confidence": b.max_confidence}
                           for b in chart.bins]
                     for cls, chart in mr.lift.items()},
        }
        if mr.importance is not None:
            entry["importance_top10"] = [
                {"variable": r.variable, "relative": r.relative,
                 "scaled": r.scaled, "percentage": r.percentage}
                for r in mr.importance.rows[:10]]
        if mr.history is not None:
            entry["history"] = [
                {"train_loss": e.train_loss, "val_loss": e.val_loss,
                 "val_accuracy": e.val_accuracy}
                for e in mr.history.epochs]
        out["models"][name] = entry
    return out


def write_predictions(probs: np.ndarray, destination) -> None:
    """Prediction export: predicted label, its confidence, and the anomaly
    probability per record."""
    own = isinstance(destination, (str, os.PathLike))
    fh = open(destination, "w", encoding="utf-8", newline="\n") if own else destination
    try:
        fh.write("index,label,confidence,p_anomaly\n")
        for i, (p_norm, p_anom) in enumerate(probs):
            label = ANOMALY if p_anom > p_norm else NORMAL
            conf = p_anom if label == ANOMALY else p_norm
            fh.write(f"{i},{LABEL_NAMES[label]},{conf!r},{p_anom!r}\n")
    finally:
        if own:
            fh.close()
