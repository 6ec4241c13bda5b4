"""Command-line driver.

Subcommands mirror the pipeline stages so each is independently runnable:
ingest, cv, train, predict, report, print-config. Configuration comes from
an INI file plus flag overrides; the APTDETECT_OUT environment variable
supplies a default output directory.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .config import (ConfigError, ExperimentConfig, config_to_ini,
                     load_config)
from . import experiment
from .experiment import (StageFailure, ingest_stage, load_dataset_any,
                         make_classifier, run_experiment, write_predictions)
from .ingest import class_counts, write_dataset_csv
from .persist import save_model, load_model


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aptdetect",
        description="Anomaly-detection experiments on NSL-KDD records")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, folds=True):
        p.add_argument("--config", help="INI configuration file")
        p.add_argument("--seed", type=int, help="master random seed")
        p.add_argument("--model", choices=["tree", "nb", "mlp", "all"],
                       help="model selector")
        if folds:
            p.add_argument("--folds", type=int, help="number of CV folds")
        p.add_argument("--out", help="output directory "
                       "(default: $APTDETECT_OUT or ./results)")

    p = sub.add_parser("ingest", help="parse, relabel, merge, and dump the "
                                      "dataset; print class counts")
    common(p, folds=False)

    p = sub.add_parser("cv", help="stratified cross-validation with metric "
                                  "and curve CSVs")
    common(p)

    p = sub.add_parser("train", help="fit final models on the full dataset "
                                     "and save them")
    common(p, folds=False)

    p = sub.add_parser("predict", help="score a dataset with a saved model")
    p.add_argument("--model-file", required=True, help="saved model file")
    p.add_argument("--data", required=True,
                   help="dataset to score (canonical dump or raw NSL-KDD)")
    p.add_argument("--out", help="output directory")

    p = sub.add_parser("report", help="full experiment: CV, evaluation, "
                                      "plots, models, JSON summary")
    common(p)

    p = sub.add_parser("print-config", help="print the effective "
                                            "configuration")
    p.add_argument("--config", help="INI configuration file")
    return parser


def effective_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "model", None):
        cfg = replace(cfg, model=args.model)
    if getattr(args, "folds", None) is not None:
        cfg = replace(cfg, k_folds=args.folds)
    if getattr(args, "out", None):
        cfg = replace(cfg, out_dir=args.out)
    return cfg


def cmd_ingest(args) -> int:
    cfg = effective_config(args)
    data = ingest_stage(cfg)
    counts = class_counts(data)
    out_dir = cfg.resolved_out_dir()
    os.makedirs(out_dir, exist_ok=True)
    dump = os.path.join(out_dir, "dataset.csv")
    write_dataset_csv(data, dump)
    print(f"records: {counts.total}")
    print(f"normal: {counts.normal}")
    print(f"anomaly: {counts.anomaly}")
    print(f"dump: {dump}")
    return 0


def cmd_cv(args) -> int:
    cfg = effective_config(args)
    run_experiment(cfg, out_dir=cfg.resolved_out_dir(),
                   write_plots=False, write_models=False, log=print)
    return 0


def cmd_train(args) -> int:
    cfg = effective_config(args)
    data = ingest_stage(cfg)
    out_dir = cfg.resolved_out_dir()
    os.makedirs(out_dir, exist_ok=True)
    for name in cfg.selected_models():
        clf = make_classifier(name, cfg)
        clf.fit(data, seed=cfg.seed ^ cfg.k_folds)
        target = os.path.join(out_dir, f"model_{name}.bin")
        save_model(clf, target)
        print(f"{name}: trained on {len(data)} records -> {target}")
    return 0


def cmd_predict(args) -> int:
    clf = load_model(args.model_file)
    data = load_dataset_any(args.data)
    probs = clf.predict_proba(data)
    out_dir = args.out or os.environ.get("APTDETECT_OUT", "") or "results"
    os.makedirs(out_dir, exist_ok=True)
    target = os.path.join(out_dir, "predictions.csv")
    write_predictions(probs, target)
    print(f"scored {len(data)} records -> {target}")
    return 0


def cmd_report(args) -> int:
    cfg = effective_config(args)
    run_experiment(cfg, out_dir=cfg.resolved_out_dir(), log=print)
    return 0


def cmd_print_config(args) -> int:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    sys.stdout.write(config_to_ini(cfg))
    return 0


_COMMANDS = {
    "ingest": cmd_ingest,
    "cv": cmd_cv,
    "train": cmd_train,
    "predict": cmd_predict,
    "report": cmd_report,
    "print-config": cmd_print_config,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except StageFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, OSError, ValueError, RuntimeError) as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
