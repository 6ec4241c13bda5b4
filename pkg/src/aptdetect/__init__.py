"""Anomaly detection on NSL-KDD connection records.

A numpy library reproducing a three-model detection pipeline end to end:
ingestion with binary relabeling, one-hot/standardized encodings, a
gain-ratio decision tree, a naive Bayes classifier, a deep Maxout network,
stratified 10-fold cross-validation, and a full evaluation suite
(confusion metrics, ROC/AUC, lift charts, variable importance).
"""

from .schema import FeatureSchema, nslkdd_schema
from .ingest import (ANOMALY, NORMAL, ClassCounts, Dataset, IngestError,
                     RawRecord, class_counts, ingest_pair, merge,
                     parse_nslkdd, read_dataset_csv, relabel_binary,
                     write_dataset_csv)
from .encoding import (EncodedMatrix, Encoder, Standardizer, encode,
                       fit_encoder, fit_standardizer, standardize)
from .folds import (CvResult, FoldPlan, holdout_split, run_cv,
                    stratified_folds, write_foldplan)
from .tree import (SplitCandidate, TreeClassifier, TreeModel, TreeParams,
                   best_split, entropy, gain_ratio, info_gain, predict_tree,
                   split_info, train_tree)
from .bayes import BayesClassifier, NbModel, fit_nb, posterior, predict_nb
from .mlp import (MlpArchitecture, MlpClassifier, MlpModel, TrainConfig,
                  TrainHistory, TrainingDiverged, forward, init_network,
                  loss_and_gradients, maxout_forward, predict_mlp, train_mlp)
from .metrics import (ConfusionMatrix, LiftChart, MetricsReport, RocCurve,
                      aggregate_cv, auc, confusion, lift_chart, metrics,
                      roc_curve)
from .importance import (ImportanceTable, emit_importance,
                         variable_importance)
from .config import ExperimentConfig, MlpParams, NbParams, load_config
from .experiment import ExperimentReport, run_experiment
from .persist import ModelFormatError, load_model, save_model

__version__ = "0.1.0"
