"""Experiment configuration: a flat INI file with one section per model
plus [data] and [experiment]. Unknown sections or keys are rejected so a
typo cannot silently fall back to a default. Every effective value is
printable via the print-config subcommand."""

from __future__ import annotations

import configparser
import io
import os
from dataclasses import dataclass, field, replace

from .mlp import TrainConfig
from .tree import TreeParams

OUT_DIR_ENV = "APTDETECT_OUT"

MODEL_CHOICES = ("tree", "nb", "mlp", "all")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class NbParams:
    alpha: float = 1.0
    var_floor: float = 1e-9


@dataclass(frozen=True)
class MlpParams:
    hidden_units: tuple[int, ...] = (50, 50, 50, 50)
    maxout_pieces: int = 2
    epochs: int = 10
    batch_size: int = 128
    learning_rate: float = 0.01
    momentum: float = 0.9
    validation_fraction: float = 0.2
    input_dropout: float = 0.0
    hidden_dropout: float = 0.0

    def hidden_layers(self) -> tuple[tuple[int, int], ...]:
        return tuple((u, self.maxout_pieces) for u in self.hidden_units)

    def train_config(self, seed: int = 0) -> TrainConfig:
        return TrainConfig(epochs=self.epochs, batch_size=self.batch_size,
                           learning_rate=self.learning_rate,
                           momentum=self.momentum, seed=seed,
                           input_dropout=self.input_dropout,
                           hidden_dropout=self.hidden_dropout)


@dataclass(frozen=True)
class ExperimentConfig:
    train_path: str = ""
    test_path: str = ""
    model: str = "all"
    k_folds: int = 10
    seed: int = 7
    out_dir: str = ""
    tree: TreeParams = field(default_factory=TreeParams)
    nb: NbParams = field(default_factory=NbParams)
    mlp: MlpParams = field(default_factory=MlpParams)

    def __post_init__(self):
        if self.model not in MODEL_CHOICES:
            raise ConfigError(f"model must be one of {MODEL_CHOICES}, "
                              f"got {self.model!r}")
        if self.k_folds < 2:
            raise ConfigError("folds must be >= 2")

    def selected_models(self) -> tuple[str, ...]:
        return ("tree", "nb", "mlp") if self.model == "all" else (self.model,)

    def resolved_out_dir(self) -> str:
        return self.out_dir or os.environ.get(OUT_DIR_ENV, "") or "results"


_SCHEMA = {
    "data": {"train": str, "test": str},
    "experiment": {"model": str, "folds": int, "seed": int, "out": str},
    "tree": {"max_depth": int, "min_leaf": int, "min_gain_ratio": float},
    "nb": {"alpha": float, "var_floor": float},
    "mlp": {"hidden_units": "int_list", "maxout_pieces": int, "epochs": int,
            "batch_size": int, "learning_rate": float, "momentum": float,
            "validation_fraction": float, "input_dropout": float,
            "hidden_dropout": float},
}


def _coerce(section: str, key: str, raw: str):
    kind = _SCHEMA[section][key]
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind == "int_list":
            return tuple(int(part) for part in raw.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from None
    return raw


def load_config(path=None, text: str | None = None) -> ExperimentConfig:
    """Parse an INI config, starting from defaults. Missing file -> error;
    unknown sections/keys -> error."""
    parser = configparser.ConfigParser(interpolation=None)
    if text is not None:
        parser.read_string(text)
    else:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)

    values: dict[str, dict] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            values.setdefault(section, {})[key] = _coerce(section, key, raw)

    cfg = ExperimentConfig()
    data = values.get("data", {})
    exp = values.get("experiment", {})
    cfg = replace(
        cfg,
        train_path=data.get("train", cfg.train_path),
        test_path=data.get("test", cfg.test_path),
        model=exp.get("model", cfg.model),
        k_folds=exp.get("folds", cfg.k_folds),
        seed=exp.get("seed", cfg.seed),
        out_dir=exp.get("out", cfg.out_dir),
    )
    if "tree" in values:
        try:
            cfg = replace(cfg, tree=TreeParams(**{**_tree_dict(cfg.tree),
                                                  **values["tree"]}))
        except ValueError as exc:
            raise ConfigError(f"[tree] {exc}") from None
    if "nb" in values:
        cfg = replace(cfg, nb=NbParams(**{**_nb_dict(cfg.nb), **values["nb"]}))
    if "mlp" in values:
        cfg = replace(cfg, mlp=MlpParams(**{**_mlp_dict(cfg.mlp),
                                            **values["mlp"]}))
    return cfg


def _tree_dict(p: TreeParams) -> dict:
    return {"max_depth": p.max_depth, "min_leaf": p.min_leaf,
            "min_gain_ratio": p.min_gain_ratio}


def _nb_dict(p: NbParams) -> dict:
    return {"alpha": p.alpha, "var_floor": p.var_floor}


def _mlp_dict(p: MlpParams) -> dict:
    return {"hidden_units": p.hidden_units, "maxout_pieces": p.maxout_pieces,
            "epochs": p.epochs, "batch_size": p.batch_size,
            "learning_rate": p.learning_rate, "momentum": p.momentum,
            "validation_fraction": p.validation_fraction,
            "input_dropout": p.input_dropout,
            "hidden_dropout": p.hidden_dropout}


def config_to_ini(cfg: ExperimentConfig) -> str:
    """Render the full effective configuration."""
    out = io.StringIO()
    out.write("[data]\n")
    out.write(f"train = {cfg.train_path}\n")
    out.write(f"test = {cfg.test_path}\n\n")
    out.write("[experiment]\n")
    out.write(f"model = {cfg.model}\n")
    out.write(f"folds = {cfg.k_folds}\n")
    out.write(f"seed = {cfg.seed}\n")
    out.write(f"out = {cfg.out_dir}\n\n")
    out.write("[tree]\n")
    for key, value in _tree_dict(cfg.tree).items():
        out.write(f"{key} = {value}\n")
    out.write("\n[nb]\n")
    for key, value in _nb_dict(cfg.nb).items():
        out.write(f"{key} = {value}\n")
    out.write("\n[mlp]\n")
    for key, value in _mlp_dict(cfg.mlp).items():
        if key == "hidden_units":
            value = ",".join(str(u) for u in value)
        out.write(f"{key} = {value}\n")
    return out.getvalue()


def config_echo(cfg: ExperimentConfig) -> dict:
    """Config as a plain dict for embedding in reports."""
    return {
        "data": {"train": cfg.train_path, "test": cfg.test_path},
        "experiment": {"model": cfg.model, "folds": cfg.k_folds,
                       "seed": cfg.seed, "out": cfg.out_dir},
        "tree": _tree_dict(cfg.tree),
        "nb": _nb_dict(cfg.nb),
        "mlp": {**_mlp_dict(cfg.mlp),
                "hidden_units": list(cfg.mlp.hidden_units)},
    }
