"""Deep Maxout network with a softmax head, trained by mini-batch gradient
descent with momentum on cross-entropy.

The default architecture is the 6-layer stack used throughout: an input
layer, four hidden Maxout layers of 50 units (2 linear pieces per unit),
and a 2-class softmax output. Each Maxout unit outputs the maximum of its
piece pre-activations; backpropagation routes a unit's gradient to the
piece that won the max.

All randomness (initialization, batch shuffling, optional dropout masks)
flows from explicit seeds, so a (data, architecture, config, seed) tuple
reproduces the trained parameters bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class TrainingDiverged(RuntimeError):
    """Raised when a non-finite training loss appears."""


@dataclass(frozen=True)
class MlpArchitecture:
    input_dim: int
    hidden: tuple[tuple[int, int], ...] = ((50, 2),) * 4   # (units, pieces)
    output_classes: int = 2

    def __post_init__(self):
        if self.input_dim < 1:
            raise ValueError("input_dim must be >= 1")
        for units, pieces in self.hidden:
            if units < 1:
                raise ValueError("hidden layer width must be >= 1")
            if pieces < 2:
                raise ValueError("maxout needs at least 2 pieces")

    @property
    def layer_count(self) -> int:
        """Input + hidden + output."""
        return len(self.hidden) + 2


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 128
    learning_rate: float = 0.01
    momentum: float = 0.9
    seed: int = 0
    input_dropout: float = 0.0
    hidden_dropout: float = 0.0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must be in [0, 1)")
        for rate in (self.input_dropout, self.hidden_dropout):
            if not 0 <= rate < 1:
                raise ValueError("dropout rates must be in [0, 1)")


@dataclass(frozen=True)
class EpochStats:
    train_loss: float
    val_loss: float
    val_accuracy: float


@dataclass(frozen=True)
class TrainHistory:
    epochs: tuple[EpochStats, ...] = field(default_factory=tuple)


class MlpModel:
    """Network parameters. Hidden weights have shape (pieces, fan_in,
    units) with biases (pieces, units); the output layer is a plain affine
    map to the class logits."""

    def __init__(self, arch: MlpArchitecture,
                 hidden_w: list[np.ndarray], hidden_b: list[np.ndarray],
                 out_w: np.ndarray, out_b: np.ndarray, seed: int):
        self.arch = arch
        self.hidden_w = hidden_w
        self.hidden_b = hidden_b
        self.out_w = out_w
        self.out_b = out_b
        self.seed = seed

    def parameters(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.hidden_w, self.hidden_b):
            out.extend([w, b])
        out.extend([self.out_w, self.out_b])
        return out


def init_network(arch: MlpArchitecture, seed: int) -> MlpModel:
    """Uniform(+-sqrt(6 / (fan_in + fan_out))) weights, zero biases."""
    rng = np.random.default_rng(seed)
    hidden_w, hidden_b = [], []
    fan_in = arch.input_dim
    for units, pieces in arch.hidden:
        bound = np.sqrt(6.0 / (fan_in + units))
        hidden_w.append(rng.uniform(-bound, bound, size=(pieces, fan_in, units)))
        hidden_b.append(np.zeros((pieces, units)))
        fan_in = units
    bound = np.sqrt(6.0 / (fan_in + arch.output_classes))
    out_w = rng.uniform(-bound, bound, size=(fan_in, arch.output_classes))
    out_b = np.zeros(arch.output_classes)
    return MlpModel(arch, hidden_w, hidden_b, out_w, out_b, seed)


def maxout_forward(weights: np.ndarray, biases: np.ndarray,
                   x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One layer on one input vector: per unit, the max over piece
    pre-activations. Returns (activations, winning piece indices)."""
    pre = np.einsum("i,piu->pu", x, weights) + biases
    return pre.max(axis=0), pre.argmax(axis=0)


def _forward_hidden(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """Batched pass through the hidden stack; returns the final hidden
    activations."""
    h = x
    for w, b in zip(model.hidden_w, model.hidden_b):
        pre = np.einsum("ni,piu->npu", h, w) + b[None]
        h = pre.max(axis=1)
    return h


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """Class probabilities for a batch (n, input_dim) or one row."""
    single = x.ndim == 1
    batch = x[None, :] if single else x
    h = _forward_hidden(model, batch)
    probs = _softmax(h @ model.out_w + model.out_b)
    if not np.isfinite(probs).all():
        raise FloatingPointError("non-finite activation in forward pass")
    return probs[0] if single else probs


def loss_and_gradients(model: MlpModel, x: np.ndarray, y: np.ndarray,
                       rng: np.random.Generator | None = None,
                       input_dropout: float = 0.0,
                       hidden_dropout: float = 0.0):
    """Mean cross-entropy over the batch and gradients for every
    parameter, in ``model.parameters()`` order.

    Each Maxout unit's incoming gradient is routed to its winning piece
    only. Optional inverted dropout applies during training passes.
    """
    n = len(x)
    if n == 0:
        raise ValueError("empty batch")
    y = np.asarray(y, dtype=np.int64)

    in_mask = None
    hid_masks = None
    if input_dropout > 0:
        keep = 1.0 - input_dropout
        in_mask = (rng.random(x.shape) < keep) / keep
        x = x * in_mask
    if hidden_dropout > 0:
        keep = 1.0 - hidden_dropout
        hid_masks = [(rng.random((n, units)) < keep) / keep
                     for units, _ in model.arch.hidden]

    # Forward, remembering the actual input to every affine map and the
    # winning piece per unit.
    h = x
    inputs, winners = [], []
    for li, (w, b) in enumerate(zip(model.hidden_w, model.hidden_b)):
        inputs.append(h)
        pre = np.einsum("ni,piu->npu", h, w) + b[None]
        am = pre.argmax(axis=1)
        winners.append(am)
        h = np.take_along_axis(pre, am[:, None, :], axis=1)[:, 0, :]
        if hid_masks is not None:
            h = h * hid_masks[li]

    logits = h @ model.out_w + model.out_b
    probs = _softmax(logits)
    loss = float(-np.log(probs[np.arange(n), y]).mean())

    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n

    d_out_w = h.T @ dlogits
    d_out_b = dlogits.sum(axis=0)
    dh = dlogits @ model.out_w.T

    hidden_grads: list[tuple[np.ndarray, np.ndarray]] = []
    for li in range(len(model.hidden_w) - 1, -1, -1):
        if hid_masks is not None:
            dh = dh * hid_masks[li]
        w = model.hidden_w[li]
        am = winners[li]
        dpre = np.zeros((n,) + w.shape[0:1] + (w.shape[2],))
        np.put_along_axis(dpre, am[:, None, :], dh[:, None, :], axis=1)
        d_w = np.einsum("ni,npu->piu", inputs[li], dpre)
        d_b = dpre.sum(axis=0)
        hidden_grads.append((d_w, d_b))
        dh = np.einsum("npu,piu->ni", dpre, w)

    grads: list[np.ndarray] = []
    for d_w, d_b in reversed(hidden_grads):
        grads.extend([d_w, d_b])
    grads.extend([d_out_w, d_out_b])
    return loss, grads


def train_mlp(train_rows: np.ndarray, train_labels: np.ndarray,
              val_rows: np.ndarray, val_labels: np.ndarray,
              arch: MlpArchitecture, config: TrainConfig
              ) -> tuple[MlpModel, TrainHistory]:
    """Run ``config.epochs`` full passes of shuffled mini-batch gradient
    descent with momentum; the last-epoch model is the result."""
    model = init_network(arch, config.seed)
    rng = np.random.default_rng([config.seed, 1])
    params = model.parameters()
    velocity = [np.zeros_like(p) for p in params]
    n = len(train_rows)
    stats = []

    for epoch in range(config.epochs):
        perm = rng.permutation(n)
        epoch_loss = 0.0
        for bi, start in enumerate(range(0, n, config.batch_size)):
            batch = perm[start:start + config.batch_size]
            loss, grads = loss_and_gradients(
                model, train_rows[batch], train_labels[batch], rng=rng,
                input_dropout=config.input_dropout,
                hidden_dropout=config.hidden_dropout)
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch + 1}, batch {bi + 1}")
            epoch_loss += loss * len(batch)
            for p, v, g in zip(params, velocity, grads):
                v *= config.momentum
                v -= config.learning_rate * g
                p += v

        val_probs = forward(model, val_rows)
        val_loss = float(-np.log(
            np.maximum(val_probs[np.arange(len(val_labels)), val_labels],
                       1e-300)).mean())
        val_pred = val_probs.argmax(axis=1)
        val_acc = float((val_pred == val_labels).mean())
        stats.append(EpochStats(epoch_loss / n, val_loss, val_acc))

    return model, TrainHistory(tuple(stats))


def predict_mlp(model: MlpModel, row: np.ndarray) -> tuple[int, float]:
    """(label, confidence) for one standardized encoded row; probability
    ties go to normal (class 0)."""
    p = forward(model, row)
    label = 1 if p[1] > p[0] else 0
    return label, float(p[label])


class MlpClassifier:
    """fit/predict wrapper owning the full network pipeline: one-hot
    encoder, standardizer, train/validation holdout, and the trained
    network."""

    kind = "mlp"

    def __init__(self, hidden: tuple[tuple[int, int], ...] = ((50, 2),) * 4,
                 config: TrainConfig | None = None,
                 validation_fraction: float = 0.2):
        if not 0 < validation_fraction < 1:
            raise ValueError("validation_fraction must be in (0, 1)")
        self.hidden = tuple((int(u), int(p)) for u, p in hidden)
        self.config = config or TrainConfig()
        self.validation_fraction = validation_fraction
        self.encoder = None
        self.standardizer = None
        self.model: MlpModel | None = None
        self.history: TrainHistory | None = None

    def fit(self, train, seed: int = 0) -> "MlpClassifier":
        from .encoding import encode, fit_encoder, fit_standardizer, standardize
        from .folds import holdout_split

        self.encoder = fit_encoder(train)
        matrix = encode(self.encoder, train)
        self.standardizer = fit_standardizer(matrix)
        matrix = standardize(self.standardizer, matrix)

        tr_idx, val_idx = holdout_split(
            np.arange(len(matrix)), 1.0 - self.validation_fraction, seed,
            labels=matrix.labels)
        arch = MlpArchitecture(input_dim=self.encoder.width, hidden=self.hidden)
        config = TrainConfig(
            epochs=self.config.epochs, batch_size=self.config.batch_size,
            learning_rate=self.config.learning_rate,
            momentum=self.config.momentum, seed=seed,
            input_dropout=self.config.input_dropout,
            hidden_dropout=self.config.hidden_dropout)
        self.model, self.history = train_mlp(
            matrix.rows[tr_idx], matrix.labels[tr_idx].astype(np.int64),
            matrix.rows[val_idx], matrix.labels[val_idx].astype(np.int64),
            arch, config)
        return self

    def predict_proba(self, data) -> np.ndarray:
        from .encoding import encode, standardize

        if self.model is None:
            raise RuntimeError("classifier is not fitted")
        matrix = standardize(self.standardizer, encode(self.encoder, data))
        return forward(self.model, matrix.rows)

    def to_dict(self) -> dict:
        if self.model is None:
            raise RuntimeError("classifier is not fitted")
        m = self.model
        s = self.standardizer
        return {
            "hidden": [list(h) for h in self.hidden],
            "validation_fraction": self.validation_fraction,
            "config": {
                "epochs": self.config.epochs,
                "batch_size": self.config.batch_size,
                "learning_rate": self.config.learning_rate,
                "momentum": self.config.momentum,
                "input_dropout": self.config.input_dropout,
                "hidden_dropout": self.config.hidden_dropout,
            },
            "seed": m.seed,
            "encoder_categories": {name: list(values)
                                   for name, values in self.encoder.categories.items()},
            "standardizer": {"mean": s.mean.tolist(), "std": s.std.tolist(),
                             "apply_mask": s.apply_mask.astype(int).tolist()},
            "hidden_w": [w.tolist() for w in m.hidden_w],
            "hidden_b": [b.tolist() for b in m.hidden_b],
            "out_w": m.out_w.tolist(),
            "out_b": m.out_b.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict, schema) -> "MlpClassifier":
        from .encoding import Encoder
        from .schema import NOMINAL

        categories = {name: tuple(values)
                      for name, values in payload["encoder_categories"].items()}
        names: list[str] = []
        kinds: list[str] = []
        for name, kind in schema.features:
            if kind == NOMINAL:
                for value in categories[name]:
                    names.append(f"{name}.{value}")
                    kinds.append("onehot")
            else:
                names.append(name)
                kinds.append("numeric" if kind == "numeric" else "binary")
        encoder = Encoder(schema, categories, tuple(names), tuple(kinds))

        from .encoding import Standardizer

        s = payload["standardizer"]
        standardizer = Standardizer(np.asarray(s["mean"]), np.asarray(s["std"]),
                                    np.asarray(s["apply_mask"], dtype=bool))

        cfg = payload["config"]
        clf = cls(hidden=tuple(tuple(h) for h in payload["hidden"]),
                  config=TrainConfig(seed=payload["seed"], **cfg),
                  validation_fraction=payload["validation_fraction"])
        clf.encoder = encoder
        clf.standardizer = standardizer
        arch = MlpArchitecture(input_dim=encoder.width, hidden=clf.hidden)
        clf.model = MlpModel(
            arch,
            [np.asarray(w) for w in payload["hidden_w"]],
            [np.asarray(b) for b in payload["hidden_b"]],
            np.asarray(payload["out_w"]), np.asarray(payload["out_b"]),
            payload["seed"])
        return clf


def write_history_csv(history: TrainHistory, destination) -> None:
    """Training curve export: epoch, train loss, validation loss/accuracy."""
    import os

    own = isinstance(destination, (str, os.PathLike))
    fh = open(destination, "w", encoding="utf-8", newline="\n") if own else destination
    try:
        fh.write("epoch,train_loss,val_loss,val_accuracy\n")
        for i, e in enumerate(history.epochs, start=1):
            fh.write(f"{i},{e.train_loss!r},{e.val_loss!r},{e.val_accuracy!r}\n")
    finally:
        if own:
            fh.close()
