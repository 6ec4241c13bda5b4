"""Model persistence: a one-line header (magic string, format version,
model kind) followed by a JSON parameter payload. Floats serialize via
their shortest round-trip representation, so save/load is lossless."""

from __future__ import annotations

import json

from .bayes import BayesClassifier
from .mlp import MlpClassifier
from .schema import FeatureSchema, nslkdd_schema
from .tree import TreeClassifier

MAGIC = "aptdetect-model"
FORMAT_VERSION = 1

_LOADERS = {
    "tree": TreeClassifier.from_dict,
    "nb": BayesClassifier.from_dict,
    "mlp": MlpClassifier.from_dict,
}


class ModelFormatError(ValueError):
    """Unreadable, corrupt, or incompatible model file."""


def save_model(classifier, path) -> None:
    kind = getattr(classifier, "kind", None)
    if kind not in _LOADERS:
        raise ModelFormatError(f"cannot serialize model kind {kind!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{MAGIC} {FORMAT_VERSION} {kind}\n")
        json.dump(classifier.to_dict(), fh, separators=(",", ":"))
        fh.write("\n")


def load_model(path, schema: FeatureSchema | None = None):
    schema = schema or nslkdd_schema()
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        parts = header.split(" ")
        if len(parts) != 3 or parts[0] != MAGIC:
            raise ModelFormatError(f"{path}: not a model file (bad header)")
        try:
            version = int(parts[1])
        except ValueError:
            raise ModelFormatError(f"{path}: malformed version field") from None
        if version > FORMAT_VERSION:
            raise ModelFormatError(
                f"{path}: format version {version} is newer than the "
                f"supported version {FORMAT_VERSION}")
        kind = parts[2]
        if kind not in _LOADERS:
            raise ModelFormatError(f"{path}: unknown model kind {kind!r}")
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: corrupt payload ({exc})") from None
    return _LOADERS[kind](payload, schema)
