"""Feature schema for NSL-KDD connection records.

Each record carries 41 features followed by a label column. Three kinds of
features occur: plain numeric measurements, 0/1 categorical flags, and
nominal (string-valued) features.
"""

from __future__ import annotations

from dataclasses import dataclass, field

NUMERIC = "numeric"
CATEGORICAL_BINARY = "categorical_binary"
NOMINAL = "nominal"

_KINDS = (NUMERIC, CATEGORICAL_BINARY, NOMINAL)

# The 41 NSL-KDD features in file order with their kinds.
NSLKDD_FEATURES: tuple[tuple[str, str], ...] = (
    ("duration", NUMERIC),
    ("protocol_type", NOMINAL),
    ("service", NOMINAL),
    ("flag", NOMINAL),
    ("src_bytes", NUMERIC),
    ("dst_bytes", NUMERIC),
    ("land", CATEGORICAL_BINARY),
    ("wrong_fragment", NUMERIC),
    ("urgent", NUMERIC),
    ("hot", NUMERIC),
    ("num_failed_logins", NUMERIC),
    ("logged_in", CATEGORICAL_BINARY),
    ("num_compromised", NUMERIC),
    ("root_shell", CATEGORICAL_BINARY),
    ("su_attempted", CATEGORICAL_BINARY),
    ("num_root", NUMERIC),
    ("num_file_creations", NUMERIC),
    ("num_shells", NUMERIC),
    ("num_access_files", NUMERIC),
    ("num_outbound_cmds", NUMERIC),
    ("is_host_login", CATEGORICAL_BINARY),
    ("is_guest_login", CATEGORICAL_BINARY),
    ("count", NUMERIC),
    ("srv_count", NUMERIC),
    ("serror_rate", NUMERIC),
    ("srv_serror_rate", NUMERIC),
    ("rerror_rate", NUMERIC),
    ("srv_rerror_rate", NUMERIC),
    ("same_srv_rate", NUMERIC),
    ("diff_srv_rate", NUMERIC),
    ("srv_diff_host_rate", NUMERIC),
    ("dst_host_count", NUMERIC),
    ("dst_host_srv_count", NUMERIC),
    ("dst_host_same_srv_rate", NUMERIC),
    ("dst_host_diff_srv_rate", NUMERIC),
    ("dst_host_same_src_port_rate", NUMERIC),
    ("dst_host_srv_diff_host_rate", NUMERIC),
    ("dst_host_serror_rate", NUMERIC),
    ("dst_host_srv_serror_rate", NUMERIC),
    ("dst_host_rerror_rate", NUMERIC),
    ("dst_host_srv_rerror_rate", NUMERIC),
)


@dataclass(frozen=True)
class FeatureSchema:
    """An ordered list of (name, kind) features plus the label position.

    For NSL-KDD the label is the 42nd field (index 41); an optional
    difficulty integer may trail it.
    """

    features: tuple[tuple[str, str], ...] = NSLKDD_FEATURES
    label_position: int = 41

    # Index maps derived once; positions refer to feature order (0..40).
    numeric_positions: tuple[int, ...] = field(init=False, repr=False)
    binary_positions: tuple[int, ...] = field(init=False, repr=False)
    nominal_positions: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        for name, kind in self.features:
            if kind not in _KINDS:
                raise ValueError(f"unknown feature kind {kind!r} for {name!r}")
        num, binv, nom = [], [], []
        for i, (_, kind) in enumerate(self.features):
            if kind == NUMERIC:
                num.append(i)
            elif kind == CATEGORICAL_BINARY:
                binv.append(i)
            else:
                nom.append(i)
        object.__setattr__(self, "numeric_positions", tuple(num))
        object.__setattr__(self, "binary_positions", tuple(binv))
        object.__setattr__(self, "nominal_positions", tuple(nom))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.features)

    @property
    def kinds(self) -> tuple[str, ...]:
        return tuple(kind for _, kind in self.features)

    @property
    def float_positions(self) -> tuple[int, ...]:
        """Positions of features stored as floats (numeric + binary flags),
        in feature order."""
        return tuple(sorted(self.numeric_positions + self.binary_positions))

    def kind_of(self, position: int) -> str:
        return self.features[position][1]

    def name_of(self, position: int) -> str:
        return self.features[position][0]

    def __len__(self) -> int:
        return len(self.features)


def nslkdd_schema() -> FeatureSchema:
    """The standard 41-feature NSL-KDD schema."""
    return FeatureSchema()
