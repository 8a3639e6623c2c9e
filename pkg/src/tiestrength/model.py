"""Shared domain types: the parameter manifest, table rows, weight tables.

All types are frozen dataclasses holding tuples, so they can be shared
freely between threads once built.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ArityError, ConfigError, ManifestError

COUNT = "count"
BINARY = "binary"
KINDS = (COUNT, BINARY)

SUBGROUPS = ("best_friend", "friend", "acquaintance", "unallocated")
CHOICES = ("first", "second", "undecided")


@dataclass(frozen=True)
class ParameterDef:
    name: str
    kind: str = COUNT


@dataclass(frozen=True)
class ParameterManifest:
    """Ordered list of interaction parameters; the order is the column order."""

    parameters: tuple[ParameterDef, ...]

    def __post_init__(self):
        params = tuple(self.parameters)
        object.__setattr__(self, "parameters", params)
        if not params:
            raise ManifestError("manifest must list at least one parameter")
        seen = set()
        for p in params:
            if not p.name or not p.name.strip():
                raise ManifestError("parameter names must be non-empty")
            if p.name in seen:
                raise ManifestError(f"duplicate parameter name {p.name!r}")
            if p.kind not in KINDS:
                raise ManifestError(f"parameter {p.name!r}: unknown kind {p.kind!r}")
            seen.add(p.name)

    @classmethod
    def from_pairs(cls, pairs) -> ParameterManifest:
        return cls(tuple(ParameterDef(n, k) for n, k in pairs))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.parameters)

    @property
    def kinds(self) -> tuple[str, ...]:
        return tuple(p.kind for p in self.parameters)

    def __len__(self):
        return len(self.parameters)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ManifestError(f"parameter {name!r} not in manifest") from None

    def to_dict(self) -> dict:
        return {"parameters": [{"name": p.name, "kind": p.kind} for p in self.parameters]}

    @classmethod
    def from_dict(cls, data: dict) -> ParameterManifest:
        try:
            entries = data["parameters"]
            return cls(tuple(ParameterDef(str(e["name"]), str(e.get("kind", COUNT))) for e in entries))
        except (KeyError, TypeError) as exc:
            raise ManifestError(f"malformed manifest: {exc}") from None

    @classmethod
    def load(cls, path) -> ParameterManifest:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ManifestError(f"cannot read manifest {path}: {exc}") from None
        return cls.from_dict(data)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


# The eight-parameter manifest of the published model, in column order.
PUBLISHED_PARAMETERS = (
    ("wall_comments", COUNT),      # B comments on a wall post of A
    ("wall_messages", COUNT),      # B posts a message on A's wall
    ("tagged_together", COUNT),    # A and B tagged together in a post
    ("photo_by_ego", COUNT),       # mutual photo published by A
    ("photo_by_other", COUNT),     # mutual photo published by a third user
    ("photo_comments", COUNT),     # B comments on a photo of A
    ("messages", COUNT),           # messages exchanged between A and B
    ("close_friend", BINARY),      # A put B on the close-friends list
)

MESSAGES = "messages"


def published_manifest() -> ParameterManifest:
    return ParameterManifest.from_pairs(PUBLISHED_PARAMETERS)


@dataclass(frozen=True)
class InteractionRecord:
    ego_id: str
    friend_id: str
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @property
    def key(self) -> tuple[str, str]:
        return (self.ego_id, self.friend_id)


@dataclass(frozen=True)
class Classification:
    ego_id: str
    friend_id: str
    subgroup: str

    def __post_init__(self):
        if self.subgroup not in SUBGROUPS:
            raise ValueError(f"unknown subgroup {self.subgroup!r}")


@dataclass(frozen=True)
class PairJudgment:
    ego_id: str
    friend1_id: str
    friend2_id: str
    choice: str

    def __post_init__(self):
        if self.choice not in CHOICES:
            raise ValueError(f"unknown choice {self.choice!r}")
        if self.friend1_id == self.friend2_id:
            raise ValueError(f"pair for ego {self.ego_id!r} repeats friend {self.friend1_id!r}")

    def swapped(self) -> PairJudgment:
        flip = {"first": "second", "second": "first", "undecided": "undecided"}
        return PairJudgment(self.ego_id, self.friend2_id, self.friend1_id, flip[self.choice])


class Variant(str, Enum):
    LR = "LR"          # |t| importances only
    RF = "RF"          # MeanDecreaseAccuracy only
    RF_P = "RF_P"      # ... times survey distribution p
    RF_P_K = "RF_P_K"  # ... times tuned boost k

    @classmethod
    def parse(cls, text: str) -> Variant:
        key = text.strip().upper().replace("-", "_")
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(f"unknown variant {text!r} (expected lr, rf, rf-p or rf-p-k)") from None

    @property
    def cli_name(self) -> str:
        return self.value.lower().replace("_", "-")


@dataclass(frozen=True)
class WeightTable:
    """Per-parameter (importance, p, k) triples; fully determines a scoring model."""

    names: tuple[str, ...]
    importance: tuple[float, ...]
    p: tuple[float, ...]
    k: tuple[float, ...]
    variant: Variant

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(str(n) for n in self.names))
        for attr in ("importance", "p", "k"):
            object.__setattr__(self, attr, tuple(float(v) for v in getattr(self, attr)))
        object.__setattr__(self, "variant", Variant(self.variant))
        n = len(self.names)
        if not (len(self.importance) == len(self.p) == len(self.k) == n):
            raise ArityError(
                f"weight table arity mismatch: {n} names, {len(self.importance)} importances, "
                f"{len(self.p)} p values, {len(self.k)} k values"
            )
        for name, imp, p, k in zip(self.names, self.importance, self.p, self.k):
            if not (math.isfinite(imp) and imp >= 0):
                raise ConfigError(f"{name}: importance must be finite and non-negative, got {imp}")
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"{name}: p must lie in [0, 1], got {p}")
            if not (math.isfinite(k) and k >= 1.0):
                raise ConfigError(f"{name}: k must be >= 1, got {k}")
        if self.variant in (Variant.LR, Variant.RF):
            if any(p != 1.0 for p in self.p) or any(k != 1.0 for k in self.k):
                raise ConfigError(f"variant {self.variant.value} requires p = k = 1 everywhere")
        if self.variant is Variant.RF_P and any(k != 1.0 for k in self.k):
            raise ConfigError("variant RF_P requires k = 1 everywhere")

    def __len__(self):
        return len(self.names)

    def coefficients(self) -> tuple[float, ...]:
        """importance * p * k per parameter, multiplied left to right."""
        return tuple(imp * p * k for imp, p, k in zip(self.importance, self.p, self.k))

    def k_of(self, name: str) -> float:
        return self.k[self.names.index(name)]

    def with_k(self, name: str, value: float) -> WeightTable:
        if name not in self.names:
            raise ManifestError(f"parameter {name!r} not in weight table")
        ks = list(self.k)
        ks[self.names.index(name)] = float(value)
        variant = self.variant if all(k == 1.0 for k in ks) else Variant.RF_P_K
        return WeightTable(self.names, self.importance, self.p, ks, variant)

    def scaled(self, factor: float) -> WeightTable:
        """Multiply every importance (hence every combined coefficient) by factor."""
        if not factor > 0:
            raise ConfigError("scale factor must be positive")
        return WeightTable(self.names, [v * factor for v in self.importance], self.p, self.k, self.variant)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.value,
            "parameters": [
                {"name": n, "importance": i, "p": p, "k": k}
                for n, i, p, k in zip(self.names, self.importance, self.p, self.k)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> WeightTable:
        params = data["parameters"]
        return cls(
            names=[str(e["name"]) for e in params],
            importance=[float(e["importance"]) for e in params],
            p=[float(e.get("p", 1.0)) for e in params],
            k=[float(e.get("k", 1.0)) for e in params],
            variant=Variant.parse(data["variant"]),
        )

    def check_manifest(self, manifest: ParameterManifest) -> None:
        if self.names != manifest.names:
            raise ArityError(
                f"weight table parameters {list(self.names)} do not match manifest {list(manifest.names)}"
            )


@dataclass(frozen=True)
class Violation:
    row: int
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_table(records, manifest: ParameterManifest) -> ValidationReport:
    """Check every record against the manifest; violations are returned, not raised."""
    violations = []
    seen = {}
    n = len(manifest)
    kinds = manifest.kinds
    for row, rec in enumerate(records):
        if len(rec.values) != n:
            violations.append(Violation(row, f"arity mismatch at row {row}: {len(rec.values)} values, expected {n}"))
        else:
            for name, kind, v in zip(manifest.names, kinds, rec.values):
                if not math.isfinite(v):
                    violations.append(Violation(row, f"non-finite value at row {row} column {name}"))
                elif kind == BINARY and v not in (0.0, 1.0):
                    violations.append(Violation(row, f"binary out of range at row {row} column {name}: {v:g}"))
                elif v < 0:
                    violations.append(Violation(row, f"negative count at row {row} column {name}: {v:g}"))
        if rec.key in seen:
            violations.append(
                Violation(row, f"duplicate pair ({rec.ego_id}, {rec.friend_id}) at row {row}, first seen at row {seen[rec.key]}")
            )
        else:
            seen[rec.key] = row
    return ValidationReport(tuple(violations))


def feature_matrix(records, n_parameters: int | None = None) -> np.ndarray:
    if not records:
        return np.zeros((0, n_parameters or 0))
    X = np.array([r.values for r in records], dtype=float)
    if n_parameters is not None and X.shape[1] != n_parameters:
        raise ArityError(f"records carry {X.shape[1]} values, expected {n_parameters}")
    return X


def feature_index(records) -> dict[tuple[str, str], tuple[float, ...]]:
    """(ego_id, friend_id) -> values."""
    return {r.key: r.values for r in records}
