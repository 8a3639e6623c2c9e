"""Per-parameter min-max scaling into [0, 1]."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ArityError, ConfigError, LoadError


@dataclass(frozen=True)
class NormalizationParams:
    names: tuple[str, ...]
    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    def __post_init__(self):
        for attr in ("names", "mins", "maxs"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        if not len(self.names) == len(self.mins) == len(self.maxs):
            raise ArityError("normalization params arity mismatch")
        for n, lo, hi in zip(self.names, self.mins, self.maxs):
            if lo > hi:
                raise ConfigError(f"{n}: min {lo} exceeds max {hi}")

    def __len__(self):
        return len(self.names)

    def to_dict(self) -> dict:
        return {n: {"min": lo, "max": hi} for n, lo, hi in zip(self.names, self.mins, self.maxs)}

    @classmethod
    def from_dict(cls, data: dict) -> NormalizationParams:
        names = list(data)
        return cls(names, [float(data[n]["min"]) for n in names], [float(data[n]["max"]) for n in names])

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> NormalizationParams:
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise LoadError(f"cannot read normalization params {path}: {exc}") from None


def fit_minmax(records, manifest) -> NormalizationParams:
    if not records:
        raise ValueError("cannot fit normalization on an empty table")
    n = len(manifest)
    mins = list(records[0].values)
    maxs = list(records[0].values)
    for r in records:
        if len(r.values) != n:
            raise ArityError(f"record ({r.ego_id}, {r.friend_id}) has {len(r.values)} values, expected {n}")
        for i, v in enumerate(r.values):
            if v < mins[i]:
                mins[i] = v
            elif v > maxs[i]:
                maxs[i] = v
    return NormalizationParams(manifest.names, mins, maxs)


def apply_minmax(values, params: NormalizationParams) -> tuple[float, ...]:
    """Scale one value vector; degenerate columns map to 0 and out-of-range values are clamped."""
    if len(values) != len(params):
        raise ArityError(f"got {len(values)} values, normalization expects {len(params)}")
    out = []
    for x, lo, hi in zip(values, params.mins, params.maxs):
        if hi == lo:
            out.append(0.0)
            continue
        z = (x - lo) / (hi - lo)
        out.append(0.0 if z < 0.0 else 1.0 if z > 1.0 else z)
    return tuple(out)


def apply_minmax_matrix(X: np.ndarray, params: NormalizationParams) -> np.ndarray:
    """Row-wise ``apply_minmax``; bitwise identical to it."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != len(params):
        raise ArityError(f"matrix has shape {X.shape}, normalization expects {len(params)} columns")
    lo = np.array(params.mins)
    hi = np.array(params.maxs)
    span = hi - lo
    degenerate = span == 0
    Z = (X - lo) / np.where(degenerate, 1.0, span)
    Z = np.clip(Z, 0.0, 1.0)
    Z[:, degenerate] = 0.0
    return Z
