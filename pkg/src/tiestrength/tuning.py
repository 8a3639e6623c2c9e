"""One-at-a-time sweep of the boost coefficients k against pair accuracy."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .evaluation import PairEvaluator
from .model import Variant, WeightTable

DEFAULT_K_GRID = tuple(range(1, 101)) + (150, 200, 500, 1000)
PLATEAU_SAMPLES = 3


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    curve: tuple[tuple[float, float], ...]  # (k, accuracy excluding ties), ascending k
    chosen_k: float
    plateau_detected: bool

    @property
    def max_accuracy(self) -> float:
        return max(a for _, a in self.curve)

    def accuracy_at(self, k: float) -> float | None:
        for kk, a in self.curve:
            if kk == k:
                return a
        return None


@dataclass(frozen=True)
class TuningResult:
    table: WeightTable
    sweeps: tuple[SweepResult, ...]
    order: tuple[str, ...]
    baselines: dict = field(default_factory=dict)  # accuracy at k=1 per parameter

    def to_dict(self) -> dict:
        return {
            "order": list(self.order),
            "plateau_rule": f"last {PLATEAU_SAMPLES} sampled k share the maximum accuracy",
            "selection_rule": "smallest k reaching the maximum; k stays 1 unless the maximum beats k=1",
            "parameters": [
                {
                    "name": s.parameter,
                    "curve": [[k, a] for k, a in s.curve],
                    "chosen_k": s.chosen_k,
                    "plateau_detected": s.plateau_detected,
                    "accuracy_at_k1": self.baselines.get(s.parameter),
                    "final_k": self.table.k_of(s.parameter),
                }
                for s in self.sweeps
            ],
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


def _check_grid(k_values):
    ks = [float(k) for k in k_values]
    if not ks:
        raise ConfigError("k_values is empty")
    if any(k < 1 for k in ks):
        raise ConfigError("every k must be >= 1")
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ConfigError("k_values must be strictly ascending")
    return ks


def _accuracy_fn(pairs, features, accuracy_fn):
    if accuracy_fn is not None:
        return accuracy_fn
    if pairs is None or features is None:
        raise ConfigError("need either pairs and features or an accuracy function")
    return PairEvaluator(pairs, features).accuracy_excluding_ties


def sweep_k(parameter, k_values, base_table, pairs=None, features=None, *, accuracy_fn=None) -> SweepResult:
    """Evaluate ties-excluded accuracy with only ``parameter``'s k varied.

    ``features`` maps (ego_id, friend_id) to normalized vectors. A custom
    ``accuracy_fn(table) -> float`` replaces the pair evaluation.
    """
    if parameter not in base_table.names:
        raise ConfigError(f"parameter {parameter!r} not in weight table")
    ks = _check_grid(k_values)
    acc = _accuracy_fn(pairs, features, accuracy_fn)
    curve = tuple((k, float(acc(base_table.with_k(parameter, k)))) for k in ks)
    best = max(a for _, a in curve)
    chosen = next(k for k, a in curve if a == best)
    plateau = len(curve) >= PLATEAU_SAMPLES and all(a == best for _, a in curve[-PLATEAU_SAMPLES:])
    return SweepResult(parameter, curve, chosen, plateau)


def tune_all(base_table, pairs=None, features=None, k_grid=DEFAULT_K_GRID, *, accuracy_fn=None) -> TuningResult:
    """Sweep each parameter in table order, carrying accepted k values forward."""
    ks = _check_grid(k_grid)
    acc = _accuracy_fn(pairs, features, accuracy_fn)
    table = base_table
    sweeps, baselines = [], {}
    for name in base_table.names:
        result = sweep_k(name, ks, table, accuracy_fn=acc)
        at_one = result.accuracy_at(1.0)
        if at_one is None:
            at_one = float(acc(table.with_k(name, 1.0)))
        baselines[name] = at_one
        table = table.with_k(name, result.chosen_k if result.max_accuracy > at_one else 1.0)
        sweeps.append(result)
    table = WeightTable(table.names, table.importance, table.p, table.k, Variant.RF_P_K)
    return TuningResult(table, tuple(sweeps), tuple(base_table.names), baselines)
