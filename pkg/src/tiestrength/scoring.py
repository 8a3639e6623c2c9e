"""Friendship weight: sum over parameters of importance * p * k * x_norm."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ArityError, LoadError
from .ingest import format_number
from .model import Variant, WeightTable
from .normalize import apply_minmax_matrix


@dataclass(frozen=True)
class Score:
    ego_id: str
    friend_id: str
    weight: float


def assemble_weight_table(names, importances, p_vector=None, k_vector=None, variant=Variant.RF_P_K,
                          clip_negative=True) -> WeightTable:
    """Build a WeightTable, forcing p = k = 1 for LR/RF and k = 1 for RF_P.

    Permutation importances can come out slightly negative for
    uninformative parameters; ``clip_negative`` maps those to 0.
    """
    variant = Variant.parse(variant) if isinstance(variant, str) else Variant(variant)
    n = len(names)
    importances = [float(v) for v in importances]
    p_vector = [1.0] * n if p_vector is None else [float(v) for v in p_vector]
    k_vector = [1.0] * n if k_vector is None else [float(v) for v in k_vector]
    if not (len(importances) == len(p_vector) == len(k_vector) == n):
        raise ArityError(
            f"{n} parameters but {len(importances)} importances, {len(p_vector)} p values, {len(k_vector)} k values"
        )
    if clip_negative:
        importances = [max(v, 0.0) for v in importances]
    if variant in (Variant.LR, Variant.RF):
        p_vector = [1.0] * n
    if variant in (Variant.LR, Variant.RF, Variant.RF_P):
        k_vector = [1.0] * n
    return WeightTable(names, importances, p_vector, k_vector, variant)


def friendship_weight(x_norm, table: WeightTable) -> float:
    if len(x_norm) != len(table):
        raise ArityError(f"got {len(x_norm)} values, weight table has {len(table)} parameters")
    acc = 0.0
    for c, x in zip(table.coefficients(), x_norm):
        acc = acc + c * float(x)
    return acc


def friendship_weights(X_norm, table: WeightTable) -> np.ndarray:
    """Row-wise ``friendship_weight``, accumulated column by column so results are bitwise identical."""
    X_norm = np.asarray(X_norm, dtype=float)
    if X_norm.ndim != 2 or X_norm.shape[1] != len(table):
        raise ArityError(f"matrix has shape {X_norm.shape}, weight table has {len(table)} parameters")
    acc = np.zeros(len(X_norm))
    for i, c in enumerate(table.coefficients()):
        acc = acc + c * X_norm[:, i]
    return acc


def score_records(records, table: WeightTable, norm) -> list[Score]:
    if not records:
        return []
    X = np.array([r.values for r in records], dtype=float)
    w = friendship_weights(apply_minmax_matrix(X, norm), table)
    return [Score(r.ego_id, r.friend_id, float(v)) for r, v in zip(records, w)]


def write_scores(path, scores) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["ego_id", "friend_id", "weight"])
        for s in scores:
            writer.writerow([s.ego_id, s.friend_id, format_number(s.weight)])


def save_weight_table(path, table: WeightTable, metadata: dict | None = None) -> None:
    data = table.to_dict()
    if metadata:
        data["metadata"] = metadata
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def load_weight_table(path) -> WeightTable:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return WeightTable.from_dict(data)
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise LoadError(f"cannot read weight table {path}: {exc}") from None
