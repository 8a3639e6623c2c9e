"""Better-friend-in-pair verification.

The predicted better friend is the one with the larger weight. Accuracy is
reported twice: over all pairs, and over pairs whose two weights differ
(exact float equality is a tie; ties never count as matches).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import MissingFeatureError
from .ingest import format_number
from .normalize import apply_minmax_matrix
from .scoring import friendship_weights

FIRST, SECOND, TIE = "first", "second", "tie"


def predict_better_friend(weight1: float, weight2: float) -> str:
    if not (math.isfinite(weight1) and math.isfinite(weight2)):
        raise ValueError(f"non-finite weight in pair ({weight1}, {weight2})")
    if weight1 > weight2:
        return FIRST
    if weight2 > weight1:
        return SECOND
    return TIE


@dataclass(frozen=True)
class PairOutcome:
    ego_id: str
    friend1_id: str
    friend2_id: str
    weight1: float
    weight2: float
    prediction: str
    stated: str
    match: bool


@dataclass(frozen=True)
class AccuracyReport:
    total_pairs: int
    tie_pairs: int
    matches: int
    ledger: tuple[PairOutcome, ...] = ()

    @property
    def decided_pairs(self) -> int:
        return self.total_pairs - self.tie_pairs

    @property
    def accuracy_full(self) -> float:
        return self.matches / self.total_pairs if self.total_pairs else 0.0

    @property
    def accuracy_excluding_ties(self) -> float:
        return self.matches / self.decided_pairs if self.decided_pairs else 0.0

    def summary(self) -> dict:
        return {
            "total_pairs": self.total_pairs,
            "tie_pairs": self.tie_pairs,
            "matches": self.matches,
            "accuracy_full": self.accuracy_full,
            "accuracy_excluding_ties": self.accuracy_excluding_ties,
        }

    def save(self, report_path, ledger_path=None) -> None:
        Path(report_path).write_text(json.dumps(self.summary(), indent=2) + "\n", encoding="utf-8")
        if ledger_path is not None:
            with Path(ledger_path).open("w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(list(PairOutcome.__dataclass_fields__))
                for o in self.ledger:
                    row = asdict(o)
                    row["weight1"] = format_number(o.weight1)
                    row["weight2"] = format_number(o.weight2)
                    row["match"] = "true" if o.match else "false"
                    writer.writerow(row.values())


def pair_features(pairs, features):
    """Stack the first- and second-friend feature rows of every pair.

    ``features`` maps (ego_id, friend_id) to a value vector.
    """
    missing = []
    for p in pairs:
        for f in (p.friend1_id, p.friend2_id):
            if (p.ego_id, f) not in features and (p.ego_id, f) not in missing:
                missing.append((p.ego_id, f))
    if missing:
        raise MissingFeatureError(missing)
    first = np.array([features[(p.ego_id, p.friend1_id)] for p in pairs], dtype=float)
    second = np.array([features[(p.ego_id, p.friend2_id)] for p in pairs], dtype=float)
    return first, second


def report_from_weights(pairs, w1, w2) -> AccuracyReport:
    ledger = []
    ties = matches = 0
    for p, a, b in zip(pairs, w1, w2):
        pred = predict_better_friend(float(a), float(b))
        hit = pred != TIE and pred == p.choice
        ties += pred == TIE
        matches += hit
        ledger.append(PairOutcome(p.ego_id, p.friend1_id, p.friend2_id, float(a), float(b), pred, p.choice, hit))
    return AccuracyReport(len(ledger), ties, matches, tuple(ledger))


def evaluate(pairs, features, table, norm_params=None) -> AccuracyReport:
    """Score both friends of every pair and compare with the stated choice.

    ``features`` maps (ego_id, friend_id) to raw values, normalized with
    ``norm_params``; pass ``norm_params=None`` for already-normalized rows.
    Pairs must already be free of undecided judgments.
    """
    pairs = list(pairs)
    if not pairs:
        return AccuracyReport(0, 0, 0, ())
    for p in pairs:
        if p.choice == "undecided":
            raise ValueError(f"undecided pair ({p.ego_id}, {p.friend1_id}, {p.friend2_id}); drop these first")
    first, second = pair_features(pairs, features)
    if norm_params is not None:
        first = apply_minmax_matrix(first, norm_params)
        second = apply_minmax_matrix(second, norm_params)
    return report_from_weights(pairs, friendship_weights(first, table), friendship_weights(second, table))


class PairEvaluator:
    """Pre-stacked pair features for repeated evaluation under changing tables."""

    def __init__(self, pairs, features, norm_params=None):
        self.pairs = list(pairs)
        first, second = pair_features(self.pairs, features) if self.pairs else (np.zeros((0, 0)),) * 2
        if norm_params is not None and self.pairs:
            first = apply_minmax_matrix(first, norm_params)
            second = apply_minmax_matrix(second, norm_params)
        self.first, self.second = first, second
        self.stated = np.array([p.choice for p in self.pairs])

    def accuracy_excluding_ties(self, table) -> float:
        if not self.pairs:
            return 0.0
        w1 = friendship_weights(self.first, table)
        w2 = friendship_weights(self.second, table)
        pred = np.where(w1 > w2, FIRST, np.where(w2 > w1, SECOND, TIE))
        decided = pred != TIE
        if not decided.any():
            return 0.0
        return float(np.sum(pred[decided] == self.stated[decided]) / decided.sum())

    def report(self, table) -> AccuracyReport:
        if not self.pairs:
            return AccuracyReport(0, 0, 0, ())
        return report_from_weights(self.pairs, friendship_weights(self.first, table),
                                   friendship_weights(self.second, table))
