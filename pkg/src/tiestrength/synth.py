"""Seeded synthetic ego networks with a planted latent closeness.

Every (ego, friend) row gets a closeness c ~ U(0, 1). Count parameters are
Poisson draws with mean ``max_rate * c ** exponent``; binary parameters
are 1 iff c exceeds ``close_friend_threshold``. Subgroups come from two
cut points on c, and pair judgments follow the closeness order, flipped
with probability ``pair_noise``. A fraction of egos is generated passive
(activity scaled down, no binary flags) so cleaning has something to do.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .ingest import (
    CLASSIFICATIONS_CSV,
    INTERACTIONS_CSV,
    PAIRS_CSV,
    write_classifications,
    write_interactions,
    write_pairs,
)
from .model import (
    BINARY,
    MESSAGES,
    Classification,
    InteractionRecord,
    PairJudgment,
    ParameterManifest,
    published_manifest,
)

GROUND_TRUTH_CSV = "ground_truth.csv"
MANIFEST_JSON = "manifest.json"

# (max_rate, exponent) per parameter; messages get by far the widest range
DEFAULT_RATES = {
    "wall_comments": (4.0, 2.0),
    "wall_messages": (3.0, 2.0),
    "tagged_together": (2.0, 2.0),
    "photo_by_ego": (3.0, 2.0),
    "photo_by_other": (3.0, 1.5),
    "photo_comments": (4.0, 2.0),
    MESSAGES: (5000.0, 3.0),
}
FALLBACK_RATE = (3.0, 2.0)


@dataclass(frozen=True)
class SynthConfig:
    n_egos: int = 50
    friends_per_ego: int = 30
    seed: int = 0
    manifest: ParameterManifest = field(default_factory=published_manifest)
    rates: dict = field(default_factory=dict)  # overrides of DEFAULT_RATES
    message_parameter: str = MESSAGES
    close_friend_threshold: float = 0.9
    subgroup_cuts: tuple[float, float] = (0.5, 0.8)
    pair_noise: float = 0.1
    pairs_per_ego: int = 20
    passive_fraction: float = 0.1
    passive_scale: float = 1e-3
    unallocated_rate: float = 0.0
    undecided_rate: float = 0.0

    def check(self) -> None:
        if self.n_egos < 1 or self.friends_per_ego < 1:
            raise ConfigError("n_egos and friends_per_ego must be >= 1")
        lo, hi = self.subgroup_cuts
        if not 0.0 <= lo <= hi <= 1.0:
            raise ConfigError(f"subgroup cuts must be ordered within [0, 1], got {self.subgroup_cuts}")
        for name in ("pair_noise", "passive_fraction", "unallocated_rate", "undecided_rate",
                     "close_friend_threshold", "passive_scale"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        if self.pairs_per_ego < 0:
            raise ConfigError("pairs_per_ego must be >= 0")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    def rate(self, name: str) -> tuple[float, float]:
        return self.rates.get(name, DEFAULT_RATES.get(name, FALLBACK_RATE))


@dataclass(frozen=True)
class SynthData:
    manifest: ParameterManifest
    interactions: list[InteractionRecord]
    classifications: list[Classification]
    pairs: list[PairJudgment]
    closeness: dict  # (ego_id, friend_id) -> c
    passive_egos: tuple[str, ...]


def subgroup_for(c: float, cuts) -> str:
    lo, hi = cuts
    if c < lo:
        return "acquaintance"
    if c < hi:
        return "friend"
    return "best_friend"


def generate(config: SynthConfig | None = None) -> SynthData:
    config = config or SynthConfig()
    config.check()
    rng = np.random.default_rng(config.seed)
    manifest = config.manifest
    n_pairs_possible = config.friends_per_ego * (config.friends_per_ego - 1) // 2
    interactions, classes, pairs, passive = [], [], [], []
    closeness = {}
    for e in range(config.n_egos):
        ego = f"ego{e:04d}"
        is_passive = rng.random() < config.passive_fraction
        if is_passive:
            passive.append(ego)
        scale = config.passive_scale if is_passive else 1.0
        c = rng.random(config.friends_per_ego)
        friends = [f"{ego}-f{j:03d}" for j in range(config.friends_per_ego)]
        cols = []
        for p in manifest.parameters:
            if p.kind == BINARY:
                flag = (c > config.close_friend_threshold).astype(float)
                cols.append(flag * 0.0 if is_passive else flag)
            else:
                max_rate, exponent = config.rate(p.name)
                cols.append(rng.poisson(scale * max_rate * c**exponent).astype(float))
        values = np.column_stack(cols)
        for j, fid in enumerate(friends):
            interactions.append(InteractionRecord(ego, fid, tuple(values[j])))
            closeness[(ego, fid)] = float(c[j])
            label = subgroup_for(c[j], config.subgroup_cuts)
            if rng.random() < config.unallocated_rate:
                label = "unallocated"
            classes.append(Classification(ego, fid, label))

        n_pairs = min(config.pairs_per_ego, n_pairs_possible)
        if n_pairs:
            combos = list(itertools.combinations(range(config.friends_per_ego), 2))
            for ci in rng.choice(len(combos), size=n_pairs, replace=False):
                a, b = combos[ci]
                if rng.random() < 0.5:
                    a, b = b, a
                choice = "first" if c[a] > c[b] else "second"
                if rng.random() < config.pair_noise:
                    choice = "second" if choice == "first" else "first"
                if rng.random() < config.undecided_rate:
                    choice = "undecided"
                pairs.append(PairJudgment(ego, friends[a], friends[b], choice))
    return SynthData(manifest, interactions, classes, pairs, closeness, tuple(passive))


def write_synth(data: SynthData, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "manifest": out / MANIFEST_JSON,
        "interactions": out / INTERACTIONS_CSV,
        "classifications": out / CLASSIFICATIONS_CSV,
        "pairs": out / PAIRS_CSV,
        "ground_truth": out / GROUND_TRUTH_CSV,
    }
    data.manifest.save(paths["manifest"])
    write_interactions(paths["interactions"], data.interactions, data.manifest)
    write_classifications(paths["classifications"], data.classifications)
    write_pairs(paths["pairs"], data.pairs)
    with paths["ground_truth"].open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["ego_id", "friend_id", "closeness"])
        for (ego, fid), c in data.closeness.items():
            writer.writerow([ego, fid, repr(c)])
    return paths


def load_ground_truth(path) -> dict:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return {(r["ego_id"], r["friend_id"]): float(r["closeness"]) for r in reader}
