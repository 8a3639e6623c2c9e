"""CSV loading and the passive-user / unallocated / undecided cleaning rules."""

from __future__ import annotations

import csv
import math
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, LoadError
from .model import (
    BINARY,
    CHOICES,
    MESSAGES,
    SUBGROUPS,
    Classification,
    InteractionRecord,
    PairJudgment,
    ParameterManifest,
)

INTERACTIONS_CSV = "interactions.csv"
CLASSIFICATIONS_CSV = "classifications.csv"
PAIRS_CSV = "pairs.csv"


@dataclass(frozen=True)
class CleaningConfig:
    message_threshold: float = 2100
    other_threshold: float = 3
    message_parameter: str = MESSAGES
    percentile_q: float = 10.0

    def check(self, manifest: ParameterManifest) -> None:
        if self.message_parameter not in manifest.names:
            raise ConfigError(f"message parameter {self.message_parameter!r} not in manifest")
        if self.message_threshold < 0 or self.other_threshold < 0:
            raise ConfigError("cleaning thresholds must be non-negative")
        if not 0 < self.percentile_q < 100:
            raise ConfigError("percentile_q must lie in (0, 100)")


def format_number(v: float) -> str:
    """Integers without a decimal point, everything else as a round-trippable repr."""
    if float(v).is_integer():
        return str(int(v))
    return repr(float(v))


def _read_rows(path, expected_header):
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise LoadError(f"{path}: empty file, expected header {','.join(expected_header)}") from None
            header = [h.strip() for h in header]
            if header != list(expected_header):
                raise LoadError(
                    f"{path}: header {','.join(header)} does not match expected {','.join(expected_header)}"
                )
            rows = []
            for lineno, row in enumerate(reader, start=1):
                if not row:
                    continue
                if len(row) != len(expected_header):
                    raise LoadError(f"{path}: row {lineno} has {len(row)} fields, expected {len(expected_header)}")
                rows.append((lineno, [c.strip() for c in row]))
            return rows
    except OSError as exc:
        raise LoadError(f"cannot read {path}: {exc}") from None
    except csv.Error as exc:
        raise LoadError(f"{path}: malformed CSV: {exc}") from None


def interactions_header(manifest: ParameterManifest) -> list[str]:
    return ["ego_id", "friend_id", *manifest.names]


def load_interactions(path, manifest: ParameterManifest) -> list[InteractionRecord]:
    """Read interactions.csv without cleaning; row numbers in errors are 1-based data rows."""
    records = []
    seen = set()
    for lineno, row in _read_rows(path, interactions_header(manifest)):
        ego, friend = row[0], row[1]
        if not ego or not friend:
            raise LoadError(f"empty id at row {lineno}")
        values = []
        for name, kind, cell in zip(manifest.names, manifest.kinds, row[2:]):
            try:
                v = float(cell)
            except ValueError:
                raise LoadError(f"non-numeric value {cell!r} row {lineno} column {name}") from None
            if not math.isfinite(v):
                raise LoadError(f"non-finite value row {lineno} column {name}")
            if kind == BINARY and v not in (0.0, 1.0):
                raise LoadError(f"binary value {cell!r} not in {{0,1}} row {lineno} column {name}")
            if v < 0:
                raise LoadError(f"negative count row {lineno} column {name}")
            values.append(v)
        if (ego, friend) in seen:
            raise LoadError(f"duplicate pair ({ego}, {friend}) row {lineno}")
        seen.add((ego, friend))
        records.append(InteractionRecord(ego, friend, tuple(values)))
    return records


def load_classifications(path) -> list[Classification]:
    out = []
    for lineno, (ego, friend, subgroup) in _read_rows(path, ["ego_id", "friend_id", "subgroup"]):
        if subgroup not in SUBGROUPS:
            raise LoadError(f"unknown subgroup {subgroup!r} row {lineno} column subgroup")
        out.append(Classification(ego, friend, subgroup))
    return out


def load_pairs(path) -> list[PairJudgment]:
    out = []
    for lineno, (ego, f1, f2, choice) in _read_rows(path, ["ego_id", "friend1_id", "friend2_id", "choice"]):
        if choice not in CHOICES:
            raise LoadError(f"unknown choice {choice!r} row {lineno} column choice")
        if f1 == f2:
            raise LoadError(f"friend1_id equals friend2_id row {lineno}")
        out.append(PairJudgment(ego, f1, f2, choice))
    return out


def _write(path, header, rows):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_interactions(path, records, manifest: ParameterManifest) -> None:
    _write(
        path,
        interactions_header(manifest),
        ([r.ego_id, r.friend_id, *map(format_number, r.values)] for r in records),
    )


def write_classifications(path, classifications) -> None:
    _write(path, ["ego_id", "friend_id", "subgroup"], ([c.ego_id, c.friend_id, c.subgroup] for c in classifications))


def write_pairs(path, pairs) -> None:
    _write(
        path,
        ["ego_id", "friend1_id", "friend2_id", "choice"],
        ([p.ego_id, p.friend1_id, p.friend2_id, p.choice] for p in pairs),
    )


def sum_by_ego(records) -> dict[str, tuple[float, ...]]:
    """Per-ego elementwise sums, egos in order of first appearance."""
    sums: dict[str, list[float]] = OrderedDict()
    for r in records:
        acc = sums.get(r.ego_id)
        if acc is None:
            sums[r.ego_id] = list(r.values)
        else:
            for i, v in enumerate(r.values):
                acc[i] += v
    return {ego: tuple(v) for ego, v in sums.items()}


def is_passive(sums, message_index: int, config: CleaningConfig) -> bool:
    if sums[message_index] >= config.message_threshold:
        return False
    return all(v < config.other_threshold for i, v in enumerate(sums) if i != message_index)


def clean_passive_users(records, manifest: ParameterManifest, config: CleaningConfig | None = None):
    """Drop every ego whose summed interaction marks it as passive.

    An ego is passive when its total exchanged messages fall below
    ``message_threshold`` and every other per-parameter total falls below
    ``other_threshold`` (both strict). Returns ``(kept_records, removed_ego_ids)``.
    """
    config = config or CleaningConfig()
    config.check(manifest)
    mi = manifest.index(config.message_parameter)
    removed = [ego for ego, sums in sum_by_ego(records).items() if is_passive(sums, mi, config)]
    gone = set(removed)
    kept = [r for r in records if r.ego_id not in gone]
    return kept, removed


def percentile(values, q: float) -> float:
    """Nearest-rank percentile; always returns a member of ``values``."""
    if not values:
        raise ValueError("percentile of an empty list")
    if not 0 < q <= 100:
        raise ValueError(f"q must lie in (0, 100], got {q}")
    ordered = sorted(values)
    rank = math.ceil(q / 100 * len(ordered))
    return ordered[max(rank, 1) - 1]


def drop_unallocated(classifications):
    return [c for c in classifications if c.subgroup != "unallocated"]


def drop_undecided(pairs):
    return [p for p in pairs if p.choice != "undecided"]


def restrict_to_egos(rows, egos) -> list:
    """Keep rows whose ego survived cleaning."""
    egos = set(egos)
    return [r for r in rows if r.ego_id in egos]
