"""Friendship-intensity (tie strength) scoring from online interaction counts."""

from .errors import TieStrengthError
from .model import (
    Classification,
    InteractionRecord,
    PairJudgment,
    ParameterDef,
    ParameterManifest,
    Variant,
    WeightTable,
    published_manifest,
    validate_table,
)
from .scoring import assemble_weight_table, friendship_weight

__all__ = [
    "Classification",
    "InteractionRecord",
    "PairJudgment",
    "ParameterDef",
    "ParameterManifest",
    "TieStrengthError",
    "Variant",
    "WeightTable",
    "assemble_weight_table",
    "friendship_weight",
    "published_manifest",
    "validate_table",
]
