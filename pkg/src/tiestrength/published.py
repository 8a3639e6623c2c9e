"""Published coefficient tables shipped with the package.

These are the t-values, MeanDecreaseAccuracy values, survey tallies, boost
coefficients, messages k-sweep and two-friend worked example reported for
the original eight-parameter model. The raw data behind them is not
public, so they are loadable constants rather than something this package
re-derives.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from .model import ParameterManifest, Variant, WeightTable
from .survey import SurveyTally, survey_weight_vector


@lru_cache(maxsize=1)
def _tables() -> dict:
    text = resources.files("tiestrength").joinpath("data/published_tables.json").read_text(encoding="utf-8")
    return json.loads(text)


def manifest() -> ParameterManifest:
    return ParameterManifest.from_dict(_tables()["manifest"])


def _vector(key: str) -> tuple[float, ...]:
    table = _tables()[key]
    return tuple(float(table[n]) for n in manifest().names)


def t_values() -> tuple[float, ...]:
    return _vector("t_value")


def mean_decrease_accuracy() -> tuple[float, ...]:
    return _vector("mean_decrease_accuracy")


def survey_tally() -> SurveyTally:
    return SurveyTally.from_dict(_tables()["survey"])


def rounded_p() -> tuple[float, ...]:
    """p as printed, to four decimals."""
    return _vector("p_rounded")


def k_values() -> tuple[float, ...]:
    return _vector("k")


def messages_k_curve() -> list[tuple[float, float]]:
    """(k, accuracy in percent) for the messages parameter."""
    return [(float(k), float(a)) for k, a in _tables()["messages_k_sweep"]["curve"]]


def worked_example() -> dict:
    return _tables()["worked_example"]


def final_table(p=None) -> WeightTable:
    """MeanDecreaseAccuracy x p x k table. ``p`` defaults to the exact survey ratios."""
    m = manifest()
    if p is None:
        p = survey_weight_vector(survey_tally(), m)
    return WeightTable(m.names, mean_decrease_accuracy(), p, k_values(), Variant.RF_P_K)


def table(variant: Variant) -> WeightTable:
    m = manifest()
    ones = (1.0,) * len(m)
    if variant is Variant.LR:
        return WeightTable(m.names, t_values(), ones, ones, variant)
    if variant is Variant.RF:
        return WeightTable(m.names, mean_decrease_accuracy(), ones, ones, variant)
    p = survey_weight_vector(survey_tally(), m)
    if variant is Variant.RF_P:
        return WeightTable(m.names, mean_decrease_accuracy(), p, ones, variant)
    return final_table(p)
