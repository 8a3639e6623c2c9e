from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tiestrength import published
from tiestrength.errors import ConfigError
from tiestrength.model import ParameterManifest
from tiestrength.survey import (
    Category,
    ParameterSurvey,
    SurveyTally,
    compute_p,
    resolved_v,
    survey_fractions,
    survey_weight_vector,
)

# (b, u, v, printed p) for each published row
PUBLISHED_ROWS = [
    (2, 139, 2, 0.0072),
    (11, 139, 1, 0.0791),
    (8, 139, 1, 0.0576),
    (31, 139, 2, 0.1115),
    (88, 139, 1, 0.6330),
]


@pytest.mark.parametrize("b,u,v,printed", PUBLISHED_ROWS)
def test_published_rows(b, u, v, printed):
    p = compute_p(b, u, v)
    assert p == Fraction(b, u * v)
    np.testing.assert_almost_equal(float(p), printed, decimal=4)


def test_messages_row_is_truncated_not_rounded():
    # 88/139 = 0.633093..., which rounds to 0.6331; the printed value drops the last digit
    assert round(float(compute_p(88, 139, 1)), 4) == 0.6331


def test_published_vector():
    m = published.manifest()
    got = survey_weight_vector(published.survey_tally(), m)
    np.testing.assert_almost_equal(got, published.rounded_p(), decimal=4)
    assert got[m.index("close_friend")] == 1.0


@given(st.integers(0, 1000), st.integers(1, 1000), st.integers(1, 10), st.integers(1, 50))
def test_homogeneous_and_bounded(b, u, v, c):
    b = min(b, u)
    p = compute_p(b, u, v)
    assert compute_p(c * b, c * u, v) == p
    assert 0 <= p <= 1


@given(st.lists(st.tuples(st.integers(0, 50), st.integers(1, 4)), min_size=1, max_size=6), st.integers(50, 300))
def test_split_shares_add_back_to_category_count(cats, u):
    # each category's b is split evenly over its v parameters, so p * u summed over parameters recovers sum b
    names, params, categories = [], {}, {}
    for ci, (b, v) in enumerate(cats):
        categories[f"c{ci}"] = Category(b, u)
        for j in range(v):
            names.append(f"c{ci}_{j}")
            params[f"c{ci}_{j}"] = ParameterSurvey(category=f"c{ci}")
    m = ParameterManifest.from_pairs([(n, "count") for n in names])
    tally = SurveyTally(categories, params)
    fr = survey_fractions(tally, m)
    assert sum(f * u for f in fr) == sum(b for b, _ in cats)
    assert all(resolved_v(tally, m, n) == cats[int(n[1:].split("_")[0])][1] for n in names)


def test_zero_tallies():
    assert compute_p(0, 139, 1) == 0
    with pytest.raises(ValueError):
        compute_p(1, 0, 1)
    with pytest.raises(ValueError):
        compute_p(1, 10, 0)
    with pytest.raises(ValueError):
        compute_p(11, 10, 1)


def test_uncovered_parameter():
    m = ParameterManifest.from_pairs([("messages", "count"), ("pokes", "count")])
    tally = SurveyTally({"messages": Category(88, 139)}, {"messages": ParameterSurvey("messages")})
    with pytest.raises(ConfigError, match="pokes"):
        survey_fractions(tally, m)


def test_unknown_category_and_bad_fixed_p():
    m = ParameterManifest.from_pairs([("a", "count")])
    with pytest.raises(ConfigError):
        survey_fractions(SurveyTally({}, {"a": ParameterSurvey("nope")}), m)
    with pytest.raises(ConfigError):
        survey_fractions(SurveyTally({}, {"a": ParameterSurvey(fixed_p=1.5)}), m)


def test_roundtrip(tmp_path):
    tally = published.survey_tally()
    tally.save(tmp_path / "s.json")
    assert SurveyTally.load(tmp_path / "s.json") == tally
