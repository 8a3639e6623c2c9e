import pytest
from hypothesis import given
from hypothesis import strategies as st

from tiestrength.errors import ConfigError, LoadError
from tiestrength.ingest import (
    CleaningConfig,
    clean_passive_users,
    drop_undecided,
    drop_unallocated,
    load_classifications,
    load_interactions,
    load_pairs,
    percentile,
    sum_by_ego,
)
from tiestrength.model import Classification, PairJudgment

from conftest import rec

HEADER = "ego_id,friend_id,wall_comments,wall_messages,tagged_together,photo_by_ego,photo_by_other,photo_comments,messages,close_friend\n"


class TestLoadInteractions:
    def test_two_rows(self, tmp_path, manifest):
        p = tmp_path / "i.csv"
        p.write_text(HEADER + "a,b,1,0,0,0,0,0,10,0\na,c,0,0,2,0,0,0,3,1\n")
        records = load_interactions(p, manifest)
        assert len(records) == 2
        assert records[1].values == (0, 0, 2, 0, 0, 0, 3, 1)

    def test_negative_count(self, tmp_path, manifest):
        p = tmp_path / "i.csv"
        p.write_text(HEADER + "a,b,-1,0,0,0,0,0,10,0\n")
        with pytest.raises(LoadError, match="negative count row 1"):
            load_interactions(p, manifest)

    def test_header_only(self, tmp_path, manifest):
        p = tmp_path / "i.csv"
        p.write_text(HEADER)
        assert load_interactions(p, manifest) == []

    def test_bad_binary(self, tmp_path, manifest):
        p = tmp_path / "i.csv"
        p.write_text(HEADER + "a,b,0,0,0,0,0,0,10,2\n")
        with pytest.raises(LoadError, match="row 1 column close_friend"):
            load_interactions(p, manifest)

    def test_header_mismatch(self, tmp_path, manifest):
        p = tmp_path / "i.csv"
        p.write_text("ego_id,friend_id,messages\na,b,1\n")
        with pytest.raises(LoadError, match="header"):
            load_interactions(p, manifest)

    def test_ragged_row(self, tmp_path, manifest):
        p = tmp_path / "i.csv"
        p.write_text(HEADER + "a,b,1,2\n")
        with pytest.raises(LoadError, match="row 1"):
            load_interactions(p, manifest)

    def test_non_numeric(self, tmp_path, manifest):
        p = tmp_path / "i.csv"
        p.write_text(HEADER + "a,b,x,0,0,0,0,0,10,0\n")
        with pytest.raises(LoadError, match="row 1 column wall_comments"):
            load_interactions(p, manifest)


def test_load_classifications_and_pairs(tmp_path):
    (tmp_path / "c.csv").write_text("ego_id,friend_id,subgroup\na,b,friend\na,c,unallocated\n")
    (tmp_path / "p.csv").write_text("ego_id,friend1_id,friend2_id,choice\na,b,c,undecided\n")
    assert load_classifications(tmp_path / "c.csv")[1].subgroup == "unallocated"
    assert load_pairs(tmp_path / "p.csv")[0].choice == "undecided"
    (tmp_path / "bad.csv").write_text("ego_id,friend_id,subgroup\na,b,enemy\n")
    with pytest.raises(LoadError, match="row 1"):
        load_classifications(tmp_path / "bad.csv")


class TestSumByEgo:
    def test_sum(self, tiny_manifest):
        sums = sum_by_ego([rec("A", "x", 1, 0, 0), rec("A", "y", 2, 3, 1)])
        assert sums == {"A": (3, 3, 1)}

    def test_single_row(self):
        assert sum_by_ego([rec("A", "x", 4, 5, 1)]) == {"A": (4, 5, 1)}

    @given(st.lists(st.tuples(st.sampled_from("AB"), st.integers(0, 50), st.integers(0, 50)), max_size=30))
    def test_against_double_loop(self, rows):
        records = [rec(e, f"f{i}", a, b, 0) for i, (e, a, b) in enumerate(rows)]
        got = sum_by_ego(records)
        for ego in {e for e, _, _ in rows}:
            expected = [0.0, 0.0, 0.0]
            for r in records:
                if r.ego_id == ego:
                    for j in range(3):
                        expected[j] += r.values[j]
            assert got[ego] == tuple(expected)


def passive_rule(sums, mi, cfg):
    """Independent predicate: messages below threshold and every other sum below its threshold."""
    others = [v for j, v in enumerate(sums) if j != mi]
    return sums[mi] < cfg.message_threshold and max(others, default=0) < cfg.other_threshold


class TestCleaning:
    def test_fully_passive_removed(self, tiny_manifest):
        kept, removed = clean_passive_users([rec("A", "x", 0, 0, 0)], tiny_manifest)
        assert kept == [] and removed == ["A"]

    def test_exactly_2100_kept(self, tiny_manifest):
        rows = [rec("A", "x", 2000, 0, 0), rec("A", "y", 100, 0, 0)]
        kept, removed = clean_passive_users(rows, tiny_manifest)
        assert kept == rows and removed == []

    def test_2099_and_small_others_removed(self, tiny_manifest):
        rows = [rec("A", "x", 2099, 2, 0), rec("B", "x", 2100, 0, 0)]
        kept, removed = clean_passive_users(rows, tiny_manifest)
        assert removed == ["A"] and kept == rows[1:]

    def test_one_other_at_three_keeps_ego(self, tiny_manifest):
        rows = [rec("A", "x", 100, 1, 0), rec("A", "y", 0, 2, 0)]
        kept, removed = clean_passive_users(rows, tiny_manifest)
        assert removed == [] and kept == rows

    def test_binary_flag_counts_among_others(self, tiny_manifest):
        rows = [rec("A", f"f{i}", 0, 0, 1) for i in range(3)]
        assert clean_passive_users(rows, tiny_manifest)[1] == []
        assert clean_passive_users(rows[:2], tiny_manifest)[1] == ["A"]

    def test_missing_message_parameter(self, tiny_manifest):
        with pytest.raises(ConfigError):
            clean_passive_users([], tiny_manifest, CleaningConfig(message_parameter="inbox"))

    @given(st.lists(st.tuples(st.sampled_from("ABCDE"), st.integers(0, 1500), st.integers(0, 2),
                              st.integers(0, 1)), max_size=25))
    def test_partition_idempotence_and_oracle(self, rows):
        from tiestrength.model import ParameterManifest

        m = ParameterManifest.from_pairs([("messages", "count"), ("comments", "count"), ("close", "binary")])
        cfg = CleaningConfig()
        records = [rec(e, f"f{i}", a, b, c) for i, (e, a, b, c) in enumerate(rows)]
        kept, removed = clean_passive_users(records, m, cfg)
        egos = {r.ego_id for r in records}
        kept_egos = {r.ego_id for r in kept}
        assert kept_egos | set(removed) == egos and not kept_egos & set(removed)
        assert kept == [r for r in records if r.ego_id in kept_egos]
        sums = sum_by_ego(records)
        assert set(removed) == {e for e in egos if passive_rule(sums[e], 0, cfg)}
        again, removed_again = clean_passive_users(kept, m, cfg)
        assert again == kept and removed_again == []


class TestPercentile:
    def test_tenth_of_ten(self):
        assert percentile(list(range(1, 11)), 10) == 1

    @pytest.mark.parametrize("q", [1, 10, 50, 99.9])
    def test_singleton(self, q):
        assert percentile([5], q) == 5

    def test_median_of_three(self):
        assert percentile([3, 1, 2], 50) == 2

    def test_empty(self):
        with pytest.raises(ValueError):
            percentile([], 10)

    @given(st.lists(st.integers(-100, 100), min_size=1), st.floats(0.01, 100))
    def test_member(self, values, q):
        assert percentile(values, q) in values


def _classes(*labels):
    return [Classification("e", f"f{i}", s) for i, s in enumerate(labels)]


def _pairs(*choices):
    return [PairJudgment("e", f"a{i}", f"b{i}", c) for i, c in enumerate(choices)]


def test_drop_unallocated():
    rows = _classes("best_friend", "unallocated", "friend")
    assert drop_unallocated(rows) == [rows[0], rows[2]]
    assert drop_unallocated(_classes("unallocated", "unallocated")) == []
    rows = _classes("friend", "acquaintance")
    assert drop_unallocated(rows) == rows


def test_drop_undecided():
    rows = _pairs("first", "undecided", "second")
    assert drop_undecided(rows) == [rows[0], rows[2]]
    assert drop_undecided(_pairs("undecided")) == []
    rows = _pairs("second", "first")
    assert drop_undecided(rows) == rows
