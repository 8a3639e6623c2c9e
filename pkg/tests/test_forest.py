import numpy as np
import pytest

from tiestrength.errors import ConfigError
from tiestrength.forest import (
    Forest,
    ForestConfig,
    Tree,
    oob_permutation_importance,
    per_tree_decreases,
    permutation_rng,
    predict,
    train_forest,
    tree_rng,
)


def separable(n=100, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.uniform(size=(n, 1))
    y = np.where(x[:, 0] < 0.5, "A", "B")
    return x, y


def planted(seed, n=600):
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(n, 4))
    y = np.floor(X[:, 0] * 3).astype(int)
    return X, y


class TestTraining:
    def test_separable_oob_accuracy(self):
        X, y = separable()
        forest = train_forest(X, y, ForestConfig(n_trees=50, seed=3))
        assert forest.oob_accuracy(X, forest.encode(y)) >= 0.95
        assert predict(forest, [0.93]) == "B"
        assert predict(forest, [0.04]) == "A"

    def test_deterministic(self):
        X, y = planted(1, n=120)
        a = train_forest(X, y, ForestConfig(n_trees=20, seed=11))
        b = train_forest(X, y, ForestConfig(n_trees=20, seed=11))
        np.testing.assert_array_equal(a.predict_index(X), b.predict_index(X))
        for ta, tb in zip(a.trees, b.trees):
            np.testing.assert_array_equal(ta.threshold, tb.threshold)
            np.testing.assert_array_equal(ta.feature, tb.feature)

    def test_tree_order_independent(self):
        # trees draw from (seed, index) substreams, so a smaller forest is a prefix of a larger one
        X, y = planted(2, n=120)
        small = train_forest(X, y, ForestConfig(n_trees=5, seed=4))
        large = train_forest(X, y, ForestConfig(n_trees=12, seed=4))
        for ta, tb in zip(small.trees, large.trees):
            np.testing.assert_array_equal(ta.threshold, tb.threshold)

    @pytest.mark.parametrize("cfg", [ForestConfig(mtry=0), ForestConfig(mtry=5), ForestConfig(n_trees=0),
                                     ForestConfig(min_leaf_size=0), ForestConfig(importance_scaling="gini")])
    def test_config_errors(self, cfg):
        X, y = planted(0, n=30)
        with pytest.raises(ConfigError):
            train_forest(X, y, cfg)

    def test_data_errors(self):
        with pytest.raises(ValueError, match="single class"):
            train_forest(np.zeros((5, 2)), [1] * 5, ForestConfig(n_trees=2))
        with pytest.raises(ValueError):
            train_forest(np.zeros((0, 2)), [], ForestConfig(n_trees=2))

    def test_bootstrap_and_oob_consistent(self):
        X, y = planted(5, n=60)
        cfg = ForestConfig(n_trees=10, seed=9)
        forest = train_forest(X, y, cfg)
        for t, (boot, oob) in enumerate(zip(forest.bootstrap, forest.oob)):
            assert len(boot) == 60
            np.testing.assert_array_equal(boot, tree_rng(cfg.seed, t).integers(0, 60, size=60))
            assert set(oob) == set(range(60)) - set(boot)

    def test_min_leaf_and_depth(self):
        X, y = planted(6, n=200)
        forest = train_forest(X, y, ForestConfig(n_trees=5, min_leaf_size=10, max_depth=3, seed=1))
        for t in forest.trees:
            leaves = t.feature < 0
            assert np.all(t.counts[leaves].sum(axis=1) >= 10)
            assert _depth(t) <= 3


def _depth(tree, node=0):
    if tree.feature[node] < 0:
        return 0
    return 1 + max(_depth(tree, tree.left[node]), _depth(tree, tree.right[node]))


def _gini_decrease(y, mask, n_classes):
    def impurity(labels):
        if len(labels) == 0:
            return 0.0
        p = np.bincount(labels, minlength=n_classes) / len(labels)
        return 1.0 - np.sum(p * p)

    m = len(y)
    return impurity(y) - mask.sum() / m * impurity(y[mask]) - (~mask).sum() / m * impurity(y[~mask])


def test_chosen_split_is_best_examined():
    X, y = planted(7, n=150)
    X = np.round(X, 2)  # force repeated values
    forest = train_forest(X, y, ForestConfig(n_trees=4, seed=2))
    yi = forest.encode(y)
    for tree, boot in zip(forest.trees, forest.bootstrap):
        reach = {0: boot}
        for node in range(tree.n_nodes):
            idx = reach[node]
            f = tree.feature[node]
            if f < 0:
                continue
            go = X[idx, f] <= tree.threshold[node]
            reach[tree.left[node]], reach[tree.right[node]] = idx[go], idx[~go]
            chosen = _gini_decrease(yi[idx], go, 3)
            for g in tree.tried[node]:
                vals = np.unique(X[idx, g])
                for a, b in zip(vals[:-1], vals[1:]):
                    other = _gini_decrease(yi[idx], X[idx, g] <= (a + b) / 2, 3)
                    assert chosen >= other - 1e-12


def _leaf(counts):
    return Tree(np.array([-1]), np.array([0.0]), np.array([-1]), np.array([-1]), np.array([counts], dtype=float))


def _stub_forest(trees, classes=("A", "B")):
    return Forest(trees, [np.array([], dtype=int)] * len(trees), [np.array([], dtype=int)] * len(trees),
                  classes, 1, 0, ForestConfig(n_trees=len(trees)))


def test_vote_rules():
    assert predict(_stub_forest([_leaf([3, 1]), _leaf([5, 0])]), [0.0]) == "A"
    assert predict(_stub_forest([_leaf([0, 1]), _leaf([1, 0])]), [0.0]) == "A"
    assert predict(_stub_forest([_leaf([0, 1]), _leaf([1, 0])], classes=("B", "A")), [0.0]) == "B"
    assert predict(_stub_forest([_leaf([0, 1]), _leaf([0, 3])]), [0.0]) == "B"
    with pytest.raises(ValueError):
        predict(_stub_forest([_leaf([1, 0])]), [0.0, 1.0])


class TestImportance:
    def test_constant_column_zero(self):
        X, y = planted(3, n=200)
        X = np.column_stack([X, np.full(200, 0.25)])
        forest = train_forest(X, y, ForestConfig(n_trees=30, seed=3))
        for scaling in ("raw", "z_scaled"):
            imp = oob_permutation_importance(forest, X, y, ForestConfig(importance_scaling=scaling))
            assert imp.mean_decrease_accuracy[4] == 0.0
            assert imp.raw[4] == 0.0

    def test_unused_feature_zero(self):
        X, y = planted(4, n=200)
        forest = train_forest(X, y, ForestConfig(n_trees=20, max_depth=1, mtry=1, seed=5))
        used = set().union(*(t.split_features() for t in forest.trees))
        imp = oob_permutation_importance(forest, X, y, ForestConfig(importance_scaling="raw"))
        for f in set(range(4)) - used:
            assert imp.raw[f] == 0.0

    def test_predictive_beats_noise(self):
        X, y = planted(8, n=300)
        forest = train_forest(X, y, ForestConfig(n_trees=50, seed=8))
        imp = oob_permutation_importance(forest, X, y).mean_decrease_accuracy
        assert imp[0] > imp[1:].max()

    def test_hand_trace_two_trees(self):
        X = np.array([[0.1, 0.9], [0.2, 0.1], [0.3, 0.5], [0.4, 0.7],
                      [0.6, 0.2], [0.7, 0.8], [0.8, 0.3], [0.9, 0.6]])
        y = np.array([0, 0, 0, 0, 1, 1, 1, 1])
        cfg = ForestConfig(n_trees=2, mtry=2, seed=21, importance_scaling="raw")
        forest = train_forest(X, y, cfg)

        def walk(tree, x):
            node = 0
            while tree.feature[node] >= 0:
                node = tree.left[node] if x[tree.feature[node]] <= tree.threshold[node] else tree.right[node]
            c = tree.counts[node]
            return int(np.argmax(c))

        per_tree = []
        for t, tree in enumerate(forest.trees):
            oob = [i for i in range(8) if i not in set(forest.bootstrap[t].tolist())]
            if not oob:
                continue
            base = sum(walk(tree, X[i]) == y[i] for i in oob) / len(oob)
            row = []
            for f in range(2):
                perm = permutation_rng(cfg.seed, t, f).permutation(len(oob))
                hits = 0
                for pos, i in enumerate(oob):
                    x = X[i].copy()
                    x[f] = X[oob[perm[pos]], f]
                    hits += walk(tree, x) == y[i]
                row.append(base - hits / len(oob))
            per_tree.append(row)
        assert per_tree, "seed 21 should leave OOB rows"
        expected = np.mean(per_tree, axis=0)
        got = oob_permutation_importance(forest, X, y)
        np.testing.assert_array_equal(got.raw, expected)

    def test_z_scaling(self):
        X, y = planted(9, n=200)
        forest = train_forest(X, y, ForestConfig(n_trees=25, seed=1))
        imp = oob_permutation_importance(forest, X, y)
        d = imp.per_tree
        sd = d.std(axis=0, ddof=1)
        expected = np.where(sd > 0, d.mean(axis=0) / (sd / np.sqrt(len(d))), 0.0)
        np.testing.assert_allclose(imp.mean_decrease_accuracy, expected, rtol=1e-12)

    def test_no_oob_rows_errors(self):
        forest = _stub_forest([_leaf([1, 0])])
        forest.n_rows = 1
        with pytest.raises(ValueError, match="out-of-bag"):
            oob_permutation_importance(forest, np.zeros((1, 1)), ["A"])

    def test_data_mismatch(self):
        X, y = planted(0, n=50)
        forest = train_forest(X, y, ForestConfig(n_trees=3))
        with pytest.raises(ValueError):
            per_tree_decreases(forest, X[:40], y[:40])
