"""Random forest classifier with out-of-bag permutation importance.

Trees are CART classifiers grown on bootstrap samples with Gini impurity
splits over ``mtry`` randomly chosen features per node. Each tree draws
from its own stream derived from ``(seed, tree index)``, so a forest is a
pure function of its data and seed regardless of build order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

RAW = "raw"
Z_SCALED = "z_scaled"

_TREE_STREAM = 0
_PERMUTATION_STREAM = 1


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 500
    mtry: int | None = None  # None -> floor(sqrt(n_features))
    min_leaf_size: int = 1
    max_depth: int | None = None
    seed: int = 0
    importance_scaling: str = Z_SCALED

    def check(self, n_features: int) -> int:
        """Validate against the data width; returns the effective mtry."""
        if self.n_trees < 1:
            raise ConfigError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.min_leaf_size < 1:
            raise ConfigError(f"min_leaf_size must be >= 1, got {self.min_leaf_size}")
        if self.max_depth is not None and self.max_depth < 0:
            raise ConfigError(f"max_depth must be >= 0, got {self.max_depth}")
        if self.importance_scaling not in (RAW, Z_SCALED):
            raise ConfigError(f"unknown importance scaling {self.importance_scaling!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a non-negative 64-bit integer")
        mtry = self.mtry if self.mtry is not None else max(1, math.isqrt(n_features))
        if not 1 <= mtry <= n_features:
            raise ConfigError(f"mtry must lie in [1, {n_features}], got {mtry}")
        return mtry


def tree_rng(seed: int, tree: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, _TREE_STREAM, tree]))


def permutation_rng(seed: int, tree: int, feature: int) -> np.random.Generator:
    """Stream for the OOB permutation of one (tree, feature) cell."""
    return np.random.default_rng(np.random.SeedSequence([seed, _PERMUTATION_STREAM, tree, feature]))


@dataclass
class Tree:
    """Flat binary tree. ``feature[node] == -1`` marks a leaf.

    Rows with ``x[feature] <= threshold`` go left. ``counts`` holds the
    (bootstrap-weighted) class counts at every node. ``tried`` lists the
    features examined at each internal node.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray
    tried: list = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def leaf_class(self) -> np.ndarray:
        # argmax keeps the first maximum: ties go to the lower class index
        return np.argmax(self.counts, axis=1)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row."""
        node = np.zeros(len(X), dtype=np.intp)
        rows = np.arange(len(X))
        active = self.feature[node] >= 0
        while active.any():
            r = rows[active]
            nd = node[r]
            go_left = X[r, self.feature[nd]] <= self.threshold[nd]
            node[r] = np.where(go_left, self.left[nd], self.right[nd])
            active[r] = self.feature[node[r]] >= 0
        return node

    def predict_index(self, X: np.ndarray) -> np.ndarray:
        return self.leaf_class[self.apply(X)]

    def split_features(self) -> set[int]:
        return {int(f) for f in self.feature if f >= 0}


def _best_split(Xn, ys, n_classes, min_leaf):
    """Best split over the columns of ``Xn`` (one column per tried feature).

    Returns ``(score, threshold, column)`` or None, where score is
    sum c_L^2/n_L + sum c_R^2/n_R (maximizing it maximizes Gini decrease).
    Ties go to the lowest column, then the lowest threshold.
    """
    m, k = Xn.shape
    lo, hi = min_leaf - 1, m - min_leaf  # a split after sorted position j keeps j+1 rows left
    if hi <= lo:
        return None
    order = Xn.argsort(axis=0, kind="stable")
    xs = Xn[order, np.arange(k)]
    valid = (xs[:-1] < xs[1:])[lo:hi]
    if not valid.any():
        return None
    cum = (ys[order][:, :, None] == np.arange(n_classes)).cumsum(axis=0)  # (m, k, classes)
    left = cum[lo:hi]
    right = cum[-1] - left
    n_left = np.arange(lo + 1, hi + 1, dtype=float)[:, None]
    score = np.einsum("ijk,ijk->ij", left, left) / n_left + np.einsum("ijk,ijk->ij", right, right) / (m - n_left)
    score[~valid] = -np.inf
    score = score.T  # (k, positions): feature-major so argmax breaks ties by feature, then threshold
    col, j = divmod(int(score.argmax()), score.shape[1])
    a, b = xs[lo + j, col], xs[lo + j + 1, col]
    thr = (a + b) / 2.0
    if not a <= thr < b:
        thr = a
    return float(score[col, j]), float(thr), col


def build_tree(X, y, n_classes, sample, mtry, rng, min_leaf_size=1, max_depth=None) -> Tree:
    """Grow one tree on the row multiset ``sample`` (indices into X, y)."""
    n_features = X.shape[1]
    feature, threshold, left, right, counts, tried = [], [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(np.bincount(y[idx], minlength=n_classes).astype(float))
        tried.append(())
        return len(feature) - 1

    root = new_node(sample)
    stack = [(root, sample, 0)]
    while stack:
        node, idx, depth = stack.pop()
        c = counts[node]
        m = len(idx)
        if (c > 0).sum() <= 1 or m < 2 * min_leaf_size or (max_depth is not None and depth >= max_depth):
            continue
        feats = np.sort(rng.permutation(n_features)[:mtry])
        tried[node] = tuple(int(f) for f in feats)
        best = _best_split(X[idx][:, feats], y[idx], n_classes, min_leaf_size)
        if best is None:
            continue
        score, thr, col = best
        f = int(feats[col])
        parent = float(c @ c) / m
        if score - parent <= 1e-12 * m:  # no impurity decrease
            continue
        go_left = X[idx, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[node] = f
        threshold[node] = thr
        ln, rn = new_node(li), new_node(ri)
        left[node], right[node] = ln, rn
        # right pushed first so the left subtree is grown (and draws randomness) first
        stack.append((rn, ri, depth + 1))
        stack.append((ln, li, depth + 1))

    return Tree(
        feature=np.array(feature, dtype=np.intp),
        threshold=np.array(threshold, dtype=float),
        left=np.array(left, dtype=np.intp),
        right=np.array(right, dtype=np.intp),
        counts=np.array(counts),
        tried=tried,
    )


@dataclass
class Forest:
    trees: list[Tree]
    oob: list[np.ndarray]  # per tree, sorted row indices not drawn in its bootstrap
    bootstrap: list[np.ndarray]
    class_labels: tuple
    n_features: int
    n_rows: int
    config: ForestConfig

    def votes(self, X) -> np.ndarray:
        X = self._check(X)
        v = np.zeros((len(X), len(self.class_labels)), dtype=np.int64)
        rows = np.arange(len(X))
        for t in self.trees:
            np.add.at(v, (rows, t.predict_index(X)), 1)
        return v

    def predict_index(self, X) -> np.ndarray:
        return np.argmax(self.votes(X), axis=1)

    def predict_many(self, X) -> list:
        return [self.class_labels[i] for i in self.predict_index(X)]

    def oob_predict_index(self, X) -> np.ndarray:
        """OOB majority vote per training row; -1 where a row is never out of bag."""
        X = self._check(X)
        v = np.zeros((len(X), len(self.class_labels)), dtype=np.int64)
        for t, oob in zip(self.trees, self.oob):
            if len(oob):
                np.add.at(v, (oob, t.predict_index(X[oob])), 1)
        pred = np.argmax(v, axis=1)
        pred[v.sum(axis=1) == 0] = -1
        return pred

    def oob_accuracy(self, X, y_index) -> float:
        pred = self.oob_predict_index(X)
        seen = pred >= 0
        if not seen.any():
            raise ValueError("no row is out of bag for any tree")
        return float(np.mean(pred[seen] == np.asarray(y_index)[seen]))

    def encode(self, labels) -> np.ndarray:
        lookup = {c: i for i, c in enumerate(self.class_labels)}
        try:
            return np.array([lookup[v] for v in labels], dtype=np.intp)
        except KeyError as exc:
            raise ValueError(f"label {exc.args[0]!r} not among forest classes {self.class_labels}") from None

    def _check(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got shape {X.shape}")
        return X


def train_forest(X, y, config: ForestConfig | None = None, classes=None) -> Forest:
    """Fit a forest on feature matrix X and class labels y.

    ``classes`` fixes the label order (used for vote tie-breaks); by
    default the sorted distinct labels.
    """
    config = config or ForestConfig()
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("training data is empty")
    n, p = X.shape
    labels = list(y)
    if len(labels) != n:
        raise ValueError(f"X has {n} rows but y has {len(labels)} labels")
    if n < 2:
        raise ValueError("need at least 2 rows to train a forest")
    mtry = config.check(p)
    if classes is None:
        classes = tuple(sorted(set(labels)))
    else:
        classes = tuple(c for c in classes if c in set(labels)) or tuple(classes)
    if len(set(labels)) < 2:
        raise ValueError("training labels contain a single class")
    lookup = {c: i for i, c in enumerate(classes)}
    try:
        yi = np.array([lookup[v] for v in labels], dtype=np.intp)
    except KeyError as exc:
        raise ValueError(f"label {exc.args[0]!r} not in classes {classes}") from None

    trees, oobs, boots = [], [], []
    for t in range(config.n_trees):
        rng = tree_rng(config.seed, t)
        sample = rng.integers(0, n, size=n)
        drawn = np.zeros(n, dtype=bool)
        drawn[sample] = True
        trees.append(build_tree(X, yi, len(classes), sample, mtry, rng, config.min_leaf_size, config.max_depth))
        oobs.append(np.flatnonzero(~drawn))
        boots.append(sample)
    return Forest(trees, oobs, boots, classes, p, n, config)


def predict(forest: Forest, x):
    """Majority-vote class for one feature vector; ties go to the earliest class."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) != forest.n_features:
        raise ValueError(f"expected a vector of {forest.n_features} features, got shape {x.shape}")
    return forest.class_labels[int(forest.predict_index(x[None, :])[0])]


@dataclass(frozen=True)
class ForestImportance:
    mean_decrease_accuracy: np.ndarray  # scaled per config
    raw: np.ndarray                     # mean per-tree OOB accuracy decrease
    per_tree: np.ndarray                # (trees with OOB rows) x features
    scaling: str


def per_tree_decreases(forest: Forest, X, y) -> np.ndarray:
    """OOB accuracy minus permuted-column OOB accuracy, one row per tree.

    Trees with an empty OOB set contribute a NaN row.
    """
    X = forest._check(X)
    if len(X) != forest.n_rows:
        raise ValueError(f"forest was trained on {forest.n_rows} rows, got {len(X)}")
    yi = forest.encode(y)
    seed = forest.config.seed
    out = np.full((len(forest.trees), forest.n_features), np.nan)
    for t, (tree, oob) in enumerate(zip(forest.trees, forest.oob)):
        if len(oob) == 0:
            continue
        if oob[-1] >= len(X):
            raise ValueError(f"tree {t} OOB index {oob[-1]} out of range for {len(X)} rows")
        Xo = X[oob]
        yo = yi[oob]
        m, p = Xo.shape
        # base block followed by one permuted copy per feature, predicted in one pass
        stacked = np.tile(Xo, (p + 1, 1))
        for i in range(p):
            perm = permutation_rng(seed, t, i).permutation(m)
            stacked[(i + 1) * m:(i + 2) * m, i] = Xo[perm, i]
        hit = (tree.predict_index(stacked) == np.tile(yo, p + 1)).reshape(p + 1, m).mean(axis=1)
        out[t] = hit[0] - hit[1:]
    return out


def oob_permutation_importance(forest: Forest, X, y, config: ForestConfig | None = None) -> ForestImportance:
    """MeanDecreaseAccuracy per feature.

    ``raw`` averages the per-tree decreases; ``z_scaled`` divides that mean
    by its standard error (sample sd over trees / sqrt(trees)), giving 0
    where the sd is 0.
    """
    scaling = (config or forest.config).importance_scaling
    if scaling not in (RAW, Z_SCALED):
        raise ConfigError(f"unknown importance scaling {scaling!r}")
    dec = per_tree_decreases(forest, X, y)
    dec = dec[~np.isnan(dec).any(axis=1)]
    if len(dec) == 0:
        raise ValueError("no tree has out-of-bag rows; importance is undefined")
    raw = dec.mean(axis=0)
    if scaling == RAW:
        return ForestImportance(raw, raw, dec, scaling)
    n = len(dec)
    sd = dec.std(axis=0, ddof=1) if n > 1 else np.zeros(dec.shape[1])
    se = sd / math.sqrt(n)
    z = np.divide(raw, se, out=np.zeros_like(raw), where=se > 0)
    return ForestImportance(z, raw, dec, scaling)
