"""Gini-minimizing binary classification trees.

A tree recursively partitions the rows: at each node the split search
enumerates, per candidate feature, every threshold between consecutive
distinct sorted values (continuous features) or every proper subset of the
observed categories (categorical features, capped at 12 distinct values),
and keeps the split with the smallest total child impurity n1*Q1 + n2*Q2.

The scan runs vectorised in floating point, then near-minimal candidates
are re-compared with exact integer arithmetic so that ties resolve
deterministically: lowest feature index first, then smallest threshold or
lexicographically smallest category subset. Trees are unpruned; growth
stops when a node has at most ``beta`` rows, is pure, or admits no
impurity-reducing split.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .data import CATEGORICAL, CONTINUOUS, Dataset
from .errors import CategoricalArityError, ConfigError

MAX_CATEGORICAL_VALUES = 12


def gini(counts) -> float:
    """Gini impurity of a class-count vector: sum of p*(1-p) over classes."""
    counts = np.asarray(counts, dtype=np.float64)
    if counts.size == 0 or (counts < 0).any():
        raise ValueError("counts must be non-negative and non-empty")
    n = counts.sum()
    if n == 0:
        raise ValueError("gini is undefined for an empty region")
    p = counts / n
    return float((p * (1.0 - p)).sum())


def gini_from_proportions(proportions) -> float:
    p = np.asarray(proportions, dtype=np.float64)
    return float((p * (1.0 - p)).sum())


@dataclass(frozen=True)
class SplitCondition:
    """Routing rule of an internal node.

    Continuous: rows with x[feature] <= threshold go left. Categorical:
    rows whose x[feature] is in ``left_categories`` go left; anything
    else (including unseen categories) goes right.
    """

    feature: int
    kind: str
    threshold: float = float("nan")
    left_categories: tuple[float, ...] = ()

    def goes_left(self, value: float) -> bool:
        if self.kind == CONTINUOUS:
            return value <= self.threshold
        return value in self.left_categories

    def mask_left(self, values: np.ndarray) -> np.ndarray:
        if self.kind == CONTINUOUS:
            return values <= self.threshold
        return np.isin(values, np.array(self.left_categories))

    def describe(self, feature_names=None) -> str:
        name = (
            feature_names[self.feature] if feature_names else f"x{self.feature}"
        )
        if self.kind == CONTINUOUS:
            return f"{name} <= {self.threshold:g}"
        cats = ", ".join(f"{c:g}" for c in self.left_categories)
        return f"{name} in {{{cats}}}"


@dataclass(frozen=True)
class Leaf:
    n_node: int
    proportions: np.ndarray
    majority: int

    def __post_init__(self):
        p = np.asarray(self.proportions, dtype=np.float64)
        p.setflags(write=False)
        object.__setattr__(self, "proportions", p)


@dataclass(frozen=True)
class Internal:
    n_node: int
    condition: SplitCondition
    impurity_decrease: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Leaf, Internal]


@dataclass(frozen=True)
class TreeConfig:
    """Growth parameters: stop size ``beta``, per-node feature draw, seed.

    ``feature_subset_size`` of None means every feature is a candidate at
    every node; an integer p draws p features independently at each node
    from the generator seeded by ``seed``.
    """

    beta: int = 1
    feature_subset_size: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.beta < 1:
            raise ConfigError(f"beta must be >= 1, got {self.beta}")
        if self.feature_subset_size is not None and self.feature_subset_size < 1:
            raise ConfigError("feature_subset_size must be >= 1 or None")


@dataclass(frozen=True)
class Tree:
    """A fitted tree: root node plus the feature/class schema it expects."""

    root: TreeNode
    n_features: int
    n_classes: int

    def predict_one(self, x) -> int:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n_features,):
            raise ValueError(
                f"expected a vector of width {self.n_features}, got {x.shape}"
            )
        node = self.root
        while isinstance(node, Internal):
            node = node.left if node.condition.goes_left(x[node.condition.feature]) else node.right
        return node.majority

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(
                f"expected a matrix with {self.n_features} columns, got {X.shape}"
            )
        out = np.empty(X.shape[0], dtype=np.int64)
        self._predict_into(self.root, X, np.arange(X.shape[0]), out)
        return out

    def _predict_into(self, node, X, idx, out):
        if isinstance(node, Leaf):
            out[idx] = node.majority
            return
        left = node.condition.mask_left(X[idx, node.condition.feature])
        self._predict_into(node.left, X, idx[left], out)
        self._predict_into(node.right, X, idx[~left], out)

    def leaves(self) -> list[Leaf]:
        found: list[Leaf] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Leaf):
                found.append(node)
            else:
                stack.extend((node.left, node.right))
        return found

    def features_used(self) -> set[int]:
        used: set[int] = set()
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Internal):
                used.add(node.condition.feature)
                stack.extend((node.left, node.right))
        return used


# ---------------------------------------------------------------------------
# Split search
# ---------------------------------------------------------------------------

@dataclass
class _Candidate:
    # integer payload for exact comparison: child sizes and sums of squared
    # class counts; float impurity is only a prefilter
    feature: int
    kind: str
    key: object  # threshold (float) or sorted category tuple
    n1: int
    s1: int
    n2: int
    s2: int
    impurity: float

    def exact_rank(self):
        # larger s1/n1 + s2/n2 means smaller impurity at fixed n
        return (self.s1 * self.n2 + self.s2 * self.n1, self.n1 * self.n2)

    def total_impurity(self) -> float:
        return (self.n1 - self.s1 / self.n1) + (self.n2 - self.s2 / self.n2)


def _better(a: _Candidate, b: _Candidate) -> bool:
    """True when candidate ``a`` beats ``b`` under exact impurity + tie rules."""
    num_a, den_a = a.exact_rank()
    num_b, den_b = b.exact_rank()
    lhs = int(num_a) * int(den_b)
    rhs = int(num_b) * int(den_a)
    if lhs != rhs:
        return lhs > rhs  # larger rank <=> strictly smaller impurity
    if a.feature != b.feature:
        return a.feature < b.feature
    return a.key < b.key


def _scan_continuous(values, labels, k, feature):
    order = np.argsort(values, kind="stable")
    v = values[order]
    y = labels[order]
    n = len(v)
    boundaries = np.flatnonzero(v[:-1] < v[1:])
    if boundaries.size == 0:
        return []
    onehot = np.zeros((n, k), dtype=np.int64)
    onehot[np.arange(n), y] = 1
    cum = np.cumsum(onehot, axis=0)
    total = cum[-1]
    c1 = cum[boundaries]
    n1 = boundaries + 1
    c2 = total[None, :] - c1
    n2 = n - n1
    s1 = (c1 * c1).sum(axis=1)
    s2 = (c2 * c2).sum(axis=1)
    imp = (n1 - s1 / n1) + (n2 - s2 / n2)
    keep = np.flatnonzero(imp <= imp.min() + 1e-9 * max(1.0, n))
    out = []
    for i in keep:
        b = boundaries[i]
        lo, hi = v[b], v[b + 1]
        mid = (lo + hi) / 2.0
        if not lo <= mid < hi:  # guards against midpoint rounding onto hi
            mid = lo
        out.append(
            _Candidate(feature, CONTINUOUS, float(mid),
                       int(n1[i]), int(s1[i]), int(n2[i]), int(s2[i]),
                       float(imp[i]))
        )
    return out


def _scan_categorical(values, labels, k, feature):
    cats = np.unique(values)
    q = len(cats)
    if q < 2:
        return []
    if q > MAX_CATEGORICAL_VALUES:
        raise CategoricalArityError(
            f"feature {feature} has {q} distinct categories; "
            f"subset enumeration is capped at {MAX_CATEGORICAL_VALUES}"
        )
    # per-category class counts
    table = np.zeros((q, k), dtype=np.int64)
    cat_index = np.searchsorted(cats, values)
    np.add.at(table, (cat_index, labels), 1)
    cat_sizes = table.sum(axis=1)
    n = int(cat_sizes.sum())
    total = table.sum(axis=0)
    total_sq = int((total * total).sum())
    out = []
    # each unordered partition appears once as the side containing cats[0],
    # which is also the lexicographically smaller side
    for mask in range(1 << (q - 1)):
        members = [0] + [i + 1 for i in range(q - 1) if mask >> i & 1]
        if len(members) == q:
            continue
        c1 = table[members].sum(axis=0)
        n1 = int(cat_sizes[members].sum())
        c2 = total - c1
        n2 = n - n1
        s1 = int((c1 * c1).sum())
        s2 = int((c2 * c2).sum())
        imp = (n1 - s1 / n1) + (n2 - s2 / n2)
        out.append(
            _Candidate(feature, CATEGORICAL,
                       tuple(float(cats[i]) for i in members),
                       n1, s1, n2, s2, float(imp))
        )
    if not out:
        return []
    best = min(c.impurity for c in out)
    return [c for c in out if c.impurity <= best + 1e-9 * max(1.0, n)]


def _search_best(data: Dataset, rows: np.ndarray, candidate_features) -> Optional[_Candidate]:
    labels = data.y[rows]
    k = data.n_classes
    best: Optional[_Candidate] = None
    for j in sorted(int(f) for f in candidate_features):
        values = data.X[rows, j]
        if data.kinds[j] == CONTINUOUS:
            found = _scan_continuous(values, labels, k, j)
        else:
            found = _scan_categorical(values, labels, k, j)
        for cand in found:
            if best is None or _better(cand, best):
                best = cand
    return best


def best_split(
    data: Dataset, rows, candidate_features
) -> Optional[tuple[SplitCondition, float]]:
    """Find the split minimising total child impurity over the candidates.

    Returns None when every candidate feature is constant on ``rows`` (no
    valid split exists); a zero-gain minimum is still returned here and
    rejected later by the growth loop.
    """
    rows = np.asarray(rows, dtype=np.int64)
    if len(rows) < 2:
        raise ConfigError("best_split needs at least 2 rows")
    if len(list(candidate_features)) == 0:
        raise ConfigError("candidate_features must be nonempty")
    cand = _search_best(data, rows, candidate_features)
    if cand is None:
        return None
    return _condition_of(cand), cand.total_impurity()


def _condition_of(cand: _Candidate) -> SplitCondition:
    if cand.kind == CONTINUOUS:
        return SplitCondition(cand.feature, CONTINUOUS, threshold=float(cand.key))
    return SplitCondition(cand.feature, CATEGORICAL, left_categories=tuple(cand.key))


# ---------------------------------------------------------------------------
# Growing and inspecting trees
# ---------------------------------------------------------------------------

def fit_tree(data: Dataset, rows, config: TreeConfig) -> Tree:
    """Grow an unpruned tree on the given training rows.

    Recursion stops when a node holds at most ``config.beta`` rows, is
    pure, or no candidate split reduces impurity. With a feature subset
    size p, each node draws its own p candidate features from the seeded
    generator (depth-first, left before right, so the draw sequence is
    reproducible).
    """
    rows = np.asarray(rows, dtype=np.int64)
    if len(rows) == 0:
        raise ConfigError("fit_tree needs at least one row")
    m = data.n_features
    p = config.feature_subset_size
    if p is not None and p > m:
        raise ConfigError(f"feature_subset_size {p} exceeds feature count {m}")
    rng = np.random.default_rng(config.seed) if p is not None and p < m else None
    root = _grow(data, np.sort(rows), config, rng)
    return Tree(root=root, n_features=m, n_classes=data.n_classes)


def _leaf_of(counts: np.ndarray, n: int) -> Leaf:
    return Leaf(
        n_node=n,
        proportions=counts / n,
        majority=int(np.argmax(counts)),
    )


def _grow(data, rows, config, rng) -> TreeNode:
    counts = np.bincount(data.y[rows], minlength=data.n_classes)
    n = len(rows)
    if n <= config.beta or int((counts > 0).sum()) <= 1:
        return _leaf_of(counts, n)

    if rng is not None:
        candidates = rng.choice(data.n_features, size=config.feature_subset_size,
                                replace=False)
    else:
        candidates = range(data.n_features)
    best = _search_best(data, rows, candidates)
    if best is None:
        return _leaf_of(counts, n)

    # accept only strictly impurity-reducing splits (exact integer check):
    # gain > 0  <=>  s1/n1 + s2/n2 > s_parent/n
    s_parent = int((counts.astype(object) ** 2).sum())
    num, den = best.exact_rank()
    if int(num) * n <= s_parent * int(den):
        return _leaf_of(counts, n)

    condition = _condition_of(best)
    mask = condition.mask_left(data.X[rows, condition.feature])
    left_rows = rows[mask]
    right_rows = rows[~mask]
    left = _grow(data, left_rows, config, rng)
    right = _grow(data, right_rows, config, rng)
    parent_impurity = n - s_parent / n
    decrease = max(parent_impurity - best.total_impurity(), 0.0)
    return Internal(
        n_node=n,
        condition=condition,
        impurity_decrease=decrease,
        left=left,
        right=right,
    )


def predict_tree(tree: Tree, x) -> int:
    """Class index of the leaf whose region contains ``x``."""
    return tree.predict_one(x)


def tree_gini_decreases(tree: Tree) -> np.ndarray:
    """Per-feature sums of weighted impurity decrease over the whole tree."""
    out = np.zeros(tree.n_features, dtype=np.float64)
    stack = [tree.root]
    while stack:
        node = stack.pop()
        if isinstance(node, Internal):
            out[node.condition.feature] += node.impurity_decrease
            stack.extend((node.left, node.right))
    return out


# ---------------------------------------------------------------------------
# Serialization: nested dicts with feature names, JSON-compatible
# ---------------------------------------------------------------------------

def tree_to_dict(tree: Tree, feature_names=None) -> dict:
    def encode(node):
        if isinstance(node, Leaf):
            return {
                "type": "leaf",
                "n": int(node.n_node),
                "proportions": [float(p) for p in node.proportions],
                "majority": int(node.majority),
            }
        cond = node.condition
        payload = {
            "type": "split",
            "n": int(node.n_node),
            "feature": int(cond.feature),
            "feature_name": (
                feature_names[cond.feature] if feature_names else f"x{cond.feature}"
            ),
            "decrease": float(node.impurity_decrease),
        }
        if cond.kind == CONTINUOUS:
            payload["threshold"] = float(cond.threshold)
        else:
            payload["left_categories"] = [float(c) for c in cond.left_categories]
        payload["left"] = encode(node.left)
        payload["right"] = encode(node.right)
        return payload

    return {
        "n_features": tree.n_features,
        "n_classes": tree.n_classes,
        "root": encode(tree.root),
    }


def tree_from_dict(payload: dict) -> Tree:
    def decode(node):
        if node["type"] == "leaf":
            return Leaf(
                n_node=int(node["n"]),
                proportions=np.array(node["proportions"], dtype=np.float64),
                majority=int(node["majority"]),
            )
        if "threshold" in node:
            cond = SplitCondition(int(node["feature"]), CONTINUOUS,
                                  threshold=float(node["threshold"]))
        else:
            cond = SplitCondition(
                int(node["feature"]), CATEGORICAL,
                left_categories=tuple(float(c) for c in node["left_categories"]),
            )
        return Internal(
            n_node=int(node["n"]),
            condition=cond,
            impurity_decrease=float(node["decrease"]),
            left=decode(node["left"]),
            right=decode(node["right"]),
        )

    return Tree(
        root=decode(payload["root"]),
        n_features=int(payload["n_features"]),
        n_classes=int(payload["n_classes"]),
    )
