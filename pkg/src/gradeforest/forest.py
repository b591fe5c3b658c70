"""Bagged tree ensembles with majority voting, presets and evaluation.

A forest draws one row sample per tree (without replacement by default,
63% of the training rows) and aggregates tree predictions by unweighted
vote, ties to the lowest class index. Per-tree randomness is derived from
the master seed and the tree index through ``numpy.random.SeedSequence``,
so fitting is reproducible bit-for-bit regardless of worker count.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from joblib import Parallel, delayed

from .data import Dataset, round_half_up, subsample_without_replacement
from .errors import ConfigError, SchemaError
from .tree import Tree, TreeConfig, fit_tree, tree_from_dict, tree_to_dict

FEATURES_ALL = "all"
FEATURES_RANDOM = "random"

_PRESET_NAMES = ("rf1", "rf2", "rf3")


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 200
    sample_fraction: float = 0.63
    with_replacement: bool = False
    feature_mode: str = FEATURES_ALL
    p: Optional[int] = None  # per-node feature count; None -> floor(sqrt(m))
    beta: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ConfigError(f"n_trees must be >= 1, got {self.n_trees}")
        if not 0.0 < self.sample_fraction <= 1.0:
            raise ConfigError(
                f"sample_fraction must lie in (0, 1], got {self.sample_fraction!r}"
            )
        if self.feature_mode not in (FEATURES_ALL, FEATURES_RANDOM):
            raise ConfigError(f"unknown feature_mode {self.feature_mode!r}")
        if self.beta < 1:
            raise ConfigError(f"beta must be >= 1, got {self.beta}")
        if self.p is not None and self.p < 1:
            raise ConfigError(f"p must be >= 1 or None, got {self.p}")


def preset(name: str, seed: int = 0) -> ForestConfig:
    """Named forest configurations.

    rf1: 200 trees, every feature a split candidate at every node.
    rf2: 200 trees, a fresh random feature subset at every node.
    rf3: like rf2 with the conventional default subset size floor(sqrt(m)).
    All three sample 63% of the training rows without replacement and stop
    splitting nodes of 50 rows or fewer.
    """
    if name not in _PRESET_NAMES:
        raise ConfigError(
            f"unknown preset {name!r}; expected one of {', '.join(_PRESET_NAMES)}"
        )
    mode = FEATURES_ALL if name == "rf1" else FEATURES_RANDOM
    return ForestConfig(
        n_trees=200,
        sample_fraction=0.63,
        with_replacement=False,
        feature_mode=mode,
        p=None,
        beta=50,
        seed=seed,
    )


def default_subset_size(n_features: int) -> int:
    return max(1, int(math.floor(math.sqrt(n_features))))


@dataclass(frozen=True)
class Forest:
    trees: tuple[Tree, ...]
    config: ForestConfig
    per_tree_row_sets: tuple[np.ndarray, ...]
    train_rows: np.ndarray
    resolved_p: Optional[int]
    feature_names: tuple[str, ...]
    feature_kinds: tuple[str, ...]
    class_names: tuple[str, ...]

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(
                f"expected a matrix with {self.n_features} columns, got {X.shape}"
            )
        votes = np.zeros((X.shape[0], self.n_classes), dtype=np.int64)
        cols = np.arange(X.shape[0])
        for tree in self.trees:
            votes[cols, tree.predict(X)] += 1
        return votes.argmax(axis=1)

    def predict_one(self, x) -> int:
        return predict_forest(self, x)


def _tree_seeds(master_seed: int, tree_index: int) -> tuple[int, int]:
    # documented mixing: SeedSequence over (master seed, tree index) yields
    # one row-sampling seed and one node-sampling seed per tree
    state = np.random.SeedSequence((master_seed, tree_index)).generate_state(2)
    return int(state[0]), int(state[1])


def _draw_rows(n: int, config: ForestConfig, tree_index: int) -> np.ndarray:
    row_seed, _ = _tree_seeds(config.seed, tree_index)
    if config.with_replacement:
        k = round_half_up(config.sample_fraction * n)
        rng = np.random.default_rng(row_seed)
        return np.sort(rng.integers(0, n, size=k))
    return subsample_without_replacement(n, config.sample_fraction, row_seed)


def _fit_one(data: Dataset, train_rows: np.ndarray, config: ForestConfig,
             resolved_p: Optional[int], tree_index: int):
    draw = _draw_rows(len(train_rows), config, tree_index)
    _, node_seed = _tree_seeds(config.seed, tree_index)
    tree_config = TreeConfig(
        beta=config.beta,
        feature_subset_size=resolved_p,
        seed=node_seed,
    )
    rows = train_rows[draw]
    return fit_tree(data, rows, tree_config), rows


def fit_forest(data: Dataset, train_rows, config: ForestConfig,
               n_jobs: int = 1) -> Forest:
    """Fit ``config.n_trees`` trees, one per seeded row draw.

    Tree t trains on draw t; with ``feature_mode='random'`` each node of
    each tree sees its own feature subset of size p (default
    floor(sqrt(m))). The result depends only on (data, train_rows, config),
    never on ``n_jobs`` or scheduling.
    """
    train_rows = np.sort(np.asarray(train_rows, dtype=np.int64))
    if len(train_rows) == 0:
        raise ConfigError("train_rows must be nonempty")
    if config.feature_mode == FEATURES_RANDOM:
        resolved_p = config.p if config.p is not None else default_subset_size(data.n_features)
        if resolved_p > data.n_features:
            raise ConfigError(
                f"p={resolved_p} exceeds the feature count {data.n_features}"
            )
    else:
        resolved_p = None

    fitted = Parallel(n_jobs=n_jobs)(
        delayed(_fit_one)(data, train_rows, config, resolved_p, t)
        for t in range(config.n_trees)
    )
    trees = tuple(tree for tree, _ in fitted)
    row_sets = tuple(rows for _, rows in fitted)
    return Forest(
        trees=trees,
        config=config,
        per_tree_row_sets=row_sets,
        train_rows=train_rows,
        resolved_p=resolved_p,
        feature_names=data.feature_names,
        feature_kinds=data.kinds,
        class_names=data.class_names,
    )


def predict_forest(forest: Forest, x) -> int:
    """Majority vote over the trees for a single feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (forest.n_features,):
        raise ValueError(
            f"expected a vector of width {forest.n_features}, got {x.shape}"
        )
    votes = np.zeros(forest.n_classes, dtype=np.int64)
    for tree in forest.trees:
        votes[tree.predict_one(x)] += 1
    return int(votes.argmax())


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvaluationReport:
    overall_accuracy: float
    per_class_accuracy: np.ndarray  # nan for classes absent from the rows
    confusion: np.ndarray  # rows = actual class, columns = predicted
    class_names: tuple[str, ...]
    n_rows: int

    def to_text(self) -> str:
        lines = [f"rows evaluated: {self.n_rows}",
                 f"overall accuracy: {self.overall_accuracy:.4f}"]
        for name, acc in zip(self.class_names, self.per_class_accuracy):
            shown = "n/a" if np.isnan(acc) else f"{acc:.4f}"
            lines.append(f"accuracy[{name}]: {shown}")
        lines.append("confusion (rows=actual, cols=predicted):")
        header = "actual\\predicted," + ",".join(self.class_names)
        lines.append(header)
        for name, row in zip(self.class_names, self.confusion):
            lines.append(name + "," + ",".join(str(int(v)) for v in row))
        return "\n".join(lines) + "\n"


def evaluate(model, data: Dataset, rows) -> EvaluationReport:
    """Accuracy report for any classifier exposing ``predict(X) -> labels``."""
    rows = np.asarray(rows, dtype=np.int64)
    if len(rows) == 0:
        raise ValueError("cannot evaluate on an empty row set")
    y_true = data.y[rows]
    y_pred = np.asarray(model.predict(data.X[rows]), dtype=np.int64)
    k = data.n_classes
    confusion = np.zeros((k, k), dtype=np.int64)
    np.add.at(confusion, (y_true, y_pred), 1)
    actual = confusion.sum(axis=1)
    correct = np.diag(confusion).astype(np.float64)
    with np.errstate(invalid="ignore"):
        per_class = np.where(actual > 0, correct / np.maximum(actual, 1), np.nan)
    return EvaluationReport(
        overall_accuracy=float(correct.sum() / len(rows)),
        per_class_accuracy=per_class,
        confusion=confusion,
        class_names=data.class_names,
        n_rows=len(rows),
    )


class MajorityClassifier:
    """Predicts the most frequent training class for every input."""

    def __init__(self, data: Dataset, rows):
        counts = np.bincount(data.y[np.asarray(rows, dtype=np.int64)],
                             minlength=data.n_classes)
        self.label = int(np.argmax(counts))
        self.n_features = data.n_features

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X)
        return np.full(X.shape[0], self.label, dtype=np.int64)


class WeightedRandomClassifier:
    """Draws labels from the training class distribution, seeded."""

    def __init__(self, data: Dataset, rows, seed: int):
        counts = np.bincount(data.y[np.asarray(rows, dtype=np.int64)],
                             minlength=data.n_classes)
        self.proportions = counts / counts.sum()
        self.seed = int(seed)
        self.n_features = data.n_features

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X)
        rng = np.random.default_rng(self.seed)
        return rng.choice(len(self.proportions), size=X.shape[0],
                          p=self.proportions)


# ---------------------------------------------------------------------------
# Persistence: JSON with a config header and the tree list
# ---------------------------------------------------------------------------

FOREST_FORMAT = "gradeforest-forest"


def forest_to_dict(forest: Forest) -> dict:
    cfg = forest.config
    return {
        "format": FOREST_FORMAT,
        "version": 1,
        "config": {
            "n_trees": cfg.n_trees,
            "sample_fraction": cfg.sample_fraction,
            "with_replacement": cfg.with_replacement,
            "feature_mode": cfg.feature_mode,
            "p": cfg.p,
            "beta": cfg.beta,
            "seed": cfg.seed,
        },
        "resolved_p": forest.resolved_p,
        "feature_names": list(forest.feature_names),
        "feature_kinds": list(forest.feature_kinds),
        "class_names": list(forest.class_names),
        "train_rows": [int(i) for i in forest.train_rows],
        "trees": [tree_to_dict(t, forest.feature_names) for t in forest.trees],
    }


def save_forest(forest: Forest, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(forest_to_dict(forest), fh)
        fh.write("\n")


def load_forest(path) -> Forest:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != FOREST_FORMAT:
        raise SchemaError(f"{path}: not a forest file")
    cfg = ForestConfig(**payload["config"])
    train_rows = np.array(payload["train_rows"], dtype=np.int64)
    trees = tuple(tree_from_dict(t) for t in payload["trees"])
    # row sets are not stored; they are re-derived from the recorded seed
    row_sets = tuple(
        train_rows[_draw_rows(len(train_rows), cfg, t)]
        for t in range(cfg.n_trees)
    )
    return Forest(
        trees=trees,
        config=cfg,
        per_tree_row_sets=row_sets,
        train_rows=train_rows,
        resolved_p=payload["resolved_p"],
        feature_names=tuple(payload["feature_names"]),
        feature_kinds=tuple(payload["feature_kinds"]),
        class_names=tuple(payload["class_names"]),
    )
