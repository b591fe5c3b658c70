"""Permutation-decrease and Gini-decrease variable importance.

Permutation importance shuffles one predictor column of the held-out rows
and records, per tree, the drop in accuracy against the unshuffled rows.
One shuffle per predictor is shared by every tree so the trees are
compared on identical perturbed data; ``repeats`` averages several
independent shuffles. Negative decreases are reported as-is (they are
noise-floor evidence, not errors).

Gini importance averages each tree's summed impurity decreases and is
known to overstate continuous predictors when feature kinds are mixed, so
a warning is emitted in that case.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import Dataset
from .errors import ConfigError
from .forest import Forest
from .tree import tree_gini_decreases

PERMUTATION = "permutation"
GINI = "gini"


@dataclass(frozen=True)
class ImportanceReport:
    method: str
    per_tree: np.ndarray  # shape (n_trees, n_features)
    feature_names: tuple[str, ...]
    permutation_seed: Optional[int] = None

    def __post_init__(self):
        m = np.asarray(self.per_tree, dtype=np.float64)
        m.setflags(write=False)
        object.__setattr__(self, "per_tree", m)

    @property
    def mean(self) -> np.ndarray:
        return self.per_tree.mean(axis=0)

    @property
    def n_features(self) -> int:
        return self.per_tree.shape[1]


def permutation_importance(
    forest: Forest,
    data: Dataset,
    test_rows,
    seed: int,
    repeats: int = 1,
) -> ImportanceReport:
    """Per-tree accuracy decreases on the test rows under column shuffles."""
    rows = np.asarray(test_rows, dtype=np.int64)
    if len(rows) == 0:
        raise ValueError("test_rows must be nonempty")
    if repeats < 1:
        raise ConfigError(f"repeats must be >= 1, got {repeats}")
    n = len(rows)
    m = forest.n_features
    rng = np.random.default_rng(seed)
    perms = [
        [rng.permutation(n) for _ in range(m)] for _ in range(repeats)
    ]
    per_tree = sum(
        _decreases_for_perms(forest, data.X[rows], data.y[rows], perm_set)
        for perm_set in perms
    ) / repeats
    return ImportanceReport(
        method=PERMUTATION,
        per_tree=per_tree,
        feature_names=forest.feature_names,
        permutation_seed=int(seed),
    )


def _decreases_for_perms(forest: Forest, X, y, perms) -> np.ndarray:
    """Accuracy decrease matrix for one fixed shuffle per predictor."""
    n_trees = len(forest.trees)
    out = np.zeros((n_trees, len(perms)), dtype=np.float64)
    base = np.array([np.mean(tree.predict(X) == y) for tree in forest.trees])
    used = [tree.features_used() for tree in forest.trees]
    for j, perm in enumerate(perms):
        involved = [t for t in range(n_trees) if j in used[t]]
        if not involved:
            continue  # predictions cannot change; decrease stays exactly 0
        Xp = X.copy()
        Xp[:, j] = X[perm, j]
        for t in involved:
            acc = np.mean(forest.trees[t].predict(Xp) == y)
            out[t, j] = base[t] - acc
    return out


def gini_importance(forest: Forest) -> ImportanceReport:
    """Average of each tree's per-feature impurity decrease sums."""
    kinds = set(forest.feature_kinds)
    if len(kinds) > 1:
        warnings.warn(
            "feature kinds are mixed (continuous and categorical); the Gini "
            "decrease tends to overestimate continuous predictors - prefer "
            "the permutation decrease"
        )
    per_tree = np.stack([tree_gini_decreases(t) for t in forest.trees])
    return ImportanceReport(
        method=GINI,
        per_tree=per_tree,
        feature_names=forest.feature_names,
    )


@dataclass(frozen=True)
class RankedFeature:
    name: str
    index: int
    mean: float
    quantiles: dict  # min, q1, median, q3, max of the per-tree column


def top_k(report: ImportanceReport, k: int) -> list[RankedFeature]:
    """The k features with the largest mean decrease, with boxplot stats."""
    m = report.n_features
    if not 1 <= k <= m:
        raise ConfigError(f"k must lie in [1, {m}], got {k}")
    means = report.mean
    order = sorted(range(m), key=lambda j: (-means[j], j))[:k]
    ranked = []
    for j in order:
        col = report.per_tree[:, j]
        qs = np.quantile(col, [0.0, 0.25, 0.5, 0.75, 1.0])
        ranked.append(
            RankedFeature(
                name=report.feature_names[j],
                index=j,
                mean=float(means[j]),
                quantiles={
                    "min": float(qs[0]),
                    "q1": float(qs[1]),
                    "median": float(qs[2]),
                    "q3": float(qs[3]),
                    "max": float(qs[4]),
                },
            )
        )
    return ranked


def write_report_csv(report: ImportanceReport, path, k: Optional[int] = None) -> None:
    """Ranked CSV export: feature, mean, min, q1, median, q3, max."""
    ranked = top_k(report, k if k is not None else report.n_features)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature", "mean", "min", "q1", "median", "q3", "max"])
        for entry in ranked:
            q = entry.quantiles
            writer.writerow([
                entry.name, repr(entry.mean), repr(q["min"]), repr(q["q1"]),
                repr(q["median"]), repr(q["q3"]), repr(q["max"]),
            ])


def write_boxplot_svg(report: ImportanceReport, path, k: int) -> None:
    """One box per top-k feature, most important first; byte-reproducible."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ranked = top_k(report, k)
    columns = [report.per_tree[:, entry.index] for entry in ranked]
    labels = [entry.name for entry in ranked]
    with matplotlib.rc_context({"svg.hashsalt": "gradeforest"}):
        fig, ax = plt.subplots(figsize=(max(6.0, 0.6 * len(ranked)), 4.5))
        ax.boxplot(columns, tick_labels=labels)
        ax.axhline(0.0, color="grey", linewidth=0.8, linestyle=":")
        ylabel = (
            "accuracy decrease" if report.method == PERMUTATION
            else "impurity decrease"
        )
        ax.set_ylabel(ylabel)
        ax.set_title(f"{report.method} importance, top {len(ranked)}")
        plt.setp(ax.get_xticklabels(), rotation=45, ha="right")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
