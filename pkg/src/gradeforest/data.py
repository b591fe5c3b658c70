"""Dataset representation, deterministic splitting and seeded sampling.

All randomness in the package flows through ``numpy.random.default_rng``
(PCG64) seeded explicitly; nothing reads the clock. Datasets are immutable
after construction and safe to share across workers.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SchemaError

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"


def round_half_up(x: float) -> int:
    """Round to the nearest integer, halves upward (0.5 -> 1, 1.5 -> 2)."""
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class Dataset:
    """Fixed-width numeric feature matrix with integer class labels.

    ``X`` has shape (n_rows, n_features); ``y`` holds class indices into
    ``class_names``. ``kinds`` marks each feature as continuous or
    categorical (categorical values are numeric category codes).
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    class_names: tuple[str, ...]
    kinds: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=np.float64))
        y = np.asarray(self.y, dtype=np.int64)
        if X.ndim != 2:
            raise ConfigError("feature matrix must be 2-dimensional")
        if y.shape != (X.shape[0],):
            raise ConfigError("label vector length must match the row count")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "class_names", tuple(self.class_names))
        kinds = tuple(self.kinds) if self.kinds else (CONTINUOUS,) * X.shape[1]
        object.__setattr__(self, "kinds", kinds)
        if len(self.feature_names) != X.shape[1]:
            raise ConfigError("feature_names length must match the feature count")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise ConfigError("feature names must be unique")
        if len(kinds) != X.shape[1]:
            raise ConfigError("kinds length must match the feature count")
        for kind in kinds:
            if kind not in (CONTINUOUS, CATEGORICAL):
                raise ConfigError(f"unknown feature kind {kind!r}")
        if y.size and (y.min() < 0 or y.max() >= len(self.class_names)):
            raise ConfigError("label index out of range")
        X.setflags(write=False)
        y.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def save_csv(self, path) -> None:
        """Write the dataset as CSV: first column ``label``, then features."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["label", *self.feature_names])
            for i in range(self.n_rows):
                writer.writerow(
                    [self.class_names[self.y[i]]]
                    + [_format_value(v) for v in self.X[i]]
                )

    @staticmethod
    def load_csv(path, class_names=None) -> "Dataset":
        """Read a dataset CSV written by :meth:`save_csv`.

        When ``class_names`` is omitted the classes are the sorted distinct
        labels found in the file, so classes absent from the file are lost.
        """
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(f"{path}: empty file, expected a header row")
            if not header or header[0] != "label":
                raise SchemaError(f"{path}: first column must be 'label'")
            feature_names = header[1:]
            labels: list[str] = []
            rows: list[list[float]] = []
            for lineno, row in enumerate(reader, start=2):
                if len(row) != len(header):
                    raise SchemaError(
                        f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}"
                    )
                labels.append(row[0])
                try:
                    rows.append([float(v) for v in row[1:]])
                except ValueError as exc:
                    raise SchemaError(f"{path}:{lineno}: {exc}") from None
        if class_names is None:
            class_names = sorted(set(labels))
        index = {name: i for i, name in enumerate(class_names)}
        try:
            y = np.array([index[lab] for lab in labels], dtype=np.int64)
        except KeyError as exc:
            raise SchemaError(f"{path}: unknown class label {exc}") from None
        X = np.array(rows, dtype=np.float64).reshape(len(rows), len(feature_names))
        return Dataset(X, y, tuple(feature_names), tuple(class_names))


def _format_value(v: float) -> str:
    if float(v).is_integer():
        return str(int(v))
    return repr(float(v))


@dataclass(frozen=True)
class SplitIndices:
    """Disjoint train/validation/test row indices covering a dataset."""

    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray
    ratios: tuple[float, float, float] = (0.9, 0.05, 0.05)
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        for name in ("train", "validation", "test"):
            arr = np.sort(np.asarray(getattr(self, name), dtype=np.int64))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_rows(self) -> int:
        return len(self.train) + len(self.validation) + len(self.test)

    def part(self, name: str) -> np.ndarray:
        try:
            return {"train": self.train, "validation": self.validation,
                    "val": self.validation, "test": self.test}[name]
        except KeyError:
            raise ConfigError(f"unknown split part {name!r}") from None

    def save_json(self, path) -> None:
        payload = {
            "ratios": list(self.ratios),
            "seed": int(self.seed),
            "stratified": bool(self.stratified),
            "n_rows": int(self.n_rows),
            "train": [int(i) for i in self.train],
            "validation": [int(i) for i in self.validation],
            "test": [int(i) for i in self.test],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")

    @staticmethod
    def load_json(path) -> "SplitIndices":
        with open(path, encoding="utf-8") as fh:
            try:
                payload = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}: invalid JSON ({exc})") from None
        try:
            return SplitIndices(
                train=np.array(payload["train"], dtype=np.int64),
                validation=np.array(payload["validation"], dtype=np.int64),
                test=np.array(payload["test"], dtype=np.int64),
                ratios=tuple(payload["ratios"]),
                seed=int(payload["seed"]),
                stratified=bool(payload["stratified"]),
            )
        except KeyError as exc:
            raise SchemaError(f"{path}: missing key {exc}") from None


def stratified_split(
    data: Dataset,
    ratios: tuple[float, float, float],
    seed: int,
    stratify: bool = True,
) -> SplitIndices:
    """Split row indices into train/validation/test at the given ratios.

    Splitting is per class by default so every part keeps the global class
    balance within one row per class. Classes with fewer than 3 rows go
    entirely to train with a warning. Identical (data order, seed) always
    produces identical output.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3:
        raise ConfigError("expected exactly three ratios")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"ratios must sum to 1, got {sum(ratios)!r}")
    for r in ratios:
        if not 0.0 < r < 1.0:
            raise ConfigError(f"each ratio must lie in (0, 1), got {r!r}")
    if data.n_rows == 0:
        raise ConfigError("cannot split an empty dataset")

    rng = np.random.default_rng(seed)
    if stratify:
        groups = [np.flatnonzero(data.y == c) for c in range(data.n_classes)]
    else:
        groups = [np.arange(data.n_rows)]

    train_parts, val_parts, test_parts = [], [], []
    for c, idx in enumerate(groups):
        n_c = len(idx)
        if n_c == 0:
            continue
        if stratify and n_c < 3:
            warnings.warn(
                f"class {data.class_names[c]!r} has only {n_c} row(s); "
                "assigning all of them to train"
            )
            train_parts.append(idx)
            continue
        perm = rng.permutation(idx)
        n_val = round_half_up(ratios[1] * n_c)
        n_test = round_half_up(ratios[2] * n_c)
        n_train = n_c - n_val - n_test
        if n_train < 0:
            # rounding both small parts up can overshoot only on tiny groups
            n_test = max(0, n_test + n_train)
            n_train = n_c - n_val - n_test
        train_parts.append(perm[:n_train])
        val_parts.append(perm[n_train:n_train + n_val])
        test_parts.append(perm[n_train + n_val:])

    concat = lambda parts: (
        np.concatenate(parts) if parts else np.array([], dtype=np.int64)
    )
    return SplitIndices(
        train=concat(train_parts),
        validation=concat(val_parts),
        test=concat(test_parts),
        ratios=ratios,
        seed=seed,
        stratified=stratify,
    )


def subsample_without_replacement(n: int, fraction: float, seed: int) -> np.ndarray:
    """Draw ``round(fraction * n)`` distinct indices from ``range(n)``.

    Rounding is half-up, so fraction 0.63 of 100 rows yields exactly 63.
    The result is sorted and fully determined by the seed.
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if not 0.0 < fraction <= 1.0:
        raise ConfigError(f"fraction must lie in (0, 1], got {fraction!r}")
    k = round_half_up(fraction * n)
    rng = np.random.default_rng(seed)
    return np.sort(rng.permutation(n)[:k])


def class_counts(data: Dataset, rows) -> np.ndarray:
    """Count rows per class over the given row indices."""
    rows = np.asarray(rows, dtype=np.int64)
    return np.bincount(data.y[rows], minlength=data.n_classes)
