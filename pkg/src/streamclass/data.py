"""Dataset ingestion, standardization, stratified splitting, and seeded randomness.

A :class:`Dataset` couples an ``(n, d)`` feature matrix with integer class
labels ``1..G`` and the catalogs of feature and class names. All containers
here are treated as immutable once built, so they can be shared freely across
concurrent readers.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Raised when an input file or dataset violates the expected schema."""


@dataclass
class CsvSchema:
    """Expected CSV layout: named feature columns plus one label column.

    ``class_names`` fixes the label catalog and its order; when None, classes
    are registered in order of first appearance. ``label_values`` maps raw
    label cells to class names (identity mapping when None).
    """

    feature_names: list[str]
    label_column: str
    class_names: list[str] | None = None
    label_values: dict[str, str] | None = None


#: Cardiotocography feature columns (fetal heart rate summaries and histogram
#: statistics) with the three-state fetal outcome label.
CTG_FEATURES = [
    "LB", "AC", "FM", "UC", "DL", "DS", "DP", "ASTV", "MSTV", "ALTV", "MLTV",
    "Width", "Min", "Max", "Nmax", "Nzeros", "Mode", "Mean", "Median",
    "Variance", "Tendency",
]

CTG_SCHEMA = CsvSchema(
    feature_names=list(CTG_FEATURES),
    label_column="NSP",
    class_names=["Normal", "Suspect", "Pathologic"],
    label_values={"1": "Normal", "2": "Suspect", "3": "Pathologic"},
)


@dataclass
class Dataset:
    """Labeled sample: features (n, d), labels in 1..G, and name catalogs."""

    features: np.ndarray
    labels: np.ndarray
    feature_names: list[str]
    class_names: list[str]

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise DataError(f"features must be 2-dimensional, got {self.features.shape}")
        n, d = self.features.shape
        if n < 1 or d < 1:
            raise DataError("dataset needs at least one row and one feature column")
        if len(self.feature_names) != d:
            raise DataError("feature_names length does not match feature columns")
        if len(self.class_names) < 2:
            raise DataError("a dataset needs at least two classes in its catalog")
        if self.labels.shape != (n,):
            raise DataError("labels length does not match number of rows")
        if self.labels.min() < 1 or self.labels.max() > len(self.class_names):
            raise DataError("labels must be class indices in 1..G")
        if not np.all(np.isfinite(self.features)):
            raise DataError("features contain non-finite values")

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    @property
    def n_classes(self):
        return len(self.class_names)

    def class_counts(self):
        """Per-class row counts, index g-1 for class g."""
        return np.bincount(self.labels, minlength=self.n_classes + 1)[1:]

    def take(self, indices):
        """Row subset in the given order (shares the name catalogs)."""
        idx = np.asarray(indices)
        return Dataset(
            self.features[idx], self.labels[idx], self.feature_names, self.class_names
        )


def load_csv(path, schema):
    """Read an RFC-4180 CSV into a :class:`Dataset` according to ``schema``.

    Header names are matched case-insensitively and columns may appear in any
    order. Every problem is reported with its row/column location.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")

    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        rows = list(reader)

    positions = {}
    for pos, name in enumerate(header):
        key = name.strip().lower()
        if key in positions:
            raise DataError(f"{path}: duplicate column {name.strip()!r}")
        positions[key] = pos

    wanted = schema.feature_names + [schema.label_column]
    missing = [c for c in wanted if c.lower() not in positions]
    extra = [h.strip() for h in header if h.strip().lower() not in {c.lower() for c in wanted}]
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing columns {missing}")
        if extra:
            parts.append(f"unexpected columns {extra}")
        raise DataError(f"{path}: header does not match schema: " + "; ".join(parts))

    feat_pos = [positions[c.lower()] for c in schema.feature_names]
    label_pos = positions[schema.label_column.lower()]

    if schema.class_names is not None:
        class_names = list(schema.class_names)
        class_index = {name: i + 1 for i, name in enumerate(class_names)}
    else:
        class_names = []
        class_index = {}

    n, d = len(rows), len(schema.feature_names)
    if n < 1:
        raise DataError(f"{path}: no data rows")
    features = np.empty((n, d))
    labels = np.empty(n, dtype=np.int64)

    for i, row in enumerate(rows):
        line = i + 2  # 1-based, after the header
        if len(row) != len(header):
            raise DataError(f"{path}: row {line} has {len(row)} cells, expected {len(header)}")
        for j, pos in enumerate(feat_pos):
            cell = row[pos].strip()
            try:
                value = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: row {line}, column {schema.feature_names[j]!r}: "
                    f"non-numeric cell {cell!r}"
                ) from None
            if not np.isfinite(value):
                raise DataError(
                    f"{path}: row {line}, column {schema.feature_names[j]!r}: "
                    f"non-finite cell {cell!r}"
                )
            features[i, j] = value
        labels[i] = _map_label(row[label_pos].strip(), schema, class_names, class_index,
                               path, line)

    if len(class_names) < 2:
        raise DataError(f"{path}: fewer than two distinct classes in {schema.label_column!r}")
    return Dataset(features, labels, list(schema.feature_names), class_names)


def _map_label(cell, schema, class_names, class_index, path, line):
    raw = cell
    if schema.label_values is not None:
        if raw not in schema.label_values:
            # Tolerate numeric formatting differences like "3.0" for "3".
            try:
                raw = str(int(float(raw)))
            except ValueError:
                pass
        if raw not in schema.label_values:
            raise DataError(
                f"{path}: row {line}: unknown label value {cell!r} for column "
                f"{schema.label_column!r}"
            )
        raw = schema.label_values[raw]
    if raw not in class_index:
        if schema.class_names is not None:
            raise DataError(
                f"{path}: row {line}: unknown label value {cell!r} for column "
                f"{schema.label_column!r}"
            )
        class_names.append(raw)
        class_index[raw] = len(class_names)
    return class_index[raw]


@dataclass
class Standardizer:
    """Per-column affine transform fitted by :func:`standardize`.

    Applies ``(x[kept] - means) / stds`` so new vectors get exactly the
    transform that produced the fitted training matrix.
    """

    means: np.ndarray
    stds: np.ndarray
    kept_columns: np.ndarray
    dropped_names: list[str]

    def transform(self, X):
        X = np.asarray(X, dtype=float)
        return (X[..., self.kept_columns] - self.means) / self.stds

    def transform_dataset(self, data):
        names = [data.feature_names[j] for j in self.kept_columns]
        return Dataset(self.transform(data.features), data.labels, names, data.class_names)


def standardize(data):
    """Center/scale every column to mean 0, sample std 1 (denominator n-1).

    Constant columns carry no information for either the eigenbasis or kernel
    distances, so they are dropped and recorded on the returned params.

    Returns
    -------
    (Dataset, Standardizer)
    """
    if data.n_samples < 2:
        raise DataError("standardize requires at least two rows")
    means = data.features.mean(axis=0)
    stds = data.features.std(axis=0, ddof=1)
    kept = np.flatnonzero(stds > 0)
    if kept.size == 0:
        raise DataError("all feature columns are constant")
    dropped = [data.feature_names[j] for j in np.flatnonzero(stds == 0)]
    params = Standardizer(means[kept], stds[kept], kept, dropped)
    return params.transform_dataset(data), params


@dataclass
class SplitSpec:
    """Stratified train/test split sizes: a global fraction or explicit per-class counts."""

    train_fraction: float | None = None
    train_counts: tuple | None = None
    seed: int = 0

    def __post_init__(self):
        if (self.train_fraction is None) == (self.train_counts is None):
            raise DataError("specify exactly one of train_fraction / train_counts")
        if self.train_fraction is not None and not 0 < self.train_fraction < 1:
            raise DataError("train_fraction must lie in (0, 1)")


def stratified_split(data, spec, rng=None, *, return_indices=False):
    """Per-class random split into train and test subsets.

    Per-class train sizes follow ``spec.train_counts`` when given, otherwise
    ``round(fraction * class size)``. Both output row orders are shuffled so a
    prefix of the train set is a class mixture, which downstream streaming
    consumers rely on. Deterministic given the generator state.
    """
    if rng is None:
        rng = substream(spec.seed, 0)
    counts = spec.train_counts
    if counts is not None and len(counts) != data.n_classes:
        raise DataError(
            f"train_counts has {len(counts)} entries for {data.n_classes} classes"
        )
    train_parts, test_parts = [], []
    for g in range(1, data.n_classes + 1):
        idx = np.flatnonzero(data.labels == g)
        name = data.class_names[g - 1]
        if idx.size < 2:
            raise DataError(f"class {name!r} has fewer than 2 members")
        if counts is not None:
            want = int(counts[g - 1])
        else:
            want = int(np.floor(spec.train_fraction * idx.size + 0.5))
        if want > idx.size:
            raise DataError(
                f"requested {want} training rows for class {name!r} with only {idx.size}"
            )
        perm = idx[rng.permutation(idx.size)]
        train_parts.append(perm[:want])
        test_parts.append(perm[want:])
    train_idx = np.concatenate(train_parts)
    test_idx = np.concatenate(test_parts)
    train_idx = train_idx[rng.permutation(train_idx.size)]
    test_idx = test_idx[rng.permutation(test_idx.size)]
    if return_indices:
        return data.take(train_idx), data.take(test_idx), train_idx, test_idx
    return data.take(train_idx), data.take(test_idx)


def substream(seed, index):
    """Independent PCG64 generator for sub-task ``index`` of master ``seed``.

    Derivation goes through ``SeedSequence(seed, spawn_key=(index,))`` so
    streams never overlap and the mapping is stable across platforms.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(ss))
