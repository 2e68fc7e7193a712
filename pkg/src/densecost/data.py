"""Dataset loading, cleaning and fold bookkeeping."""

from __future__ import annotations

import dataclasses

import numpy as np


class DataError(Exception):
    """Raised for malformed input files or inconsistent datasets."""


@dataclasses.dataclass
class Dataset:
    """A feature matrix with one target per row.

    ``duplicates_removed`` / ``conflicts_removed`` accumulate across calls to
    :func:`clean`, so cleaning an already-clean dataset returns an equal
    dataset, counters included.
    """

    X: np.ndarray
    y: np.ndarray
    duplicates_removed: int = 0
    conflicts_removed: int = 0

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        self.y = np.ascontiguousarray(self.y, dtype=np.float64)
        if self.X.ndim != 2:
            raise DataError("feature matrix must be 2-d")
        if self.y.shape != (self.X.shape[0],):
            raise DataError("target vector length does not match feature rows")

    def __len__(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    def subset(self, idx):
        return Dataset(self.X[idx], self.y[idx],
                       self.duplicates_removed, self.conflicts_removed)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (np.array_equal(self.X, other.X)
                and np.array_equal(self.y, other.y)
                and self.duplicates_removed == other.duplicates_removed
                and self.conflicts_removed == other.conflicts_removed)


def parse_label_map(spec):
    """Parse a mapping like ``"g=1,b=-1"`` into ``{"g": 1.0, "b": -1.0}``."""
    mapping = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise DataError(f"bad label mapping entry: {part!r}")
        k, v = part.split("=", 1)
        try:
            mapping[k.strip()] = float(v)
        except ValueError:
            raise DataError(f"bad label value in mapping entry {part!r}") from None
    if not mapping:
        raise DataError("empty label mapping")
    return mapping


def load_csv(path, label_col=-1, label_map=None, delimiter=",", skip_header=0):
    """Load a delimited text file into a :class:`Dataset`.

    ``label_col`` selects the target column (negative indices count from the
    end); every other column must parse as a float feature. ``label_map``
    translates raw label strings (e.g. ``{"g": 1.0, "b": -1.0}``); without it
    the target column must itself be numeric. ``label_col=None`` reads every
    column as a feature and fills the targets with zeros (useful for
    prediction inputs).
    """
    rows = []
    targets = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if lineno <= skip_header:
                continue
            line = line.strip()
            if not line:
                continue
            parts = line.split(delimiter)
            if label_col is None:
                targets.append(0.0)
                feats = parts
                try:
                    rows.append([float(v) for v in feats])
                except ValueError as exc:
                    raise DataError(f"{path}:{lineno}: non-numeric feature "
                                    f"({exc})") from None
                continue
            if label_col >= len(parts) or label_col < -len(parts):
                raise DataError(f"{path}:{lineno}: no column {label_col} "
                                f"in a {len(parts)}-column row")
            idx = label_col % len(parts)
            raw = parts[idx].strip()
            if label_map is not None:
                if raw not in label_map:
                    raise DataError(f"{path}:{lineno}: unmapped label {raw!r}")
                targets.append(label_map[raw])
            else:
                try:
                    targets.append(float(raw))
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: non-numeric target {raw!r}") from None
            feats = parts[:idx] + parts[idx + 1:]
            try:
                rows.append([float(v) for v in feats])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-numeric feature "
                                f"({exc})") from None
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(rows[0])
    for r, row in enumerate(rows):
        if len(row) != width:
            raise DataError(f"{path}: data row {r + 1} has {len(row)} "
                            f"features, expected {width}")
    return Dataset(np.asarray(rows, dtype=np.float64),
                   np.asarray(targets, dtype=np.float64))


def load_libsvm(path):
    """Load a file in svmlight/libsvm format: ``<target> idx:val idx:val ...``

    Indices are 1-based; missing entries are zero. Anything after ``#`` on a
    line is a comment.
    """
    targets = []
    rows = []
    width = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                targets.append(float(parts[0]))
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad target {parts[0]!r}") from None
            entries = {}
            for tok in parts[1:]:
                if ":" not in tok:
                    raise DataError(f"{path}:{lineno}: bad index:value pair {tok!r}")
                si, sv = tok.split(":", 1)
                try:
                    k = int(si)
                    v = float(sv)
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: bad index:value pair {tok!r}") from None
                if k < 1:
                    raise DataError(f"{path}:{lineno}: indices are 1-based")
                entries[k] = v
                if k > width:
                    width = k
            rows.append(entries)
    if not rows:
        raise DataError(f"{path}: no data rows")
    X = np.zeros((len(rows), width))
    for r, entries in enumerate(rows):
        for k, v in entries.items():
            X[r, k - 1] = v
    return Dataset(X, np.asarray(targets, dtype=np.float64))


def save_csv(ds, path, delimiter=","):
    """Write features plus a trailing target column.

    Floats are written with ``repr`` so a reload round-trips bitwise.
    """
    with open(path, "w") as fh:
        for i in range(len(ds)):
            vals = [repr(float(v)) for v in ds.X[i]]
            vals.append(repr(float(ds.y[i])))
            fh.write(delimiter.join(vals) + "\n")


def clean(ds, task="classification"):
    """Remove duplicate rows, keeping first occurrences.

    Classification: rows with bitwise-identical features collapse to the
    first occurrence when all their labels agree; groups with conflicting
    labels are dropped entirely (all their rows count as conflicts).
    Regression: only exact (features, target) duplicates collapse; equal
    features with different targets are legitimate and kept.

    Removal counters accumulate on the returned dataset, which makes the
    operation idempotent: ``clean(clean(ds)) == clean(ds)`` exactly.
    """
    if task not in ("classification", "regression"):
        raise DataError(f"unknown task {task!r}")
    groups = {}
    order = []
    for i in range(len(ds)):
        key = ds.X[i].tobytes()
        if task == "regression":
            key += ds.y[i].tobytes()
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(i)
    keep = []
    dups = 0
    conflicts = 0
    for key in order:
        idx = groups[key]
        labels = {ds.y[i].tobytes() for i in idx}
        if task == "classification" and len(labels) > 1:
            conflicts += len(idx)
        else:
            keep.append(idx[0])
            dups += len(idx) - 1
    if keep:
        out = Dataset(ds.X[np.asarray(keep)], ds.y[np.asarray(keep)])
    else:
        out = Dataset(np.empty((0, ds.n_features)), np.empty(0))
    out.duplicates_removed = ds.duplicates_removed + dups
    out.conflicts_removed = ds.conflicts_removed + conflicts
    return out


def shuffle(ds, seed):
    """Seeded row permutation."""
    perm = np.random.default_rng(seed).permutation(len(ds))
    return ds.subset(perm)


@dataclasses.dataclass
class FoldAssignment:
    """Maps each sample to one of k folds."""

    fold_of: np.ndarray
    k: int

    def test_indices(self, fold):
        return np.flatnonzero(self.fold_of == fold)

    def train_indices(self, fold):
        return np.flatnonzero(self.fold_of != fold)


def kfold(n, k, seed=None):
    """Assign n samples to k folds of near-equal size.

    With a seed the assignment comes from a seeded permutation; without one
    it is contiguous blocks. Fold sizes differ by at most one, the larger
    folds first.
    """
    if not 2 <= k <= n:
        raise DataError(f"cannot split {n} samples into {k} folds")
    if seed is None:
        idx = np.arange(n)
    else:
        idx = np.random.default_rng(seed).permutation(n)
    fold_of = np.empty(n, dtype=np.int64)
    base, extra = divmod(n, k)
    start = 0
    for f in range(k):
        size = base + (1 if f < extra else 0)
        fold_of[idx[start:start + size]] = f
        start += size
    return FoldAssignment(fold_of, k)


class Standardizer:
    """Column-wise (x - mean) / std; zero-variance columns are left unscaled."""

    def fit(self, X):
        X = np.asarray(X, dtype=np.float64)
        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        std[std == 0.0] = 1.0
        self.std_ = std
        return self

    def transform(self, X):
        return (np.asarray(X, dtype=np.float64) - self.mean_) / self.std_

    def fit_transform(self, X):
        return self.fit(X).transform(X)
