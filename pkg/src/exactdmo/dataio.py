"""Datasets: CSV I/O, synthetic generators and stratified splitting.

All randomness goes through numpy's PCG64 bit generator seeded from a
``SeedSequence``, which is portable across platforms and supports spawning
independent child streams.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DatasetError(ValueError):
    """Raised for malformed or unusable datasets."""


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def spawn_seeds(seed: int, n: int) -> list[np.random.SeedSequence]:
    """Split one integer seed into ``n`` independent child seeds."""
    return np.random.SeedSequence(int(seed)).spawn(n)


@dataclass(frozen=True)
class Dataset:
    """Binary classification data with positive/negative index bookkeeping."""

    features: np.ndarray
    labels: np.ndarray
    pos_idx: np.ndarray = field(repr=False)
    neg_idx: np.ndarray = field(repr=False)
    feature_names: tuple[str, ...] = ()

    @classmethod
    def from_arrays(cls, features, labels, feature_names=(),
                    allow_single_class: bool = False) -> "Dataset":
        X = np.asarray(features, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(labels)
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DatasetError("labels must be a vector with one entry per row")
        if not np.all((y == 0) | (y == 1)):
            raise DatasetError("non-binary label")
        y = y.astype(np.int64)
        pos = np.flatnonzero(y == 1)
        neg = np.flatnonzero(y == 0)
        if not allow_single_class and (pos.size == 0 or neg.size == 0):
            raise DatasetError("single-class file: both labels 0 and 1 are required")
        if not feature_names:
            feature_names = tuple(f"f{j}" for j in range(X.shape[1]))
        X.setflags(write=False)
        y.setflags(write=False)
        return cls(X, y, pos, neg, tuple(feature_names))

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    @property
    def d(self) -> int:
        return int(self.features.shape[1])

    @property
    def n_pos(self) -> int:
        return int(self.pos_idx.size)

    @property
    def n_neg(self) -> int:
        return int(self.neg_idx.size)

    @property
    def pos_mask(self) -> np.ndarray:
        return self.labels == 1

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset.from_arrays(self.features[idx], self.labels[idx], self.feature_names)

    def standardized(self, mean=None, std=None) -> "Dataset":
        """Per-column standardization; pass train statistics to transform a test set."""
        mean = self.features.mean(axis=0) if mean is None else mean
        std = self.features.std(axis=0) if std is None else std
        std = np.where(std > 0, std, 1.0)
        return Dataset.from_arrays((self.features - mean) / std, self.labels, self.feature_names)


def load_csv(path, label_column: str = "label") -> Dataset:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such dataset file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetError("empty file: header row required") from None
        if label_column not in header:
            raise DatasetError(f"label column {label_column!r} not found in header")
        li = header.index(label_column)
        names = tuple(h for j, h in enumerate(header) if j != li)
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DatasetError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                lab = float(row[li])
            except ValueError:
                raise DatasetError(f"line {lineno}: non-binary label {row[li]!r}") from None
            if lab not in (0.0, 1.0):
                raise DatasetError(f"line {lineno}: non-binary label {row[li]!r}")
            vals = []
            for j, cell in enumerate(row):
                if j == li:
                    continue
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DatasetError(
                        f"line {lineno}: non-numeric feature {header[j]!r}={cell!r}") from None
            rows.append(vals)
            labels.append(int(lab))
    if not rows:
        raise DatasetError("file contains no data rows")
    X = np.array(rows, dtype=float).reshape(len(rows), len(names))
    return Dataset.from_arrays(X, labels, names)


def save_csv(data: Dataset, path, label_column: str = "label") -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*data.feature_names, label_column])
        for x, y in zip(data.features, data.labels):
            w.writerow([repr(float(v)) for v in x] + [int(y)])


def gen_toy1d(n: int, seed: int) -> Dataset:
    """1D imbalanced toy: P(y=1)=0.2, x|y=1 ~ U[-0.5, 2], x|y=0 ~ U[-2, 0.5]."""
    if n < 2:
        raise DatasetError("gen_toy1d needs n >= 2")
    rng = make_rng(seed)
    y = (rng.random(n) < 0.2).astype(np.int64)
    x = np.where(y == 1, rng.uniform(-0.5, 2.0, n), rng.uniform(-2.0, 0.5, n))
    return Dataset.from_arrays(x[:, None], y, ("x",))


def gen_gauss2d(n: int, sep: float, pos_frac: float, seed: int) -> Dataset:
    """Two unit-variance isotropic Gaussian blobs whose means are ``sep`` apart.

    The number of positives is ``round(n * pos_frac)`` clipped to [1, n-1];
    rows are shuffled.
    """
    if n < 4:
        raise DatasetError("gen_gauss2d needs n >= 4")
    if sep < 0:
        raise DatasetError("sep must be nonnegative")
    if not 0.0 < pos_frac < 1.0:
        raise DatasetError("pos_frac must lie in (0, 1)")
    rng = make_rng(seed)
    n_pos = int(np.clip(round(n * pos_frac), 1, n - 1))
    y = np.zeros(n, dtype=np.int64)
    y[:n_pos] = 1
    rng.shuffle(y)
    centers = np.where(y[:, None] == 1, [sep / 2.0, 0.0], [-sep / 2.0, 0.0])
    X = centers + rng.standard_normal((n, 2))
    return Dataset.from_arrays(X, y, ("x0", "x1"))


def split_stratified(data: Dataset, test_frac: float, seed: int) -> tuple[Dataset, Dataset]:
    """Stratified train/test split.

    The test size is ``round(test_frac * N)``; it is shared between the classes
    by largest remainder, then adjusted so each side keeps both classes.
    """
    if not 0.0 < test_frac < 1.0:
        raise DatasetError("test_frac must lie in (0, 1)")
    if data.n_pos < 2 or data.n_neg < 2:
        raise DatasetError("class too small to split: each class needs >= 2 samples")
    rng = make_rng(seed)
    n_test = int(np.clip(round(test_frac * data.n), 2, data.n - 2))
    sizes = np.array([data.n_pos, data.n_neg])
    exact = n_test * sizes / data.n
    alloc = np.floor(exact).astype(int)
    for j in np.argsort(-(exact - alloc), kind="stable")[: n_test - alloc.sum()]:
        alloc[j] += 1
    for j in (0, 1):
        if alloc[j] < 1:
            alloc[j] += 1
            alloc[1 - j] -= 1
        if alloc[j] > sizes[j] - 1:
            alloc[j] -= 1
            alloc[1 - j] += 1
    test_idx = []
    for j, idx in enumerate((data.pos_idx, data.neg_idx)):
        test_idx.append(rng.permutation(idx)[: alloc[j]])
    test_idx = np.sort(np.concatenate(test_idx))
    train_idx = np.setdiff1d(np.arange(data.n), test_idx)
    return data.subset(train_idx), data.subset(test_idx)
