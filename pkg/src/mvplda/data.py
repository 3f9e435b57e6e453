"""Labelled feature containers."""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyDataset


@dataclass(frozen=True)
class LabeledVector:
    features: np.ndarray
    label_a: int
    label_b: int


def _dense(labels):
    labels = np.asarray(labels)
    ids, dense = np.unique(labels, return_inverse=True)
    return dense.astype(np.int64), ids


class Dataset:
    """Feature vectors carrying two label views.

    ``label_a`` (e.g. speaker) and ``label_b`` (e.g. phrase) are dense
    integer ids starting at 0. ``ids_a[k]`` and ``ids_b[k]`` keep the
    original id of dense label ``k``.
    """

    def __init__(self, x, label_a, label_b, ids_a=None, ids_b=None):
        x = np.asarray(x, dtype=float)
        if x.ndim != 2:
            raise DimensionMismatch(f"features must be a 2-D array, got shape {x.shape}")
        if x.shape[0] == 0:
            raise EmptyDataset("dataset has no vectors")
        label_a = np.asarray(label_a, dtype=np.int64)
        label_b = np.asarray(label_b, dtype=np.int64)
        if label_a.shape != (x.shape[0],) or label_b.shape != (x.shape[0],):
            raise DimensionMismatch("one label per view is required for every vector")
        for name, lab in (("label_a", label_a), ("label_b", label_b)):
            if lab.min() < 0 or np.unique(lab).size != lab.max() + 1:
                raise ValueError(f"{name} must be dense ids starting at 0")
        self.x = x
        self.label_a = label_a
        self.label_b = label_b
        self.ids_a = np.arange(label_a.max() + 1) if ids_a is None else np.asarray(ids_a)
        self.ids_b = np.arange(label_b.max() + 1) if ids_b is None else np.asarray(ids_b)

    @classmethod
    def from_labels(cls, x, label_a, label_b):
        """Build from arbitrary integer labels, re-indexing them densely."""
        a, ids_a = _dense(label_a)
        b, ids_b = _dense(label_b)
        return cls(x, a, b, ids_a, ids_b)

    @classmethod
    def from_vectors(cls, vectors):
        vectors = list(vectors)
        if not vectors:
            raise EmptyDataset("no vectors given")
        x = np.stack([np.asarray(v.features, dtype=float) for v in vectors])
        return cls.from_labels(x, [v.label_a for v in vectors], [v.label_b for v in vectors])

    @property
    def dim(self):
        return self.x.shape[1]

    @property
    def n_a(self):
        return self.ids_a.size

    @property
    def n_b(self):
        return self.ids_b.size

    def __len__(self):
        return self.x.shape[0]

    def __getitem__(self, k):
        return LabeledVector(self.x[k], int(self.label_a[k]), int(self.label_b[k]))

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]

    def original_labels(self):
        return self.ids_a[self.label_a], self.ids_b[self.label_b]

    def cells(self):
        """Dense cell index of every vector and the ``(a, b)`` pair of each cell."""
        keys = self.label_a * self.n_b + self.label_b
        uniq, index = np.unique(keys, return_inverse=True)
        pairs = np.stack([uniq // self.n_b, uniq % self.n_b], axis=1)
        return index.astype(np.int64), pairs

    def mean(self):
        return self.x.mean(axis=0)


@dataclass(frozen=True)
class GroupedData:
    """Sufficient statistics of centred data grouped by a class index."""

    mu: np.ndarray
    counts: np.ndarray
    sums: np.ndarray
    sumsq: np.ndarray

    @property
    def n(self):
        return int(self.counts.sum())


def group_data(x, groups, mu=None):
    """Per-group counts and sums of ``x - mu`` (``mu`` defaults to the global mean)."""
    x = np.asarray(x, dtype=float)
    groups = np.asarray(groups, dtype=np.int64)
    if x.shape[0] == 0:
        raise EmptyDataset("dataset has no vectors")
    if groups.shape != (x.shape[0],):
        raise DimensionMismatch("one group index per vector is required")
    mu = x.mean(axis=0) if mu is None else np.asarray(mu, dtype=float)
    r = x - mu
    n_groups = groups.max() + 1
    counts = np.bincount(groups, minlength=n_groups)
    if np.any(counts == 0):
        raise ValueError("group indices must be dense")
    sums = np.zeros((n_groups, x.shape[1]))
    np.add.at(sums, groups, r)
    return GroupedData(mu=mu, counts=counts, sums=sums, sumsq=np.sum(r * r, axis=0))
