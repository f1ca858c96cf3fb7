"""Group-annotated binary classification data: CSV I/O, stratified splits and
a synthetic generator with per-group class imbalance."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

# Cell order used everywhere a (group, class) count tuple appears.
CELL_ORDER: tuple[tuple[int, int], ...] = ((0, 1), (0, 0), (1, 1), (1, 0))

# Hate / non-Hate counts for the two dialect groups of a dialect-annotated hate-speech corpus.
DIALECT_CELLS: tuple[int, int, int, int] = (8725, 302, 11895, 3861)


class DatasetError(ValueError):
    """Raised for malformed or degenerate data."""


@dataclass(frozen=True)
class Sample:
    features: np.ndarray
    class_label: int
    group_label: int


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix with a binary class label and binary group label per row.

    Arrays are frozen on construction so a Dataset can be shared freely.
    """

    features: np.ndarray
    labels: np.ndarray
    groups: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.features, dtype=np.float64)
        z = np.asarray(self.labels)
        s = np.asarray(self.groups)
        if x.ndim != 2:
            raise DatasetError(f"features must be 2-D, got shape {x.shape}")
        n, f = x.shape
        if n < 1:
            raise DatasetError("empty dataset")
        if f < 1:
            raise DatasetError("feature_dim must be positive")
        if z.shape != (n,) or s.shape != (n,):
            raise DatasetError("labels and groups must have one entry per sample")
        if not np.all(np.isfinite(x)):
            raise DatasetError("features contain non-finite values")
        for name, v in (("label", z), ("group", s)):
            if not np.all((v == 0) | (v == 1)):
                raise DatasetError(f"{name} values must be 0 or 1")
        object.__setattr__(self, "features", _readonly(x))
        object.__setattr__(self, "labels", _readonly(z.astype(np.int64)))
        object.__setattr__(self, "groups", _readonly(s.astype(np.int64)))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> Sample:
        return Sample(self.features[i], int(self.labels[i]), int(self.groups[i]))

    def __iter__(self) -> Iterator[Sample]:
        for i in range(self.n):
            yield self[i]

    def subset(self, index: np.ndarray) -> Dataset:
        index = np.asarray(index)
        return Dataset(self.features[index], self.labels[index], self.groups[index])

    def group_mask(self, g: int) -> np.ndarray:
        return self.groups == g


def load_csv(path: str | Path) -> Dataset:
    """Read ``label,group,f0,...,f{F-1}`` rows into a Dataset, keeping row order."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset file not found: {path}")
    labels: list[int] = []
    groups: list[int] = []
    rows: list[list[float]] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DatasetError("empty dataset")
        header = [h.strip() for h in header]
        n_feat = len(header) - 2
        expected = ["label", "group"] + [f"f{i}" for i in range(n_feat)]
        if n_feat < 1 or header != expected:
            raise DatasetError(f"bad header at line 1: expected label,group,f0,...")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != n_feat + 2:
                raise DatasetError(
                    f"malformed row at line {lineno}: expected {n_feat + 2} fields, got {len(row)}"
                )
            try:
                vals = [float(v) for v in row]
            except ValueError:
                raise DatasetError(f"malformed row at line {lineno}: non-numeric field") from None
            for name, v, sink in (("label", vals[0], labels), ("group", vals[1], groups)):
                if v not in (0.0, 1.0):
                    raise DatasetError(f"{name} not binary at line {lineno}")
                sink.append(int(v))
            feats = vals[2:]
            if not all(math.isfinite(v) for v in feats):
                raise DatasetError(f"non-finite feature at line {lineno}")
            rows.append(feats)
    if not rows:
        raise DatasetError("empty dataset")
    return Dataset(np.array(rows, dtype=np.float64), np.array(labels), np.array(groups))


def write_csv(d: Dataset, path: str | Path) -> None:
    """Write ``d`` in the format read by :func:`load_csv` (floats at 17 digits)."""
    path = Path(path)
    header = ["label", "group"] + [f"f{i}" for i in range(d.feature_dim)]
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for x, z, s in zip(d.features, d.labels, d.groups):
            fh.write(f"{z},{s}," + ",".join(format(v, ".17g") for v in x) + "\n")


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def stratified_split(d: Dataset, spec: SplitSpec = SplitSpec()) -> tuple[Dataset, Dataset]:
    """Split each group separately: floor(fraction * count) rows go to train.

    Rows keep their original relative order inside each part.
    """
    rng = np.random.default_rng(spec.seed)
    train_idx: list[np.ndarray] = []
    test_idx: list[np.ndarray] = []
    for g in (0, 1):
        idx = np.flatnonzero(d.groups == g)
        if idx.size == 0:
            continue
        if idx.size < 2:
            raise DatasetError(f"group {g} has fewer than 2 samples")
        # small slack so e.g. 0.29 * 100 floors to 29, not 28
        k = math.floor(spec.train_fraction * idx.size + 1e-9)
        perm = rng.permutation(idx)
        train_idx.append(perm[:k])
        test_idx.append(perm[k:])
    train = np.sort(np.concatenate(train_idx))
    test = np.sort(np.concatenate(test_idx))
    if train.size == 0 or test.size == 0:
        raise DatasetError("split produced an empty part")
    return d.subset(train), d.subset(test)


LAYOUTS = ("split", "shared")


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of the synthetic generator.

    ``cells`` holds sample counts in :data:`CELL_ORDER`, i.e.
    (group0/class1, group0/class0, group1/class1, group1/class0).
    ``separation[g]`` is the distance from the origin of group g's class
    means, in units of ``noise_scale``.
    """

    cells: tuple[int, int, int, int] = DIALECT_CELLS
    feature_dim: int = 8
    separation: tuple[float, float] = (1.6, 4.5)
    group_shift: float = 1.0
    noise_scale: float = 1.0
    layout: str = "split"
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "cells", tuple(int(c) for c in self.cells))
        object.__setattr__(self, "separation", tuple(float(s) for s in self.separation))
        if len(self.cells) != 4 or any(c < 0 for c in self.cells):
            raise ValueError("cells must be four non-negative counts")
        if sum(self.cells) == 0:
            raise DatasetError("synthetic config has zero total samples")
        if len(self.separation) != 2 or any(s < 0 for s in self.separation):
            raise ValueError("separation must be two non-negative reals")
        if self.layout not in LAYOUTS:
            raise ValueError(f"layout must be one of {LAYOUTS}")
        min_dim = 4 if self.layout == "split" else 2
        if self.feature_dim < min_dim:
            raise ValueError(f"feature_dim must be at least {min_dim} for layout {self.layout!r}")
        if self.noise_scale <= 0:
            raise ValueError("noise_scale must be positive")


def class_directions(cfg: SynthConfig) -> np.ndarray:
    """Unit class-signal direction of each group, shape (2, feature_dim).

    Both directions live in the first half of the dimensions. Group 0 loads
    every coordinate of that block equally. With the ``split`` layout group 1
    alternates signs across the block, which makes the two directions
    orthogonal when the block has even length; ``shared`` gives both groups
    the same direction.

    The optimizer scales each coordinate separately, so rotating this basis
    changes training paths even though the data distribution only rotates.
    """
    half = cfg.feature_dim // 2
    dirs = np.zeros((2, cfg.feature_dim))
    dirs[:, :half] = 1.0 / math.sqrt(half)
    if cfg.layout == "split":
        dirs[1, 1:half:2] *= -1.0
    return dirs


def generate_synthetic(cfg: SynthConfig = SynthConfig()) -> Dataset:
    """Draw Gaussian features for every (group, class) cell of ``cfg``.

    Class c of group g is centred at ``(+1 if c else -1) * separation[g]``
    along that group's class direction (see :func:`class_directions`). The
    second half of the dimensions carries the group: ``+group_shift`` per
    coordinate for group 0, ``-group_shift`` for group 1. Isotropic Gaussian
    noise of scale ``noise_scale`` is added, and all separations are
    multiplied by it too so they stay in noise units. Rows are emitted cell
    by cell in :data:`CELL_ORDER`.
    """
    rng = np.random.default_rng(cfg.seed)
    f = cfg.feature_dim
    half = f // 2
    dirs = class_directions(cfg)
    blocks, labels, groups = [], [], []
    for (g, c), count in zip(CELL_ORDER, cfg.cells):
        mean = (1.0 if c == 1 else -1.0) * cfg.separation[g] * dirs[g]
        mean[half:] = cfg.group_shift if g == 0 else -cfg.group_shift
        mean *= cfg.noise_scale
        blocks.append(mean + cfg.noise_scale * rng.standard_normal((count, f)))
        labels.append(np.full(count, c))
        groups.append(np.full(count, g))
    return Dataset(np.vstack(blocks), np.concatenate(labels), np.concatenate(groups))


@dataclass(frozen=True)
class DatasetStats:
    counts: np.ndarray = field(repr=False)  # counts[group, class]
    n: int
    p: int
    q: int
    group_proportion: tuple[float, float]
    class_proportion: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "q": self.q,
            "cells": {
                f"g{g}_c{c}": int(self.counts[g, c]) for g in (0, 1) for c in (1, 0)
            },
            "group_proportion": list(self.group_proportion),
            "class_proportion": list(self.class_proportion),
        }


def dataset_stats(d: Dataset) -> DatasetStats:
    """(group, class) contingency counts plus minority/majority class sizes."""
    counts = np.zeros((2, 2), dtype=np.int64)
    np.add.at(counts, (d.groups, d.labels), 1)
    per_class = counts.sum(axis=0)
    per_group = counts.sum(axis=1)
    n = int(counts.sum())
    return DatasetStats(
        counts=counts,
        n=n,
        p=int(per_class.min()),
        q=int(per_class.max()),
        group_proportion=(per_group[0] / n, per_group[1] / n),
        class_proportion=(per_class[0] / n, per_class[1] / n),
    )
