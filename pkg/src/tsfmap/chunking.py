"""Multi-level partitions from agglomerative linkage.

The dendrogram of a point set is cut at the merge steps that are followed by
the widest jumps in merge distance. Widest jumps come first, and a further
cut is only kept if it lies below (finer than) every cut kept before it, so
the result is a coarse-to-fine list of partitions.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from .validation import check_points

METHODS = ("single", "complete", "average", "ward")


@dataclass
class LinkageMatrix:
    """Merge records ``(a, b, distance, size)`` in formation order.

    Cluster ids below n are input points; merge ``i`` creates id ``n + i``.
    """

    rows: np.ndarray
    method: str = "single"

    @property
    def n(self) -> int:
        return self.rows.shape[0] + 1

    @property
    def distances(self) -> np.ndarray:
        return self.rows[:, 2]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["a", "b", "dist", "size"])
            for a, b, d, s in self.rows:
                writer.writerow([int(a), int(b), repr(float(d)), int(s)])

    @classmethod
    def from_csv(cls, path, method: str = "single") -> "LinkageMatrix":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            rows = [[float(r["a"]), float(r["b"]), float(r["dist"]), float(r["size"])]
                    for r in reader]
        return cls(np.array(rows, dtype=float), method)


@dataclass
class LevelSelection:
    gaps: np.ndarray
    kept_ids: list[int]

    @property
    def H(self) -> int:
        return len(self.kept_ids)


@dataclass
class ChunkMatrix:
    """One row of labels per extracted level, coarsest first."""

    levels: np.ndarray
    kept_ids: list[int] = field(default_factory=list)
    method: str = "single"

    @property
    def L(self) -> int:
        return self.levels.shape[0]

    @property
    def n(self) -> int:
        return self.levels.shape[1]

    def to_dict(self) -> dict:
        return {
            "levels": self.levels.astype(int).tolist(),
            "kept_ids": [int(i) for i in self.kept_ids],
            "method": self.method,
        }

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n", encoding="utf-8")

    @classmethod
    def from_dict(cls, data: dict) -> "ChunkMatrix":
        levels = np.asarray(data["levels"], dtype=np.int64)
        if levels.ndim != 2:
            raise ValueError("'levels' must be a list of equally long label rows")
        return cls(levels, list(data.get("kept_ids", [])), data.get("method", "single"))

    @classmethod
    def from_json(cls, path) -> "ChunkMatrix":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _lance_williams(method, d_ik, d_jk, d_ij, n_i, n_j, n_k):
    if method == "single":
        return np.minimum(d_ik, d_jk)
    if method == "complete":
        return np.maximum(d_ik, d_jk)
    if method == "average":
        return (n_i * d_ik + n_j * d_jk) / (n_i + n_j)
    total = n_i + n_j + n_k
    sq = ((n_i + n_k) * d_ik ** 2 + (n_j + n_k) * d_jk ** 2 - n_k * d_ij ** 2) / total
    return np.sqrt(np.maximum(sq, 0.0))


def linkage(points, method: str = "single") -> LinkageMatrix:
    """Agglomerative clustering under Euclidean distance.

    Among equally close pairs the one with the smallest ``(a, b)`` cluster ids
    merges first.
    """
    if method not in METHODS:
        raise ValueError(f"unknown linkage method {method!r}; choose from {METHODS}")
    x = check_points(points)
    n = x.shape[0]
    if n < 3:
        raise ValueError(f"linkage needs at least 3 points, got {n}")

    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=-1))
    # slot s holds the cluster whose id is ids[s]; active slots are kept in id order
    ids = list(range(n))
    sizes = [1] * n
    active = list(range(n))
    rows = np.empty((n - 1, 4))
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    for step in range(n - 1):
        m = len(active)
        sub = dist[np.ix_(active, active)]
        masked = np.where(upper[:m, :m], sub, np.inf)
        flat = int(np.argmin(masked))
        p, q = divmod(flat, m)
        si, sj = active[p], active[q]
        d_ij = dist[si, sj]
        n_i, n_j = sizes[si], sizes[sj]
        rows[step] = (ids[si], ids[sj], d_ij, n_i + n_j)

        rest = [s for s in active if s not in (si, sj)]
        if rest:
            rest_arr = np.array(rest)
            n_k = np.array([sizes[s] for s in rest], dtype=float)
            new = _lance_williams(method, dist[si, rest_arr], dist[sj, rest_arr], d_ij, n_i, n_j, n_k)
            dist[si, rest_arr] = new
            dist[rest_arr, si] = new
        # reuse slot si for the merged cluster, which has the largest id so far
        ids[si] = n + step
        sizes[si] = n_i + n_j
        active = rest + [si]

    rows[:, 2] = np.maximum.accumulate(rows[:, 2])
    return LinkageMatrix(rows, method)


def branch_gaps(Z: LinkageMatrix) -> np.ndarray:
    """Jump in merge distance after each merge; ``gaps[i]`` follows merge ``i``."""
    return np.diff(Z.distances)


def select_levels(gaps) -> LevelSelection:
    """Pick cut positions from the widest gap downwards.

    A cut after merge ``i`` leaves ``n - i - 1`` clusters. Gaps are visited
    widest first (equal gaps: later merge first) and an index is kept only if
    it is smaller than every index kept so far. Zero gaps do not separate
    anything and are ignored unless every gap is zero.
    """
    gaps = np.asarray(gaps, dtype=float)
    if gaps.size == 0:
        raise ValueError("need at least one gap")
    idx = np.arange(gaps.size)
    order = np.lexsort((-idx, -gaps))
    kept = []
    for i in order:
        if gaps[i] <= 0:
            continue
        if not kept or i < kept[-1]:
            kept.append(int(i))
    if not kept:
        kept = [int(order[0])]
    return LevelSelection(gaps=gaps, kept_ids=kept)


def cut(Z: LinkageMatrix, n_clusters: int) -> np.ndarray:
    """Flat labels with ``n_clusters`` groups, numbered by smallest member."""
    n = Z.n
    if not 1 <= n_clusters <= n:
        raise ValueError(f"n_clusters must lie in [1, {n}], got {n_clusters}")
    parent = list(range(2 * n - 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for step in range(n - n_clusters):
        a, b = int(Z.rows[step, 0]), int(Z.rows[step, 1])
        parent[find(a)] = n + step
        parent[find(b)] = n + step
    roots = [find(i) for i in range(n)]
    seen: dict[int, int] = {}
    return np.array([seen.setdefault(r, len(seen)) for r in roots], dtype=np.int64)


def chunk(points, method: str = "single") -> ChunkMatrix:
    """Extract the coarse-to-fine label matrix of a point set."""
    Z = linkage(points, method)
    sel = select_levels(branch_gaps(Z))
    levels = np.array([cut(Z, Z.n - i - 1) for i in sel.kept_ids])
    return ChunkMatrix(levels, sel.kept_ids, method)


class HierarchicalChunking(ClusterMixin, BaseEstimator):
    """Estimator wrapper around :func:`chunk`.

    After ``fit`` the label matrix is in ``levels_`` (coarsest row first) and
    ``labels_`` holds its first row.
    """

    def __init__(self, method="single"):
        self.method = method

    def fit(self, X, y=None):
        self.linkage_ = linkage(X, self.method)
        self.selection_ = select_levels(branch_gaps(self.linkage_))
        self.chunks_ = ChunkMatrix(
            np.array([cut(self.linkage_, self.linkage_.n - i - 1)
                      for i in self.selection_.kept_ids]),
            self.selection_.kept_ids, self.method)
        self.levels_ = self.chunks_.levels
        self.labels_ = self.levels_[0]
        self.n_levels_ = self.chunks_.L
        return self

    def fit_predict(self, X, y=None):
        """Return the full label matrix instead of a single labelling."""
        return self.fit(X).levels_

    def cut(self, n_clusters):
        check_is_fitted(self, "linkage_")
        return cut(self.linkage_, n_clusters)
