"""Baselines built on the empirical transition matrix of a sequence.

``tp_chunk`` feeds the rows of the transition-probability matrix straight
into the hierarchical chunking. ``greedy_maximize`` runs Clauset-Newman-Moore
greedy modularity agglomeration on the symmetrised matrix and keeps every
local maximum of the modularity trajectory as one hierarchy level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .chunking import ChunkMatrix, chunk
from .validation import check_sequence


@dataclass
class TransitionCountMatrix:
    counts: np.ndarray

    @property
    def n(self) -> int:
        return self.counts.shape[0]

    @property
    def probabilities(self) -> np.ndarray:
        totals = self.counts.sum(axis=1, keepdims=True)
        return np.divide(self.counts, totals, out=np.zeros(self.counts.shape),
                         where=totals > 0)

    def __add__(self, other: "TransitionCountMatrix") -> "TransitionCountMatrix":
        return TransitionCountMatrix(self.counts + other.counts)


def tp_matrix(seq, n: int | None = None) -> TransitionCountMatrix:
    """Count every adjacent ``(a, b)`` pair of the sequence."""
    seq = check_sequence(seq, n, min_length=2)
    n = int(seq.max()) + 1 if n is None else n
    counts = np.zeros((n, n), dtype=np.int64)
    np.add.at(counts, (seq[:-1], seq[1:]), 1)
    return TransitionCountMatrix(counts)


def tp_chunk(tp: TransitionCountMatrix, method: str = "single") -> ChunkMatrix:
    return chunk(tp.probabilities, method)


def symmetrize(tp) -> np.ndarray:
    """Undirected weights ``(P + P.T) / 2`` without self-loops."""
    p = tp.probabilities if isinstance(tp, TransitionCountMatrix) else np.asarray(tp, float)
    a = (p + p.T) / 2.0
    np.fill_diagonal(a, 0.0)
    return a


def modularity(partition, adjacency) -> float:
    """Weighted modularity ``sum_c (e_c - a_c**2)`` of a node partition."""
    a = np.asarray(adjacency, dtype=float)
    labels = np.asarray(partition)
    if labels.shape[0] != a.shape[0]:
        raise ValueError("partition must cover every node")
    total = a.sum()
    if total <= 0:
        raise ValueError("graph has no edges")
    degree = a.sum(axis=1)
    q = 0.0
    for c in np.unique(labels):
        members = labels == c
        q += a[np.ix_(members, members)].sum() / total - (degree[members].sum() / total) ** 2
    return float(q)


@dataclass
class CommunityHierarchy:
    """Full greedy trajectory plus the partitions chosen as levels.

    ``partitions[t]`` is the partition after ``t`` merges (``t = 0`` is all
    singletons) and ``q[t]`` its modularity.
    """

    partitions: np.ndarray
    q: np.ndarray
    selected: list[int]

    def levels(self) -> np.ndarray:
        return self.partitions[self.selected]


def greedy_maximize(adjacency) -> CommunityHierarchy:
    """Merge the pair of communities with the largest modularity gain until one remains.

    Equal gains go to the pair with the smallest community ids. Merges of
    unconnected communities are allowed once nothing else is left, so the
    trajectory always has ``n - 1`` merges.
    """
    a = np.asarray(adjacency, dtype=float)
    n = a.shape[0]
    total = a.sum()
    if total <= 0:
        raise ValueError("graph has no edges")
    e = a / total
    deg = e.sum(axis=1)
    alive = np.ones(n, dtype=bool)
    labels = np.arange(n)
    partitions = [labels.copy()]
    q = [float(np.trace(e) - (deg ** 2).sum())]
    for _ in range(n - 1):
        gain = 2.0 * (e - np.outer(deg, deg))
        mask = np.triu(np.outer(alive, alive), 1)
        gain = np.where(mask, gain, -np.inf)
        i, j = divmod(int(np.argmax(gain)), n)
        q.append(q[-1] + float(gain[i, j]))
        # fold community j into i
        e[i, :] += e[j, :]
        e[:, i] += e[:, j]
        e[j, :] = 0.0
        e[:, j] = 0.0
        deg[i] += deg[j]
        deg[j] = 0.0
        alive[j] = False
        labels[labels == j] = i
        partitions.append(_dense(labels))
    q = np.array(q)
    return CommunityHierarchy(np.array(partitions), q, local_maxima(q))


def local_maxima(q) -> list[int]:
    """Interior-or-final peaks of a trajectory, best first (ties: earlier)."""
    q = np.asarray(q)
    peaks = [t for t in range(1, len(q))
             if q[t] > q[t - 1] and (t == len(q) - 1 or q[t] >= q[t + 1])]
    if not peaks:
        peaks = [int(np.argmax(q))]
    return sorted(peaks, key=lambda t: (-q[t], t))


def _dense(labels):
    seen: dict[int, int] = {}
    return np.array([seen.setdefault(int(x), len(seen)) for x in labels])


def modularity_chunk(tp) -> ChunkMatrix:
    hierarchy = greedy_maximize(symmetrize(tp))
    return ChunkMatrix(hierarchy.levels(), hierarchy.selected, "modularity")


class TransitionMatrixChunking(ClusterMixin, BaseEstimator):
    """Hierarchical chunking on the rows of the empirical transition matrix.

    ``fit`` takes a symbol sequence; ``levels_`` holds the label matrix.
    """

    def __init__(self, n_states=None, method="single"):
        self.n_states = n_states
        self.method = method

    def fit(self, X, y=None):
        self.tp_ = tp_matrix(X, self.n_states)
        self.chunks_ = tp_chunk(self.tp_, self.method)
        self.levels_ = self.chunks_.levels
        self.labels_ = self.levels_[0]
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).levels_


class ModularityChunking(ClusterMixin, BaseEstimator):
    """Greedy modularity communities of the symmetrised transition graph."""

    def __init__(self, n_states=None):
        self.n_states = n_states

    def fit(self, X, y=None):
        self.tp_ = tp_matrix(X, self.n_states)
        self.hierarchy_ = greedy_maximize(symmetrize(self.tp_))
        self.chunks_ = ChunkMatrix(self.hierarchy_.levels(), self.hierarchy_.selected,
                                   "modularity")
        self.levels_ = self.chunks_.levels
        self.labels_ = self.levels_[0]
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).levels_
