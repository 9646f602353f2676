"""Scoring predicted hierarchies and analysing training trajectories."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chunking import ChunkMatrix


def _entropy(counts):
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log2(p)).sum())


def nmi(pred, truth) -> float:
    """Normalised mutual information ``2 I / (H(pred) + H(truth))`` in bits.

    Two single-cluster labellings score 1; otherwise a zero denominator
    scores 0.
    """
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.size != truth.size:
        raise ValueError(f"length mismatch: {pred.size} predictions vs {truth.size} labels")
    if pred.size == 0:
        raise ValueError("cannot score empty labellings")
    _, pi = np.unique(pred, return_inverse=True)
    _, ti = np.unique(truth, return_inverse=True)
    table = np.zeros((pi.max() + 1, ti.max() + 1))
    np.add.at(table, (pi, ti), 1)
    h_pred = _entropy(table.sum(axis=1))
    h_truth = _entropy(table.sum(axis=0))
    denom = h_pred + h_truth
    if denom == 0:
        return 1.0
    joint = _entropy(table.ravel())
    mi = h_pred + h_truth - joint
    return float(min(max(2.0 * mi / denom, 0.0), 1.0))


@dataclass
class EvalReport:
    per_level: list[float]
    score: float
    n_levels: int


def hierarchical_score(pred, truth) -> EvalReport:
    """Average per-level NMI over the truth's levels.

    Prediction row i is compared with truth row i; extra prediction rows are
    ignored and missing ones score zero.
    """
    levels = pred.levels if isinstance(pred, ChunkMatrix) else np.atleast_2d(pred)
    truth = np.atleast_2d(truth)
    if levels.size and levels.shape[1] != truth.shape[1]:
        raise ValueError(
            f"prediction covers {levels.shape[1]} variables, truth covers {truth.shape[1]}")
    per_level = [
        nmi(levels[i], truth[i]) if i < levels.shape[0] else 0.0
        for i in range(truth.shape[0])
    ]
    return EvalReport(per_level, float(np.mean(per_level)), truth.shape[0])


def numerical_rank(w, tol: float = 1e-6) -> int:
    """Number of singular values above ``tol`` times the largest one."""
    s = np.linalg.svd(np.asarray(w, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int((s > tol * s[0]).sum())


def moving_average(values, window: int = 10) -> np.ndarray:
    """Trailing mean over the last ``window`` points (fewer at the start)."""
    values = np.asarray(values, dtype=float)
    return np.array([values[max(0, i - window + 1):i + 1].mean() for i in range(values.size)])


def pairwise_distances(w) -> np.ndarray:
    """Condensed vector of ``|w_i - w_j|`` for ``i < j``."""
    w = np.asarray(w, dtype=float)
    iu = np.triu_indices(w.shape[0], 1)
    return np.linalg.norm(w[iu[0]] - w[iu[1]], axis=1)


@dataclass
class RunTrace:
    """Per-evaluation records of a training run.

    ``rates[i]`` is the mean absolute change of all pairwise distances between
    snapshot ``i`` and the one before, per simulation step.
    """

    steps: np.ndarray
    rates: np.ndarray
    ranks: np.ndarray
    scores: np.ndarray | None = None


def distance_change_rate(prev, cur, gap) -> float:
    return float(np.abs(pairwise_distances(cur) - pairwise_distances(prev)).mean() / gap)


def phase_trace(snapshots, scores=None) -> RunTrace:
    """Rate of change of pairwise weight distances along a snapshot trajectory."""
    if len(snapshots) < 2:
        raise ValueError("need at least two snapshots")
    steps, rates, ranks = [], [], []
    for prev, cur in zip(snapshots, snapshots[1:]):
        gap = cur.step - prev.step
        if gap <= 0:
            raise ValueError("snapshot steps must strictly increase")
        steps.append(cur.step)
        rates.append(distance_change_rate(prev.w, cur.w, gap))
        ranks.append(numerical_rank(cur.w))
    return RunTrace(np.array(steps), np.array(rates), np.array(ranks),
                    None if scores is None else np.asarray(scores, dtype=float))
