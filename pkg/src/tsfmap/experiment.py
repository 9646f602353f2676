"""Multi-seed benchmark protocol.

For every seed a stream is generated from the environment and fed to the
method in blocks of ``eval_every`` transitions. After each block the current
prediction is scored against the ground truth of the phase that produced the
block's last transition.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baselines import TransitionCountMatrix, modularity_chunk, tp_chunk
from .chunking import chunk
from .dynamics import DynamicsConfig, SigmaMap, Simulator
from .encoding import SequenceConfig
from .envgen import Environment, run_env
from .evaluation import distance_change_rate, hierarchical_score, moving_average, numerical_rank

METHODS = ("tsfmap", "tp", "modularity")
DEFAULT_SEEDS = 30


@dataclass
class ExperimentResult:
    """Score tables of shape (seeds, evaluation points).

    ``rates`` and ``ranks`` are only filled for the tsfmap method.
    """

    method: str
    seeds: list[int]
    steps: np.ndarray
    scores: np.ndarray
    rates: np.ndarray | None = None
    ranks: np.ndarray | None = None
    final_weights: list[np.ndarray] = field(default_factory=list)

    def mean(self) -> np.ndarray:
        return self.scores.mean(axis=0)

    def std(self) -> np.ndarray:
        return self.scores.std(axis=0)

    def smoothed(self, window: int = 10) -> np.ndarray:
        return np.array([moving_average(row, window) for row in self.scores])

    def final_scores(self) -> np.ndarray:
        return self.scores[:, -1]

    def write_results(self, path, window: int = 10) -> None:
        smooth = self.smoothed(window)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["seed", "step", "score", "score_smoothed"])
            for s, seed in enumerate(self.seeds):
                for t, step in enumerate(self.steps):
                    writer.writerow([seed, int(step), repr(float(self.scores[s, t])),
                                     repr(float(smooth[s, t]))])

    def write_summary(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "mean", "std"])
            for step, m, sd in zip(self.steps, self.mean(), self.std()):
                writer.writerow([int(step), repr(float(m)), repr(float(sd))])

    def write_trace(self, path) -> None:
        if self.rates is None:
            raise ValueError(f"method {self.method!r} records no trace")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["seed", "step", "rate", "rank"])
            for s, seed in enumerate(self.seeds):
                for t, step in enumerate(self.steps):
                    writer.writerow([seed, int(step), repr(float(self.rates[s, t])),
                                     int(self.ranks[s, t])])


def seed_streams(seed):
    """Independent seeds for the walk and the weight initialisation."""
    walk, init = np.random.SeedSequence(seed).spawn(2)
    return walk, init


def _run_seed(env: Environment, method: str, seed: int, eval_every: int, tau, linkage,
              cfg_d: DynamicsConfig, tstep: int, m: int):
    walk_seed, init_seed = seed_streams(seed)
    data = run_env(env, walk_seed, tau)
    seq = data.sequence
    n = env.n
    steps, scores, rates, ranks = [], [], [], []

    if method == "tsfmap":
        cfg_s = SequenceConfig(n=n, tau=seq.size, tstep=tstep, m=m)
        sim = Simulator(SigmaMap.random(n, cfg_d.k, init_seed), cfg_s, cfg_d)
        prev = sim.sigma.w.copy()
    else:
        counts = np.zeros((n, n), dtype=np.int64)

    for begin in range(0, seq.size, eval_every):
        block = seq[begin:begin + eval_every]
        end = begin + block.size
        if method == "tsfmap":
            sim.feed(block)
            w = sim.sigma.w
            pred = chunk(w, linkage)
            rates.append(distance_change_rate(prev, w, block.size * tstep))
            ranks.append(numerical_rank(w))
            prev = w.copy()
        else:
            lo = max(begin - 1, 0)
            np.add.at(counts, (seq[lo:end - 1], seq[lo + 1:end]), 1)
            tp = TransitionCountMatrix(counts)
            pred = tp_chunk(tp, linkage) if method == "tp" else modularity_chunk(tp)
        steps.append(end)
        scores.append(hierarchical_score(pred, data.truth_at(end - 1)).score)

    out = {"steps": np.array(steps), "scores": np.array(scores)}
    if method == "tsfmap":
        out.update(rates=np.array(rates), ranks=np.array(ranks), weights=sim.sigma.w.copy())
    return out


def worker_count(jobs: int) -> int:
    cap = os.environ.get("TSFMAP_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(jobs, limit))


def run_experiment(env: Environment, method: str = "tsfmap", seeds=DEFAULT_SEEDS,
                   eval_every: int = 1000, tau: int | None = None, linkage: str = "single",
                   cfg_d: DynamicsConfig | None = None, tstep: int = 10, m: int = 10,
                   workers: int | None = None) -> ExperimentResult:
    """Run ``method`` on ``env`` for each seed (a count means seeds ``0..count-1``)."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if eval_every < 1:
        raise ValueError("eval_every must be >= 1")
    seed_list = list(range(seeds)) if isinstance(seeds, (int, np.integer)) else list(seeds)
    if not seed_list:
        raise ValueError("need at least one seed")
    cfg_d = cfg_d or DynamicsConfig()
    args = [(env, method, s, eval_every, tau, linkage, cfg_d, tstep, m) for s in seed_list]
    workers = worker_count(len(seed_list)) if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            runs = list(pool.map(_run_seed_args, args))
    else:
        runs = [_run_seed(*a) for a in args]

    result = ExperimentResult(method, seed_list, runs[0]["steps"],
                              np.array([r["scores"] for r in runs]))
    if method == "tsfmap":
        result.rates = np.array([r["rates"] for r in runs])
        result.ranks = np.array([r["ranks"] for r in runs])
        result.final_weights = [r["weights"] for r in runs]
    return result


def _run_seed_args(args):
    return _run_seed(*args)
