"""Attractor-repeller dynamics of the sigma space.

Each state variable owns a point ``w_i`` in a k-dimensional map. At every
simulation step the recently active states (PS) are pulled towards their own
centroid, while inactive states (NS) are pushed away from both the inactive
and the active centroid. Velocities carry inertia, and after every update the
whole map is rescaled so that its largest absolute coordinate is one.

The per-step rules are available as small numpy functions (``partition_sets``,
``centroids``, ``step``, ``normalize``) which document the behaviour and are
used in tests. ``run`` drives the same rules through a compiled loop.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .encoding import DECAY_RATE, NEVER, ActivationState, SequenceConfig


@dataclass(frozen=True)
class DynamicsConfig:
    k: int = 5
    alpha: float = 1e-3
    theta: float = 0.999
    mu1: float = 6.0
    mu2: float = 3.0
    mu3: float = 2.0
    activation_threshold: float = 0.1
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        for name in ("alpha", "mu1", "mu2", "mu3", "activation_threshold", "epsilon"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.theta <= 1:
            raise ValueError(f"theta must lie in (0, 1], got {self.theta}")


@dataclass
class SigmaMap:
    """Weights ``w`` and velocities ``v`` (both n x k) after ``step`` steps."""

    w: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def random(cls, n: int, k: int, seed=None) -> "SigmaMap":
        rng = np.random.default_rng(seed)
        w = rng.uniform(-1.0, 1.0, size=(n, k))
        return cls(w=w, v=np.zeros((n, k)))

    def copy(self) -> "SigmaMap":
        return SigmaMap(w=self.w.copy(), v=self.v.copy(), step=self.step)

    @property
    def n(self) -> int:
        return self.w.shape[0]

    @property
    def k(self) -> int:
        return self.w.shape[1]


@dataclass
class StepSets:
    ps: np.ndarray
    ns: np.ndarray
    cp: np.ndarray
    cn: np.ndarray


def partition_sets(x, threshold: float = 0.1):
    """Split state ids into active (``x > threshold``) and inactive ones."""
    x = np.asarray(x.x if isinstance(x, ActivationState) else x)
    active = x > threshold
    return np.flatnonzero(active), np.flatnonzero(~active)


def centroids(sigma: SigmaMap, ps, ns) -> StepSets | None:
    """Centroids of both sets, or ``None`` when either set has at most one member.

    ``None`` is the skip signal: no update happens on such a step.
    """
    ps = np.asarray(ps, dtype=np.intp)
    ns = np.asarray(ns, dtype=np.intp)
    if ps.size <= 1 or ns.size <= 1:
        return None
    return StepSets(ps=ps, ns=ns, cp=sigma.w[ps].mean(axis=0), cn=sigma.w[ns].mean(axis=0))


def normalize(sigma: SigmaMap) -> SigmaMap:
    """Divide every weight by the largest absolute weight; all-zero maps pass through."""
    scale = np.abs(sigma.w).max()
    if scale == 0:
        return sigma
    return replace(sigma, w=sigma.w / scale)


def _check_finite(sigma: SigmaMap) -> None:
    if not (np.isfinite(sigma.w).all() and np.isfinite(sigma.v).all()):
        raise FloatingPointError("sigma map contains non-finite values")


def step(sigma: SigmaMap, x, cfg: DynamicsConfig = DynamicsConfig()) -> SigmaMap:
    """Apply one update of the dynamics for activation vector ``x``.

    Returns the input map itself when the step is skipped.
    """
    _check_finite(sigma)
    ps, ns = partition_sets(x, cfg.activation_threshold)
    sets = centroids(sigma, ps, ns)
    if sets is None:
        return sigma

    w = sigma.w
    d_cp = np.maximum(np.linalg.norm(w - sets.cp, axis=1), cfg.epsilon)[:, None]
    d_cn = np.maximum(np.linalg.norm(w - sets.cn, axis=1), cfg.epsilon)[:, None]
    force = np.empty_like(w)
    force[ps] = cfg.mu1 * (sets.cp - w[ps]) / d_cp[ps]
    force[ns] = (cfg.mu2 * (w[ns] - sets.cn) / d_cn[ns]
                 + cfg.mu3 * (w[ns] - sets.cp) / d_cp[ns] ** 2)
    v = cfg.theta * sigma.v + force
    w = w + cfg.alpha * v
    return normalize(SigmaMap(w=w, v=v, step=sigma.step))


@njit(cache=True)
def _simulate(seq, start, stop, t_offset, tstep, window, last, w, v,
              threshold, alpha, theta, mu1, mu2, mu3, eps):
    # Local step s covers symbol seq[s // tstep]; global time is t_offset + s.
    # last, w and v are updated in place. Returns the number of applied updates.
    n, k = w.shape
    x = np.zeros(n)
    active = np.zeros(n, dtype=np.bool_)
    cp = np.zeros(k)
    cn = np.zeros(k)
    applied = 0
    for s in range(start, stop):
        t = t_offset + s
        if s % tstep == 0:
            last[seq[s // tstep]] = t
        n_ps = 0
        for i in range(n):
            x[i] = 0.0
            if last[i] != NEVER and t - last[i] < window:
                x[i] = np.exp(-DECAY_RATE * (t - last[i]))
            active[i] = x[i] > threshold
            if active[i]:
                n_ps += 1
        n_ns = n - n_ps
        if n_ps <= 1 or n_ns <= 1:
            continue

        cp[:] = 0.0
        cn[:] = 0.0
        for i in range(n):
            if active[i]:
                cp += w[i]
            else:
                cn += w[i]
        cp /= n_ps
        cn /= n_ns

        for i in range(n):
            d_cp = 0.0
            for j in range(k):
                d_cp += (w[i, j] - cp[j]) ** 2
            d_cp = max(np.sqrt(d_cp), eps)
            if active[i]:
                for j in range(k):
                    v[i, j] = theta * v[i, j] + mu1 * (cp[j] - w[i, j]) / d_cp
            else:
                d_cn = 0.0
                for j in range(k):
                    d_cn += (w[i, j] - cn[j]) ** 2
                d_cn = max(np.sqrt(d_cn), eps)
                for j in range(k):
                    v[i, j] = (theta * v[i, j]
                               + mu2 * (w[i, j] - cn[j]) / d_cn
                               + mu3 * (w[i, j] - cp[j]) / (d_cp * d_cp))

        scale = 0.0
        for i in range(n):
            for j in range(k):
                w[i, j] += alpha * v[i, j]
                scale = max(scale, abs(w[i, j]))
        if scale > 0.0:
            for i in range(n):
                for j in range(k):
                    w[i, j] /= scale
        applied += 1
    return applied


class Simulator:
    """Stateful driver that feeds symbol sequences through the compiled dynamics.

    Keeps the encoder memory between calls, so a long stream can be processed
    in pieces (``feed``) with results identical to a single pass.
    """

    def __init__(self, sigma: SigmaMap, cfg_s: SequenceConfig, cfg_d: DynamicsConfig):
        if sigma.n != cfg_s.n or sigma.k != cfg_d.k:
            raise ValueError(
                f"map shape {sigma.w.shape} does not match n={cfg_s.n}, k={cfg_d.k}")
        _check_finite(sigma)
        self.sigma = sigma.copy()
        self.cfg_s = cfg_s
        self.cfg_d = cfg_d
        self.last = np.full(cfg_s.n, NEVER, dtype=np.int64)

    def feed(self, seq, snapshot_every: int | None = None):
        """Process every step of ``seq``; returns snapshots taken inside it."""
        seq = np.ascontiguousarray(seq, dtype=np.int64)
        if seq.size == 0:
            raise ValueError("cannot run on an empty sequence")
        if seq.min() < 0 or seq.max() >= self.cfg_s.n:
            raise ValueError(f"symbols must lie in [0, {self.cfg_s.n})")
        total = seq.size * self.cfg_s.tstep
        cuts = [total]
        if snapshot_every:
            first = snapshot_every - self.sigma.step % snapshot_every
            cuts = list(range(first, total, snapshot_every)) + [total]
        snapshots = []
        start = 0
        for stop in cuts:
            self._advance(seq, start, stop)
            if snapshot_every and self.sigma.step % snapshot_every == 0:
                snapshots.append(self.sigma.copy())
            start = stop
        return snapshots

    def _advance(self, seq, start, stop):
        if stop <= start:
            return
        c = self.cfg_d
        s = self.sigma
        _simulate(seq, start, stop, s.step - start, self.cfg_s.tstep, self.cfg_s.window,
                  self.last, s.w, s.v, c.activation_threshold, c.alpha, c.theta,
                  c.mu1, c.mu2, c.mu3, c.epsilon)
        s.step += stop - start


def run(seq, cfg_s: SequenceConfig, cfg_d: DynamicsConfig = DynamicsConfig(),
        seed=None, snapshot_every: int | None = None, init: SigmaMap | None = None):
    """Train a map on ``seq`` and return its snapshot trajectory.

    Snapshots are taken every ``snapshot_every`` simulation steps; the final
    state is always the last element.
    """
    sigma = init if init is not None else SigmaMap.random(cfg_s.n, cfg_d.k, seed)
    sim = Simulator(sigma, cfg_s, cfg_d)
    snapshots = sim.feed(seq, snapshot_every)
    if not snapshots or snapshots[-1].step != sim.sigma.step:
        snapshots.append(sim.sigma.copy())
    return snapshots
