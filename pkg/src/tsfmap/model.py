"""scikit-learn style estimator for the self-organizing sigma map."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .chunking import ChunkMatrix, chunk
from .dynamics import DynamicsConfig, SigmaMap, Simulator
from .encoding import SequenceConfig
from .validation import check_sequence


class TSFMap(TransformerMixin, BaseEstimator):
    """Learn a map in which temporally correlated symbols end up close together.

    Parameters
    ----------
    k : int
        Dimension of the map.
    alpha, theta : float
        Learning rate and velocity decay.
    mu1, mu2, mu3 : float
        Strength of the attraction among active states, the push of inactive
        states away from the inactive centroid, and their push away from the
        active centroid.
    activation_threshold : float
        States with activation above this value count as active.
    epsilon : float
        Lower clamp for centroid distances.
    tstep, m : int
        Simulation steps per symbol and memory window in symbols.
    linkage : str
        Linkage method used by :meth:`predict`.
    n_states : int or None
        Alphabet size; inferred from the first sequence when ``None``.
    random_state : int, SeedSequence or None
        Seed for the initial weights.

    Attributes
    ----------
    weights_ : ndarray of shape (n_states, k)
    velocities_ : ndarray of shape (n_states, k)
    n_steps_ : int
        Simulation steps processed so far.
    """

    def __init__(self, k=5, alpha=1e-3, theta=0.999, mu1=6.0, mu2=3.0, mu3=2.0,
                 activation_threshold=0.1, epsilon=1e-8, tstep=10, m=10,
                 linkage="single", n_states=None, random_state=None):
        self.k = k
        self.alpha = alpha
        self.theta = theta
        self.mu1 = mu1
        self.mu2 = mu2
        self.mu3 = mu3
        self.activation_threshold = activation_threshold
        self.epsilon = epsilon
        self.tstep = tstep
        self.m = m
        self.linkage = linkage
        self.n_states = n_states
        self.random_state = random_state

    def dynamics_config(self) -> DynamicsConfig:
        return DynamicsConfig(k=self.k, alpha=self.alpha, theta=self.theta, mu1=self.mu1,
                              mu2=self.mu2, mu3=self.mu3,
                              activation_threshold=self.activation_threshold,
                              epsilon=self.epsilon)

    def _init(self, seq):
        n = self.n_states if self.n_states is not None else int(seq.max()) + 1
        cfg_s = SequenceConfig(n=n, tau=max(seq.size, 1), tstep=self.tstep, m=self.m)
        sigma = SigmaMap.random(n, self.k, self.random_state)
        self._sim = Simulator(sigma, cfg_s, self.dynamics_config())
        self.n_states_ = n

    def fit(self, X, y=None, snapshot_every=None):
        """Train from scratch on the symbol sequence ``X``."""
        seq = check_sequence(X, self.n_states)
        self._init(seq)
        return self._feed(seq, snapshot_every)

    def partial_fit(self, X, y=None, snapshot_every=None):
        """Continue training; encoder memory carries over from the last call."""
        if not hasattr(self, "_sim"):
            return self.fit(X, snapshot_every=snapshot_every)
        seq = check_sequence(X, self.n_states_)
        return self._feed(seq, snapshot_every)

    def _feed(self, seq, snapshot_every):
        self.snapshots_ = self._sim.feed(seq, snapshot_every)
        sigma = self._sim.sigma
        self.weights_ = sigma.w
        self.velocities_ = sigma.v
        self.n_steps_ = sigma.step
        return self

    @property
    def sigma_(self) -> SigmaMap:
        check_is_fitted(self, "weights_")
        return self._sim.sigma

    def transform(self, X):
        """Map coordinates of the given state ids."""
        check_is_fitted(self, "weights_")
        ids = check_sequence(X, self.n_states_)
        return self.weights_[ids]

    def chunks(self) -> ChunkMatrix:
        check_is_fitted(self, "weights_")
        return chunk(self.weights_, self.linkage)

    def predict(self, X=None):
        """Label matrix (levels x states) extracted from the current map."""
        return self.chunks().levels

    def fit_predict(self, X, y=None):
        return self.fit(X).predict()
