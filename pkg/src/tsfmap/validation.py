"""Input checks shared by the estimators."""

import numpy as np


def check_points(X, min_samples=1):
    """Finite 2-D float array of feature vectors."""
    x = np.asarray(X, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError(f"expected a 2-D array of points, got shape {x.shape}")
    if x.shape[0] < min_samples:
        raise ValueError(f"need at least {min_samples} points, got {x.shape[0]}")
    if not np.isfinite(x).all():
        raise ValueError("points contain NaN or infinite values")
    return x


def check_sequence(seq, n=None, min_length=1):
    """1-D int64 array of symbols in ``[0, n)``; ``n`` defaults to ``max + 1``."""
    s = np.asarray(seq)
    if s.ndim != 1:
        s = s.ravel()
    if s.size < min_length:
        raise ValueError(f"sequence needs at least {min_length} symbols, got {s.size}")
    if s.size and not np.issubdtype(s.dtype, np.integer):
        if not np.all(np.equal(np.mod(s, 1), 0)):
            raise ValueError("symbols must be integers")
    s = s.astype(np.int64)
    if s.size and s.min() < 0:
        raise ValueError("symbols must be non-negative")
    if n is not None and s.size and s.max() >= n:
        raise ValueError(f"symbol {int(s.max())} out of range for n={n}")
    return s


def check_labels(labels):
    lab = np.asarray(labels)
    if lab.ndim != 1:
        raise ValueError(f"labels must be 1-D, got shape {lab.shape}")
    return lab
