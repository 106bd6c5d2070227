"""Input validation helpers shared by the public API."""

import numbers

import numpy as np
from sklearn.utils import check_array

from .exceptions import DomainError

PROB_TOL = 1e-9


def check_probability(p, name="p"):
    if not isinstance(p, numbers.Real) or isinstance(p, bool):
        raise DomainError(f"{name} must be a real number, got {p!r}")
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {p}")
    return p


def check_prob_vector(v, name="distribution"):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise DomainError(f"{name} must be a non-empty 1-d vector")
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise DomainError(f"{name} has negative or non-finite entries")
    if abs(v.sum() - 1.0) > PROB_TOL:
        raise DomainError(f"{name} sums to {v.sum()!r}, expected 1")
    return v


def check_joint(j, name="joint"):
    j = np.asarray(j, dtype=float)
    if j.ndim != 2 or j.size == 0:
        raise DomainError(f"{name} must be a non-empty 2-d matrix")
    if np.any(j < 0) or not np.all(np.isfinite(j)):
        raise DomainError(f"{name} has negative or non-finite entries")
    if abs(j.sum() - 1.0) > PROB_TOL:
        raise DomainError(f"{name} sums to {j.sum()!r}, expected 1")
    return j


def check_stochastic(m, name="matrix"):
    """Return ``m`` as a float array after checking every row is a distribution."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.size == 0:
        raise DomainError(f"{name} must be a non-empty 2-d matrix")
    if np.any(m < 0) or not np.all(np.isfinite(m)):
        raise DomainError(f"{name} has negative or non-finite entries")
    bad = np.flatnonzero(np.abs(m.sum(axis=1) - 1.0) > PROB_TOL)
    if bad.size:
        raise DomainError(f"{name} row {bad[0]} sums to {m[bad[0]].sum()!r}")
    return m


def check_word(x, n=None, alphabet=2, name="word"):
    x = np.asarray(x)
    if x.ndim != 1:
        raise DomainError(f"{name} must be a 1-d sequence of symbols")
    if x.size and not np.issubdtype(x.dtype, np.integer):
        if not np.all(np.equal(np.mod(x, 1), 0)):
            raise DomainError(f"{name} must contain integer symbols")
    x = x.astype(np.int64)
    if n is not None and x.size != n:
        raise DomainError(f"{name} has length {x.size}, expected {n}")
    if np.any(x < 0) or np.any(x >= alphabet):
        raise DomainError(f"{name} has symbols outside 0..{alphabet - 1}")
    return x


def check_words(X, n=None, alphabet=2, name="words"):
    """Validate a 2-d batch of words (one word per row)."""
    X = check_array(X, dtype=np.int64, ensure_min_features=0)
    if n is not None and X.shape[1] != n:
        raise DomainError(f"{name} have length {X.shape[1]}, expected {n}")
    if X.size and (X.min() < 0 or X.max() >= alphabet):
        raise DomainError(f"{name} have symbols outside 0..{alphabet - 1}")
    return X
