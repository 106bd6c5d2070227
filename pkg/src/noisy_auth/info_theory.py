"""Entropies, typical sets and achievable authentication rates.

All logarithms are base 2 and ``0 * log 0`` is taken to be 0. A sequence
with probability zero is never typical.
"""

import itertools
import math

import numpy as np

from ._validation import (
    check_joint,
    check_prob_vector,
    check_probability,
    check_stochastic,
    check_word,
)
from .exceptions import DomainError

__all__ = [
    "binary_entropy",
    "entropy",
    "conditional_entropy",
    "mutual_information",
    "joint_from_channel",
    "typical_weights",
    "is_typical",
    "typical_set_size",
    "typical_set_prob",
    "is_jointly_typical",
    "achievable_rate_bsc",
    "achievable_rate_dmc",
    "is_weakly_symmetric",
    "weakly_symmetric_capacity",
    "bsc_matrix",
]


def _xlog2x(v):
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    pos = v > 0
    out[pos] = v[pos] * np.log2(v[pos])
    return out


def binary_entropy(p):
    """Binary entropy ``h(p)`` in bits."""
    p = check_probability(p)
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * math.log2(p) - (1 - p) * math.log2(1 - p))


def entropy(p):
    """Shannon entropy of a probability vector, in bits."""
    p = check_prob_vector(p)
    return float(max(0.0, -_xlog2x(p).sum()))


def _row_entropies(m):
    return -_xlog2x(m).sum(axis=1)


def conditional_entropy(joint):
    """``H(Y|X)`` for a joint pmf laid out with X on rows and Y on columns."""
    j = check_joint(joint)
    hxy = -_xlog2x(j).sum()
    hx = -_xlog2x(j.sum(axis=1)).sum()
    return float(max(0.0, hxy - hx))


def mutual_information(joint):
    """``I(X;Y) = H(Y) - H(Y|X)``, clamped at zero against rounding."""
    j = check_joint(joint)
    px = j.sum(axis=1)
    py = j.sum(axis=0)
    rows, cols = np.nonzero(j > 0)
    mask = (rows, cols)
    # divide in two steps so tiny marginals do not underflow to 0
    ratio = (j[mask] / px[rows]) / py[cols]
    # marginals recomputed from a product joint are off by a few ulps
    ratio[np.abs(ratio - 1.0) <= 16 * np.finfo(float).eps] = 1.0
    mi = float(np.sum(j[mask] * np.log2(ratio)))
    return max(0.0, mi)


def joint_from_channel(px, channel):
    """Joint pmf ``P_X(x) P(y|x)`` from an input distribution and a channel matrix."""
    px = check_prob_vector(px, "input distribution")
    channel = check_stochastic(channel, "channel")
    if channel.shape[0] != px.size:
        raise DomainError("input distribution does not match channel inputs")
    return px[:, None] * channel


def bsc_matrix(p):
    p = check_probability(p)
    return np.array([[1 - p, p], [p, 1 - p]])


# -- typical sequences -------------------------------------------------------


def _weight_rates(n, p):
    """Empirical rate ``-(1/n) log2 Pr(X=x)`` for each Hamming weight 0..n."""
    k = np.arange(n + 1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(k > 0, k * -math.log2(p) if p > 0 else np.inf, 0.0)
        b = np.where(k < n, (n - k) * -math.log2(1 - p) if p < 1 else np.inf, 0.0)
    return (a + b) / n


def typical_weights(n, p, delta):
    """Boolean mask over weights ``0..n``: True where words of that weight are delta-typical."""
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    if not delta > 0:
        raise DomainError("delta must be positive")
    p = check_probability(p)
    rates = _weight_rates(int(n), p)
    with np.errstate(invalid="ignore"):
        return np.abs(rates - binary_entropy(p)) < delta


def is_typical(x, p, delta):
    x = check_word(x)
    if x.size == 0:
        raise DomainError("word must be non-empty")
    return bool(typical_weights(x.size, p, delta)[int(x.sum())])


def typical_set_size(n, p, delta):
    """Exact ``|T(n, p, delta)|`` as a Python int (binomial sum over typical weights)."""
    mask = typical_weights(n, p, delta)
    return sum(math.comb(n, k) for k in np.flatnonzero(mask))


def typical_set_prob(n, p, delta):
    """``Pr(X^n in T(n, p, delta))`` for i.i.d. Bernoulli(p) symbols."""
    mask = typical_weights(n, p, delta)
    p = float(p)
    total = 0.0
    for k in np.flatnonzero(mask):
        k = int(k)
        total += math.comb(n, k) * p**k * (1 - p) ** (n - k)
    return min(1.0, total)


def is_jointly_typical(x, y, joint, delta):
    """True iff ``(x, y)`` passes the joint, x-marginal and y-marginal typicality tests."""
    j = check_joint(joint)
    x = check_word(x, alphabet=j.shape[0], name="x")
    y = check_word(y, n=x.size, alphabet=j.shape[1], name="y")
    if x.size == 0:
        raise DomainError("words must be non-empty")
    if not delta > 0:
        raise DomainError("delta must be positive")
    px = j.sum(axis=1)
    py = j.sum(axis=0)
    if np.any(j[x, y] == 0):
        return False
    n = x.size
    hxy = -_xlog2x(j).sum()
    hx = -_xlog2x(px).sum()
    hy = -_xlog2x(py).sum()
    rate_xy = -np.log2(j[x, y]).sum() / n
    rate_x = -np.log2(px[x]).sum() / n
    rate_y = -np.log2(py[y]).sum() / n
    return bool(
        abs(rate_xy - hxy) < delta and abs(rate_x - hx) < delta and abs(rate_y - hy) < delta
    )


# -- achievable rates ----------------------------------------------------------


def achievable_rate_bsc(p, q):
    """``h(q) - h(p)``: the supremum of rates with both small decoding error and false acceptance."""
    p = check_probability(p, "p")
    q = check_probability(q, "q")
    if not (p < q <= 0.5):
        raise DomainError(f"need 0 <= p < q <= 1/2, got p={p}, q={q}")
    return binary_entropy(q) - binary_entropy(p)


def _simplex_grid(dim, resolution):
    pts = []
    for bars in itertools.combinations(range(resolution + dim - 1), dim - 1):
        edges = (-1,) + bars + (resolution + dim - 1,)
        pts.append([edges[i + 1] - edges[i] - 1 for i in range(dim)])
    return np.asarray(pts, dtype=float) / resolution


def _default_resolution(dim):
    if dim <= 3:
        return 64
    if dim <= 5:
        return 16
    res = 16
    while res > 1 and math.comb(res + dim - 1, dim - 1) > 20000:
        res -= 1
    return res


def _rate_objective(px, P, hq_min):
    """Vectorised ``min(I_P(X;Y), min_z H_Q(Y|z) - H_P(Y|X))`` over rows of ``px``."""
    px = np.atleast_2d(px)
    row_h = _row_entropies(P)
    py = px @ P
    hy = -_xlog2x(py).sum(axis=1)
    hyx = px @ row_h
    return np.minimum(hy - hyx, hq_min - hyx)


def _ascend(px, P, hq_min, start_step, min_step=1e-12, max_rounds=100000):
    dim = px.size
    best = _rate_objective(px, P, hq_min)[0]
    directions = [np.eye(dim)[i] for i in range(dim)] + [np.full(dim, 1.0 / dim)]
    step = start_step
    rounds = 0
    while step > min_step and rounds < max_rounds:
        improved = False
        candidates = []
        for i in range(dim):
            for j in range(dim):
                if i != j and px[j] > 0:
                    move = min(step, px[j])
                    c = px.copy()
                    c[i] += move
                    c[j] -= move
                    candidates.append(c)
        for d in directions:
            candidates.append((1 - step) * px + step * d)
        cand = np.clip(np.asarray(candidates), 0.0, None)
        cand /= cand.sum(axis=1, keepdims=True)
        vals = _rate_objective(cand, P, hq_min)
        idx = int(np.argmax(vals))
        if vals[idx] > best:
            best = vals[idx]
            px = cand[idx]
            improved = True
        if not improved:
            step /= 2
        rounds += 1
    return px, best


def achievable_rate_dmc(P, Q, grid_resolution=None):
    """Lower bound on ``sup_{P_X} min{I_P(X;Y), min_z H_Q(Y|z) - H_P(Y|X)}``.

    The supremum is approached by a simplex grid search followed by local
    ascent from the best grid point.

    Returns
    -------
    value : float
        Objective at the returned distribution (a lower bound on the supremum).
    px : ndarray
        Input distribution achieving ``value``.
    """
    P = check_stochastic(P, "P")
    Q = check_stochastic(Q, "Q")
    if P.shape[1] != Q.shape[1]:
        raise DomainError(
            f"output alphabets differ: P has {P.shape[1]} outputs, Q has {Q.shape[1]}"
        )
    dim = P.shape[0]
    hq_min = float(_row_entropies(Q).min())
    res = grid_resolution or _default_resolution(dim)
    if res < 1:
        raise DomainError("grid_resolution must be a positive integer")
    grid = _simplex_grid(dim, int(res))
    vals = _rate_objective(grid, P, hq_min)
    px0 = grid[int(np.argmax(vals))]
    px, value = _ascend(px0, P, hq_min, start_step=1.0 / res)
    return float(value), px


def is_weakly_symmetric(P, tol=1e-9):
    """Rows are permutations of one another and all column sums agree."""
    P = check_stochastic(P, "P")
    rows = np.sort(P, axis=1)
    if np.any(np.abs(rows - rows[0]) > tol):
        return False
    cols = P.sum(axis=0)
    return bool(np.all(np.abs(cols - cols[0]) <= tol))


def weakly_symmetric_capacity(P):
    """Capacity ``log|Y| - H(row)`` of a weakly symmetric channel."""
    P = check_stochastic(P, "P")
    if not is_weakly_symmetric(P):
        raise DomainError("channel is not weakly symmetric")
    return float(math.log2(P.shape[1]) - _row_entropies(P[:1])[0])
