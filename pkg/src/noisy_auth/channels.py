"""Discrete memoryless channels and the noisy authentication resource.

Words are 1-d integer arrays over a dense alphabet ``0..A-1``. For
enumeration, a word is indexed by reading its symbols as base-``A`` digits,
first symbol most significant.

Randomness is counter-based: every stream is a Philox generator keyed by the
master seed plus a stream path (e.g. ``(message, block)``), so results do
not depend on how work is split across threads.
"""

import json
import os
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_probability, check_stochastic, check_word, check_words
from .exceptions import DomainError, UsageError

__all__ = [
    "ChannelModel",
    "NoisyAuthResource",
    "philox",
    "derive_seed",
    "transmit",
    "transmit_batch",
    "output_prob",
    "likelihood_matrix",
    "alice_send",
    "eve_send",
    "blocked_send",
    "converse_channels",
    "enumerate_words",
    "word_to_index",
    "index_to_word",
    "n_threads",
]


def philox(seed, *stream):
    """Counter-based generator for ``(seed, *stream)``."""
    if isinstance(seed, np.random.Generator):
        return seed
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *map(int, stream)])
    key = ss.generate_state(2, dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(seed, *path):
    """Deterministic 63-bit child seed for ``(seed, *path)``."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *map(int, path)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def n_threads():
    """Worker count from ``NOISY_AUTH_THREADS`` (default 1)."""
    raw = os.environ.get("NOISY_AUTH_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True, eq=False)
class ChannelModel:
    """Row-stochastic channel; ``p`` is set only for binary symmetric channels.

    Use :meth:`bsc` or :meth:`dmc` rather than the constructor.
    """

    matrix: np.ndarray
    p: float | None = None
    name: str = field(default="dmc")

    @classmethod
    def bsc(cls, p):
        p = check_probability(p)
        m = np.array([[1 - p, p], [p, 1 - p]])
        m.setflags(write=False)
        return cls(matrix=m, p=p, name=f"BSC({p:g})")

    @classmethod
    def dmc(cls, matrix):
        m = check_stochastic(matrix, "channel matrix").copy()
        m.setflags(write=False)
        return cls(matrix=m, p=None, name="dmc")

    @property
    def n_inputs(self):
        return self.matrix.shape[0]

    @property
    def n_outputs(self):
        return self.matrix.shape[1]

    @property
    def is_bsc(self):
        return self.p is not None

    def to_dict(self):
        return {
            "inputs": int(self.n_inputs),
            "outputs": int(self.n_outputs),
            "rows": self.matrix.tolist(),
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            a, b, rows = int(doc["inputs"]), int(doc["outputs"]), doc["rows"]
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed channel document: {exc}") from exc
        m = np.asarray(rows, dtype=float)
        if m.shape != (a, b):
            raise DomainError(f"rows have shape {m.shape}, declared ({a}, {b})")
        return cls.dmc(m)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DomainError(f"{path}: invalid JSON: {exc}") from exc
        return cls.from_dict(doc)

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    def __repr__(self):
        if self.is_bsc:
            return f"ChannelModel.bsc({self.p!r})"
        return f"ChannelModel.dmc({self.matrix.tolist()!r})"


def converse_channels(p):
    """Alice's BSC(p) on Bob symbols {0,1} and Eve's noiseless map 0->2, 1->3."""
    p = check_probability(p)
    P = ChannelModel.dmc([[1 - p, p, 0, 0], [p, 1 - p, 0, 0]])
    Q = ChannelModel.dmc([[0, 0, 1, 0], [0, 0, 0, 1]])
    return P, Q


# -- word indexing -------------------------------------------------------------


def word_to_index(x, alphabet=2):
    idx = 0
    for s in np.asarray(x, dtype=np.int64):
        idx = idx * alphabet + int(s)
    return idx


def index_to_word(idx, n, alphabet=2):
    out = np.zeros(n, dtype=np.int64)
    for j in range(n - 1, -1, -1):
        idx, out[j] = divmod(int(idx), alphabet)
    return out


def enumerate_words(n, symbols=2):
    """All words of length ``n`` over ``symbols`` (an int alphabet size or a symbol list).

    Row ``i`` is the word whose base-``len(symbols)`` digits spell ``i``.
    """
    symbols = np.arange(symbols) if np.isscalar(symbols) else np.asarray(symbols)
    a = symbols.size
    idx = np.arange(a**n, dtype=np.int64)
    powers = a ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return symbols[(idx[:, None] // powers) % a]


# -- transmission ----------------------------------------------------------------


def _sample(matrix, X, rng):
    X = np.asarray(X)
    u = rng.random(X.shape)
    if matrix.shape == (2, 2) and np.isclose(matrix[0, 1], matrix[1, 0]) and matrix[0, 0] == matrix[1, 1]:
        return X ^ (u < matrix[0, 1])
    cdf = np.cumsum(matrix, axis=1)
    cdf[:, -1] = 1.0
    rows = cdf[X]
    return np.minimum((u[..., None] >= rows).sum(axis=-1), matrix.shape[1] - 1)


def transmit(channel, x, seed):
    """Pass one word through ``channel``; deterministic given ``seed``."""
    x = check_word(x, alphabet=channel.n_inputs)
    return _sample(channel.matrix, x, philox(seed)).astype(np.int64)


def transmit_batch(channel, X, rng):
    """Pass each row of ``X`` through ``channel`` using generator ``rng``."""
    return _sample(channel.matrix, np.asarray(X, dtype=np.int64), rng).astype(np.int64)


def output_prob(channel, x, y):
    """Exact likelihood ``Pr(Y=y | X=x)`` of a whole word."""
    x = check_word(x, alphabet=channel.n_inputs, name="x")
    y = check_word(y, n=x.size, alphabet=channel.n_outputs, name="y")
    if channel.is_bsc:
        d = int(np.count_nonzero(x != y))
        return channel.p**d * (1 - channel.p) ** (x.size - d)
    return float(np.prod(channel.matrix[x, y]))


def likelihood_matrix(channel, X, Y, chunk=1 << 22):
    """``L[i, j] = Pr(Y_j | X_i)`` for batches of input and output words."""
    X = check_words(X, alphabet=channel.n_inputs, name="inputs")
    Y = check_words(Y, n=X.shape[1], alphabet=channel.n_outputs, name="outputs")
    n = X.shape[1]
    if channel.is_bsc:
        p = channel.p
        kernel = np.array([p**d * (1 - p) ** (n - d) for d in range(n + 1)])
        Xf = X.astype(np.float64)
        Yf = Y.astype(np.float64)
        d = (Xf.sum(1)[:, None] + Yf.sum(1)[None, :] - 2 * Xf @ Yf.T).astype(np.int64)
        return kernel[d]
    out = np.empty((X.shape[0], Y.shape[0]))
    step = max(1, chunk // max(1, Y.shape[0] * n))
    for s in range(0, X.shape[0], step):
        xs = X[s : s + step]
        out[s : s + step] = np.prod(channel.matrix[xs[:, None, :], Y[None, :, :]], axis=2)
    return out


# -- the real resource -------------------------------------------------------------


@dataclass(frozen=True)
class NoisyAuthResource:
    """Alice -> Bob through ``alice_channel``, Eve -> Bob through ``eve_channel``.

    Eve also sees Alice's raw input. With ``blocking_enabled`` Eve holds an
    extra bit that can suppress delivery of Alice's word.
    """

    n: int
    alice_channel: ChannelModel
    eve_channel: ChannelModel
    blocking_enabled: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be positive")
        if self.alice_channel.n_outputs != self.eve_channel.n_outputs:
            raise DomainError("Alice and Eve channels must share Bob's output alphabet")

    @property
    def n_outputs(self):
        return self.alice_channel.n_outputs


def alice_send(resource, m, seed):
    """Returns ``(bob_word, eve_observation)``; Eve sees ``m`` uncorrupted."""
    m = check_word(m, n=resource.n, alphabet=resource.alice_channel.n_inputs, name="m")
    return transmit(resource.alice_channel, m, seed), m.copy()


def eve_send(resource, z, seed):
    z = check_word(z, n=resource.n, alphabet=resource.eve_channel.n_inputs, name="z")
    return transmit(resource.eve_channel, z, seed)


def blocked_send(resource, m, b, seed):
    """Alice's send with Eve's blocking bit; ``b == 0`` delivers nothing (None)."""
    if not resource.blocking_enabled:
        raise UsageError("blocking is not enabled on this resource")
    if b not in (0, 1):
        raise DomainError("blocking bit must be 0 or 1")
    bob, _ = alice_send(resource, m, seed)
    return bob if b == 1 else None
