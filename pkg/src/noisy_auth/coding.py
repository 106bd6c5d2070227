"""Codebooks, accept-set decoders, and decoding-error / false-acceptance estimates.

A decoder maps a received word to a message index or rejects it. Every
decoder here follows the uniqueness rule: each decoder defines which
codewords a received word *matches*, and a word decodes to ``i`` only if
``c_i`` is its sole match. Any other match count is a rejection (``-1`` in
batch results, ``None`` for single words).

``p_de`` is the worst-case probability, over messages, that Bob fails to
output Alice's message. ``p_fa`` is the worst-case probability, over every
word Eve can send, that Bob accepts.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ._validation import check_prob_vector, check_probability, check_word, check_words
from .channels import (
    ChannelModel,
    enumerate_words,
    n_threads,
    philox,
    transmit_batch,
)
from .exceptions import DomainError, ResourceLimitError, UsageError
from .info_theory import binary_entropy, typical_set_prob, typical_weights

REJECT = -1
DEFAULT_ENUM_CAP = 16
DEFAULT_MEMORY_CAP = 1 << 28
MC_BLOCK = 8192
DEFAULT_STRATEGIES = ("codewords", "zeros", "uniform", "center")


# -- decoders ----------------------------------------------------------------


def _binary_distances(Y, C):
    Yf = Y.astype(np.float64)
    Cf = C.astype(np.float64)
    d = Yf.sum(1)[:, None] + Cf.sum(1)[None, :] - 2.0 * (Yf @ Cf.T)
    return d.astype(np.int64)


class WeightSetDecoder:
    """Binary decoder matching ``c`` when the weight of ``y - c`` is in an allowed set."""

    kind = "weights"

    def allowed_weights(self, n):
        raise NotImplementedError

    def accepted_symbols(self, n_outputs):
        return np.arange(2)

    def match(self, Y, C):
        n = C.shape[1]
        allowed = self.allowed_weights(n)
        foreign = (Y > 1).any(axis=1)
        d = _binary_distances(np.where(Y > 1, 0, Y), C)
        return allowed[d] & ~foreign[:, None]


class TypicalSetDecoder(WeightSetDecoder):
    """Decode to ``i`` iff ``y`` lies in ``c_i + T(n, p, delta)`` for exactly one ``i``."""

    kind = "typical"

    def __init__(self, p, delta):
        self.p = check_probability(p)
        if not delta > 0:
            raise DomainError("delta must be positive")
        self.delta = float(delta)

    def allowed_weights(self, n):
        return typical_weights(n, self.p, self.delta)

    def to_dict(self):
        return {"kind": self.kind, "p": self.p, "delta": self.delta}

    def __repr__(self):
        return f"TypicalSetDecoder(p={self.p!r}, delta={self.delta!r})"


class RadiusDecoder(WeightSetDecoder):
    """Bounded-distance decoding: match every codeword within Hamming distance ``radius``.

    This is the plug-in point for structured codes: any code whose decoder
    accepts Hamming balls can be evaluated through the same machinery.
    """

    kind = "radius"

    def __init__(self, radius):
        if int(radius) != radius or radius < 0:
            raise DomainError("radius must be a non-negative integer")
        self.radius = int(radius)

    def allowed_weights(self, n):
        return np.arange(n + 1) <= self.radius

    def to_dict(self):
        return {"kind": self.kind, "radius": self.radius}

    def __repr__(self):
        return f"RadiusDecoder(radius={self.radius})"


class JointTypicalDecoder:
    """Match ``c`` when ``(c, y)`` is jointly delta-typical for ``joint``."""

    kind = "joint"

    def __init__(self, joint, delta):
        j = np.asarray(joint, dtype=float)
        if j.ndim != 2 or np.any(j < 0) or abs(j.sum() - 1) > 1e-9:
            raise DomainError("joint must be a non-negative matrix summing to 1")
        if not delta > 0:
            raise DomainError("delta must be positive")
        self.joint = j
        self.delta = float(delta)
        with np.errstate(divide="ignore"):
            self._log_j = np.log2(j)
            self._log_px = np.log2(j.sum(axis=1))
            self._log_py = np.log2(j.sum(axis=0))
        self._h = [
            float(-np.sum(v[v > 0] * np.log2(v[v > 0])))
            for v in (j.ravel(), j.sum(axis=1), j.sum(axis=0))
        ]

    def accepted_symbols(self, n_outputs):
        return np.flatnonzero(self.joint.sum(axis=0) > 0)

    def match(self, Y, C, chunk=1 << 22):
        n = C.shape[1]
        hxy, hx, hy = self._h
        with np.errstate(invalid="ignore"):
            x_ok = np.abs(-self._log_px[C].sum(axis=1) / n - hx) < self.delta
            outside = Y >= self.joint.shape[1]
            Yc = np.where(outside, 0, Y)
            y_ok = (np.abs(-self._log_py[Yc].sum(axis=1) / n - hy) < self.delta) & ~outside.any(1)
            out = np.zeros((Y.shape[0], C.shape[0]), dtype=bool)
            step = max(1, chunk // max(1, C.shape[0] * n))
            for s in range(0, Y.shape[0], step):
                ys = Yc[s : s + step]
                rate = -self._log_j[C[None, :, :], ys[:, None, :]].sum(axis=2) / n
                out[s : s + step] = np.abs(rate - hxy) < self.delta
        return out & x_ok[None, :] & y_ok[:, None]

    def to_dict(self):
        return {"kind": self.kind, "joint": self.joint.tolist(), "delta": self.delta}

    def __repr__(self):
        return f"JointTypicalDecoder(delta={self.delta!r})"


class ForeignSymbolRejector:
    """Reject any word containing a symbol ``>= n_symbols``; otherwise defer to ``inner``."""

    kind = "reject_foreign"

    def __init__(self, inner, n_symbols=2):
        self.inner = inner
        self.n_symbols = int(n_symbols)

    def accepted_symbols(self, n_outputs):
        inner = self.inner.accepted_symbols(n_outputs)
        return inner[inner < self.n_symbols]

    def match(self, Y, C):
        foreign = (Y >= self.n_symbols).any(axis=1)
        return self.inner.match(np.where(Y >= self.n_symbols, 0, Y), C) & ~foreign[:, None]

    def to_dict(self):
        return {"kind": self.kind, "n_symbols": self.n_symbols, "inner": self.inner.to_dict()}

    def __repr__(self):
        return f"ForeignSymbolRejector({self.inner!r}, n_symbols={self.n_symbols})"


def decoder_from_dict(doc):
    kind = doc.get("kind")
    if kind == "typical":
        return TypicalSetDecoder(doc["p"], doc["delta"])
    if kind == "radius":
        return RadiusDecoder(doc["radius"])
    if kind == "joint":
        return JointTypicalDecoder(doc["joint"], doc["delta"])
    if kind == "reject_foreign":
        return ForeignSymbolRejector(decoder_from_dict(doc["inner"]), doc["n_symbols"])
    raise DomainError(f"unknown decoder kind {kind!r}")


# -- codebooks ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Codebook:
    """``2**k`` codewords of length ``n`` plus the decoder Bob uses.

    Codewords are stored as rows of an immutable integer array; duplicates
    are allowed and make their overlapping outputs ambiguous.
    """

    n: int
    k: int
    codewords: np.ndarray
    decoder: object = None
    alphabet: int = 2
    n_outputs: int = 2

    def __post_init__(self):
        cw = np.array(self.codewords, dtype=np.int64, copy=True)
        if cw.ndim != 2 or cw.shape != (2**self.k, self.n):
            raise DomainError(
                f"expected {2**self.k} codewords of length {self.n}, got shape {cw.shape}"
            )
        if cw.size and (cw.min() < 0 or cw.max() >= self.alphabet):
            raise DomainError("codeword symbols outside the input alphabet")
        cw.setflags(write=False)
        object.__setattr__(self, "codewords", cw)

    @property
    def size(self):
        return self.codewords.shape[0]

    @property
    def rate(self):
        return self.k / self.n

    def with_decoder(self, decoder):
        return Codebook(self.n, self.k, self.codewords, decoder, self.alphabet, self.n_outputs)

    def encode(self, messages):
        messages = np.asarray(messages, dtype=np.int64)
        if np.any(messages < 0) or np.any(messages >= self.size):
            raise DomainError(f"messages must lie in 0..{self.size - 1}")
        return self.codewords[messages]

    # -- serialization
    def to_dict(self):
        return {
            "schema": 1,
            "n": self.n,
            "k": self.k,
            "alphabet": self.alphabet,
            "outputs": self.n_outputs,
            "codewords": [_word_to_hex(c, self.alphabet) for c in self.codewords],
            "decode_params": None if self.decoder is None else self.decoder.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            n, k = int(doc["n"]), int(doc["k"])
            alphabet = int(doc.get("alphabet", 2))
            words = [_hex_to_word(h, n, alphabet) for h in doc["codewords"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed codebook document: {exc}") from exc
        params = doc.get("decode_params")
        decoder = None if params is None else decoder_from_dict(params)
        return cls(n, k, np.asarray(words).reshape(-1, n), decoder, alphabet, int(doc.get("outputs", 2)))

    def save(self, path):
        import json

        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def load(cls, path):
        import json

        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _word_to_hex(word, alphabet):
    if alphabet == 2:
        n = len(word)
        value = 0
        for s in word:
            value = (value << 1) | int(s)
        return format(value, "0{}x".format(max(1, -(-n // 4))))
    if alphabet > 16:
        raise DomainError("hex serialization supports alphabets of at most 16 symbols")
    return "".join(format(int(s), "x") for s in word)


def _hex_to_word(text, n, alphabet):
    if alphabet == 2:
        value = int(text, 16)
        if value >> n:
            raise ValueError(f"codeword {text!r} does not fit in {n} bits")
        return [(value >> (n - 1 - j)) & 1 for j in range(n)]
    word = [int(ch, 16) for ch in text]
    if len(word) != n:
        raise ValueError(f"codeword {text!r} has length {len(word)}, expected {n}")
    return word


def _check_book_size(n, k, memory_cap):
    if k < 0 or n < 1:
        raise DomainError("need n >= 1 and k >= 0")
    if k > n:
        warnings.warn(f"k={k} exceeds n={n}: codewords must collide", stacklevel=3)
    if (2**k) * n * 8 > memory_cap:
        raise ResourceLimitError(f"2^{k} codewords of length {n} exceed the memory cap")


def gen_random_codebook(n, k, seed, decoder=None, memory_cap=DEFAULT_MEMORY_CAP):
    """``2**k`` codewords drawn i.i.d. uniformly from ``{0,1}^n``."""
    _check_book_size(n, k, memory_cap)
    rng = philox(seed, 0)
    cw = rng.integers(0, 2, size=(2**k, n), dtype=np.int64)
    return Codebook(n, k, cw, decoder)


def gen_px_codebook(n, k, px, seed, decoder=None, n_outputs=None, memory_cap=DEFAULT_MEMORY_CAP):
    """``2**k`` codewords with i.i.d. symbols drawn from ``px``."""
    px = check_prob_vector(px, "P_X")
    _check_book_size(n, k, memory_cap)
    rng = philox(seed, 0)
    cw = rng.choice(px.size, size=(2**k, n), p=px).astype(np.int64)
    if n_outputs is None:
        n_outputs = decoder.joint.shape[1] if isinstance(decoder, JointTypicalDecoder) else 2
    return Codebook(n, k, cw, decoder, alphabet=px.size, n_outputs=n_outputs)


def repetition_codebook(n, decoder=None):
    return Codebook(n, 1, np.array([[0] * n, [1] * n]), decoder)


# -- decoding ------------------------------------------------------------------


def _require_decoder(cb):
    if cb.decoder is None:
        raise UsageError("codebook has no decoder attached")
    return cb.decoder


def decode_batch(Y, cb):
    """Decode every row of ``Y``; returns message indices with ``REJECT`` (-1) for rejections."""
    dec = _require_decoder(cb)
    Y = np.asarray(Y, dtype=np.int64)
    if Y.ndim != 2 or Y.shape[1] != cb.n:
        raise DomainError(f"received words must have shape (m, {cb.n})")
    if Y.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    m = dec.match(Y, cb.codewords)
    counts = m.sum(axis=1)
    return np.where(counts == 1, m.argmax(axis=1), REJECT).astype(np.int64)


def decode(y, cb):
    """Decode a single received word; returns the message index or None."""
    y = check_word(y, n=cb.n, alphabet=cb.n_outputs, name="y")
    r = int(decode_batch(y[None, :], cb)[0])
    return None if r == REJECT else r


def typical_decode(y, cb):
    if not isinstance(cb.decoder, TypicalSetDecoder):
        raise UsageError("codebook decoder is not a typical-set decoder")
    return decode(y, cb)


def jointly_typical_decode(y, cb):
    if not isinstance(cb.decoder, JointTypicalDecoder):
        raise UsageError("codebook decoder is not a jointly-typical decoder")
    return decode(y, cb)


# -- accept sets ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AcceptSets:
    """Decoding outcome of every output word built from ``symbols``.

    Outputs containing other symbols are always rejected by the decoder.
    """

    n: int
    symbols: np.ndarray
    words: np.ndarray
    decoded: np.ndarray
    n_messages: int

    @property
    def accepted(self):
        return self.words[self.decoded != REJECT]

    def S_i(self, i):
        return self.words[self.decoded == i]

    def sizes(self):
        ok = self.decoded[self.decoded != REJECT]
        return np.bincount(ok, minlength=self.n_messages)

    @property
    def total(self):
        return int(np.count_nonzero(self.decoded != REJECT))

    def indicator(self):
        """Acceptance indicator as an ``n``-axis tensor over ``symbols``."""
        shape = (self.symbols.size,) * self.n
        return (self.decoded != REJECT).astype(np.float64).reshape(shape)


def _enum_guard(count_base, n, enum_cap, what):
    if count_base > 1 and n * math.log2(count_base) > enum_cap + 1e-9:
        raise ResourceLimitError(
            f"enumerating {what} needs {count_base}^{n} words; cap is 2^{enum_cap}"
        )
    if count_base > 1 and float(count_base) ** n * n * 8 > DEFAULT_MEMORY_CAP:
        raise ResourceLimitError(
            f"enumerating {what} ({count_base}^{n} words of length {n}) exceeds the "
            f"{DEFAULT_MEMORY_CAP >> 20} MiB memory cap"
        )


def accept_sets(cb, enum_cap=DEFAULT_ENUM_CAP):
    dec = _require_decoder(cb)
    symbols = np.asarray(dec.accepted_symbols(cb.n_outputs), dtype=np.int64)
    _enum_guard(symbols.size, cb.n, enum_cap, "outputs")
    if symbols.size == 0:
        words = np.zeros((0, cb.n), dtype=np.int64)
    else:
        words = enumerate_words(cb.n, symbols)
    decoded = np.empty(words.shape[0], dtype=np.int64)
    step = 1 << 14
    for s in range(0, words.shape[0], step):
        decoded[s : s + step] = decode_batch(words[s : s + step], cb)
    return AcceptSets(cb.n, symbols, words, decoded, cb.size)


# -- reports -------------------------------------------------------------------


def clopper_pearson(successes, trials, level=0.95):
    """Exact two-sided binomial interval."""
    if trials < 1:
        raise DomainError("trials must be positive")
    alpha = 1 - level
    lo = 0.0 if successes == 0 else float(stats.beta.ppf(alpha / 2, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(stats.beta.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return lo, hi


@dataclass
class ErrorReport:
    """Decoding-error and false-acceptance figures with their provenance.

    ``method`` is one of ``Exact``, ``MonteCarlo``, ``HeuristicLB`` (a lower
    bound on ``p_fa`` from a finite set of adversary strategies) or
    ``AnalyticUB``. Monte Carlo figures carry 95% Clopper-Pearson intervals.
    """

    method: str
    p_de: float | None = None
    p_fa: float | None = None
    trials: int | None = None
    ci_de: tuple | None = None
    ci_fa: tuple | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("p_de", "p_fa"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, float(v))
        for name in ("ci_de", "ci_fa"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, (float(v[0]), float(v[1])))

    def to_dict(self):
        return {
            "method": self.method,
            "p_de": self.p_de,
            "p_fa": self.p_fa,
            "trials": self.trials,
            "ci_de": None if self.ci_de is None else list(self.ci_de),
            "ci_fa": None if self.ci_fa is None else list(self.ci_fa),
        }


# -- exact computation ---------------------------------------------------------------


def _check_channel_for(cb, ch, role):
    if ch.n_outputs != cb.n_outputs:
        raise DomainError(f"{role} channel has {ch.n_outputs} outputs, codebook expects {cb.n_outputs}")


def exact_message_errors(cb, ch, sets=None, enum_cap=DEFAULT_ENUM_CAP):
    """Per-message ``Pr(decode != i | c_i sent)`` by enumerating each accept set."""
    _check_channel_for(cb, ch, "Alice")
    if ch.n_inputs < cb.alphabet:
        raise DomainError("Alice's channel does not accept every codeword symbol")
    sets = sets if sets is not None else accept_sets(cb, enum_cap)
    M = ch.matrix
    errors = np.empty(cb.size)
    for i, c in enumerate(cb.codewords):
        words = sets.S_i(i)
        if words.shape[0] == 0:
            errors[i] = 1.0
            continue
        hit = math.fsum(np.prod(M[c[None, :], words], axis=1))
        errors[i] = min(1.0, max(0.0, 1.0 - hit))
    return errors


def exact_pde(cb, ch, enum_cap=DEFAULT_ENUM_CAP, sets=None):
    errors = exact_message_errors(cb, ch, sets=sets, enum_cap=enum_cap)
    worst = int(np.argmax(errors))
    return ErrorReport("Exact", p_de=float(errors[worst]), details={"per_message": errors, "worst_message": worst})


def acceptance_by_input(cb, ch, enum_cap=DEFAULT_ENUM_CAP, sets=None):
    """``Pr(Bob accepts | z)`` for every input word ``z`` of ``ch``, as a flat array.

    The acceptance indicator is contracted with the channel one symbol
    position at a time, so the cost is linear in the enumeration size.
    """
    _check_channel_for(cb, ch, "Eve")
    sets = sets if sets is not None else accept_sets(cb, enum_cap)
    n = cb.n
    _enum_guard(max(ch.n_inputs, sets.symbols.size), n, enum_cap, "adversary inputs")
    if sets.symbols.size == 0:
        return np.zeros(ch.n_inputs**n)
    Qs = ch.matrix[:, sets.symbols]
    T = sets.indicator()
    # each step contracts the trailing output axis and prepends an input axis,
    # so after n steps the axes are (z_0, ..., z_{n-1})
    for _ in range(n):
        T = np.tensordot(Qs, T, axes=([1], [T.ndim - 1]))
    return np.clip(T.reshape(-1), 0.0, 1.0)


def exact_pfa(cb, ch, enum_cap=DEFAULT_ENUM_CAP, sets=None):
    acc = acceptance_by_input(cb, ch, enum_cap=enum_cap, sets=sets)
    z = int(np.argmax(acc))
    return ErrorReport("Exact", p_fa=float(acc[z]), details={"argmax_input": z})


def exact_errors(cb, alice, eve, enum_cap=DEFAULT_ENUM_CAP):
    sets = accept_sets(cb, enum_cap)
    de = exact_pde(cb, alice, sets=sets)
    fa = exact_pfa(cb, eve, enum_cap=enum_cap, sets=sets)
    return ErrorReport(
        "Exact",
        p_de=de.p_de,
        p_fa=fa.p_fa,
        details={**de.details, **fa.details, "accept_set_size": sets.total},
    )


def is_enumerable(cb, eve=None, enum_cap=DEFAULT_ENUM_CAP):
    if cb.decoder is None:
        return False
    a = len(cb.decoder.accepted_symbols(cb.n_outputs))
    base = max(a, eve.n_inputs if eve is not None else 1)
    return base <= 1 or cb.n * math.log2(base) <= enum_cap + 1e-9


# -- Monte Carlo ---------------------------------------------------------------


def _blocks(trials, block=MC_BLOCK):
    return [(b, min(block, trials - b * block)) for b in range(-(-trials // block))]


def _run_jobs(fn, jobs):
    workers = min(n_threads(), max(1, len(jobs)))
    if workers == 1:
        return [fn(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def _mc_counts(cb, ch, words, trials, seed, stream, predicate):
    """Count, per input word, how many of ``trials`` channel uses satisfy ``predicate``."""
    jobs = [(w, b, size) for w in range(len(words)) for b, size in _blocks(trials)]

    def run(job):
        w, b, size = job
        rng = philox(seed, stream, w, b)
        X = np.broadcast_to(words[w], (size, cb.n))
        Y = transmit_batch(ch, X, rng)
        return int(np.count_nonzero(predicate(w, decode_batch(Y, cb))))

    counts = np.zeros(len(words), dtype=np.int64)
    for (w, _, _), c in zip(jobs, _run_jobs(run, jobs)):
        counts[w] += c
    return counts


def mc_message_errors(cb, ch, trials, seed):
    """Per-message decoding-error counts out of ``trials`` uses each."""
    _check_channel_for(cb, ch, "Alice")
    if trials < 1:
        raise UsageError("trials must be at least 1")
    return _mc_counts(cb, ch, cb.codewords, trials, seed, 1, lambda i, d: d != i)


def mc_pde(cb, ch, trials, seed):
    counts = mc_message_errors(cb, ch, trials, seed)
    worst = int(np.argmax(counts))
    return ErrorReport(
        "MonteCarlo",
        p_de=counts[worst] / trials,
        trials=trials,
        ci_de=clopper_pearson(int(counts[worst]), trials),
        details={"per_message": counts / trials, "worst_message": worst},
    )


def _center_candidate(cb, alice, trials, seed, enum_cap):
    if is_enumerable(cb, enum_cap=enum_cap):
        sets = accept_sets(cb, enum_cap)
        sizes = sets.sizes()
        if sizes.sum() == 0:
            return None
        members = sets.S_i(int(np.argmax(sizes)))
    elif alice is not None:
        rng = philox(seed, 3)
        size = min(trials, 4096)
        best = None
        for i, c in enumerate(cb.codewords):
            Y = transmit_batch(alice, np.broadcast_to(c, (size, cb.n)), rng)
            ok = Y[decode_batch(Y, cb) == i]
            if best is None or ok.shape[0] > best.shape[0]:
                best = ok
        members = best
        if members is None or members.shape[0] == 0:
            return None
    else:
        return None
    counts = np.stack([(members == s).sum(axis=0) for s in range(cb.n_outputs)])
    return counts.argmax(axis=0)


def mc_pfa_heuristic(
    cb,
    ch,
    strategies=DEFAULT_STRATEGIES,
    trials=10000,
    seed=0,
    alice=None,
    n_uniform=4,
    enum_cap=DEFAULT_ENUM_CAP,
):
    """Best false-acceptance rate found over a finite set of Eve inputs.

    Strategies are names (``codewords``, ``zeros``, ``uniform``, ``center``)
    or explicit words. The result is reported as ``HeuristicLB``: the true
    ``p_fa`` maximizes over every input, so this is only a lower bound.
    """
    _check_channel_for(cb, ch, "Eve")
    if trials < 1:
        raise UsageError("trials must be at least 1")
    strategies = list(strategies)
    if not strategies:
        raise UsageError("at least one adversary strategy is required")
    zin = ch.n_inputs
    labels, cands = [], []

    def add(label, z):
        z = np.asarray(z, dtype=np.int64)
        if z.shape == (cb.n,) and z.min() >= 0 and z.max() < zin:
            labels.append(label)
            cands.append(z)

    for s_idx, strat in enumerate(strategies):
        if isinstance(strat, str):
            if strat == "codewords":
                for i, c in enumerate(cb.codewords):
                    add(f"codeword:{i}", c)
            elif strat == "zeros":
                add("zeros", np.zeros(cb.n))
            elif strat == "uniform":
                rng = philox(seed, 4)
                for u in range(n_uniform):
                    add(f"uniform:{u}", rng.integers(0, zin, size=cb.n))
            elif strat == "center":
                c = _center_candidate(cb, alice, trials, seed, enum_cap)
                if c is not None:
                    add("center", c)
            else:
                raise UsageError(f"unknown adversary strategy {strat!r}")
        else:
            add(f"custom:{s_idx}", check_word(strat, n=cb.n, alphabet=zin))
    if not cands:
        raise UsageError("no strategy produced a valid adversary input")
    counts = _mc_counts(cb, ch, np.stack(cands), trials, seed, 2, lambda w, d: d != REJECT)
    best = int(np.argmax(counts))
    return ErrorReport(
        "HeuristicLB",
        p_fa=counts[best] / trials,
        trials=trials,
        ci_fa=clopper_pearson(int(counts[best]), trials),
        details={"best_strategy": labels[best], "per_strategy": dict(zip(labels, counts / trials))},
    )


# -- analytic bounds --------------------------------------------------------------


def default_delta(p, q, rate):
    """``(h(q) - h(p) - r) / 4``; raises if the rate is not below ``h(q) - h(p)``."""
    gap = binary_entropy(q) - binary_entropy(p) - rate
    if gap <= 0:
        raise DomainError(f"rate {rate:g} is not below h(q) - h(p) = {gap + rate:g}")
    return gap / 4


def fa_exponent_term(n, k, p, q, delta):
    """``2^k 2^{n(h(p)+delta)} 2^{-n(h(q)-delta)}``, the counting term of the false-acceptance bound."""
    return 2.0 ** (-(n * (binary_entropy(q) - binary_entropy(p) - 2 * delta) - k))


def analytic_pfa_bound(cb, q, delta=None, enum_cap=DEFAULT_ENUM_CAP):
    """Upper bound ``Pr(V atypical) + |S| 2^{-n(h(q)-delta)}`` on false acceptance, clamped to [0, 1].

    Uses the exact accept-set size when it can be enumerated, otherwise
    ``|S| <= 2^k 2^{n(h(p)+delta)}`` (typical-set decoders only).
    """
    q = check_probability(q, "q")
    dec = _require_decoder(cb)
    if delta is None:
        if not hasattr(dec, "delta"):
            raise UsageError("delta is required for this decoder")
        delta = dec.delta
    n = cb.n
    atypical = max(0.0, 1.0 - typical_set_prob(n, q, delta))
    if is_enumerable(cb, enum_cap=enum_cap):
        total = accept_sets(cb, enum_cap).total
        log_s = math.log2(total) if total else -math.inf
    elif isinstance(dec, TypicalSetDecoder):
        log_s = cb.k + n * (binary_entropy(dec.p) + delta)
    else:
        raise ResourceLimitError("accept set too large to enumerate and no analytic size bound applies")
    counting = 0.0 if log_s == -math.inf else 2.0 ** min(1100.0, log_s - n * (binary_entropy(q) - delta))
    return float(min(1.0, max(0.0, atypical + counting)))


# -- codebook selection ----------------------------------------------------------------


def message_errors(cb, ch, method="exact", trials=10000, seed=0, enum_cap=DEFAULT_ENUM_CAP):
    if method == "exact":
        return exact_message_errors(cb, ch, enum_cap=enum_cap)
    if method == "mc":
        return mc_message_errors(cb, ch, trials, seed) / trials
    raise UsageError(f"unknown method {method!r}")


def prune_codebook(cb, ch, method="auto", trials=10000, seed=0, enum_cap=DEFAULT_ENUM_CAP):
    """Keep the best half of a ``2^(k+1)`` codebook by per-message decoding error.

    Ties go to the lower index; survivors keep their relative order and the
    decoder is re-applied to the smaller book.
    """
    if cb.k < 1:
        raise DomainError("need at least two codewords to prune")
    if method == "auto":
        method = "exact" if is_enumerable(cb, enum_cap=enum_cap) else "mc"
    errors = message_errors(cb, ch, method, trials, seed, enum_cap)
    keep = np.sort(np.argsort(errors, kind="stable")[: cb.size // 2])
    return Codebook(cb.n, cb.k - 1, cb.codewords[keep], cb.decoder, cb.alphabet, cb.n_outputs)


def codebook_score(cb, alice, eve, trials=10000, seed=0, enum_cap=DEFAULT_ENUM_CAP):
    """``max(p_de, p_fa)``: exact when enumerable, otherwise Monte Carlo p_de and heuristic p_fa."""
    if is_enumerable(cb, eve, enum_cap):
        r = exact_errors(cb, alice, eve, enum_cap)
        return max(r.p_de, r.p_fa)
    de = mc_pde(cb, alice, trials, seed)
    fa = mc_pfa_heuristic(cb, eve, trials=trials, seed=seed, alice=alice, enum_cap=enum_cap)
    return max(de.p_de, fa.p_fa)


def select_best(codebooks, alice, eve, trials=10000, seed=0, enum_cap=DEFAULT_ENUM_CAP):
    """Index of the codebook with the smallest score (first on ties) and all scores."""
    scores = [codebook_score(cb, alice, eve, trials, seed, enum_cap) for cb in codebooks]
    return int(np.argmin(scores)), scores


# -- the disjoint-alphabet example ----------------------------------------------------


def converse_demo_code(n, k, p=None, seed=0):
    """Code for Bob alphabet {0,1,2,3} where Eve can only produce symbols 2 and 3.

    Bob rejects any word containing 2 or 3 and otherwise decodes a binary
    code by bounded-distance decoding. ``k=1`` gives the repetition code
    with majority decoding. ``p`` is accepted for symmetry with the channel
    constructor and does not affect the code.
    """
    if k == 1:
        words = np.array([[0] * n, [1] * n])
    else:
        words = gen_random_codebook(n, k, seed).codewords
    radius = (n - 1) // 2
    if words.shape[0] > 1:
        dmin = int(_binary_distances(words, words)[~np.eye(words.shape[0], dtype=bool)].min())
        radius = max(0, (dmin - 1) // 2)
    dec = ForeignSymbolRejector(RadiusDecoder(radius), n_symbols=2)
    return Codebook(n, k, words, dec, alphabet=2, n_outputs=4)
