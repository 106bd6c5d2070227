"""One-shot resources, converters and exact distinguishing distance.

A :class:`OneShotResource` takes a single input and produces a single
output drawn from a per-input distribution, stored as a sparse row-stochastic
matrix. Resources built here for the authentication setting use

* input labels ``(alice_in, eve_in, block_bit)``
* output labels ``(eve_out, bob_out)``

with ``None`` for "no input" / "no output". Bob's output is a message
index, :data:`BOT` (reject) or :data:`ABSENT` (nothing delivered).

Interfaces address label positions: Alice owns input slot 0; Eve owns input
slots 1-2 and output slot 0; Bob owns output slot 1.
"""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .channels import enumerate_words, likelihood_matrix, word_to_index
from .coding import (
    DEFAULT_ENUM_CAP,
    REJECT,
    _enum_guard,
    decode_batch,
    exact_errors,
)
from .exceptions import DomainError, ResourceLimitError

BOT = "⊥"
ABSENT = None
ROW_TOL = 1e-9
EQUALITY_TOL = 1e-12

_IFACE_IN = {"A": (0,), "E": (1, 2), "B": ()}
_IFACE_OUT = {"A": (), "E": (0,), "B": (1,)}


@dataclass(frozen=True, eq=False)
class OneShotResource:
    inputs: tuple
    outputs: tuple
    probs: sparse.csr_array
    tag: str = "R"

    def __post_init__(self):
        probs = sparse.csr_array(self.probs, dtype=np.float64)
        inputs, outputs = tuple(self.inputs), tuple(self.outputs)
        if probs.shape != (len(inputs), len(outputs)):
            raise DomainError(f"probability matrix {probs.shape} does not match labels")
        if len(set(inputs)) != len(inputs) or len(set(outputs)) != len(outputs):
            raise DomainError("input and output labels must be unique")
        if probs.nnz and probs.data.min() < 0:
            raise DomainError("negative probability")
        sums = np.asarray(probs.sum(axis=1)).ravel()
        bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_TOL)
        if bad.size:
            raise DomainError(f"row for input {inputs[bad[0]]!r} sums to {sums[bad[0]]!r}")
        probs.eliminate_zeros()
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)
        object.__setattr__(self, "_in_index", {x: i for i, x in enumerate(inputs)})
        object.__setattr__(self, "_out_index", {y: i for i, y in enumerate(outputs)})

    @classmethod
    def from_rows(cls, rows, tag="R"):
        """Build from ``{input: {output: prob}}``."""
        inputs = list(rows)
        outputs = []
        seen = {}
        for dist in rows.values():
            for y in dist:
                if y not in seen:
                    seen[y] = len(outputs)
                    outputs.append(y)
        r, c, v = [], [], []
        for i, x in enumerate(inputs):
            for y, pr in rows[x].items():
                r.append(i)
                c.append(seen[y])
                v.append(pr)
        m = sparse.csr_array((v, (r, c)), shape=(len(inputs), len(outputs)))
        return cls(tuple(inputs), tuple(outputs), m, tag)

    @classmethod
    def from_dense(cls, matrix, inputs=None, outputs=None, tag="R"):
        matrix = np.asarray(matrix, dtype=float)
        inputs = tuple(range(matrix.shape[0])) if inputs is None else tuple(inputs)
        outputs = tuple(range(matrix.shape[1])) if outputs is None else tuple(outputs)
        return cls(inputs, outputs, sparse.csr_array(matrix), tag)

    def row(self, x):
        i = self._in_index[x]
        lo, hi = self.probs.indptr[i], self.probs.indptr[i + 1]
        return {self.outputs[c]: float(v) for c, v in zip(self.probs.indices[lo:hi], self.probs.data[lo:hi])}

    def dense(self):
        return self.probs.toarray()

    def input_index(self, x):
        return self._in_index[x]

    def has_input(self, x):
        return x in self._in_index

    def output_index(self, y):
        return self._out_index.get(y)

    @property
    def blocking(self):
        return any(isinstance(x, tuple) and len(x) == 3 and x[2] is not None for x in self.inputs)

    def __repr__(self):
        return f"OneShotResource(tag={self.tag!r}, inputs={len(self.inputs)}, outputs={len(self.outputs)})"


# -- distance -------------------------------------------------------------------


def _aligned(r1, r2):
    if set(r1.inputs) != set(r2.inputs):
        raise DomainError("resources have different input spaces")
    outputs = list(r1.outputs)
    col_map = np.empty(len(r2.outputs), dtype=np.int64)
    for j, y in enumerate(r2.outputs):
        idx = r1.output_index(y)
        if idx is None:
            idx = len(outputs)
            outputs.append(y)
        col_map[j] = idx
    row_map = np.fromiter((r1.input_index(x) for x in r2.inputs), dtype=np.int64, count=len(r2.inputs))
    shape = (len(r1.inputs), len(outputs))
    a = r1.probs.tocoo()
    A = sparse.csr_array((a.data, (a.row, a.col)), shape=shape)
    b = r2.probs.tocoo()
    B = sparse.csr_array((b.data, (row_map[b.row], col_map[b.col])), shape=shape)
    return A, B


def distance_by_input(r1, r2):
    """Half-L1 distance between the two output distributions, for each input of ``r1``."""
    A, B = _aligned(r1, r2)
    return 0.5 * np.asarray(abs(A - B).sum(axis=1)).ravel()


def distance(r1, r2):
    """Exact distinguishing distance ``max_x (1/2)||r(.|x) - s(.|x)||_1``."""
    per_input = distance_by_input(r1, r2)
    return float(per_input.max()) if per_input.size else 0.0


def exhaustive_distinguisher_distance(r1, r2, explicit=None, max_space=64):
    """Best advantage over all deterministic distinguishers, found by search.

    A deterministic distinguisher picks one input and a set of outputs on
    which it answers 1. With ``explicit`` (the default when there are at most
    16 outputs) every output subset is tried; otherwise the optimal subset
    ``{y : r(y|x) > s(y|x)}`` is built per input.
    """
    A, B = _aligned(r1, r2)
    n_in, n_out = A.shape
    if n_in > max_space or n_out > max_space:
        raise ResourceLimitError(f"spaces {n_in}x{n_out} exceed the search limit {max_space}")
    A, B = A.toarray(), B.toarray()
    if explicit is None:
        explicit = n_out <= 16
    if explicit and n_out > 16:
        raise ResourceLimitError("explicit subset search is limited to 16 outputs")
    best = 0.0
    if explicit:
        subsets = ((np.arange(2**n_out)[:, None] >> np.arange(n_out)) & 1).astype(float)
    for x in range(n_in):
        diff = A[x] - B[x]
        if explicit:
            adv = np.abs(subsets @ diff).max()
        else:
            accept = diff > 0
            adv = abs(diff[accept].sum())
            adv = max(adv, abs(diff[~accept].sum()))
        best = max(best, float(adv))
    return best


# -- converters ---------------------------------------------------------------------


@dataclass(frozen=True)
class Converter:
    """An interface adapter.

    ``input_map(outer) -> {inner: prob}`` translates what the user enters at
    the outside interface into what reaches the resource;
    ``output_map(inner) -> {outer: prob}`` translates what the resource
    emits. Both act on the interface's slice of the label tuple.
    ``outer_inputs`` enumerates the inputs the outside user may enter.
    """

    input_map: object
    output_map: object
    outer_inputs: tuple
    name: str = "converter"


def identity_converter(iface, res):
    in_pos, _ = _positions(iface)
    subs = list(dict.fromkeys(_sub(x, in_pos) for x in res.inputs))
    return Converter(lambda u: {u: 1.0}, lambda v: {v: 1.0}, tuple(subs), "identity")


def _positions(iface):
    if iface is None:
        return None, None
    if iface not in _IFACE_IN:
        raise DomainError(f"unknown interface {iface!r}")
    return _IFACE_IN[iface], _IFACE_OUT[iface]


def _sub(label, pos):
    if pos is None:
        return label
    return tuple(label[i] for i in pos)


def _rest(label, pos):
    if pos is None:
        return ()
    return tuple(v for i, v in enumerate(label) if i not in pos)


def _merge(rest, sub, pos, width):
    if pos is None:
        return sub
    out = [None] * width
    it_rest = iter(rest)
    it_sub = iter(sub)
    for i in range(width):
        out[i] = next(it_sub) if i in pos else next(it_rest)
    return tuple(out)


def apply_converter(conv, iface, res):
    """Attach ``conv`` at interface ``iface`` (``"A"``, ``"B"``, ``"E"``, or None for the whole resource)."""
    in_pos, out_pos = _positions(iface)
    in_width = len(res.inputs[0]) if in_pos is not None and res.inputs else 0
    out_width = len(res.outputs[0]) if out_pos is not None and res.outputs else 0

    rests = list(dict.fromkeys(_rest(x, in_pos) for x in res.inputs))
    kernels = [(u, conv.input_map(u)) for u in conv.outer_inputs]
    new_inputs, r, c, v = [], [], [], []
    for rest in rests:
        for u, kernel in kernels:
            inner = [(_merge(rest, s, in_pos, in_width), pr) for s, pr in kernel.items()]
            if not all(res.has_input(x) for x, _ in inner):
                continue
            row = len(new_inputs)
            new_inputs.append(_merge(rest, u, in_pos, in_width))
            for x, pr in inner:
                r.append(row)
                c.append(res.input_index(x))
                v.append(pr)
    M_in = sparse.csr_array((v, (r, c)), shape=(len(new_inputs), len(res.inputs)))

    new_outputs, out_index = [], {}
    r, c, v = [], [], []
    for j, y in enumerate(res.outputs):
        for w, pr in conv.output_map(_sub(y, out_pos)).items():
            label = _merge(_rest(y, out_pos), w, out_pos, out_width)
            if label not in out_index:
                out_index[label] = len(new_outputs)
                new_outputs.append(label)
            r.append(j)
            c.append(out_index[label])
            v.append(pr)
    M_out = sparse.csr_array((v, (r, c)), shape=(len(res.outputs), len(new_outputs)))
    return OneShotResource(tuple(new_inputs), tuple(new_outputs), M_in @ res.probs @ M_out, res.tag)


def parallel_compose(r1, r2):
    """``r1 || r2``: one input to each, independent outputs."""
    if r1.tag == r2.tag:
        raise DomainError(f"interface label collision: both resources are tagged {r1.tag!r}")
    inputs = tuple(itertools.product(r1.inputs, r2.inputs))
    outputs = tuple(itertools.product(r1.outputs, r2.outputs))
    probs = sparse.kron(r1.probs, r2.probs, format="csr")
    return OneShotResource(inputs, outputs, probs, f"{r1.tag}|{r2.tag}")


# -- the authentication resources -----------------------------------------------------


def _input_labels(k_alice, eve_inputs, blocking):
    """Input labels honouring the one-shot rules, in a fixed order."""
    alice = list(range(k_alice))
    if not blocking:
        return [(x, None, None) for x in alice] + [(None, z, None) for z in eve_inputs]
    labels = []
    for b in (1, 0):
        for x in [None] + alice:
            for z in [None] + list(eve_inputs):
                if b == 1 and x is not None and z is not None:
                    continue
                labels.append((x, z, b))
    return labels


def ideal_authenticated(k, blocking=False, tag="A"):
    """Authenticated channel on ``k``-bit messages: Alice's message reaches Bob and Eve; Eve's input yields BOT."""
    M = 2**k
    rows = {}
    for x, z, b in _input_labels(M, range(M), blocking):
        delivered = x is not None and b != 0
        if z is not None:
            bob = BOT
        elif delivered:
            bob = x
        else:
            bob = ABSENT
        rows[(x, z, b)] = {(x, bob): 1.0}
    return OneShotResource.from_rows(rows, tag)


def _outcome_distributions(cb, channel, words, outputs, decoded, chunk_cells=1 << 24):
    """Rows: distribution of Bob's decoding outcome (messages then BOT) for each input word."""
    M = cb.size
    onehot = np.zeros((outputs.shape[0], M + 1))
    onehot[np.arange(outputs.shape[0]), np.where(decoded == REJECT, M, decoded)] = 1.0
    out = np.empty((words.shape[0], M + 1))
    step = max(1, chunk_cells // max(1, outputs.shape[0]))
    for s in range(0, words.shape[0], step):
        out[s : s + step] = likelihood_matrix(channel, words[s : s + step], outputs) @ onehot
    return out


def compile_real(cb, resource, enum_cap=DEFAULT_ENUM_CAP, tag="N"):
    """The real system: Alice encodes with ``cb``, Bob decodes, both around ``resource``.

    Every row is computed exactly by summing channel likelihoods over all
    output words.
    """
    n = cb.n
    if resource.n != n:
        raise DomainError(f"resource length {resource.n} differs from codebook length {n}")
    if resource.n_outputs != cb.n_outputs:
        raise DomainError("codebook and resource disagree on Bob's alphabet")
    eve_ch = resource.eve_channel
    _enum_guard(resource.n_outputs, n, enum_cap, "outputs")
    _enum_guard(eve_ch.n_inputs, n, enum_cap, "adversary inputs")

    outputs = enumerate_words(n, resource.n_outputs)
    decoded = np.concatenate([decode_batch(outputs[s : s + 16384], cb) for s in range(0, outputs.shape[0], 16384)])
    alice_dist = _outcome_distributions(cb, resource.alice_channel, cb.codewords, outputs, decoded)
    eve_words = enumerate_words(n, eve_ch.n_inputs)
    eve_dist = _outcome_distributions(cb, eve_ch, eve_words, outputs, decoded)

    M = cb.size
    blocking = resource.blocking_enabled
    cw_labels = [word_to_index(c, cb.alphabet) for c in cb.codewords]
    eve_labels = [None] + sorted(set(cw_labels))
    e_index = {e: i for i, e in enumerate(eve_labels)}
    bob_labels = list(range(M)) + [BOT] + ([ABSENT] if blocking else [])
    nb = len(bob_labels)
    absent_col = M + 1
    outputs_lab = tuple((e, b) for e in eve_labels for b in bob_labels)

    inputs = _input_labels(M, range(eve_words.shape[0]), blocking)
    rows, cols, vals = [], [], []
    span = np.arange(M + 1)
    for i, (x, z, b) in enumerate(inputs):
        e = e_index[None if x is None else cw_labels[x]]
        if z is not None:
            dist = eve_dist[z]
        elif x is not None and b != 0:
            dist = alice_dist[x]
        else:
            rows.append(np.array([i]))
            cols.append(np.array([e * nb + absent_col]))
            vals.append(np.array([1.0]))
            continue
        rows.append(np.full(M + 1, i))
        cols.append(e * nb + span)
        vals.append(dist)
    probs = sparse.csr_array(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(inputs), len(outputs_lab)),
    )
    return OneShotResource(tuple(inputs), outputs_lab, probs, tag)


def filter_converter(blocking):
    """Blocks Eve: she can enter nothing (the block bit is held at 1) and sees nothing."""
    inner = (None, 1 if blocking else None)
    return Converter(lambda u: {inner: 1.0}, lambda v: {(None,): 1.0}, ((None, None),), "filter")


def with_filter(res, which="sharp"):
    """Apply the Eve-blocking filter; ``which`` names it (``sharp`` for real, ``flat`` for ideal)."""
    if which not in ("sharp", "flat"):
        raise DomainError("which must be 'sharp' or 'flat'")
    return apply_converter(filter_converter(res.blocking), "E", res)


def simulator_converter(cb, blocking=False, eve_alphabet=2):
    """Shows Eve ``c_x`` in place of ``x`` and turns any Eve word into the all-zeros message."""
    cw_labels = [word_to_index(c, cb.alphabet) for c in cb.codewords]
    bits = (0, 1) if blocking else (None,)
    outer = tuple((z, b) for z in [None, *range(eve_alphabet**cb.n)] for b in bits)

    def input_map(u):
        z, b = u
        return {(None if z is None else 0, b): 1.0}

    def output_map(v):
        (x,) = v
        return {(None if x is None else cw_labels[x],): 1.0}

    return Converter(input_map, output_map, outer, "simulator")


def with_simulator(res, cb, eve_alphabet=2):
    return apply_converter(simulator_converter(cb, res.blocking, eve_alphabet), "E", res)


# -- construction check --------------------------------------------------------------


@dataclass
class VerificationReport:
    n: int
    k: int
    eps: float
    d_filtered: float
    d_simulated: float
    p_de: float
    p_fa: float
    equalities_hold: bool
    passed: bool
    blocking: bool = False

    def to_dict(self):
        return {
            "schema": 1,
            "n": self.n,
            "k": self.k,
            "eps": self.eps,
            "d_filtered": self.d_filtered,
            "d_simulated": self.d_simulated,
            "p_de": self.p_de,
            "p_fa": self.p_fa,
            "equalities_hold": self.equalities_hold,
            "pass": self.passed,
            "blocking": self.blocking,
        }


def verify_construction(cb, resource, eps, enum_cap=DEFAULT_ENUM_CAP, tol=EQUALITY_TOL):
    """Check both closeness conditions and cross-check them against exact error rates.

    ``d_filtered`` must equal ``p_de`` and ``d_simulated`` must equal
    ``max(p_de, p_fa)``; ``equalities_hold`` records whether they agree to
    ``tol``. ``passed`` requires both distances below ``eps``.
    """
    real = compile_real(cb, resource, enum_cap)
    ideal = ideal_authenticated(cb.k, blocking=resource.blocking_enabled)
    d_filtered = distance(with_filter(real, "sharp"), with_filter(ideal, "flat"))
    d_simulated = distance(real, with_simulator(ideal, cb, resource.eve_channel.n_inputs))
    errs = exact_errors(cb, resource.alice_channel, resource.eve_channel, enum_cap)
    holds = abs(d_filtered - errs.p_de) <= tol and abs(d_simulated - max(errs.p_de, errs.p_fa)) <= tol
    return VerificationReport(
        n=cb.n,
        k=cb.k,
        eps=float(eps),
        d_filtered=d_filtered,
        d_simulated=d_simulated,
        p_de=errs.p_de,
        p_fa=errs.p_fa,
        equalities_hold=bool(holds),
        passed=bool(d_filtered < eps and d_simulated < eps),
        blocking=resource.blocking_enabled,
    )


# -- random instances ---------------------------------------------------------------


def _random_dist(rng, size, zero_frac=0.3):
    w = rng.exponential(size=size)
    if size > 1:
        w[rng.random(size) < zero_frac] = 0.0
    if w.sum() == 0:
        w[rng.integers(size)] = 1.0
    return w / w.sum()


def random_resource(rng, n_alice=2, n_eve=2, n_eve_out=2, n_bob_out=2, tag="R"):
    """Random tagged resource: one-shot inputs from Alice or Eve, outputs ``(eve_out, bob_out)``."""
    inputs = [(a, None, None) for a in range(n_alice)] + [(None, e, None) for e in range(n_eve)]
    outputs = [(e, b) for e in range(n_eve_out) for b in range(n_bob_out)]
    rows = np.stack([_random_dist(rng, len(outputs)) for _ in inputs])
    return OneShotResource(tuple(inputs), tuple(outputs), sparse.csr_array(rows), tag)


def random_converter(rng, iface, res, n_outer=2, n_outer_out=2):
    """Random stochastic adapter for ``iface`` of ``res``."""
    in_pos, out_pos = _positions(iface)
    inner_in = [s for s in dict.fromkeys(_sub(x, in_pos) for x in res.inputs) if any(v is not None for v in s)]
    inner_out = list(dict.fromkeys(_sub(y, out_pos) for y in res.outputs))
    outer = [tuple(f"u{i}" if j == 0 else None for j in range(len(in_pos))) for i in range(n_outer)] if in_pos else [()]
    in_kernel = {}
    for u in outer:
        if in_pos and inner_in:
            w = _random_dist(rng, len(inner_in))
            in_kernel[u] = {s: float(pr) for s, pr in zip(inner_in, w) if pr > 0}
        else:
            in_kernel[u] = {u: 1.0}
    passthrough = [s for s in dict.fromkeys(_sub(x, in_pos) for x in res.inputs) if s not in inner_in]
    for s in passthrough:
        in_kernel[s] = {s: 1.0}
    out_kernel = {}
    for v in inner_out:
        if out_pos:
            w = _random_dist(rng, n_outer_out)
            out_kernel[v] = {(f"w{i}",): float(pr) for i, pr in enumerate(w) if pr > 0}
        else:
            out_kernel[v] = {v: 1.0}
    return Converter(in_kernel.__getitem__, out_kernel.__getitem__, tuple(in_kernel), "random")
