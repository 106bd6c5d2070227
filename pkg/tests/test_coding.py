import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noisy_auth.channels import ChannelModel, converse_channels, enumerate_words, output_prob
from noisy_auth.coding import (
    REJECT,
    Codebook,
    ForeignSymbolRejector,
    JointTypicalDecoder,
    RadiusDecoder,
    TypicalSetDecoder,
    accept_sets,
    acceptance_by_input,
    analytic_pfa_bound,
    clopper_pearson,
    converse_demo_code,
    decode,
    decode_batch,
    default_delta,
    exact_errors,
    exact_message_errors,
    exact_pde,
    exact_pfa,
    fa_exponent_term,
    gen_px_codebook,
    gen_random_codebook,
    is_enumerable,
    jointly_typical_decode,
    mc_message_errors,
    mc_pde,
    mc_pfa_heuristic,
    prune_codebook,
    repetition_codebook,
    select_best,
    typical_decode,
)
from noisy_auth.exceptions import DomainError, ResourceLimitError, UsageError
from noisy_auth.info_theory import (
    binary_entropy,
    bsc_matrix,
    conditional_entropy,
    is_typical,
    joint_from_channel,
    typical_set_size,
)

BSC = ChannelModel.bsc


def brute_pde(cb, ch):
    """Worst-message error by summing the likelihood of every output word decoded elsewhere."""
    Y = enumerate_words(cb.n, cb.n_outputs)
    dec = decode_batch(Y, cb)
    worst = 0.0
    for i, c in enumerate(cb.codewords):
        err = math.fsum(output_prob(ch, c, y) for y, d in zip(Y, dec) if d != i)
        worst = max(worst, err)
    return worst


def brute_pfa(cb, ch):
    Y = enumerate_words(cb.n, cb.n_outputs)
    acc = decode_batch(Y, cb) != REJECT
    return max(
        math.fsum(output_prob(ch, z, y) for y, a in zip(Y, acc) if a)
        for z in enumerate_words(cb.n, ch.n_inputs)
    )


def random_case(seed, n_max=8):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, n_max + 1))
    k = int(rng.integers(0, min(3, n) + 1))
    p = float(rng.uniform(0.01, 0.3))
    q = float(rng.uniform(p + 0.05, 0.5))
    if rng.random() < 0.5:
        dec = TypicalSetDecoder(p, float(rng.uniform(0.05, 0.6)))
    else:
        dec = RadiusDecoder(int(rng.integers(0, n // 2 + 1)))
    return gen_random_codebook(n, k, int(rng.integers(1 << 30)), dec), BSC(p), BSC(q)


# -- worked examples ---------------------------------------------------------------


def test_three_bit_repetition_example():
    cb = repetition_codebook(3, RadiusDecoder(1))
    assert exact_pde(cb, BSC(0.1)).p_de == pytest.approx(0.028, abs=1e-12)
    assert exact_pfa(cb, BSC(0.5)).p_fa == pytest.approx(1.0, abs=1e-12)


def test_two_bit_exact_codeword_example():
    cb = repetition_codebook(2, RadiusDecoder(0))
    r = exact_errors(cb, BSC(0.1), BSC(0.5))
    assert r.p_de == pytest.approx(0.19, abs=1e-12)
    assert r.p_fa == pytest.approx(0.5, abs=1e-12)
    assert r.method == "Exact" and r.ci_de is None and r.ci_fa is None


# -- codebook generation -----------------------------------------------------------


def test_single_codeword_and_determinism():
    assert gen_random_codebook(8, 0, 1).size == 1
    a, b = gen_random_codebook(12, 4, 99), gen_random_codebook(12, 4, 99)
    assert np.array_equal(a.codewords, b.codewords)
    assert not np.array_equal(a.codewords, gen_random_codebook(12, 4, 100).codewords)


def test_large_k_warns_and_memory_cap():
    with pytest.warns(UserWarning):
        gen_random_codebook(2, 3, 0)
    with pytest.raises(ResourceLimitError):
        gen_random_codebook(64, 40, 0)


def test_px_codebook_symbol_frequencies():
    px = np.array([0.2, 0.5, 0.3])
    cb = gen_px_codebook(64, 10, px, seed=4)
    total = cb.codewords.size
    counts = np.bincount(cb.codewords.ravel(), minlength=3)
    for c, p in zip(counts, px):
        assert abs(c - total * p) <= 3 * math.sqrt(total * p * (1 - p))


def test_codebook_shape_validation():
    with pytest.raises(DomainError):
        Codebook(3, 1, np.zeros((3, 3), dtype=int))
    with pytest.raises(DomainError):
        Codebook(2, 0, np.array([[0, 2]]))


# -- decoding --------------------------------------------------------------------


def test_received_codeword_decodes_when_zero_noise_typical():
    p, delta = 0.05, 0.25
    assert abs(math.log2(1 - p) + binary_entropy(p)) < delta
    cb = gen_random_codebook(10, 2, 5, TypicalSetDecoder(p, delta))
    for i, c in enumerate(cb.codewords):
        if sum(np.array_equal(c, o) for o in cb.codewords) == 1:
            hits = [j for j, o in enumerate(cb.codewords) if is_typical(c ^ o, p, delta)]
            assert typical_decode(c, cb) == (i if hits == [i] else None)


def test_ambiguous_word_rejected():
    cb = Codebook(4, 1, np.array([[0, 0, 0, 0], [0, 0, 1, 1]]), RadiusDecoder(1))
    assert decode([0, 0, 0, 1], cb) is None
    assert decode([0, 0, 0, 0], cb) == 0


def test_half_noise_rejects_everything():
    cb = gen_random_codebook(6, 1, 2, TypicalSetDecoder(0.5, 0.1))
    assert np.all(decode_batch(enumerate_words(6), cb) == REJECT)


def test_duplicate_codewords_always_reject_their_region():
    words = np.array([[1, 0, 1, 1, 0], [1, 0, 1, 1, 0]])
    for dec in (RadiusDecoder(2), JointTypicalDecoder(joint_from_channel([0.5, 0.5], bsc_matrix(0.2)), 0.4)):
        cb = Codebook(5, 1, words, dec)
        assert np.all(decode_batch(enumerate_words(5), cb) == REJECT)


@pytest.mark.parametrize("p,delta", [(0.1, 0.2), (0.2, 0.1), (0.3, 0.35)])
def test_joint_decoder_reduces_to_typical_for_bsc_uniform(p, delta):
    cw = gen_random_codebook(10, 2, 17).codewords
    t = Codebook(10, 2, cw, TypicalSetDecoder(p, delta))
    j = Codebook(10, 2, cw, JointTypicalDecoder(joint_from_channel([0.5, 0.5], bsc_matrix(p)), delta))
    Y = enumerate_words(10)
    assert np.array_equal(decode_batch(Y, t), decode_batch(Y, j))
    assert jointly_typical_decode(Y[3], j) == typical_decode(Y[3], t)


def test_zero_probability_pair_never_matches():
    joint = np.array([[0.5, 0.0], [0.25, 0.25]])
    cb = Codebook(3, 0, np.array([[0, 0, 0]]), JointTypicalDecoder(joint, 5.0))
    Y = enumerate_words(3)
    d = decode_batch(Y, cb)
    assert np.all(d[Y.max(axis=1) == 1] == REJECT)


def test_decoder_kind_mismatch():
    cb = repetition_codebook(3, RadiusDecoder(1))
    with pytest.raises(UsageError):
        typical_decode([0, 0, 0], cb)
    with pytest.raises(UsageError):
        decode([0, 0, 0], repetition_codebook(3))


# -- accept sets ----------------------------------------------------------------


@pytest.mark.parametrize("seed", range(6))
def test_decode_consistency_with_accept_sets(seed):
    cb, _, _ = random_case(seed, n_max=12)
    sets = accept_sets(cb)
    seen = np.zeros(sets.words.shape[0], dtype=int)
    for i in range(cb.size):
        for y in sets.S_i(i):
            assert decode(y, cb) == i
    for i in range(cb.size):
        members = np.flatnonzero(sets.decoded == i)
        seen[members] += 1
    assert seen.max(initial=0) <= 1
    assert sets.sizes().sum() == sets.total


def test_accept_set_empty_for_tiny_delta():
    cb = gen_random_codebook(12, 3, 1, TypicalSetDecoder(0.1, 1e-9))
    assert accept_sets(cb).total == 0
    assert exact_pde(cb, BSC(0.1)).p_de == 1.0
    assert exact_pfa(cb, BSC(0.4)).p_fa == 0.0


@pytest.mark.parametrize("seed", range(8))
def test_accept_set_size_bound(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 13))
    p = float(rng.uniform(0.02, 0.45))
    delta = float(rng.uniform(0.01, 0.5))
    cb = gen_random_codebook(n, 2, seed, TypicalSetDecoder(p, delta))
    hyx = conditional_entropy(joint_from_channel([0.5, 0.5], bsc_matrix(p)))
    bound = 2 ** (n * (hyx + 2 * delta))
    sizes = accept_sets(cb).sizes()
    assert np.all(sizes <= bound)
    assert np.all(sizes <= typical_set_size(n, p, delta))


def test_enumeration_cap():
    cb = gen_random_codebook(18, 2, 0, RadiusDecoder(1))
    assert not is_enumerable(cb)
    with pytest.raises(ResourceLimitError):
        accept_sets(cb)
    with pytest.raises(ResourceLimitError):
        exact_pde(cb, BSC(0.1))
    assert accept_sets(cb, enum_cap=18).total > 0


# -- exact error rates ---------------------------------------------------------------


@pytest.mark.parametrize("seed", range(10))
def test_exact_errors_match_brute_force(seed):
    cb, alice, eve = random_case(seed, n_max=7)
    assert exact_pde(cb, alice).p_de == pytest.approx(brute_pde(cb, alice), abs=1e-12)
    assert exact_pfa(cb, eve).p_fa == pytest.approx(brute_pfa(cb, eve), abs=1e-12)


def test_exact_pfa_over_dmc_eve():
    joint = joint_from_channel([0.4, 0.6], [[0.7, 0.2, 0.1], [0.1, 0.3, 0.6]])
    cb = gen_px_codebook(5, 1, [0.4, 0.6], 3, JointTypicalDecoder(joint, 0.5))
    eve = ChannelModel.dmc([[0.2, 0.5, 0.3], [0.6, 0.2, 0.2]])
    assert exact_pfa(cb, eve).p_fa == pytest.approx(brute_pfa(cb, eve), abs=1e-12)
    acc = acceptance_by_input(cb, eve)
    assert acc.shape == (2**5,)


@pytest.mark.parametrize("seed", range(5))
def test_translation_invariance(seed):
    cb, alice, eve = random_case(seed + 100, n_max=12)
    w = np.random.default_rng(seed).integers(0, 2, cb.n)
    moved = Codebook(cb.n, cb.k, cb.codewords ^ w, cb.decoder)
    a, b = exact_errors(cb, alice, eve), exact_errors(moved, alice, eve)
    assert a.p_de == pytest.approx(b.p_de, abs=1e-12)
    assert a.p_fa == pytest.approx(b.p_fa, abs=1e-12)


def test_noiseless_alice_has_zero_error():
    cb = gen_random_codebook(8, 2, 1, RadiusDecoder(0))
    if len({tuple(c) for c in cb.codewords}) == cb.size:
        assert exact_pde(cb, BSC(0.0)).p_de == 0.0
        assert mc_pde(cb, BSC(0.0), 500, 0).p_de == 0.0


# -- Monte Carlo -------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(4))
def test_mc_agrees_with_exact(seed):
    cb, alice, eve = random_case(seed + 30, n_max=14)
    exact = exact_message_errors(cb, alice)
    trials = 4000
    counts = mc_message_errors(cb, alice, trials, seed)
    for c, e in zip(counts, exact):
        lo, hi = clopper_pearson(int(c), trials, 0.999)
        assert lo <= e <= hi
    r = mc_pde(cb, alice, trials, seed)
    assert r.method == "MonteCarlo" and r.ci_de[0] <= r.p_de <= r.ci_de[1]


@pytest.mark.parametrize("seed", range(6))
def test_heuristic_lower_bound_dominated_by_exact(seed):
    cb, alice, eve = random_case(seed + 60, n_max=12)
    exact = exact_pfa(cb, eve).p_fa
    lb = mc_pfa_heuristic(cb, eve, trials=3000, seed=seed, alice=alice)
    assert lb.method == "HeuristicLB"
    assert lb.ci_fa[0] <= exact + 1e-12


def test_heuristic_strategies():
    cb = repetition_codebook(5, RadiusDecoder(1))
    r = mc_pfa_heuristic(cb, BSC(0.0), strategies=["zeros"], trials=100, seed=0)
    assert r.p_fa == 1.0 and r.details["best_strategy"] == "zeros"
    r = mc_pfa_heuristic(cb, BSC(0.0), strategies=[[0, 1, 0, 1, 0]], trials=100, seed=0)
    assert r.p_fa == 0.0
    with pytest.raises(UsageError):
        mc_pfa_heuristic(cb, BSC(0.1), strategies=[], trials=10)
    with pytest.raises(UsageError):
        mc_pfa_heuristic(cb, BSC(0.1), strategies=["psychic"], trials=10)


def test_mc_is_deterministic_across_threads(monkeypatch):
    cb = gen_random_codebook(20, 3, 8, TypicalSetDecoder(0.05, 0.12))
    runs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("NOISY_AUTH_THREADS", threads)
        runs.append(mc_message_errors(cb, BSC(0.05), 20000, 4))
    assert np.array_equal(runs[0], runs[1])


def test_clopper_pearson_edges():
    assert clopper_pearson(0, 10)[0] == 0.0
    assert clopper_pearson(10, 10)[1] == 1.0
    lo, hi = clopper_pearson(5, 10)
    assert lo < 0.5 < hi


# -- analytic bound ----------------------------------------------------------------


@pytest.mark.parametrize("seed", range(6))
def test_analytic_bound_dominates_exact(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(6, 15))
    p = float(rng.uniform(0.01, 0.15))
    q = float(rng.uniform(0.3, 0.5))
    k = int(rng.integers(0, 3))
    delta = float(rng.uniform(0.02, 0.4))
    cb = gen_random_codebook(n, k, seed, TypicalSetDecoder(p, delta))
    assert analytic_pfa_bound(cb, q) >= exact_pfa(cb, BSC(q)).p_fa - 1e-12


def test_analytic_bound_clamped():
    cb = gen_random_codebook(10, 0, 0, TypicalSetDecoder(0.1, 5.0))
    assert analytic_pfa_bound(cb, 0.4) == 1.0
    big = gen_random_codebook(24, 2, 0, TypicalSetDecoder(0.05, 0.1))
    assert 0.0 <= analytic_pfa_bound(big, 0.4) <= 1.0


def test_exponent_term_decreasing_when_gap_positive():
    p, q, k = 0.05, 0.4, 4
    terms = [fa_exponent_term(n, k, p, q, default_delta(p, q, k / n)) for n in (16, 24, 32, 40)]
    assert all(a > b for a, b in zip(terms, terms[1:]))


def test_default_delta_requires_gap():
    assert default_delta(0.05, 0.4, 0.25) == pytest.approx((binary_entropy(0.4) - binary_entropy(0.05) - 0.25) / 4)
    with pytest.raises(DomainError):
        default_delta(0.1, 0.2, 0.5)


# -- pruning and selection -------------------------------------------------------------


def test_prune_all_equal_keeps_first_half():
    cb = Codebook(4, 2, np.array([[0, 0, 0, 0], [1, 1, 1, 1], [0, 0, 1, 1], [1, 1, 0, 0]]), RadiusDecoder(0))
    pruned = prune_codebook(cb, BSC(0.1))
    assert np.array_equal(pruned.codewords, cb.codewords[:2])
    assert pruned.k == 1


@pytest.mark.parametrize("seed", range(6))
def test_prune_properties(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(6, 13))
    p = float(rng.uniform(0.02, 0.2))
    parent = gen_random_codebook(n, 3, seed, TypicalSetDecoder(p, float(rng.uniform(0.1, 0.5))))
    ch = BSC(p)
    parent_err = exact_message_errors(parent, ch)
    pruned = prune_codebook(parent, ch)
    pruned_err = exact_message_errors(pruned, ch)
    assert pruned.size == parent.size // 2
    assert pruned_err.max() <= 2 * parent_err.mean() + 1e-12
    assert pruned_err.max() <= parent_err.max() + 1e-12


def test_select_best_picks_minimum():
    books = [gen_random_codebook(8, 2, s, RadiusDecoder(1)) for s in range(4)]
    idx, scores = select_best(books, BSC(0.05), BSC(0.45))
    assert scores[idx] == min(scores)


# -- serialization -------------------------------------------------------------------


@pytest.mark.parametrize(
    "cb",
    [
        gen_random_codebook(13, 3, 2, TypicalSetDecoder(0.1, 0.2)),
        gen_random_codebook(7, 1, 2, RadiusDecoder(2)),
        gen_px_codebook(6, 2, [0.2, 0.3, 0.5], 1, JointTypicalDecoder(np.full((3, 3), 1 / 9), 0.3)),
        converse_demo_code(9, 2, seed=3),
    ],
    ids=["typical", "radius", "joint", "converse"],
)
def test_codebook_json_roundtrip(tmp_path, cb):
    path = tmp_path / "cb.json"
    cb.save(path)
    back = Codebook.load(path)
    assert np.array_equal(back.codewords, cb.codewords)
    assert back.decoder.to_dict() == cb.decoder.to_dict()
    assert (back.n, back.k, back.alphabet, back.n_outputs) == (cb.n, cb.k, cb.alphabet, cb.n_outputs)
    Y = enumerate_words(cb.n, cb.n_outputs)[:4096]
    assert np.array_equal(decode_batch(Y, back), decode_batch(Y, cb))


def test_codebook_json_rejects_garbage():
    with pytest.raises(DomainError):
        Codebook.from_dict({"n": 3, "k": 0, "codewords": ["zz"]})
    with pytest.raises(DomainError):
        Codebook.from_dict({"n": 3, "k": 0, "codewords": ["f"]})
    with pytest.raises(DomainError):
        Codebook.from_dict({"n": 3, "k": 0, "codewords": ["0"], "decode_params": {"kind": "nope"}})


@given(st.lists(st.integers(0, 1), min_size=1, max_size=30))
def test_hex_roundtrip_any_length(bits):
    cb = Codebook(len(bits), 0, np.array([bits]))
    assert np.array_equal(Codebook.from_dict(cb.to_dict()).codewords[0], bits)


# -- the disjoint-alphabet code ----------------------------------------------------------


@pytest.mark.parametrize("n,k", [(15, 1), (8, 2), (10, 3)])
def test_converse_code_never_accepts_eve(n, k):
    P, Q = converse_channels(0.1)
    cb = converse_demo_code(n, k, 0.1, seed=1)
    assert np.all(acceptance_by_input(cb, Q) == 0.0)
    assert exact_pfa(cb, Q).p_fa == 0.0
    inner = Codebook(n, k, cb.codewords, cb.decoder.inner)
    assert exact_pde(cb, P).p_de == pytest.approx(exact_pde(inner, BSC(0.1)).p_de, abs=1e-12)


def test_converse_code_rejects_foreign_symbols():
    cb = converse_demo_code(5, 1)
    assert isinstance(cb.decoder, ForeignSymbolRejector)
    assert decode([0, 0, 0, 0, 0], cb) == 0
    assert decode([0, 0, 2, 0, 0], cb) is None
    assert decode([3, 3, 3, 3, 3], cb) is None


@pytest.mark.parametrize("seed", range(3))
def test_acceptance_by_input_indexing(seed):
    cb, _, eve = random_case(seed + 200, n_max=6)
    Y = enumerate_words(cb.n)
    acc = decode_batch(Y, cb) != REJECT
    Z = enumerate_words(cb.n)
    got = acceptance_by_input(cb, eve)
    for idx, z in enumerate(Z):
        want = math.fsum(output_prob(eve, z, y) for y, a in zip(Y, acc) if a)
        assert got[idx] == pytest.approx(want, abs=1e-12)
    assert exact_pfa(cb, eve).details["argmax_input"] == int(np.argmax(got))
