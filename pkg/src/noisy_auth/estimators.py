"""scikit-learn style wrappers around codebook construction and decoding.

``fit`` draws seeded candidate codebooks and keeps the best one,
``transform`` encodes message indices into codewords and ``predict``
decodes received words (``-1`` marks a rejection). Hyper-parameters live
in ``__init__`` so ``get_params`` / ``set_params`` / ``clone`` work as usual.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_probability, check_stochastic, check_words
from .channels import ChannelModel, derive_seed
from .coding import (
    DEFAULT_ENUM_CAP,
    ErrorReport,
    JointTypicalDecoder,
    RadiusDecoder,
    TypicalSetDecoder,
    decode_batch,
    default_delta,
    exact_errors,
    gen_px_codebook,
    gen_random_codebook,
    is_enumerable,
    mc_pde,
    mc_pfa_heuristic,
    prune_codebook,
    select_best,
)
from .exceptions import DomainError
from .info_theory import _rate_objective, _row_entropies, achievable_rate_dmc, joint_from_channel


class _CodecMixin:
    """Encoding, decoding and error reporting shared by the fitted estimators."""

    def transform(self, X):
        """Map message indices (shape ``(m,)`` or ``(m, 1)``) to codewords ``(m, n)``."""
        check_is_fitted(self, "codebook_")
        X = np.asarray(X)
        if X.ndim == 2 and X.shape[1] == 1:
            X = X[:, 0]
        if X.ndim != 1:
            raise DomainError("messages must be a 1-d array of indices")
        return self.codebook_.encode(X)

    def predict(self, Y):
        """Decode received words; rejected words map to ``-1``."""
        check_is_fitted(self, "codebook_")
        Y = check_words(Y, n=self.codebook_.n, alphabet=self.codebook_.n_outputs)
        return decode_batch(Y, self.codebook_)

    def error_report(self, method="auto", trials=10000, seed=None):
        """Exact figures when the output space is enumerable, otherwise Monte Carlo ones.

        With Monte Carlo, ``p_de`` comes from ``mc_pde`` and ``p_fa`` is the
        heuristic lower bound; the report's ``method`` is ``MonteCarlo``.
        """
        check_is_fitted(self, "codebook_")
        cb, alice, eve = self.codebook_, self.alice_channel_, self.eve_channel_
        if method == "auto":
            method = "exact" if is_enumerable(cb, eve, self.enum_cap) else "mc"
        if method == "exact":
            return exact_errors(cb, alice, eve, self.enum_cap)
        seed = self.random_state if seed is None else seed
        de = mc_pde(cb, alice, trials, seed)
        fa = mc_pfa_heuristic(cb, eve, trials=trials, seed=seed, alice=alice, enum_cap=self.enum_cap)
        return ErrorReport(
            "MonteCarlo",
            p_de=de.p_de,
            p_fa=fa.p_fa,
            trials=trials,
            ci_de=de.ci_de,
            ci_fa=fa.ci_fa,
            details={"p_fa_method": "HeuristicLB", **fa.details},
        )

    def score(self, X=None, y=None):
        """``1 - max(p_de, p_fa)``: one minus the distance to the ideal authenticated channel."""
        r = self.error_report()
        return 1.0 - max(r.p_de, r.p_fa)

    def _choose(self, candidates):
        if len(candidates) == 1:
            self.candidate_scores_ = None
            return 0
        idx, scores = select_best(
            candidates,
            self.alice_channel_,
            self.eve_channel_,
            trials=self.selection_trials,
            seed=derive_seed(self.random_state, 99),
            enum_cap=self.enum_cap,
        )
        self.candidate_scores_ = scores
        return idx


class TypicalSetAuthenticator(_CodecMixin, BaseEstimator):
    """Random code with typical-set decoding over a pair of binary symmetric channels.

    Parameters
    ----------
    n, k : int
        Codeword length and message bits (``2**k`` messages).
    p, q : float
        Crossover probabilities of Alice's and Eve's channels to Bob.
    delta : float, optional
        Typicality slack. Defaults to ``(h(q) - h(p) - k/n) / 4``.
    decoder : {"typical", "radius"}
        ``radius`` switches to bounded-distance decoding with ``radius``.
    n_candidates : int
        Number of seeded codebooks drawn; the one with the smallest
        ``max(p_de, p_fa)`` is kept.
    prune : bool
        Draw ``2**(k+1)`` codewords and keep the best half.
    """

    def __init__(
        self,
        n=16,
        k=4,
        p=0.05,
        q=0.4,
        delta=None,
        decoder="typical",
        radius=None,
        n_candidates=1,
        prune=False,
        selection_trials=10000,
        enum_cap=DEFAULT_ENUM_CAP,
        random_state=0,
    ):
        self.n = n
        self.k = k
        self.p = p
        self.q = q
        self.delta = delta
        self.decoder = decoder
        self.radius = radius
        self.n_candidates = n_candidates
        self.prune = prune
        self.selection_trials = selection_trials
        self.enum_cap = enum_cap
        self.random_state = random_state

    def _make_decoder(self):
        if self.decoder == "typical":
            if self.delta is None:
                self.delta_ = default_delta(self.p, self.q, self.k / self.n)
            else:
                self.delta_ = float(self.delta)
            return TypicalSetDecoder(self.p, self.delta_)
        if self.decoder == "radius":
            if self.radius is None:
                raise DomainError("decoder='radius' needs radius")
            self.delta_ = self.delta
            return RadiusDecoder(self.radius)
        raise DomainError(f"unknown decoder {self.decoder!r}")

    def fit(self, X=None, y=None):
        """Draw candidate codebooks and keep the best; ``X`` and ``y`` are ignored."""
        check_probability(self.p, "p")
        check_probability(self.q, "q")
        if self.n_candidates < 1:
            raise DomainError("n_candidates must be at least 1")
        self.alice_channel_ = ChannelModel.bsc(self.p)
        self.eve_channel_ = ChannelModel.bsc(self.q)
        dec = self._make_decoder()
        k_draw = self.k + 1 if self.prune else self.k
        candidates = []
        for c in range(self.n_candidates):
            cb = gen_random_codebook(self.n, k_draw, derive_seed(self.random_state, c), dec)
            if self.prune:
                cb = prune_codebook(
                    cb,
                    self.alice_channel_,
                    trials=self.selection_trials,
                    seed=derive_seed(self.random_state, c, 1),
                    enum_cap=self.enum_cap,
                )
            candidates.append(cb)
        self.selected_candidate_ = self._choose(candidates)
        self.codebook_ = candidates[self.selected_candidate_]
        return self

    @classmethod
    def from_codebook(cls, codebook, p, q, enum_cap=DEFAULT_ENUM_CAP):
        """Wrap an existing codebook (e.g. one loaded from JSON) as a fitted estimator."""
        est = cls(n=codebook.n, k=codebook.k, p=p, q=q, enum_cap=enum_cap)
        est.alice_channel_ = ChannelModel.bsc(p)
        est.eve_channel_ = ChannelModel.bsc(q)
        est.delta_ = getattr(codebook.decoder, "delta", None)
        est.codebook_ = codebook
        est.selected_candidate_ = 0
        est.candidate_scores_ = None
        return est


class JointTypicalAuthenticator(_CodecMixin, BaseEstimator):
    """Random code with jointly-typical decoding over general discrete memoryless channels.

    ``px`` defaults to the input distribution returned by
    :func:`~noisy_auth.info_theory.achievable_rate_dmc`; ``delta`` defaults
    to a quarter of the gap between that rate and ``k / n``.
    """

    def __init__(
        self,
        P=None,
        Q=None,
        n=8,
        k=1,
        px=None,
        delta=None,
        grid_resolution=None,
        n_candidates=1,
        selection_trials=10000,
        enum_cap=DEFAULT_ENUM_CAP,
        random_state=0,
    ):
        self.P = P
        self.Q = Q
        self.n = n
        self.k = k
        self.px = px
        self.delta = delta
        self.grid_resolution = grid_resolution
        self.n_candidates = n_candidates
        self.selection_trials = selection_trials
        self.enum_cap = enum_cap
        self.random_state = random_state

    def fit(self, X=None, y=None):
        P = check_stochastic(self.P, "P")
        Q = check_stochastic(self.Q, "Q")
        self.alice_channel_ = ChannelModel.dmc(P)
        self.eve_channel_ = ChannelModel.dmc(Q)
        if self.px is None:
            self.rate_bound_, self.px_ = achievable_rate_dmc(P, Q, self.grid_resolution)
        else:
            self.px_ = np.asarray(self.px, dtype=float)
            hq_min = float(_row_entropies(Q).min())
            self.rate_bound_ = float(_rate_objective(self.px_, P, hq_min)[0])
        if self.delta is None:
            gap = self.rate_bound_ - self.k / self.n
            if gap <= 0:
                raise DomainError(f"rate k/n={self.k / self.n:g} is not below the bound {self.rate_bound_:g}")
            self.delta_ = gap / 4
        else:
            self.delta_ = float(self.delta)
        dec = JointTypicalDecoder(joint_from_channel(self.px_, P), self.delta_)
        candidates = [
            gen_px_codebook(self.n, self.k, self.px_, derive_seed(self.random_state, c), dec, n_outputs=P.shape[1])
            for c in range(self.n_candidates)
        ]
        self.selected_candidate_ = self._choose(candidates)
        self.codebook_ = candidates[self.selected_candidate_]
        return self
