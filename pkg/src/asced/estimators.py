"""Estimator-style wrappers: ``fit`` on a parity-check matrix, ``predict`` on LLR rows."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .bp import DecoderConfig, OriginalCode, OwnSyndrome, build_tanner, decode_batch
from .channel import MLFrameDecoder
from .code import append_rows, from_pcm, sample_independent_row
from .ensemble import build_ensemble, decode_ensemble_batch
from .gf2 import BitMatrix
from .sspcm import build_search_space, build_sspcm, lift_with_sets

__all__ = ["BPDecoder", "AscedDecoder", "MLDecoder", "SSPCMOptimizer"]


def _as_pcm(h) -> BitMatrix:
    if isinstance(h, BitMatrix):
        return h
    arr = check_array(h, dtype=np.uint8, ensure_min_features=2)
    return BitMatrix.from_dense(arr)


def _llr_rows(X, n: int) -> np.ndarray:
    X = check_array(X, dtype=np.float64)
    if X.shape[1] != n:
        raise ValueError(f"expected {n} LLRs per row, got {X.shape[1]}")
    return np.ascontiguousarray(X)


class BPDecoder(BaseEstimator):
    """Flooding BP on a fixed PCM.

    ``fit(H, syndrome=None)`` stores the graph; ``predict(X)`` returns hard
    decisions for each LLR row.
    """

    def __init__(self, variant="nmsa", alpha=1.0, max_iters=20, llr_clamp=30.0):
        self.variant = variant
        self.alpha = alpha
        self.max_iters = max_iters
        self.llr_clamp = llr_clamp

    def fit(self, H, y=None, syndrome=None, stop_h=None):
        h = _as_pcm(H)
        rule = OwnSyndrome() if stop_h is None else OriginalCode(_as_pcm(stop_h))
        self.config_ = DecoderConfig(self.variant, self.alpha, self.max_iters, rule, self.llr_clamp)
        self.graph_ = build_tanner(h)
        self.syndrome_ = (np.zeros(h.nrows, dtype=np.uint8) if syndrome is None
                          else np.asarray(syndrome, dtype=np.uint8))
        self.n_features_in_ = h.ncols
        return self

    def decode(self, X):
        """Return ``(estimates, iterations, converged)``."""
        check_is_fitted(self, "graph_")
        llr = _llr_rows(X, self.n_features_in_)
        return decode_batch(self.graph_, llr, self.config_, self.syndrome_)

    def predict(self, X):
        return self.decode(X)[0]


class AscedDecoder(BaseEstimator):
    """Ensemble of ``n_batches`` random subcodes of rank deficiency ``delta``.

    Each appended row has a weight drawn from ``dc``.  With ``optimize`` the
    batches decode on ssPCM-II matrices.
    """

    def __init__(self, n_batches=4, delta=1, dc=(6, 8, 10), variant="nmsa", alpha=0.5, max_iters=20,
                 optimize=False, w_max=2000, s_max=1000, effort=200, random_state=None):
        self.n_batches = n_batches
        self.delta = delta
        self.dc = dc
        self.variant = variant
        self.alpha = alpha
        self.max_iters = max_iters
        self.optimize = optimize
        self.w_max = w_max
        self.s_max = s_max
        self.effort = effort
        self.random_state = random_state

    def fit(self, H, y=None, subcodes=None):
        h = _as_pcm(H)
        code = from_pcm(h)
        rng = np.random.default_rng(self.random_state)
        if subcodes is None:
            subcodes = []
            for _ in range(self.n_batches):
                rows = []
                current = code
                for _ in range(self.delta):
                    row = sample_independent_row(current, int(rng.choice(self.dc)), rng)
                    rows.append(row)
                    current = append_rows(code, BitMatrix.from_dense(np.stack(rows))).code
                subcodes.append(append_rows(code, BitMatrix.from_dense(np.stack(rows)) if rows
                                            else BitMatrix(code.n, ())))
        cfg = DecoderConfig(self.variant, self.alpha, self.max_iters)
        seed = int(rng.integers(2**63))
        self.code_ = code
        self.subcodes_ = tuple(subcodes)
        self.ensemble_ = build_ensemble(code, self.subcodes_, cfg, self.optimize, self.w_max,
                                        self.s_max, self.effort, seed)
        self.n_features_in_ = code.n
        return self

    def decode(self, X):
        """Full per-frame outcome (candidates, list membership, winner, iterations)."""
        check_is_fitted(self, "ensemble_")
        return decode_ensemble_batch(self.ensemble_, _llr_rows(X, self.n_features_in_))

    def predict(self, X):
        return self.decode(X).estimate


class MLDecoder(BaseEstimator):
    """Exhaustive maximum-likelihood decoding; ties go to the lexicographically smallest codeword."""

    def fit(self, H, y=None):
        self.code_ = from_pcm(_as_pcm(H))
        self.decoder_ = MLFrameDecoder(self.code_)
        self.n_features_in_ = self.code_.n
        return self

    def predict(self, X):
        check_is_fitted(self, "decoder_")
        return self.decoder_.decode_frames(_llr_rows(X, self.n_features_in_))[0]


class SSPCMOptimizer(TransformerMixin, BaseEstimator):
    """Builds an ssPCM from a PCM; ``transform`` lifts codewords with their auxiliary bits."""

    def __init__(self, s_max=1000, w_max=2000, effort=200, stage=2, random_state=None):
        self.s_max = s_max
        self.w_max = w_max
        self.effort = effort
        self.stage = stage
        self.random_state = random_state

    def fit(self, H, y=None):
        if self.stage not in (1, 2):
            raise ValueError("stage must be 1 or 2")
        h = _as_pcm(H)
        space = build_search_space(h, self.s_max, self.effort, np.random.default_rng(self.random_state))
        self.search_space_ = space
        self.result_ = build_sspcm(space, self.w_max)
        self.pcm_ = self.result_.sspcm_2 if self.stage == 2 else self.result_.sspcm_1
        if self.pcm_ is None:
            raise ValueError("stage I was not reached; raise s_max or w_max")
        self.avn_sets_ = tuple(self.result_.avn_sets[: self.pcm_.ncols - h.ncols])
        self.n_features_in_ = h.ncols
        return self

    def transform(self, X):
        check_is_fitted(self, "result_")
        X = check_array(X, dtype=np.uint8)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        return lift_with_sets(X, self.avn_sets_)
