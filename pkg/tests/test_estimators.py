import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from asced.code import brute_force_ml
from asced.estimators import AscedDecoder, BPDecoder, MLDecoder, SSPCMOptimizer


def test_bp_decoder(hamming_h):
    dec = BPDecoder(variant="nspa", alpha=0.9, max_iters=10)
    assert clone(dec).get_params() == dec.get_params()
    with pytest.raises(NotFittedError):
        dec.predict(np.zeros((1, 7)))
    dec.fit(hamming_h.to_dense())
    assert dec.predict(np.full((2, 7), 4.0)).tolist() == [[0] * 7] * 2
    with pytest.raises(ValueError):
        dec.predict(np.zeros((1, 6)))


def test_ml_decoder(hamming, rng):
    dec = MLDecoder().fit(hamming.h)
    llr = rng.normal(0.5, 1.5, (20, 7))
    est = dec.predict(llr)
    assert all(est[f].tolist() == brute_force_ml(hamming, llr[f]).tolist() for f in range(20))


def test_asced_decoder(bch15, rng):
    dec = AscedDecoder(n_batches=2, delta=1, dc=(4, 6), random_state=3).fit(bch15.h)
    assert dec.ensemble_.n_paths == 4
    est = dec.predict(np.full((3, 15), 5.0))
    assert not est.any()
    again = clone(dec).fit(bch15.h)
    llr = rng.normal(1.0, 1.5, (50, 15))
    assert np.array_equal(dec.predict(llr), again.predict(llr))


def test_sspcm_optimizer(bch15):
    opt = SSPCMOptimizer(w_max=300, stage=1, random_state=0).fit(bch15.h)
    words = bch15.codewords()[:10]
    lifted = opt.transform(words)
    assert not (lifted.astype(int) @ opt.pcm_.to_dense().T.astype(int) % 2).any()
    with pytest.raises(ValueError):
        SSPCMOptimizer(stage=3).fit(bch15.h)
