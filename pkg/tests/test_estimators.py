import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from wwitness.estimators import LossChannel, ProductStateOracle, WWitness
from wwitness.fockstate import w_state


def test_witness_fit_and_predict():
    est = WWitness().fit([1, 1, 1, 1])
    assert est.f_full_ == pytest.approx(27 / 64)
    assert est.f_part_ == pytest.approx(0.75)
    states = LossChannel().fit().transform([[1, 1, 1, 1], [0.6, 0.6, 0.6, 0.6], [0, 0, 0, 0]])
    scores = est.score_samples(states)
    assert scores[0] == pytest.approx(1.0)
    assert scores[1] == pytest.approx(0.6)
    assert est.predict(states).tolist() == [2, 1, 0]
    assert est.decision_function(states)[0] == pytest.approx(1 - 27 / 64)


def test_witness_with_forced_mode():
    est = WWitness(forced_singletons=(5,)).fit(np.sqrt([0.2, 0.2, 0.2, 0.2, 0.2]))
    assert est.f_part_ == pytest.approx(0.6)
    assert (5,) in est.partition_.blocks


def test_params_and_clone():
    est = WWitness(seed=3, n_starts=8)
    assert est.get_params()["seed"] == 3
    assert clone(est).get_params() == est.get_params()
    with pytest.raises(NotFittedError):
        est.score_samples(np.eye(16))


def test_loss_channel_validation():
    with pytest.raises(ValueError):
        LossChannel().transform([[1, 1, 1]])
    with pytest.raises(ValueError):
        LossChannel().transform([[1, 1, 1, 2]])
    assert LossChannel(n_modes=2).fit_transform([[1, 1]]).shape == (1, 4, 4)


def test_score_samples_shape_check():
    est = WWitness().fit([1, 1])
    with pytest.raises(ValueError):
        est.score_samples(np.eye(8))
    assert est.score_samples(w_state([2**-0.5] * 2).projector()).tolist() == pytest.approx([1.0])


def test_oracle_estimator():
    L = w_state([0.5] * 4).projector()
    est = ProductStateOracle(partition="1,2,3|4").fit(L)
    assert est.value_ == pytest.approx(0.75, abs=1e-10)
    assert est.residual_ < 1e-9
    est = ProductStateOracle().fit(L.matrix)
    assert est.value_ == pytest.approx(27 / 64, abs=1e-10)
