import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from conftest import walk
from plastream.estimators import PLARegressor
from plastream.exceptions import BadParams, NonMonotonicTime


@pytest.mark.parametrize("method", ["swing", "angle", "disjoint", "linear"])
def test_fit_predict_within_epsilon(method, rng):
    t, y = walk(rng, 1500, spacing="irregular")
    est = PLARegressor(method=method, epsilon=0.5).fit(t, y)
    assert np.abs(est.predict(t) - y).max() < 0.5
    assert est.n_segments_ == len(est.segments_) < 1500


@pytest.mark.parametrize("protocol", ["implicit", "two-streams", "single-stream", "single-stream-v"])
def test_protocol_fit(protocol, rng):
    t, y = walk(rng, 1500)
    est = PLARegressor(method="linear", epsilon=0.5, protocol=protocol).fit(t.reshape(-1, 1), y)
    assert np.abs(est.predict(t.reshape(-1, 1)) - y).max() < 0.5
    assert 0 < est.compression_ratio_ < 1


def test_params_round_trip():
    est = PLARegressor(method="angle", epsilon=0.3, max_length=50)
    assert est.get_params() == {"method": "angle", "epsilon": 0.3, "max_length": 50, "protocol": None}
    twin = clone(est).set_params(epsilon=2.0)
    assert twin.epsilon == 2.0 and est.epsilon == 0.3


def test_score_is_r2(rng):
    t, y = walk(rng, 500)
    est = PLARegressor(epsilon=0.01).fit(t, y)
    assert est.score(t, y) > 0.99


def test_prediction_between_and_before_samples():
    t = np.array([0.0, 1.0, 2.0, 3.0])
    est = PLARegressor(epsilon=0.1).fit(t, 2 * t + 1)
    assert est.predict([0.5, -1.0, 10.0]) == pytest.approx([2.0, -1.0, 21.0])


def test_not_fitted():
    with pytest.raises(NotFittedError):
        PLARegressor().predict([1.0])


@pytest.mark.parametrize(
    "X, y, err",
    [
        ([0, 2, 1], [0, 0, 0], NonMonotonicTime),
        ([[0, 1], [1, 2]], [0, 0], BadParams),
        ([0, 1], [0], ValueError),
        ([0, np.nan], [0, 0], ValueError),
    ],
)
def test_bad_input(X, y, err):
    with pytest.raises(err):
        PLARegressor().fit(X, y)


def test_bad_params():
    with pytest.raises(BadParams):
        PLARegressor(epsilon=0).fit([0, 1], [0, 1])
    with pytest.raises(ValueError):
        PLARegressor(method="mixed").fit([0, 1], [0, 1])
