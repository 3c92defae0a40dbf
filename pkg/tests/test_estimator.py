import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from nldstab.errors import ParameterError
from nldstab.estimator import StabilityAnalyzer, validate_omegas
from nldstab.model import make_model


def test_params_roundtrip():
    est = StabilityAnalyzer(family="GN", k=3, M=255)
    params = est.get_params()
    assert params["family"] == "GN" and params["k"] == 3 and params["M"] == 255
    other = clone(est).set_params(k=2)
    assert other.k == 2 and est.k == 3


def test_validate_omegas():
    model = make_model("MTM", 1)
    assert validate_omegas([0.1, 0.2], model).shape == (2,)
    assert validate_omegas(np.array([[0.1], [0.2]]), model).shape == (2,)
    with pytest.raises(ParameterError):
        validate_omegas([0.1, 1.0], model)
    with pytest.raises(ParameterError):
        validate_omegas(np.zeros((2, 2)), model)
    with pytest.raises(ValueError):
        validate_omegas([np.nan], model)


def test_not_fitted():
    with pytest.raises(NotFittedError):
        StabilityAnalyzer().transform([0.1])


def test_fit_transform_predict():
    est = StabilityAnalyzer(family="MTM", k=0.5, M=255)
    X = np.array([[-0.8], [-0.3]])
    est.fit(X)
    feats = est.transform(X)
    assert feats.shape == (2, 6) and np.all(feats[:, 0] > 0)
    assert feats[0, 4] < 0 < feats[1, 4]  # energy changes sign between the two
    # a real pair below the zero-energy frequency; above it MTM k=1/2 still
    # carries an off-axis quadruplet near 0.113 + 1.253i, so both are unstable
    assert list(est.predict(X)) == [1, 1]


def test_integrable_case_predicted_stable():
    est = StabilityAnalyzer(family="MTM", k=1, M=255).fit([-0.5, 0.2])
    assert list(est.predict([-0.5, 0.2])) == [0, 0]
