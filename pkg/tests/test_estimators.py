import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from hadamardopt import HadamardDerivative, OptimalityClassifier
from hadamardopt.errors import BadOrder, MissingAnalytic, UnknownFunction
from hadamardopt.funcspace import corpus_get


def test_params_round_trip():
    est = HadamardDerivative(fn="quartic_2d", order=3, shells=10)
    params = est.get_params()
    assert params["fn"] == "quartic_2d" and params["order"] == 3 and params["shells"] == 10
    twin = clone(est)
    assert twin.get_params() == params and twin is not est
    est.set_params(order=2, chain="frechet")
    assert est.order == 2 and est.chain == "frechet"
    assert set(OptimalityClassifier().get_params()) >= {"fn", "test", "order", "max_order", "membership"}


def test_transform_directions():
    est = HadamardDerivative(fn="quad_2d", order=2).fit([0.0, 0.0])
    U = np.array([[1.0, 0.0], [0.6, 0.8], [2.0, 0.0]])
    np.testing.assert_allclose(est.transform(U), [2.0, 2.0, 8.0], rtol=1e-6)
    assert est.n_features_in_ == 2 and len(est.estimates_) == 3


def test_frechet_chain_and_infinities():
    est = HadamardDerivative(fn="quad_2d", order=2, chain="frechet").fit([[1.0, 2.0]])
    np.testing.assert_allclose(est.transform([[1.0, 0.0]]), [2.0], rtol=1e-6)
    zero = HadamardDerivative(fn="quad_2d", order=2).fit([1.0, 2.0]).transform([[1.0, 0.0], [-1.0, 0.0]])
    # growth towards +inf shows up as a large last minimum, descent as -inf
    assert zero[0] > 1e4 and zero[1] == -np.inf


def test_accepts_a_field_object():
    f = corpus_get("piecewise_pow_n:3")
    out = HadamardDerivative(fn=f, order=3).fit([0.0]).transform([[1.0], [-1.0]])
    np.testing.assert_allclose(out, [6.0, -6.0], rtol=1e-6)


@pytest.mark.parametrize("kwargs,point,err", [
    ({"order": 0}, [0.0, 0.0], BadOrder),
    ({"order": 1.5}, [0.0, 0.0], BadOrder),
    ({"fn": "nope"}, [0.0, 0.0], UnknownFunction),
    ({"fn": 3}, [0.0, 0.0], TypeError),
    ({"chain": "taylor"}, [0.0, 0.0], ValueError),
    ({}, [0.0, np.nan], ValueError),
    ({}, [0.0, 0.0, 0.0], ValueError),
    ({}, [[0.0, 0.0], [1.0, 1.0]], ValueError),
    ({"fn": "abs_1d", "order": 2, "chain": "frechet"}, [0.0], MissingAnalytic),
])
def test_fit_validation(kwargs, point, err):
    with pytest.raises(err):
        HadamardDerivative(**kwargs).fit(point)


def test_transform_needs_fit():
    with pytest.raises(NotFittedError):
        HadamardDerivative().transform([[1.0, 0.0]])
    with pytest.raises(ValueError):
        HadamardDerivative().fit([0.0, 0.0]).transform([[1.0, 0.0, 0.0]])


def test_classifier_isolated():
    clf = OptimalityClassifier(fn="flat_exp_2d", test="isolated", order=3, n_directions=16).fit()
    assert list(clf.predict([[0.0, 0.0]])) == ["IsolatedRefuted"]
    clf = OptimalityClassifier(fn="pnorm_n4_2d", test="isolated", order=4).fit()
    assert list(clf.predict([0.0, 0.0])) == ["IsolatedCertified"]
    assert clf.decision_function([0.0, 0.0])[0] == pytest.approx(12.0, rel=0.15)
    assert "IsolatedCertified" in clf.classes_


def test_classifier_other_tests():
    clf = OptimalityClassifier(fn="neg_quad_2d", test="necessary", max_order=3, n_directions=16).fit()
    assert list(clf.predict([[0.0, 0.0]])) == ["NecessaryFail"]
    assert clf.decision_function([[0.0, 0.0]])[0] == pytest.approx(-2.0, abs=1e-3)
    clf = OptimalityClassifier(fn="quad_2d", test="strict", max_order=2, n_directions=16).fit()
    assert list(clf.predict([[0.0, 0.0], [0.5, 0.0]])) == ["StrictCertified", "StrictUnknown"]
    clf = OptimalityClassifier(fn="pnorm_n4_2d", test="fn-class", order=3, n_directions=16).fit()
    assert list(clf.predict([[0.0, 0.0]])) == ["NotMember"]
    assert clf.decision_function([[0.0, 0.0]])[0] <= 1e-6


def test_classifier_validation():
    with pytest.raises(ValueError):
        OptimalityClassifier(test="convex").fit()
    with pytest.raises(BadOrder):
        OptimalityClassifier(max_order=0).fit()
    with pytest.raises(NotFittedError):
        OptimalityClassifier().predict([[0.0, 0.0]])
    clone(OptimalityClassifier(n_directions=8)).fit()
