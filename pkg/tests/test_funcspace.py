import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import frozen
from hadamardopt.errors import BadOrder, EvaluationError, MissingAnalytic, UnknownFunction
from hadamardopt.funcspace import (DEFAULT_CORPUS, DerivativeChain, HomogeneousForm, corpus_get,
                                   field_from_callable, tensor_chain, tensor_form, zero_chain)

SMOOTH = ["quad_2d", "quartic_2d", "pnorm_n4_2d", "neg_quad_2d", "constant_2d", "linear_2d",
          "square_1d", "cubic_1d"]


def test_corpus_lists_the_fixtures():
    ids = DEFAULT_CORPUS.ids()
    for fid in ["neg_flat_exp_1d", "flat_exp_2d", "piecewise_pow_n", "curve_flat_2d",
                "studniarski_ext_2d", "abs_1d"] + SMOOTH:
        assert fid in ids


def test_neg_flat_exp():
    f = corpus_get("neg_flat_exp_1d")
    assert f.dim == 1 and f([0.0]) == 0.0
    assert f([0.5]) == pytest.approx(-math.exp(-4.0), rel=1e-15)


def test_pnorm():
    f = corpus_get("pnorm_n4_2d")
    assert f([-2.0, 1.0]) == 17.0


@pytest.mark.parametrize("n", [3, 4])
def test_studniarski_extension(n):
    g = corpus_get("studniarski_ext_2d", n=n)
    assert g([-0.5, 0.0]) == 0.5**n
    assert g([0.1, 1e-9]) == np.inf


def test_parameters_in_ids():
    f = corpus_get("piecewise_pow_n:5")
    assert f.id == "piecewise_pow_n:n=5"
    assert f([-1.0]) == -1.0 and f([2.0]) == 32.0
    assert corpus_get("piecewise_pow_n")([-1.0]) == -1.0
    with pytest.raises(UnknownFunction):
        corpus_get("quad_2d:3")
    with pytest.raises(UnknownFunction):
        corpus_get("nope")


def test_user_expressions():
    corpus = DEFAULT_CORPUS.with_expressions({"Bowl": "x1^2 + 3*x2^2"})
    f = corpus.get("bowl")
    assert f.dim == 2 and f([1.0, 1.0]) == 4.0 and f.points == ((0.0, 0.0),)


def test_neg_inf_is_rejected():
    f = field_from_callable("bad", lambda X: -np.inf * np.ones(len(X)), 1)
    with pytest.raises(EvaluationError):
        f([0.0])
    boom = field_from_callable("boom", lambda X: 1 / 0, 1)
    with pytest.raises(EvaluationError):
        boom([0.0])


def test_zero_chain():
    assert zero_chain(1).forms == ()
    assert [f.degree for f in zero_chain(3).forms] == [1, 2]
    U = np.random.default_rng(1).normal(size=(20, 3))
    assert not zero_chain(4).forms[2](U).any()
    with pytest.raises(BadOrder):
        zero_chain(0)


def test_tensor_forms():
    assert tensor_form(np.eye(2))([3.0, 4.0]) == 25.0
    assert tensor_form(np.array([2.0, 0.0]))([0.7, 5.0]) == pytest.approx(1.4)
    assert tensor_form(2 * np.eye(2))([1.0, 1.0]) == frozen.TWO_IDENTITY_AT_ONES
    with pytest.raises(BadOrder):
        tensor_form(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(BadOrder):
        tensor_form(np.zeros((2, 3)))
    with pytest.raises(BadOrder):
        DerivativeChain((zero_chain(3).forms[1],))


def test_homogeneity_defect():
    U = np.random.default_rng(2).normal(size=(16, 2))
    T = np.zeros((2, 2, 2))
    T[0, 0, 0] = 6.0
    assert tensor_form(T).homogeneity_defect(U) < 1e-14
    bent = HomogeneousForm(2, lambda V: np.abs(V[:, 0]))
    assert bent.homogeneity_defect(U) > 0.1


def _mp_tensor(f, x, k):
    F = f.expression.mp_function()
    d = f.dim
    T = np.zeros((d,) * k)
    with mpmath.workdps(40):
        xs = [mpmath.mpf(v) for v in x]
        for idx in itertools.product(range(d), repeat=k):
            counts = tuple(idx.count(i) for i in range(d))
            T[idx] = float(mpmath.diff(F, xs, counts))
    return T


@pytest.mark.parametrize("fid", SMOOTH)
@given(data=st.data())
def test_tensors_match_high_precision_derivatives(fid, data):
    f = corpus_get(fid)
    x = data.draw(st.lists(st.floats(-1.0, 1.0).filter(lambda v: abs(v) > 1e-3),
                           min_size=f.dim, max_size=f.dim))
    Ts = f.tensors(np.array(x), 4)
    for k, T in enumerate(Ts, start=1):
        ref = _mp_tensor(f, x, k)
        np.testing.assert_allclose(T, ref, rtol=1e-13, atol=1e-13)


def test_frechet_chain_carries_rounding():
    f = corpus_get("quartic_2d")
    dyadic = f.frechet_chain([0.5, -0.25], 4)
    assert all(not np.any(form.tensor_lo) for form in dyadic.forms)
    ragged = f.frechet_chain([0.3, -0.2], 4)
    lows = np.concatenate([form.tensor_lo.ravel() for form in ragged.forms])
    assert np.any(lows) and np.max(np.abs(lows)) < 1e-15
    g = ragged.forms[0]
    with mpmath.workdps(40):
        exact = 4 * mpmath.mpf(0.3) ** 3
        miss = abs(mpmath.mpf(g.tensor[0]) + mpmath.mpf(g.tensor_lo[0]) - exact)
    assert miss < 1e-30


def test_frechet_chain_needs_analytic_data():
    with pytest.raises(MissingAnalytic):
        corpus_get("curve_flat_2d").frechet_chain([0.0, 0.0], 2)
    assert corpus_get("curve_flat_2d").frechet_chain([0.0, 0.0], 1).forms == ()


def test_tensor_chain_low_parts_checked():
    with pytest.raises(BadOrder):
        tensor_chain([np.ones(2)], [np.ones(3)])


def test_smooth_points():
    f = corpus_get("abs_1d")
    assert not f.is_smooth_at([0.0]) and f.is_smooth_at([0.3])
    assert not corpus_get("flat_exp_2d").is_smooth_at([0.0, 0.0])
