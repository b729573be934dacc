from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hadamardopt import dd
from hadamardopt.errors import ExpressionError
from hadamardopt.expr import compile_expression

coord = st.floats(-2.0, 2.0, allow_nan=False)


def test_precedence_and_power():
    e = compile_expression("-x1^2 + 2*x2^3^1")
    np.testing.assert_allclose(e([[3.0, 2.0]]), [-9.0 + 16.0])
    assert compile_expression("2^3^2")([[0.0]])[0] == 2.0 ** 9


def test_conditionals_and_inf():
    e = compile_expression("if x2 == 0 then abs(x1)^n else inf", 2, n=3)
    np.testing.assert_array_equal(e([[-2.0, 0.0], [1.0, 0.5]]), [8.0, np.inf])
    assert compile_expression("if x > 0 and not x > 1 then 1 else 0")([[0.5], [2.0]]).tolist() == [1, 0]


@pytest.mark.parametrize("src", ["x1 +", "foo(x)", "y + 1", "x0", "(x1", "x1 ^"])
def test_rejects_bad_sources(src):
    with pytest.raises(ExpressionError):
        compile_expression(src)


def test_dimension_checks():
    with pytest.raises(ExpressionError):
        compile_expression("x3", dim=2)
    with pytest.raises(ExpressionError):
        compile_expression("x + x2")
    with pytest.raises(ExpressionError):
        compile_expression("x1")([[1.0, 2.0]])


def test_double_double_support():
    assert compile_expression("abs(x1)^4 + min(x2, 1)").supports_dd
    assert compile_expression("if x >= 0 then x^n else (-1)^(n-1)*x^n", n=4).supports_dd
    assert not compile_expression("exp(x)").supports_dd
    assert not compile_expression("x^(1/3)").supports_dd
    assert not compile_expression("x^x").supports_dd
    with pytest.raises(ExpressionError):
        compile_expression("sqrt(x)").eval_dd([[1.0]])


@given(coord, coord)
def test_numpy_matches_mpmath(a, b):
    e = compile_expression("x1^4 - 3*x1*x2 + abs(x2)/(1 + x1^2) + exp(-x2^2)")
    v = e([[a, b]])[0]
    ref = float(e.eval_mp([a, b], dps=40))
    assert v == pytest.approx(ref, rel=1e-12, abs=1e-12)


@given(coord, coord)
def test_double_double_matches_mpmath(a, b):
    e = compile_expression("(x1 - x2)^5 + x1^3*x2 - 7/3 + abs(x2 - 0.1)")
    hi, lo = e.eval_dd([[a, b]])
    with mpmath.workdps(60):
        ref = e.eval_mp([a, b], dps=60)
        err = abs(mpmath.mpf(hi[0]) + mpmath.mpf(lo[0]) - ref)
        scale = 1 + abs(a) ** 5 + abs(b) ** 5 + 5 * (1 + abs(a) + abs(b)) ** 5
    assert err <= 1e-28 * scale


normal = st.one_of(st.just(0.0), st.floats(1e-100, 1e6), st.floats(-1e6, -1e-100))


@given(normal, normal)
def test_error_free_transforms(a, b):
    s, e = dd.two_sum(a, b)
    assert Fraction(s) + Fraction(e) == Fraction(a) + Fraction(b)
    p, e = dd.two_prod(a, b)
    assert Fraction(p) + Fraction(e) == Fraction(a) * Fraction(b)


@given(st.floats(0.5, 2.0), st.integers(-6, 12))
def test_integer_power(a, k):
    hi, lo = dd.ipow(dd.from_float(np.array([a])), k)
    exact = Fraction(a) ** k
    assert abs(Fraction(hi[0]) + Fraction(lo[0]) - exact) <= abs(exact) * Fraction(1, 2**98)


def test_infinities_pass_through():
    x = dd.from_float(np.array([np.inf, 2.0]))
    hi, lo = dd.mul(x, dd.from_float(np.array([3.0, 3.0])))
    assert hi.tolist() == [np.inf, 6.0] and lo.tolist() == [0.0, 0.0]
