import math
import numpy as np
import pytest

import frozen
from hadamardopt.classify import (Kind, Tolerances, fn_class_probe, isolated_min_check, necessary_conditions,
                                  stationary_scan, strict_min_certificate)
from hadamardopt.errors import BadOrder, GridTooCoarse
from hadamardopt.funcspace import ScalarField, corpus_get
from hadamardopt.oracle import oracle_isolated_order
from hadamardopt.sphere import sphere_sample

CIRCLE16 = sphere_sample(2, 16)


def kinds(verdicts):
    return [v.kind for v in verdicts]


def test_necessary_at_a_flat_maximizer():
    vs = necessary_conditions(corpus_get("neg_flat_exp_1d"), [0.0], 5)
    assert kinds(vs) == [Kind.NECESSARY_HOLD] * 5


def test_necessary_fails_for_concave_quadratic():
    vs = necessary_conditions(corpus_get("neg_quad_2d"), [0.0, 0.0], 2, directions=CIRCLE16)
    assert kinds(vs) == [Kind.NECESSARY_HOLD, Kind.NECESSARY_FAIL]
    assert vs[1].margin == pytest.approx(-2.0, abs=1e-3)
    assert vs[1].witness_direction is not None


def test_necessary_holds_for_quadratic_minimum():
    vs = necessary_conditions(corpus_get("quad_2d"), [0.0, 0.0], 4, directions=CIRCLE16)
    assert kinds(vs) == [Kind.NECESSARY_HOLD] * 4


def test_necessary_stop_at_fail():
    vs = necessary_conditions(corpus_get("neg_quad_2d"), [0.0, 0.0], 4, directions=CIRCLE16, stop_at_fail=True)
    assert len(vs) == 2 and vs[-1].kind is Kind.NECESSARY_FAIL
    with pytest.raises(BadOrder):
        necessary_conditions(corpus_get("quad_2d"), [0.0, 0.0], 0)


def test_strict_certificates():
    v = strict_min_certificate(corpus_get("pnorm_n4_2d"), [0.0, 0.0], 4)
    assert v.kind is Kind.STRICT_CERTIFIED
    assert v.margin == pytest.approx(24 * frozen.PNORM4_SPHERE_MIN, rel=0.15)
    assert strict_min_certificate(corpus_get("quad_2d"), [0.0, 0.0], 2).kind is Kind.STRICT_CERTIFIED
    v = strict_min_certificate(corpus_get("neg_flat_exp_1d"), [0.0], 6)
    assert v.kind is Kind.STRICT_UNKNOWN and v.witness_direction is not None


def test_isolated_pnorm():
    v = isolated_min_check(corpus_get("pnorm_n4_2d"), [0.0, 0.0], 4)
    assert v.kind is Kind.ISOLATED_CERTIFIED
    assert v.margin == pytest.approx(12.0, rel=0.15)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_flat_exponential_is_never_isolated(n):
    v = isolated_min_check(corpus_get("flat_exp_2d"), [0.0, 0.0], n, directions=CIRCLE16)
    assert v.kind is Kind.ISOLATED_REFUTED and v.witness_direction is not None


def test_isolated_extended_valued():
    v = isolated_min_check(corpus_get("studniarski_ext_2d"), [0.0, 0.0], 3)
    assert v.kind is Kind.ISOLATED_CERTIFIED
    assert v.margin == pytest.approx(6.0, rel=1e-3)


def test_isolated_refuted_by_a_lower_order():
    v = isolated_min_check(corpus_get("neg_quad_2d"), [0.0, 0.0], 3, directions=CIRCLE16)
    assert v.kind is Kind.ISOLATED_REFUTED and v.evidence["failing_order"] == 2


def test_inconclusive_band():
    tol = Tolerances(membership=1e-6, margin_min=10.0)
    v = isolated_min_check(corpus_get("quad_2d"), [0.0, 0.0], 2, tol=tol, directions=CIRCLE16)
    assert v.kind is Kind.INCONCLUSIVE


def test_verdict_json():
    v = isolated_min_check(corpus_get("studniarski_ext_2d"), [0.0, 0.0], 3, directions=CIRCLE16)
    js = v.to_json()
    assert js["kind"] == "IsolatedCertified" and js["order"] == 3
    assert isinstance(js["margin"], float)


def test_stationary_scan_piecewise():
    f = corpus_get("piecewise_pow_n:4")
    found = stationary_scan(f, [(-1.0, 1.0)], 21, 3)
    assert [p.point for p in found] == [(0.0,)]
    assert stationary_scan(f, [(-1.0, 1.0)], 21, 4) == []


def test_stationary_scan_concave():
    f = corpus_get("neg_quad_2d")
    assert stationary_scan(f, [(-1.0, 1.0), (-1.0, 1.0)], 5, 2, directions=CIRCLE16) == []


def test_stationary_scan_warns_on_coarse_grid():
    # grid points alternate between kinks of |sin| (minima) and its smooth maxima
    f = ScalarField("zigzag", 1, lambda X: np.abs(np.sin(np.pi * X[:, 0] / 0.4)))
    with pytest.warns(GridTooCoarse):
        found = stationary_scan(f, [(-1.0, 1.0)], 11, 2)
    assert [round(p.point[0], 6) for p in found] == [-0.8, -0.4, 0.0, 0.4, 0.8]


def test_stationary_scan_checks_the_box():
    with pytest.raises(ValueError):
        stationary_scan(corpus_get("quad_2d"), [(-1.0, 1.0)], 5, 1)


def test_fn_class_examples():
    f = corpus_get("pnorm_n4_2d")
    r4 = fn_class_probe(f, [0.0, 0.0], 4)
    assert r4.member and r4.alpha_hat == pytest.approx(frozen.PNORM4_SPHERE_MIN, rel=0.15)
    r3 = fn_class_probe(f, [0.0, 0.0], 3)
    assert not r3.member and r3.counterexample["alpha"] <= 1e-6
    rq = fn_class_probe(corpus_get("quad_2d"), [0.0, 0.0], 2)
    assert rq.member and rq.alpha_hat == pytest.approx(1.0, rel=1e-3)


def test_fn_class_vacuous():
    # no direction has a vanishing first derivative, so the class condition holds trivially
    r = fn_class_probe(corpus_get("linear_2d"), [0.5, 0.5], 2, directions=[[1.0, 0.0], [-1.0, 0.0]])
    assert r.vacuous and r.member and r.alpha_hat == math.inf
    assert r.to_json()["alpha_hat"] == "+inf"


@pytest.mark.parametrize("fid", ["pnorm_n4_2d", "quad_2d", "studniarski_ext_2d", "flat_exp_2d"])
def test_certified_implies_oracle_positive(fid):
    f = corpus_get(fid)
    for n in range(2, 5):
        if isolated_min_check(f, [0.0, 0.0], n, directions=CIRCLE16).kind is Kind.ISOLATED_CERTIFIED:
            assert oracle_isolated_order(f, [0.0, 0.0], n, grid_per_axis=64).c_hat > 0


@pytest.mark.parametrize("fid,n", [("pnorm_n4_2d", 4), ("quad_2d", 2)])
def test_oracle_positive_implies_necessary(fid, n):
    f = corpus_get(fid)
    assert oracle_isolated_order(f, [0.0, 0.0], n, grid_per_axis=64).c_hat > 0
    vs = necessary_conditions(f, [0.0, 0.0], n, directions=CIRCLE16)
    assert all(v.kind is Kind.NECESSARY_HOLD for v in vs[:-1])
    assert vs[-1].margin > 0


@pytest.mark.parametrize("fid,n", [("pnorm_n4_2d", 4), ("quad_2d", 2)])
def test_members_isolated_iff_necessary(fid, n):
    f = corpus_get(fid)
    assert fn_class_probe(f, [0.0, 0.0], n, directions=CIRCLE16).member
    iso = isolated_min_check(f, [0.0, 0.0], n, directions=CIRCLE16).kind is Kind.ISOLATED_CERTIFIED
    nec = all(v.kind is Kind.NECESSARY_HOLD for v in necessary_conditions(f, [0.0, 0.0], n - 1,
                                                                          directions=CIRCLE16))
    assert iso == nec


@pytest.mark.parametrize("fid", ["pnorm_n4_2d", "quad_2d", "linear_2d", "neg_quad_2d", "cubic_1d"])
def test_class_inclusion(fid):
    f = corpus_get(fid)
    x = f.points[0]
    dirs = sphere_sample(f.dim, 8)
    for n in range(2, 5):
        if fn_class_probe(f, x, n - 1, directions=dirs).member:
            assert fn_class_probe(f, x, n, directions=dirs).member


@pytest.mark.parametrize("n", [2, 4, 6])
def test_even_piecewise_has_no_stationary_points(n):
    f = corpus_get(f"piecewise_pow_n:{n}")
    assert stationary_scan(f, [(-1.0, 1.0)], 21, n) == []
