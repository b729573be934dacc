import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import frozen
from hadamardopt.classify import Kind, necessary_conditions
from hadamardopt.extreal import NEG_INF
from hadamardopt.funcspace import DEFAULT_CORPUS, corpus_get, zero_chain
from hadamardopt.hadamard import hadamard_derivative, hadamard_derivatives
from hadamardopt.limits import ShellConfig
from hadamardopt.rivals import (StabilityProfile, bz_second, dini_batch, dini_derivative,
                                ginchev_derivative, lstability_probe)
from hadamardopt.sphere import sphere_sample

RADII = 2.0 ** -np.arange(1, 7)


def test_dini_examples():
    assert float(dini_derivative(corpus_get("quad_2d"), [1.0, 2.0], [1.0, 0.0]).value) == pytest.approx(2.0, abs=1e-3)
    assert float(dini_derivative(corpus_get("abs_1d"), [0.0], [-1.0]).value) == pytest.approx(1.0)
    assert abs(float(dini_derivative(corpus_get("neg_flat_exp_1d"), [0.0], [1.0]).value)) <= 1e-6


def test_dini_batch_matches_single_calls():
    f = corpus_get("curve_flat_2d")
    Y = np.array([[0.1, 0.0], [0.0, 0.2], [0.3, 0.3]])
    U = sphere_sample(2, 3)
    batch = dini_batch(f, Y, U)
    single = [float(dini_derivative(f, y, u).value) for y, u in zip(Y, U)]
    np.testing.assert_allclose(batch, single, rtol=1e-12, atol=1e-15)


def test_bz_examples():
    quad = corpus_get("quad_2d")
    b = bz_second(quad, [0.0, 0.0], [1.0, 0.0], [0.0, 1.0])
    assert float(b.value) == pytest.approx(1.0, abs=1e-3) and b.converged
    assert float(bz_second(quad, [0.0, 0.0], [1.0, 0.0], [0.0, 0.0]).value) == pytest.approx(1.0)


@given(st.lists(st.floats(-2, 2), min_size=4, max_size=4))
def test_bz_linear(v):
    u, z = np.array(v[:2]), np.array(v[2:])
    b = bz_second(corpus_get("linear_2d"), [0.5, 0.5], u, z)
    assert float(b.value) == pytest.approx(z[0], abs=1e-6) and b.status == "Converged"


def test_bz_away_from_the_minimum():
    # the exact gradient replaces the estimated f'(x; u) at smooth points
    b = bz_second(corpus_get("quad_2d"), [1.0, 0.0], [1.0, 0.0], [0.0, 1.0])
    assert float(b.value) == pytest.approx(1.0, abs=1e-6) and b.converged


def test_bz_accelerates_linear_tails():
    # the quotient is 2 t u^3, which is still 6e-5 away from 0 at the finest t
    b = bz_second(corpus_get("cubic_1d"), [0.0], [-1.0], [1.0])
    assert b.converged and b.extrapolated and abs(float(b.value)) < 1e-8
    assert b.sequence[-1] < -1e-5


def test_bz_reports_non_convergence():
    # the estimated f'(x; u) is only good to ~1e-6 here, so the tail can't settle
    b = bz_second(corpus_get("piecewise_pow_n"), [-1.0], [1.0], [0.0])
    assert not b.converged and b.status == "NonConvergent"
    assert b.to_json()["status"] == "NonConvergent"


def test_ginchev_examples():
    seq = ginchev_derivative(corpus_get("quad_2d"), [1.0, 0.0], [1.0, 0.0], 2)
    assert float(seq.values[0]) == 1.0
    assert float(seq.values[1]) == pytest.approx(2.0, abs=1e-6)
    assert seq.values[2] is NEG_INF and seq.divergent_order == 2
    const = ginchev_derivative(corpus_get("constant_2d"), [0.3, -0.4], [0.6, 0.8], 3)
    assert float(const.values[0]) == 5.0 and all(float(v) == 0.0 for v in const.values[1:])


def test_ginchev_entries_after_divergence_are_undefined():
    # at the origin nothing is lost to cancellation, so the recursion runs deeper
    seq = ginchev_derivative(corpus_get("quad_2d"), [0.0, 0.0], [1.0, 0.0], 4)
    assert abs(float(seq.values[0])) < 1e-12 and abs(float(seq.values[1])) < 1e-12
    assert float(seq.values[2]) == pytest.approx(2.0, abs=1e-6)
    assert seq.values[3] is NEG_INF and seq.values[4] is None
    assert seq.to_json()["undefined"] == [False, False, False, False, True]


def test_ginchev_against_hadamard_with_gradient_chain(unit_circle):
    f, x = corpus_get("quad_2d"), [1.0, 0.0]
    ests = hadamard_derivatives(f, x, f.frechet_chain(x, 2), 2, unit_circle)
    np.testing.assert_allclose([float(e.value) for e in ests], 2.0, atol=1e-6)
    assert ginchev_derivative(f, x, [1.0, 0.0], 2).values[2] is NEG_INF


def test_lstability_quadratic():
    prof = lstability_probe(corpus_get("quad_2d"), [0.0, 0.0], RADII)
    np.testing.assert_allclose(prof.khat, frozen.QUAD_LIPSCHITZ, rtol=1e-3)
    assert abs(prof.fit_exponent) < 0.05 and prof.stable_evidence


def test_lstability_curve():
    prof = lstability_probe(corpus_get("curve_flat_2d"), [0.0, 0.0], RADII)
    assert prof.fit_exponent == pytest.approx(-0.5, abs=0.15) and not prof.stable_evidence
    assert np.all(np.diff(prof.khat) > 0)


def test_lstability_linear():
    prof = lstability_probe(corpus_get("linear_2d"), [0.0, 0.0], RADII)
    assert max(prof.khat) < 1e-6 and prof.stable_evidence


def test_profile_invariants():
    with pytest.raises(ValueError):
        StabilityProfile((0.1, 0.2), (1.0, 1.0), 0.0)
    with pytest.raises(ValueError):
        StabilityProfile((0.1, 0.0), (1.0, 1.0), 0.0)


CORPUS_POINTS = [(fid, p) for fid in DEFAULT_CORPUS.ids() for p in corpus_get(fid).points]


@pytest.mark.parametrize("fid,x", CORPUS_POINTS)
def test_dini_dominates_hadamard(fid, x):
    f = corpus_get(fid)
    for u in sphere_sample(f.dim, 8):
        d = float(dini_derivative(f, x, u).value)
        h = float(hadamard_derivative(f, x, zero_chain(1), 1, u).value)
        assert d >= h - 10 * 1e-6


@pytest.mark.parametrize("fid,x", CORPUS_POINTS)
def test_bz_respects_necessary_conditions(fid, x):
    f = corpus_get(fid)
    cfg = ShellConfig(shells=12, samples_per_shell=64)
    verdicts = necessary_conditions(f, x, 2, cfg)
    if any(v.kind is not Kind.NECESSARY_HOLD for v in verdicts):
        return
    for u in sphere_sample(f.dim, 8):
        if abs(float(dini_derivative(f, x, u, cfg).value)) > 1e-5:
            continue
        for z in sphere_sample(f.dim, 4, seed=1):
            b = bz_second(f, x, u, z, cfg)
            assert float(b.value) >= -10 * 1e-6
