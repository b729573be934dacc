import mpmath
import numpy as np

import frozen


def test_dense_scans():
    t = np.logspace(-12, 0, 10**6)
    assert np.sin(1 / t).min() == frozen.SIN_INV_MIN
    assert np.cos(1 / t).min() == frozen.COS_INV_MIN
    th = np.linspace(0, 2 * np.pi, 10**6)
    assert (np.cos(th) ** 4 + np.sin(th) ** 4).min() == frozen.PNORM4_SPHERE_MIN


def test_mp_closed_form():
    with mpmath.workdps(40):
        v = 2 * (-mpmath.exp(-100)) / mpmath.mpf(0.1) ** 2
    assert abs(float(v) - frozen.NEG_FLAT_DELTA2) <= 1e-16 * abs(frozen.NEG_FLAT_DELTA2)


def test_grid_scans():
    g = np.linspace(-1, 1, 2001)
    f = np.where(g >= 0, g**4, -g**4)
    assert (g[np.argmin(f)],) == frozen.PIECEWISE4_ARGMIN and f.min() == frozen.PIECEWISE4_MIN
    G = np.stack(np.meshgrid(g[::10], g[::10]), -1).reshape(-1, 2)
    v = -(G**2).sum(axis=1)
    assert {tuple(p) for p in G[v == v.min()].tolist()} == frozen.NEG_QUAD_ARGMIN


def test_hand_values():
    assert np.einsum("ij,i,j", 2 * np.eye(2), [1, 1], [1, 1]) == frozen.TWO_IDENTITY_AT_ONES
    y = np.random.default_rng(0).normal(size=(1000, 2))
    k = np.linalg.norm(2 * y, axis=1) / np.linalg.norm(y, axis=1)
    np.testing.assert_allclose(k, frozen.QUAD_LIPSCHITZ, rtol=1e-14)
