"""Comparison derivatives: Dini, Ben-Tal-Zowe, the Ginchev sequence, and an l-stability probe."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .extreal import NEG_INF, ExtReal
from .funcspace import ScalarField
from .hadamard import _EPS, _base_value
from .limits import (DEFAULT_SHELLS, LiminfEstimate, ShellConfig, accelerate, liminf1, liminf2,
                     reduce_shells, shell_times)
from .sphere import sphere_sample


def _dini_quotient(field: ScalarField, x: np.ndarray, u: np.ndarray):
    fx = _base_value(field, x)
    nu = float(np.linalg.norm(u))

    def g(t):
        t = np.asarray(t, dtype=float)
        fy = field(x[None, :] + t[:, None] * u[None, :])
        with np.errstate(invalid="ignore"):
            vals = np.where(np.isinf(fy), np.inf, (fy - fx) / t)
        err = 4.0 * _EPS * (np.abs(np.where(np.isfinite(fy), fy, 0.0)) + abs(fx)) / t
        return vals, err, nu

    return g


def dini_derivative(field: ScalarField, x, u, cfg: ShellConfig = DEFAULT_SHELLS) -> LiminfEstimate:
    """liminf over t -> 0+ of (f(x + t u) - f(x)) / t, with the direction held fixed.

    Uses the same t values as the ray part of the Hadamard sampler.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    nu = float(np.linalg.norm(u)) or 1.0
    return liminf1(_dini_quotient(field, x, u), cfg, dim=field.dim, t_scale=1.0 / nu)


def dini_batch(field: ScalarField, Y, U, cfg: ShellConfig = DEFAULT_SHELLS) -> np.ndarray:
    """Dini derivative estimates for paired rows of base points ``Y`` and directions ``U``."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    U = np.atleast_2d(np.asarray(U, dtype=float))
    T = shell_times(cfg, field.dim)
    J, N = T.shape
    nu = np.linalg.norm(U, axis=1)
    t = T.reshape(1, -1) / np.where(nu > 0, nu, 1.0)[:, None]
    fY = field(Y)
    P = Y[:, None, :] + t[:, :, None] * U[:, None, :]
    fP = field(P.reshape(-1, field.dim)).reshape(len(Y), -1)
    with np.errstate(invalid="ignore"):
        Q = np.where(np.isinf(fP), np.inf, (fP - fY[:, None]) / t)
    err = 4.0 * _EPS * (np.abs(np.where(np.isfinite(fP), fP, 0.0)) + np.abs(fY)[:, None]) / t
    ref = np.where(np.isfinite(Q), np.maximum(nu[:, None], np.abs(Q)), np.inf)
    bad = err > cfg.noise_tol * ref
    out = np.empty(len(Y))
    for k in range(len(Y)):
        est = reduce_shells(Q[k].reshape(J, N), cfg, unreliable=bad[k].reshape(J, N))
        out[k] = float(est.value)
    return out


@dataclass(frozen=True)
class LimitEstimate:
    """A true limit along a fixed sequence t_j = delta0 * ratio^j.

    ``converged`` reports whether the last terms settled, either literally or
    as a geometric tail whose accelerated limit is stable (``extrapolated``);
    when they did not, the result is non-convergent rather than a liminf.
    """

    value: ExtReal
    sequence: tuple
    converged: bool
    first_order: LiminfEstimate | None = None
    extrapolated: bool = False

    @property
    def stabilized(self) -> bool:
        return self.converged

    @property
    def status(self) -> str:
        return "Converged" if self.converged else "NonConvergent"

    def to_json(self) -> dict:
        return {"value": self.value.to_json(), "status": self.status, "extrapolated": self.extrapolated,
                "sequence": [ExtReal.from_float(v).to_json() for v in self.sequence]}


def bz_second(field: ScalarField, x, u, z, cfg: ShellConfig = DEFAULT_SHELLS) -> LimitEstimate:
    """Second derivative along the parabola x + t u + t^2 z:

        lim_{t -> 0+} (f(x + t u + t^2 z) - f(x) - t f'(x; u)) / t^2

    with f'(x; u) the Dini derivative, estimated on a finer shell sequence.
    Where the field is smooth at x the exact gradient is used instead, since any
    error in f'(x; u) is amplified by 1/t; otherwise that error counts as noise.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    z = np.asarray(z, dtype=float).reshape(-1)
    fx = _base_value(field, x)
    first = dini_derivative(field, x, u, cfg.refined(cfg.shells // 2))
    fp = float(first.value)
    if not math.isfinite(fp):
        return LimitEstimate(NEG_INF if fp < 0 else ExtReal.from_float(fp), (), False, first)
    fp_err = abs(fp - float(first.last_minimum)) if math.isfinite(float(first.last_minimum)) else 0.0
    if field.is_smooth_at(x):
        fp, fp_err = float(field.tensors(x, 1)[0] @ u), 0.0
    t = cfg.radii()[1:]
    fy = field(x[None, :] + t[:, None] * u[None, :] + (t * t)[:, None] * z[None, :])
    with np.errstate(invalid="ignore"):
        q = np.where(np.isinf(fy), np.inf, (fy - fx - t * fp) / (t * t))
    err = 4.0 * _EPS * (np.abs(np.where(np.isfinite(fy), fy, 0.0)) + abs(fx) + np.abs(t * fp)) / (t * t) + fp_err / t
    ok = ~(err > cfg.noise_tol * np.maximum(1.0, np.abs(np.nan_to_num(q, posinf=1.0))))
    if ok.any():
        q = q[: int(np.nonzero(ok)[0].max()) + 1]
    tail = q[-cfg.plateau_len:]
    tol = max(cfg.plateau_tol, 10 * cfg.plateau_tol * abs(q[-1]))
    if np.all(tail == np.inf):
        converged = True
    elif np.all(np.isfinite(tail)):
        converged = float(tail.max() - tail.min()) <= tol
    else:
        converged = False
    seq = tuple(float(v) for v in q)
    if not converged:
        # terms like c*t still sit a visible distance from the limit at the finest t
        acc = accelerate(q)
        if acc is not None and acc[1] <= tol:
            return LimitEstimate(ExtReal.from_float(acc[0]), seq, True, first, True)
    return LimitEstimate(ExtReal.from_float(q[-1]), seq, converged, first)


@dataclass(frozen=True)
class GinchevSequence:
    """Entries D^0, ..., D^n at fixed (x, u); ``None`` marks entries left undefined
    because an earlier entry was -inf."""

    values: tuple
    estimates: tuple

    @property
    def divergent_order(self) -> int | None:
        for k, est in enumerate(self.estimates):
            if est is not None and est.divergent_neg:
                return k
        return None

    def to_json(self) -> dict:
        return {
            "values": [None if v is None else v.to_json() for v in self.values],
            "undefined": [v is None for v in self.values],
            "divergent_order": self.divergent_order,
            "stabilized": [None if e is None else e.stabilized for e in self.estimates],
        }


def _ginchev_quotient(field: ScalarField, x: np.ndarray, k: int, lower: list):
    def g(t, U):
        t = np.asarray(t, dtype=float)
        fy = field(x[None, :] + t[:, None] * U)
        rem = fy.copy()
        mag = np.abs(np.where(np.isfinite(fy), fy, 0.0))
        for i, d in enumerate(lower):
            term = t ** i / math.factorial(i) * d
            rem = rem - term
            mag = mag + np.abs(term)
        scale = math.factorial(k) / t ** k
        with np.errstate(invalid="ignore", over="ignore"):
            vals = np.where(np.isinf(fy), np.inf, scale * rem)
        return vals, 4.0 * _EPS * scale * mag

    return g


def ginchev_derivative(field: ScalarField, x, u, n: int, cfg: ShellConfig = DEFAULT_SHELLS) -> GinchevSequence:
    """The recursive sequence

        D^0 = liminf f(x + t u'),   D^k = liminf k!/t^k [f(x + t u') - sum_{i<k} t^i/i! D^i]

    over t -> 0+, u' -> u.  Entry k is estimated on a shell sequence extended by
    (n - k) * J/2 shells and, except for the last, with a tighter noise filter,
    so that the error of an entry, divided by the powers of t in later
    quotients, stays below their resolution.  A D^0 within rounding of f(x) is
    reported as f(x).
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    fx = _base_value(field, x)
    values, estimates, lower = [], [], []
    for k in range(n + 1):
        if len(lower) < k:
            values.append(None)
            estimates.append(None)
            continue
        sub = cfg.refined((n - k) * (cfg.shells // 2))
        if k < n:
            # later quotients amplify this entry's error by 1/t, so drop samples
            # that rounding could move by more than a hundredth of the usual noise
            sub = sub.replace(noise_tol=cfg.noise_tol / 100)
        est = liminf2(_ginchev_quotient(field, x, k, lower), u, sub)
        if k == 0 and est.value.is_finite and abs(float(est.value) - fx) <= 8.0 * _EPS * abs(fx):
            # rounding noise around f(x) would be amplified by 1/t in every later quotient
            est = dataclasses.replace(est, value=ExtReal.from_float(fx))
        values.append(est.value)
        estimates.append(est)
        if est.value.is_finite:
            lower.append(float(est.value))
    return GinchevSequence(tuple(values), tuple(estimates))


@dataclass(frozen=True)
class StabilityProfile:
    radii: tuple
    khat: tuple
    fit_exponent: float
    worst_point: tuple | None = None
    worst_direction: tuple | None = None

    def __post_init__(self):
        r = np.asarray(self.radii)
        if len(r) and (np.any(r <= 0) or np.any(np.diff(r) >= 0)):
            raise ValueError("radii must be positive and strictly decreasing")

    @property
    def stable_evidence(self) -> bool:
        return self.fit_exponent >= -0.05

    def to_json(self) -> dict:
        return {"radii": list(self.radii), "khat": list(self.khat),
                "fit_exponent": self.fit_exponent, "stable_evidence": self.stable_evidence}


def lstability_probe(field: ScalarField, x, radii=None, directions=None,
                     cfg: ShellConfig = DEFAULT_SHELLS, offsets: int = 16) -> StabilityProfile:
    """Estimate K(rho) = max |Dini f(y; u) - Dini f(x; u)| / |y - x| over |y - x| in [rho/2, rho].

    Points y sit on three spheres (rho/2, 3rho/4, rho) in ``offsets`` directions.
    ``fit_exponent`` is the least-squares slope of log K against log rho, so a
    bounded K gives an exponent near 0 and K ~ rho^-p gives -p.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    d = field.dim
    if radii is None:
        radii = [2.0 ** -k for k in range(2, 9)]
    radii = tuple(float(r) for r in radii)
    U = sphere_sample(d, seed=cfg.seed) if directions is None else np.atleast_2d(np.asarray(directions, float))
    if d == 1:
        V = np.array([[1.0], [-1.0]])
    else:
        V = sphere_sample(d, offsets, seed=cfg.seed + 1)
        if d == 2:
            # stagger the offset angles so they do not coincide with sampled directions
            a = math.pi / offsets
            V = V @ np.array([[math.cos(a), math.sin(a)], [-math.sin(a), math.cos(a)]])
    base = dini_batch(field, np.repeat(x[None, :], len(U), axis=0), U, cfg)
    khat = []
    worst = (0.0, None, None)
    for rho in radii:
        Y = np.concatenate([x + s * rho * V for s in (0.5, 0.75, 1.0)])
        YY = np.repeat(Y, len(U), axis=0)
        UU = np.tile(U, (len(Y), 1))
        D = dini_batch(field, YY, UU, cfg)
        with np.errstate(invalid="ignore"):
            ratio = np.abs(D - np.tile(base, len(Y))) / np.linalg.norm(YY - x, axis=1)
        ratio = np.where(np.isnan(ratio), np.inf, ratio)
        k = int(np.argmax(ratio))
        khat.append(float(ratio[k]))
        if ratio[k] >= worst[0]:
            worst = (float(ratio[k]), tuple(YY[k].tolist()), tuple(UU[k].tolist()))
    K = np.array(khat)
    if len(radii) < 2 or np.all(K <= 1e-9) or not np.all(np.isfinite(K)):
        exponent = 0.0 if np.all(np.isfinite(K)) else -math.inf
    else:
        slope = np.polyfit(np.log(radii), np.log(np.maximum(K, 1e-300)), 1)[0]
        exponent = float(slope)
    return StabilityProfile(radii, tuple(khat), exponent, worst[1], worst[2])
