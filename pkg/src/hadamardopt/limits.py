"""Shell-sampling estimator for liminf over (t -> 0+, u' -> u).

Every Hadamard-type derivative in this package is a liminf of a quotient
g(t, u') as t decreases to 0 and u' approaches u jointly.  The liminf equals
sup over delta of inf over the region {0 < t <= delta, |u' - u| <= delta};
here that region is sampled on geometric shells delta_j = delta0 * ratio^j
with a fixed scrambled Sobol point set (scaled, never redrawn), so shell
minima of scale-invariant quotients are exactly comparable across shells.

Per shell, each Sobol point yields one t and is evaluated twice: at u' in the
closed ball of radius delta_j around u and on the ray u' = u.  A fraction of
the t values reach below delta_{j+1}, down to delta_{j+1}^t_depth, so that
quotients which blow up when |u' - u| dominates t are visible.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.stats import norm, qmc

from .errors import ConfigError, EvaluationError, IndeterminateSum, NotStabilized
from .extreal import NEG_INF, POS_INF, ExtReal


@dataclass(frozen=True)
class ShellConfig:
    delta0: float = 1.0
    ratio: float = 0.5
    shells: int = 14
    samples_per_shell: int = 128
    seed: int = 42
    neg_div_threshold: float = -1e12
    plateau_tol: float = 1e-6
    plateau_len: int = 3
    # sampling depth below the shell slice; 1.0 reproduces plain slices
    t_depth: float = 1.25
    deep_fraction: float = 0.25
    # log-log growth rate of shell minima that counts as divergence to -inf,
    # once the minima are below -growth_floor (smaller ones may be rounding noise)
    growth_slope: float = 0.1
    growth_floor: float = 1e-3
    # samples whose rounding error may exceed this (relative) are dropped, and
    # trailing shells keeping less than min_reliable of their samples are cut
    noise_tol: float = 1e-5
    min_reliable: float = 0.5
    polish_iters: int = 80
    polish_population: int = 8

    def __post_init__(self):
        if not self.delta0 > 0:
            raise ConfigError("delta0 must be positive")
        if not 0 < self.ratio < 1:
            raise ConfigError("ratio must lie in (0, 1)")
        if int(self.shells) < 4:
            raise ConfigError("need at least 4 shells")
        if int(self.samples_per_shell) < 16:
            raise ConfigError("need at least 16 samples per shell")
        if not self.neg_div_threshold < 0:
            raise ConfigError("neg_div_threshold must be negative")
        if not self.plateau_tol > 0:
            raise ConfigError("plateau_tol must be positive")
        if not 1 <= int(self.plateau_len) <= int(self.shells):
            raise ConfigError("plateau_len must lie in [1, shells]")
        if not self.t_depth >= 1:
            raise ConfigError("t_depth must be >= 1")
        if not self.growth_floor >= 0:
            raise ConfigError("growth_floor must be nonnegative")
        if not self.noise_tol > 0:
            raise ConfigError("noise_tol must be positive")
        if not 0 < self.min_reliable <= 1:
            raise ConfigError("min_reliable must lie in (0, 1]")
        if not 0 <= self.deep_fraction < 1:
            raise ConfigError("deep_fraction must lie in [0, 1)")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    def replace(self, **changes) -> "ShellConfig":
        return replace(self, **changes)

    def refined(self, extra_shells: int) -> "ShellConfig":
        return replace(self, shells=self.shells + int(extra_shells))

    def radii(self) -> np.ndarray:
        return self.delta0 * self.ratio ** np.arange(self.shells + 1)

    @property
    def finest_radius(self) -> float:
        return self.delta0 * self.ratio ** (self.shells - 1)


DEFAULT_SHELLS = ShellConfig()


@dataclass(frozen=True)
class LiminfEstimate:
    """Result of the shell sampler.

    ``shell_minima`` are suffix minima (nondecreasing by construction) and
    ``batch_minima`` the raw per-shell minima, both as floats with +-inf.
    ``value`` is the limit estimate: NEG_INF when divergence was detected,
    otherwise the last shell minimum, replaced by an Aitken extrapolate of
    the batch minima when their tail contracts geometrically.
    """

    value: ExtReal
    shell_minima: tuple
    batch_minima: tuple
    stabilized: bool
    divergent_neg: bool
    samples_used: int
    last_minimum: float
    extrapolated: bool = False
    shells_used: int = 0
    argmin_t: float | None = None
    argmin_uprime: tuple | None = None

    def __float__(self):
        return float(self.value)

    def to_json(self) -> dict:
        return {
            "value": self.value.to_json(),
            "shell_minima": [ExtReal.from_float(m).to_json() for m in self.shell_minima],
            "stabilized": self.stabilized,
            "divergent_neg": self.divergent_neg,
            "samples_used": self.samples_used,
            "last_minimum": ExtReal.from_float(self.last_minimum).to_json(),
            "extrapolated": self.extrapolated,
        }


@lru_cache(maxsize=64)
def _base_points(n: int, dim: int, seed: int):
    """Sobol coordinates: t-fraction s in [0, 1) and ball offsets w in the unit ball."""
    sob = qmc.Sobol(dim + 2, scramble=True, seed=seed)
    m = max(4, int(math.ceil(math.log2(n))))
    P = sob.random_base2(m)[:n]
    s = P[:, 0]
    if dim == 0:
        w = np.zeros((n, 0))
    else:
        G = norm.ppf(np.clip(P[:, 1:dim + 1], 1e-12, 1 - 1e-12))
        nrm = np.linalg.norm(G, axis=1, keepdims=True)
        nrm[nrm == 0] = 1.0
        radius = P[:, dim + 1] ** (1.0 / dim)
        w = G / nrm * radius[:, None]
    s.setflags(write=False)
    w.setflags(write=False)
    return s, w


def shell_t(cfg: ShellConfig, s: np.ndarray) -> np.ndarray:
    """t-samples for every shell, shape ``(J, N)``, from fractions ``s``."""
    delta = cfg.radii()
    hi = np.log(delta[:-1])[:, None]
    mid = np.log(delta[1:])[:, None]
    lo = math.log(cfg.delta0) + cfg.t_depth * (mid - math.log(cfg.delta0))
    split = 1.0 - cfg.deep_fraction
    s = s[None, :]
    slice_part = hi - np.minimum(s / split, 1.0) * (hi - mid)
    deep_frac = np.clip((s - split) / max(cfg.deep_fraction, 1e-300), 0.0, 1.0)
    deep_part = mid - deep_frac * (mid - lo)
    return np.exp(np.where(s < split, slice_part, deep_part))


def shell_times(cfg: ShellConfig, dim: int = 0) -> np.ndarray:
    """The ``(J, N)`` t-samples used for a problem in ``dim`` variables."""
    s, _ = _base_points(cfg.samples_per_shell, dim, cfg.seed)
    return shell_t(cfg, s)


def _call(g, *args):
    try:
        out = g(*args)
    except (IndeterminateSum, EvaluationError):
        raise
    except Exception as exc:
        raise EvaluationError(f"quotient evaluation raised {exc!r}") from exc
    err = None
    if isinstance(out, tuple):
        vals, *rest = out
        if rest:
            err = rest[0] if len(rest) == 1 else rest
    else:
        vals = out
    vals = np.asarray(vals, dtype=float)
    if np.isnan(vals).any():
        raise EvaluationError("quotient evaluation produced NaN")
    return vals, err


def _unreliable(vals, err, cfg):
    """Samples whose rounding-error bound exceeds noise_tol * max(scale, |value|).

    ``err`` is an absolute bound, or a pair (bound, scale) where scale is the
    natural size of the quotient (1 by default).
    """
    if err is None:
        return np.zeros(vals.shape, dtype=bool)
    scale = 1.0
    if isinstance(err, (list, tuple)):
        err, scale = err
    err = np.asarray(err, dtype=float)
    ref = np.where(np.isfinite(vals), np.maximum(scale, np.abs(vals)), np.inf)
    return np.nan_to_num(err, nan=np.inf) > cfg.noise_tol * ref


def liminf2(g: Callable, u, cfg: ShellConfig = DEFAULT_SHELLS, *, vectorized: bool = True,
            ray: bool = True) -> LiminfEstimate:
    """Estimate liminf of g(t, u') as t -> 0+ and u' -> u.

    ``g(t, U)`` receives a vector of t values and a matching ``(m, d)`` array of
    directions and returns m extended reals, optionally as ``(values, err)``
    or ``(values, err, scale)`` with an absolute rounding-error bound per
    sample and the natural size of the values (see :func:`_unreliable`).
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    if not np.all(np.isfinite(u)):
        raise ValueError("direction must be finite")
    if not vectorized:
        g = _vectorize2(g)
    J, N, d = cfg.shells, cfg.samples_per_shell, len(u)
    s, w = _base_points(N, d, cfg.seed)
    # sample in coordinates normalized by |u|: (t, u') for tau*u is (t/tau, tau*u')
    # for u, which makes estimates of degree-n homogeneous quotients exactly homogeneous
    nu = float(np.linalg.norm(u)) or 1.0
    T = shell_t(cfg, s) / nu                              # (J, N)
    delta = cfg.radii()[:J] * nu
    ball = u[None, None, :] + delta[:, None, None] * w[None, :, :]   # (J, N, d)
    parts_t = [T.reshape(-1)]
    parts_u = [ball.reshape(-1, d)]
    if ray:
        parts_t.append(T.reshape(-1))
        parts_u.append(np.broadcast_to(u, (J * N, d)))
    t_all = np.concatenate(parts_t)
    u_all = np.concatenate(parts_u)
    vals, err = _call(g, t_all, u_all)
    reps = len(parts_t)
    V = vals.reshape(reps, J, N).transpose(1, 0, 2).reshape(J, reps * N)
    bad = _unreliable(vals, err, cfg).reshape(reps, J, N).transpose(1, 0, 2).reshape(J, reps * N)
    Tt = np.tile(T, (1, reps))
    Uu = u_all.reshape(reps, J, N, d).transpose(1, 0, 2, 3).reshape(J, reps * N, d)
    return reduce_shells(V, cfg, Tt, Uu, unreliable=bad)


def liminf1(g: Callable, cfg: ShellConfig = DEFAULT_SHELLS, *, vectorized: bool = True,
            dim: int = 0, t_scale: float = 1.0) -> LiminfEstimate:
    """Estimate liminf of g(t) as t -> 0+ (the ray-only case of :func:`liminf2`).

    Passing the ambient ``dim`` and ``t_scale = 1/|u|`` reuses exactly the t
    values that :func:`liminf2` evaluates on its ray u' = u.
    """
    if not vectorized:
        g1 = g
        g = lambda t: np.array([float(g1(ti)) for ti in t])  # noqa: E731
    J, N = cfg.shells, cfg.samples_per_shell
    T = shell_times(cfg, dim) * t_scale
    vals, err = _call(g, T.reshape(-1))
    bad = _unreliable(vals, err, cfg).reshape(J, N)
    return reduce_shells(vals.reshape(J, N), cfg, T, None, unreliable=bad)


def _vectorize2(g):
    def wrapped(t, U):
        return np.array([float(g(ti, ui)) for ti, ui in zip(t, U)])
    return wrapped


def reduce_shells(V: np.ndarray, cfg: ShellConfig, T=None, U=None, unreliable=None) -> LiminfEstimate:
    """Fold per-shell sample values ``V`` of shape ``(J, m)`` into an estimate.

    Samples flagged ``unreliable`` (rounding error too large) are ignored;
    trailing shells left with less than ``min_reliable`` of their samples are
    cut off, since a minimum over part of a shell isn't comparable with the
    full minima before it.
    """
    if unreliable is not None and unreliable.any():
        usable = (~unreliable).mean(axis=1) >= cfg.min_reliable
        if not usable.any():
            usable = ~unreliable.all(axis=1)
        if usable.any():
            J = int(np.nonzero(usable)[0].max()) + 1
            V = np.where(unreliable[:J], np.inf, V[:J])
            T = None if T is None else T[:J]
            U = None if U is None else U[:J]
    J = V.shape[0]
    batch = V.min(axis=1)
    suffix = np.minimum.accumulate(batch[::-1])[::-1]
    last = float(suffix[-1])
    K = cfg.plateau_len + 1
    divergent = bool(np.any(V == -np.inf)) or last < cfg.neg_div_threshold
    if not divergent and J >= K:
        divergent = _accelerating_descent(batch[-K:], cfg)
    extrapolated, spread = False, np.inf
    if divergent:
        value = NEG_INF
    elif last == np.inf:
        value = POS_INF
    else:
        v, extrapolated, spread = _extrapolate(batch, suffix)
        value = ExtReal.from_float(v)
    stabilized = _plateau(suffix[-cfg.plateau_len:], spread, cfg)
    argmin_t = argmin_u = None
    if T is not None and np.isfinite(last):
        k = int(np.argmin(V[-1]))
        argmin_t = float(T[-1, k])
        if U is not None:
            argmin_u = tuple(float(c) for c in U[-1, k])
    return LiminfEstimate(
        value=value,
        shell_minima=tuple(float(m) for m in suffix),
        batch_minima=tuple(float(b) for b in batch),
        stabilized=stabilized,
        divergent_neg=divergent,
        samples_used=int(V.size),
        shells_used=J,
        last_minimum=last,
        extrapolated=extrapolated,
        argmin_t=argmin_t,
        argmin_uprime=argmin_u,
    )


def _accelerating_descent(b: np.ndarray, cfg: ShellConfig) -> bool:
    """Negative minima falling like delta^-p (p >= growth_slope) with non-shrinking steps.

    A quotient converging to a negative limit also produces falling minima, but
    its steps contract geometrically; those are left to the extrapolation.
    """
    if not np.all(np.isfinite(b)) or not np.all(b < 0) or b[-1] > -cfg.growth_floor:
        return False
    steps = -np.diff(b)
    if not np.all(steps > 0) or np.any(steps[1:] < 0.9 * steps[:-1]):
        return False
    span = (len(b) - 1) * math.log(1.0 / cfg.ratio)
    slope = math.log(b[-1] / b[0]) / span
    return slope >= cfg.growth_slope


def _aitken(b: np.ndarray):
    """Aitken limit of the last three terms, or None unless they contract geometrically."""
    d1, d2 = b[-2] - b[-3], b[-1] - b[-2]
    if d1 == 0 or d2 == 0 or (d1 > 0) != (d2 > 0):
        return None
    q = d2 / d1
    if not 0 < q <= _MAX_CONTRACTION:
        return None
    return float(b[-1] + d2 * q / (1.0 - q)), q


_MAX_CONTRACTION = 0.6


def _level(b: np.ndarray):
    """Aitken limit of the last terms when two consecutive steps agree on the contraction ratio."""
    if len(b) < 4 or not np.all(np.isfinite(b[-4:])):
        return None
    a1, a2 = _aitken(b[-4:-1]), _aitken(b[-3:])
    if a1 is None or a2 is None or abs(a1[1] - a2[1]) > 0.1:
        return None
    return a2[0], abs(a2[0] - a1[0])


def _geometric_fit(b: np.ndarray, k: int = 7):
    """Least-squares fit of L + C q^j over the last k monotone terms, q the median step ratio.

    Slower to react than Aitken but tolerant of the sampling jitter that makes
    consecutive Aitken steps disagree.
    """
    if len(b) < k or not np.all(np.isfinite(b[-k:])):
        return None
    tail = b[-k:]
    d = np.diff(tail)
    if not (np.all(d > 0) or np.all(d < 0)):
        return None
    q = float(np.median(d[1:] / d[:-1]))
    if not 0.0 < q <= 0.75:
        return None
    A = np.stack([np.ones(k), q ** np.arange(k)], axis=1)
    (limit, _), *_ = np.linalg.lstsq(A, tail, rcond=None)
    return float(limit)


def _extrapolate(b: np.ndarray, m: np.ndarray):
    """Accelerate monotone, geometrically converging batch minima.

    One Aitken pass removes the leading geometric error term; a second pass
    over the first-level estimates removes the next one when those contract
    as well.  Oscillating or noisy minima are left alone.
    Returns (value, extrapolated, spread of the last two estimates).
    """
    last = float(m[-1])
    first = _level(b)
    if first is None:
        fit, prev = _geometric_fit(b), _geometric_fit(b[:-1])
        if fit is None or prev is None:
            return last, False, np.inf
        first = fit, abs(fit - prev)
    value, spread = first
    if len(b) >= 7:
        A = [_level(b[: len(b) - k]) for k in (3, 2, 1, 0)]
        if all(a is not None for a in A):
            second = _level(np.array([a[0] for a in A]))
            if second is not None and abs(second[0] - value) <= spread:
                value, spread = second
    if b[-1] > b[-2]:
        # rising minima: the liminf can't be below what was already observed
        value = max(value, last)
    else:
        value = min(value, last)
    return float(value), True, float(spread)


def accelerate(seq):
    """Limit of a monotone, geometrically converging sequence and the spread of
    the last two estimates, or None when the tail doesn't look like that."""
    b = np.asarray(seq, dtype=float)
    if len(b) < 4 or not np.all(np.isfinite(b[-4:])):
        return None
    d = np.diff(b[-4:])
    if not (np.all(d > 0) or np.all(d < 0)):
        return None
    value, extrapolated, spread = _extrapolate(b, b)
    return (value, spread) if extrapolated else None


def _plateau(tail: np.ndarray, spread: float, cfg: ShellConfig) -> bool:
    if np.all(tail == np.inf):
        return True
    if not np.all(np.isfinite(tail)):
        return False
    if float(tail.max() - tail.min()) <= cfg.plateau_tol:
        return True
    return spread <= cfg.plateau_tol


def warn_if_unstable(est: LiminfEstimate, what: str) -> None:
    if not est.stabilized and not est.divergent_neg:
        warnings.warn(f"{what}: shell minima did not stabilize", NotStabilized, stacklevel=3)


@dataclass
class PolishResult:
    value: float
    t: float
    uprime: np.ndarray
    evaluations: int = 0


def polish_infimum(g: Callable, u, cfg: ShellConfig = DEFAULT_SHELLS, *, starts=None,
                   delta: float | None = None) -> PolishResult:
    """Local search for the infimum of g over {t_lo <= t <= delta, |u' - u| <= delta}.

    ``delta`` defaults to the finest shell radius and ``t_lo = delta^4 / delta0^3``.
    Used before issuing certificates: random shell samples can miss thin sets
    (curves, lines) on which the quotient is small.
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    d = len(u)
    delta = cfg.finest_radius if delta is None else float(delta)
    log_hi = math.log(delta)
    log_lo = math.log(cfg.delta0) + 4.0 * (log_hi - math.log(cfg.delta0))
    rng = np.random.default_rng(cfg.seed)

    def decode(Z):
        logt = np.clip(Z[:, 0], log_lo, log_hi)
        W = Z[:, 1:]
        nrm = np.maximum(1.0, np.linalg.norm(W, axis=1, keepdims=True))
        return np.exp(logt), u[None, :] + delta * W / nrm

    def evaluate(Z):
        t, U = decode(Z)
        vals, err = _call(g, t, U)
        return np.where(_unreliable(vals, err, cfg), np.inf, vals)

    if starts is None:
        starts = []
    Z0 = [np.concatenate([[log_hi + k * (log_lo - log_hi) / 7.0], np.zeros(d)]) for k in range(8)]
    for t0, u0 in starts:
        Z0.append(np.concatenate([[math.log(max(t0, 1e-300))], (np.asarray(u0) - u) / delta]))
    Z = np.array(Z0)
    F = evaluate(Z)
    evals = len(Z)
    order = np.argsort(F, kind="stable")[: cfg.polish_population]
    Z, F = Z[order], F[order]
    sigma = np.concatenate([[0.25 * (log_hi - log_lo)], np.full(d, 0.5)])
    for _ in range(cfg.polish_iters):
        P = len(Z)
        props = [Z + rng.standard_normal(Z.shape) * sigma for _ in range(4)]
        for k in range(d + 1):
            step = np.zeros(d + 1)
            step[k] = sigma[k]
            props.append(Z + step)
            props.append(Z - step)
        C = np.concatenate(props)
        FC = evaluate(C)
        evals += len(C)
        FC = FC.reshape(len(props), P)
        best = np.argmin(FC, axis=0)
        cand = FC[best, np.arange(P)]
        improved = cand < F
        if improved.any():
            Cz = C.reshape(len(props), P, d + 1)[best, np.arange(P)]
            Z = np.where(improved[:, None], Cz, Z)
            F = np.where(improved, cand, F)
        else:
            sigma = sigma * 0.6
            if sigma.max() < 1e-9:
                break
    k = int(np.argmin(F))
    t, U = decode(Z[k:k + 1])
    return PolishResult(float(F[k]), float(t[0]), U[0], evals)
