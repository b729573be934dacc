"""Order-n lower Hadamard derivatives and subdifferential tests.

The order-n quotient at x with chain (x*_1, ..., x*_{n-1}) is

    Delta_n(t, u') = n! t^-n [f(x + t u') - f(x) - sum_{i<n} t^i/i! x*_i(u', ..., u')]

and the derivative is its liminf as t -> 0+ and u' -> u.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dd
from ._parallel import map_ordered
from .errors import BadOrder, EmptySubdifferential, MissingAnalytic, PointOutsideDomain
from .extreal import NEG_INF, POS_INF, ExtReal
from .funcspace import DerivativeChain, HomogeneousForm, ScalarField, tensor_form
from .limits import DEFAULT_SHELLS, LiminfEstimate, ShellConfig, liminf2, polish_infimum
from .sphere import sphere_sample

_EPS = np.finfo(float).eps


def _base_value(field: ScalarField, x: np.ndarray) -> float:
    fx = float(field(x))
    if not math.isfinite(fx):
        raise PointOutsideDomain(f"{field.id}: f(x) = +inf at x = {x.tolist()}")
    return fx


def _check_chain(chain: DerivativeChain, n: int) -> None:
    if n < 1:
        raise BadOrder("order must be a positive integer")
    if len(chain.forms) < n - 1:
        raise BadOrder(f"order {n} needs chain entries of degree 1..{n - 1}, got {len(chain.forms)}")


def _dd_form(form: HomogeneousForm, H):
    """``T[h, ..., h]`` per row of the double-double directions ``H``."""
    T = form.tensor
    lo = np.zeros_like(T) if form.tensor_lo is None else form.tensor_lo
    m = len(H[0])
    acc = (np.broadcast_to(T, (m,) + T.shape), np.broadcast_to(lo, (m,) + T.shape))
    for _ in range(T.ndim):
        shape = (m,) + (1,) * (acc[0].ndim - 2)
        out = None
        for j in range(T.shape[0]):
            h = (H[0][:, j].reshape(shape), H[1][:, j].reshape(shape))
            term = dd.mul((acc[0][..., j], acc[1][..., j]), h)
            out = term if out is None else dd.add(out, term)
        acc = out
    return acc


def _dd_quotient(field: ScalarField, x: np.ndarray, forms, n: int):
    """The quotient with the cancellation done in double-double arithmetic.

    Available when the field is an expression with a double-double evaluator
    and every chain entry is a tensor or zero.  The Taylor terms use the exact
    step ``h = (x + t u') - x``, so the sample is really taken at ``u'' = h / t``,
    which differs from ``u'`` by a rounding error.
    """
    expr = field.expression
    if expr is None or field.func is not expr or not expr.supports_dd:
        return None
    if any(f.tensor is None and not f.zero for f in forms):
        return None
    tensors = [(i, f) for i, f in enumerate(forms, start=1) if not f.zero]
    fx_dd = expr.eval_dd(x[None, :])
    scale = math.factorial(n)

    def g(t, U):
        with np.errstate(all="ignore"):
            return _g(t, U)

    def _g(t, U):
        t = np.asarray(t, dtype=float)
        U = np.asarray(U, dtype=float)
        Y = x[None, :] + t[:, None] * U
        fy = field(Y)
        H = dd.two_sum(Y, -x[None, :])
        rem = dd.sub(expr.eval_dd(Y), (np.full(len(t), fx_dd[0][0]), np.full(len(t), fx_dd[1][0])))
        mag = np.abs(np.where(np.isfinite(fy), fy, 0.0)) + abs(fx_dd[0][0])
        # a tensor given without its low part is taken at face value: the
        # quotient is exact for that chain, even if it was meant to round
        # a Frechet derivative
        for i, form in tensors:
            fact = float(math.factorial(i))
            term = dd.div(_dd_form(form, H), dd.from_float(np.full(len(t), fact)))
            rem = dd.sub(rem, term)
            mag = mag + np.abs(term[0])
        tn = t ** n
        with np.errstate(over="ignore", invalid="ignore"):
            vals = np.where(np.isinf(fy), np.inf, scale * dd.to_float(rem) / tn)
            err = scale * 16.0 * dd.EPS2 * mag / tn
        return vals, err, np.linalg.norm(U, axis=1) ** n

    return g


def quotient(field: ScalarField, x, chain: DerivativeChain, n: int):
    """Vectorized ``(t, U) -> (Delta_n, rounding-error bound, natural size)`` for the shell sampler.

    Uses double-double arithmetic when the field and chain allow it.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    _check_chain(chain, n)
    fx = _base_value(field, x)
    scale = math.factorial(n)
    forms = chain.forms[: n - 1]
    precise = _dd_quotient(field, x, forms, n)
    if precise is not None:
        return precise

    def g(t, U):
        t = np.asarray(t, dtype=float)
        U = np.asarray(U, dtype=float)
        fy = field(x[None, :] + t[:, None] * U)
        rem = fy - fx
        mag = np.abs(np.where(np.isfinite(fy), fy, 0.0)) + abs(fx)
        for i, form in enumerate(forms, start=1):
            term = t ** i / math.factorial(i) * form(U)
            rem = rem - term
            mag = mag + np.abs(term)
        tn = t ** n
        with np.errstate(over="ignore", invalid="ignore"):
            vals = np.where(np.isinf(fy), np.inf, scale * rem / tn)
            err = scale * 4.0 * _EPS * mag / tn
        # |u'|^n is the natural size of the quotient, which keeps the noise
        # filter invariant under u -> tau * u
        return vals, err, np.linalg.norm(U, axis=1) ** n

    return g


def delta_n(field: ScalarField, x, chain: DerivativeChain, n: int, t: float, uprime) -> ExtReal:
    """The exact order-n quotient at one ``(t, u')``."""
    if not t > 0:
        raise ValueError("t must be positive")
    uprime = np.asarray(uprime, dtype=float).reshape(1, -1)
    vals = quotient(field, x, chain, n)(np.array([float(t)]), uprime)[0]
    return ExtReal.from_float(vals[0])


def hadamard_derivative(field: ScalarField, x, chain: DerivativeChain, n: int, u,
                        cfg: ShellConfig = DEFAULT_SHELLS) -> LiminfEstimate:
    """Estimate the order-n lower Hadamard derivative of ``field`` at ``x`` in direction ``u``."""
    return liminf2(quotient(field, x, chain, n), u, cfg)


def hadamard_derivatives(field: ScalarField, x, chain: DerivativeChain, n: int, directions,
                         cfg: ShellConfig = DEFAULT_SHELLS) -> list:
    """One estimate per row of ``directions``, in row order."""
    g = quotient(field, x, chain, n)
    U = np.atleast_2d(np.asarray(directions, dtype=float))
    return map_ordered(lambda u: liminf2(g, u, cfg), U)


def region_infimum(field: ScalarField, x, chain: DerivativeChain, n: int, u,
                   est: LiminfEstimate, cfg: ShellConfig = DEFAULT_SHELLS) -> float:
    """Smallest quotient found near the finest shell: the sampled minimum refined by local search.

    Certificates compare this against their margin, so thin sets where the
    quotient is small (curves, lines) are not missed by random samples alone.
    """
    if est.divergent_neg:
        return -math.inf
    starts = []
    if est.argmin_t is not None and est.argmin_uprime is not None:
        starts.append((est.argmin_t, est.argmin_uprime))
    res = polish_infimum(quotient(field, x, chain, n), u, cfg, starts=starts)
    return min(est.last_minimum, float(est.value), res.value)


@dataclass(frozen=True)
class SubdiffVerdict:
    member: bool
    worst_direction: tuple
    margin: float
    directions_tested: int
    tol: float = 1e-6

    def to_json(self) -> dict:
        return {
            "member": self.member,
            "worst_direction": list(self.worst_direction),
            "margin": ExtReal.from_float(self.margin).to_json(),
            "directions_tested": self.directions_tested,
        }


def subdiff_contains(field: ScalarField, x, chain: DerivativeChain, n: int,
                     candidate: HomogeneousForm, directions=None, tol: float = 1e-6,
                     cfg: ShellConfig = DEFAULT_SHELLS) -> SubdiffVerdict:
    """Is ``candidate`` (degree n) in the order-n lower subdifferential, on sampled directions?"""
    if candidate.degree != n:
        raise BadOrder(f"candidate has degree {candidate.degree}, expected {n}")
    if directions is None:
        directions = sphere_sample(field.dim, seed=cfg.seed)
    U = np.atleast_2d(np.asarray(directions, dtype=float))
    ests = hadamard_derivatives(field, x, chain, n, U, cfg)
    D = np.array([float(e.value) for e in ests])
    with np.errstate(invalid="ignore"):
        gaps = D - candidate(U)
    k = int(np.argmin(gaps))
    margin = float(gaps[k])
    return SubdiffVerdict(margin >= -tol, tuple(float(c) for c in U[k]), margin, len(U), tol)


@dataclass(frozen=True)
class Interval1D:
    lo: ExtReal
    hi: ExtReal
    lo_closed: bool
    hi_closed: bool

    def __post_init__(self):
        if self.hi < self.lo:
            raise EmptySubdifferential(f"inverted interval [{self.lo}, {self.hi}]")

    def contains(self, a: float) -> bool:
        a = ExtReal.from_float(a)
        above = self.lo < a or (self.lo_closed and a == self.lo)
        below = a < self.hi or (self.hi_closed and a == self.hi)
        return above and below

    @property
    def is_singleton(self) -> bool:
        return self.lo == self.hi and self.lo.is_finite

    def to_json(self) -> dict:
        return {"lo": self.lo.to_json(), "hi": self.hi.to_json(),
                "lo_closed": self.lo_closed, "hi_closed": self.hi_closed}

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo}, {self.hi}{right}"


def subdiff_interval_1d(field: ScalarField, x, chain: DerivativeChain, n: int,
                        cfg: ShellConfig = DEFAULT_SHELLS, tol: float = 1e-6) -> Interval1D:
    """The order-n subdifferential of a function of one variable, as an interval.

    An n-linear form on R is a*s^n, so membership only has to be checked at
    u = +-1.  Even n gives (-inf, min(D(1), D(-1))]; odd n gives [-D(-1), D(1)].
    Odd-order bounds that cross by at most ``tol`` are read as estimation noise
    and collapse to their midpoint.
    """
    if field.dim != 1:
        raise ValueError("subdiff_interval_1d needs a function of one variable")
    ests = hadamard_derivatives(field, x, chain, n, [[1.0], [-1.0]], cfg)
    plus, minus = ests[0].value, ests[1].value
    if plus == NEG_INF or minus == NEG_INF:
        raise EmptySubdifferential("a derivative at u = +-1 is -inf")
    if n % 2 == 0:
        hi = min(plus, minus)
        return Interval1D(NEG_INF, hi, False, hi.is_finite)
    lo = NEG_INF if minus == POS_INF else ExtReal.finite(-float(minus))
    hi = plus
    if hi < lo:
        if float(lo) - float(hi) > tol:
            raise EmptySubdifferential(f"derivative bounds cross: [{lo}, {hi}]")
        mid = ExtReal.finite(0.5 * (float(lo) + float(hi)))
        lo = hi = mid
    return Interval1D(lo, hi, lo.is_finite, hi.is_finite)


@dataclass(frozen=True)
class ConsistencyReport:
    fn: str
    point: tuple
    order: int
    max_error: float
    worst_direction: tuple
    directions_tested: int
    tol: float
    stabilized: bool

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tol

    def to_json(self) -> dict:
        return {"fn": self.fn, "point": list(self.point), "order": self.order,
                "max_error": self.max_error, "worst_direction": list(self.worst_direction),
                "directions_tested": self.directions_tested, "tol": self.tol,
                "passed": self.passed, "stabilized": self.stabilized}


def taylor_consistency_check(field: ScalarField, x, m: int, directions=None, tol: float = 1e-3,
                             cfg: ShellConfig = DEFAULT_SHELLS) -> ConsistencyReport:
    """Compare the order-m estimate, chained with the Frechet derivatives, against the m-th differential."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if m < 1:
        raise BadOrder("order must be a positive integer")
    if not field.has_analytic or field.analytic_order < m or not field.is_smooth_at(x):
        raise MissingAnalytic(f"{field.id}: no derivative tensors of order {m} at {x.tolist()}")
    tensors = field.tensors(x, m)
    chain = field.frechet_chain(x, m)
    exact = tensor_form(tensors[m - 1])
    if directions is None:
        directions = sphere_sample(field.dim, seed=cfg.seed)
    U = np.atleast_2d(np.asarray(directions, dtype=float))
    ests = hadamard_derivatives(field, x, chain, m, U, cfg)
    D = np.array([float(e.value) for e in ests])
    err = np.abs(D - exact(U))
    err = np.where(np.isnan(err), np.inf, err)
    k = int(np.argmax(err))
    return ConsistencyReport(field.id, tuple(x.tolist()), m, float(err[k]),
                             tuple(float(c) for c in U[k]), len(U), tol,
                             all(e.stabilized for e in ests))


def consistency_sweep(field: ScalarField, x, max_order: int, directions=None, tol: float = 1e-3,
                      cfg: ShellConfig = DEFAULT_SHELLS) -> list:
    return [taylor_consistency_check(field, x, m, directions, tol, cfg) for m in range(1, max_order + 1)]
