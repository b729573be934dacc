"""Test functions and the multilinear data that parameterize higher-order derivatives.

Every corpus entry is a proper extended-real function written in the
expression language of :mod:`hadamardopt.expr`; smooth fixtures also carry
closed-form derivative tensors for consistency checks.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping, Sequence

import mpmath
import numpy as np

from .errors import BadOrder, EvaluationError, MissingAnalytic, UnknownFunction
from .expr import Expression, compile_expression
from .extreal import ExtReal, check_values

TensorFn = Callable[[np.ndarray, int], list]


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A proper extended-real function on R^d.

    ``func`` maps an ``(m, d)`` array of points to ``m`` extended reals
    (float64 with ``+inf`` allowed).  ``tensors(x, m)`` returns the Frechet
    derivatives ``[grad, hess, ...]`` up to order ``m`` and is only consulted
    where ``smooth(x)`` holds.
    """

    id: str
    dim: int
    func: Callable[[np.ndarray], np.ndarray]
    domain_box: tuple | None = None
    tensors: TensorFn | None = None
    analytic_order: int = 0
    smooth: Callable[[np.ndarray], bool] | None = None
    points: tuple = ()
    expression: Expression | None = None
    description: str = ""

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X2 = X.reshape(1, -1) if single else X
        if X2.shape[-1] != self.dim:
            raise ValueError(f"{self.id}: expected points in R^{self.dim}, got shape {X.shape}")
        try:
            out = self.func(X2)
        except Exception as exc:  # evaluator bugs surface as EvaluationError
            raise EvaluationError(f"{self.id}: evaluator raised {exc!r}") from exc
        out = check_values(out, what=f"{self.id} evaluator")
        return out[0] if single else out

    def value(self, x) -> ExtReal:
        return ExtReal.from_float(self(np.asarray(x, dtype=float).reshape(-1)))

    @property
    def has_analytic(self) -> bool:
        return self.tensors is not None and self.analytic_order > 0

    def is_smooth_at(self, x) -> bool:
        if not self.has_analytic:
            return False
        return True if self.smooth is None else bool(self.smooth(np.asarray(x, dtype=float)))

    def frechet_chain(self, x, n: int) -> DerivativeChain:
        """The chain of Frechet derivatives of orders 1..n-1 at a smooth point.

        Tensor entries carry their float64 rounding error when it can be
        recovered from the expression, so order-n quotients see the true chain
        rather than a perturbation of it that blows up like t^(i-n).
        """
        if n < 1:
            raise BadOrder(f"order must be >= 1, got {n}")
        if n == 1:
            return DerivativeChain(())
        if not self.has_analytic:
            raise MissingAnalytic(f"{self.id} has no closed-form derivatives")
        x = np.asarray(x, dtype=float).reshape(-1)
        tensors = self.tensors(x, n - 1)[: n - 1]
        return tensor_chain(tensors, _mp_tensor_lows(self, x, tensors))

    def eval_mp(self, x, dps: int = 50):
        if self.expression is None:
            return None
        return self.expression.eval_mp(x, dps=dps)


@dataclass(frozen=True, eq=False)
class HomogeneousForm:
    """The direction functional ``u -> x*(u, ..., u)`` of an element of L^i(E).

    ``apply`` is vectorized: it maps an ``(m, d)`` array of directions to ``m`` reals.
    Forms backed by a tensor (or identically zero) keep it, so quotients can
    be evaluated in extended precision.
    """

    degree: int
    apply: Callable[[np.ndarray], np.ndarray]
    label: str = ""
    tensor: np.ndarray | None = field(default=None, repr=False)
    tensor_lo: np.ndarray | None = field(default=None, repr=False)
    zero: bool = False

    def __post_init__(self):
        if int(self.degree) < 1:
            raise BadOrder(f"form degree must be >= 1, got {self.degree}")

    def __call__(self, U) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        single = U.ndim == 1
        out = np.asarray(self.apply(U.reshape(1, -1) if single else U), dtype=float)
        return out[0] if single else out

    def homogeneity_defect(self, U, taus=(0.5, 2.0, 10.0)) -> float:
        """Largest relative violation of ``apply(tau u) = tau^i apply(u)`` over ``U``."""
        U = np.atleast_2d(np.asarray(U, dtype=float))
        base = self(U)
        worst = abs(float(np.max(np.abs(self(np.zeros_like(U[:1]))))))
        for tau in taus:
            lhs = self(tau * U)
            rhs = tau ** self.degree * base
            scale = np.maximum(1.0, np.abs(rhs))
            worst = max(worst, float(np.max(np.abs(lhs - rhs) / scale)))
        return worst


def zero_form(degree: int) -> HomogeneousForm:
    return HomogeneousForm(degree, lambda U: np.zeros(len(U)), label="0", zero=True)


def tensor_form(tensor, lo=None) -> HomogeneousForm:
    """Form ``u -> T[u, ..., u]`` for a symmetric tensor ``T`` of order i >= 1.

    ``lo`` optionally carries the rounding error of ``T`` (so ``T + lo`` is the
    intended tensor to double-double accuracy); float evaluation ignores it.
    """
    T = np.asarray(tensor, dtype=float)
    order = T.ndim
    if order < 1:
        raise BadOrder("tensor_form needs a tensor of order >= 1")
    if len(set(T.shape)) != 1:
        raise BadOrder(f"tensor must be square, got shape {T.shape}")
    for perm in itertools.permutations(range(order)):
        if not np.allclose(T, np.transpose(T, perm), rtol=1e-12, atol=1e-12):
            raise BadOrder("tensor is not symmetric")

    def apply(U):
        out = np.broadcast_to(T, (len(U),) + T.shape)
        for _ in range(order):
            out = np.einsum("m...j,mj->m...", out, U)
        return out

    if lo is not None:
        lo = np.asarray(lo, dtype=float)
        if lo.shape != T.shape:
            raise BadOrder(f"low part has shape {lo.shape}, tensor {T.shape}")
    return HomogeneousForm(order, apply, label=f"tensor{order}", tensor=T, tensor_lo=lo)


@dataclass(frozen=True)
class DerivativeChain:
    """Fixed lower-order elements ``(x*_1, ..., x*_{n-1})``; empty for order 1."""

    forms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "forms", tuple(self.forms))
        for i, form in enumerate(self.forms, start=1):
            if form.degree != i:
                raise BadOrder(f"chain entry {i} has degree {form.degree}")

    @property
    def order(self) -> int:
        """The derivative order this chain parameterizes."""
        return len(self.forms) + 1

    def taylor_terms(self, t, U, upto: int | None = None) -> np.ndarray:
        """``sum_{i<upto} t^i / i! * x*_i(u', ..., u')`` for paired rows of (t, U)."""
        t = np.asarray(t, dtype=float)
        total = np.zeros(len(U))
        k = len(self.forms) if upto is None else min(upto - 1, len(self.forms))
        for i in range(1, k + 1):
            total = total + t ** i / math.factorial(i) * self.forms[i - 1](U)
        return total

    def extended(self, form: HomogeneousForm) -> "DerivativeChain":
        return DerivativeChain(self.forms + (form,))

    def is_zero(self) -> bool:
        return all(f.label == "0" for f in self.forms)


def zero_chain(n: int) -> DerivativeChain:
    if n < 1:
        raise BadOrder(f"order must be >= 1, got {n}")
    return DerivativeChain(tuple(zero_form(i) for i in range(1, n)))


def tensor_chain(tensors: Sequence, lows: Sequence | None = None) -> DerivativeChain:
    lows = [None] * len(tensors) if lows is None else list(lows)
    return DerivativeChain(tuple(tensor_form(T, lo) for T, lo in zip(tensors, lows)))


def _mp_tensor_lows(field: "ScalarField", x: np.ndarray, tensors: list, dps: int = 60) -> list | None:
    """Rounding errors of the float tensors, from high-precision derivatives of the expression.

    Returns None when the expression is missing or disagrees with the tensors
    beyond rounding (then the tensors are not the expression's derivatives).
    """
    if field.expression is None or field.func is not field.expression:
        return None
    F = field.expression.mp_function()
    d = len(x)
    lows = []
    with mpmath.workdps(dps):
        xs = [mpmath.mpf(float(v)) for v in x]
        for T in tensors:
            T = np.asarray(T, dtype=float)
            lo = np.zeros_like(T)
            cache = {}
            for idx in itertools.product(range(d), repeat=T.ndim):
                counts = tuple(idx.count(i) for i in range(d))
                if counts not in cache:
                    try:
                        v = mpmath.diff(F, xs, counts)
                    except (ValueError, ZeroDivisionError, TypeError):
                        return None
                    if not mpmath.isfinite(v):
                        return None
                    diff = v - mpmath.mpf(float(T[idx]))
                    if abs(diff) > 1e-9 * (1 + abs(v)):
                        return None
                    cache[counts] = float(diff)
                lo[idx] = cache[counts]
            lows.append(lo)
    return lows


# --- closed-form tensors for the smooth fixtures --------------------------------

def _separable_power(coef: float, p: int) -> TensorFn:
    """Tensors of ``coef * sum_i x_i^p``: diagonal, with entries coef * p!/(p-k)! x_i^(p-k)."""

    def tensors(x, m):
        x = np.asarray(x, dtype=float)
        d = len(x)
        out = []
        for k in range(1, m + 1):
            T = np.zeros((d,) * k)
            if k <= p:
                c = coef * math.factorial(p) / math.factorial(p - k)
                for i in range(d):
                    T[(i,) * k] = c * x[i] ** (p - k)
            out.append(T)
        return out

    return tensors


def _linear(a) -> TensorFn:
    a = np.asarray(a, dtype=float)

    def tensors(x, m):
        d = len(a)
        return [a.copy()] + [np.zeros((d,) * k) for k in range(2, m + 1)]

    return tensors


def _zero_tensors(d: int) -> TensorFn:
    return lambda x, m: [np.zeros((d,) * k) for k in range(1, m + 1)]


def _abs_tensors(x, m):
    return [np.array([np.sign(x[0])])] + [np.zeros((1,) * k) for k in range(2, m + 1)]


# --- registry ---------------------------------------------------------------------

@dataclass(frozen=True)
class _Entry:
    source: str
    dim: int
    box: tuple
    points: tuple
    description: str = ""
    defaults: Mapping = field(default_factory=dict)
    tensors: Callable | None = None  # factory(**params) -> TensorFn
    analytic_order: int = 0
    smooth: Callable | None = None


_UNIT_BOX_1 = ((-1.0, 1.0),)
_UNIT_BOX_2 = ((-1.0, 1.0), (-1.0, 1.0))

_BUILTIN = {
    "neg_flat_exp_1d": _Entry(
        "if x == 0 then 0 else -exp(-1/x^2)", 1, _UNIT_BOX_1, ((0.0,),),
        "-exp(-1/x^2), a global maximizer at 0 with all lower derivatives zero"),
    "flat_exp_2d": _Entry(
        "if x1 == 0 and x2 == 0 then 0 else exp(-1/(x1^2 + x2^2))", 2, _UNIT_BOX_2,
        ((0.0, 0.0),), "strict minimizer at 0 that is not isolated of any order"),
    "neg_quad_2d": _Entry(
        "-x1^2 - x2^2", 2, _UNIT_BOX_2, ((0.0, 0.0),), "concave quadratic",
        tensors=lambda: _separable_power(-1.0, 2), analytic_order=6),
    "piecewise_pow_n": _Entry(
        "if x >= 0 then x^n else (-1)^(n-1)*x^n", 1, _UNIT_BOX_1, ((0.0,), (-1.0,)),
        "x^n for x >= 0 and (-1)^(n-1) x^n for x < 0", defaults={"n": 4}),
    "curve_flat_2d": _Entry(
        "abs(x2 - (x1^4)^(1/3))^(3/2)", 2, _UNIT_BOX_2, ((0.0, 0.0),),
        "|x2 - x1^(4/3)|^(3/2), vanishing along a curve through 0"),
    "quad_2d": _Entry(
        "x1^2 + x2^2", 2, _UNIT_BOX_2, ((0.0, 0.0), (1.0, 2.0), (1.0, 0.0)),
        "convex quadratic", tensors=lambda: _separable_power(1.0, 2), analytic_order=6),
    "pnorm_n4_2d": _Entry(
        "abs(x1)^4 + abs(x2)^4", 2, _UNIT_BOX_2, ((0.0, 0.0),),
        "|x1|^4 + |x2|^4", tensors=lambda: _separable_power(1.0, 4), analytic_order=6),
    "studniarski_ext_2d": _Entry(
        "if x2 == 0 then abs(x1)^n else inf", 2, _UNIT_BOX_2, ((0.0, 0.0),),
        "|x1|^n on the line x2 = 0 and +inf elsewhere", defaults={"n": 3}),
    "constant_2d": _Entry(
        "5 + 0*x2", 2, _UNIT_BOX_2, ((0.0, 0.0), (0.3, -0.4)), "constant 5",
        tensors=lambda: _zero_tensors(2), analytic_order=6),
    "linear_2d": _Entry(
        "x1 + 0*x2", 2, _UNIT_BOX_2, ((0.0, 0.0), (0.5, 0.5)), "linear x1",
        tensors=lambda: _linear([1.0, 0.0]), analytic_order=6),
    "quartic_2d": _Entry(
        "x1^4 + x2^4", 2, _UNIT_BOX_2, ((0.0, 0.0), (0.5, -0.25)), "quartic polynomial",
        tensors=lambda: _separable_power(1.0, 4), analytic_order=6),
    "square_1d": _Entry(
        "x^2", 1, _UNIT_BOX_1, ((0.0,), (0.5,)), "x^2",
        tensors=lambda: _separable_power(1.0, 2), analytic_order=6),
    "cubic_1d": _Entry(
        "x^3", 1, _UNIT_BOX_1, ((0.0,),), "x^3",
        tensors=lambda: _separable_power(1.0, 3), analytic_order=6),
    "abs_1d": _Entry(
        "abs(x)", 1, _UNIT_BOX_1, ((0.0,),), "|x|",
        tensors=lambda: _abs_tensors, analytic_order=6, smooth=lambda x: x[0] != 0),
}


class Corpus:
    """Immutable mapping from id to function factory."""

    def __init__(self, entries: Mapping[str, _Entry]):
        self._entries = MappingProxyType(dict(entries))

    def ids(self) -> list[str]:
        return sorted(self._entries)

    def __contains__(self, fid):
        return _split_id(fid)[0] in self._entries

    def with_expressions(self, mapping: Mapping[str, str]) -> "Corpus":
        """A new corpus extended by ``id -> expression`` entries (dimension inferred)."""
        entries = dict(self._entries)
        for fid, source in mapping.items():
            fid = fid.strip().lower()
            expr = compile_expression(source)
            box = tuple((-1.0, 1.0) for _ in range(expr.dim))
            entries[fid] = _Entry(source, expr.dim, box, (tuple(0.0 for _ in range(expr.dim)),),
                                  "user expression")
        return Corpus(entries)

    def get(self, fid: str, **params) -> ScalarField:
        name, id_params = _split_id(fid)
        if name not in self._entries:
            raise UnknownFunction(fid)
        entry = self._entries[name]
        merged = dict(entry.defaults)
        merged.update(id_params)
        merged.update({k: v for k, v in params.items() if v is not None})
        unknown = set(merged) - set(entry.defaults)
        if unknown:
            raise UnknownFunction(f"{fid} (unexpected parameters {sorted(unknown)})")
        expr = compile_expression(entry.source, dim=entry.dim, **merged)
        label = name
        if merged != dict(entry.defaults):
            label += ":" + ",".join(f"{k}={v}" for k, v in sorted(merged.items()))
        return ScalarField(
            id=label,
            dim=entry.dim,
            func=expr,
            domain_box=entry.box,
            tensors=entry.tensors() if entry.tensors else None,
            analytic_order=entry.analytic_order,
            smooth=entry.smooth,
            points=entry.points,
            expression=expr,
            description=entry.description,
        )


def _split_id(fid: str):
    """``"piecewise_pow_n:5"`` -> (``"piecewise_pow_n"``, ``{"n": 5}``)."""
    if ":" not in fid:
        return fid, {}
    name, _, arg = fid.partition(":")
    params = {}
    for part in arg.split(","):
        if "=" in part:
            k, _, v = part.partition("=")
        else:
            k, v = "n", part
        params[k.strip()] = int(v) if v.strip().lstrip("-").isdigit() else float(v)
    return name, params


DEFAULT_CORPUS = Corpus(_BUILTIN)


def corpus_get(fid: str, corpus: Corpus | None = None, **params) -> ScalarField:
    return (corpus or DEFAULT_CORPUS).get(fid, **params)


def field_from_callable(fid: str, func, dim: int, **kwargs) -> ScalarField:
    """Wrap a plain vectorized callable as a :class:`ScalarField`."""
    return ScalarField(id=fid, dim=dim, func=func, **kwargs)
