"""Extended real numbers: finite reals plus +inf and -inf under a total order.

Inside the numerical engines extended reals are carried as float64 arrays
(where IEEE infinities already behave correctly); this module supplies the
scalar value type used at API boundaries and in reports, plus guarded
arithmetic that refuses the indeterminate sum and NaN.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import total_ordering

import numpy as np

from .errors import EvaluationError, IndeterminateSum, NonPositiveScale


class Tag(enum.Enum):
    FINITE = "finite"
    POS_INF = "+inf"
    NEG_INF = "-inf"


@total_ordering
@dataclass(frozen=True)
class ExtReal:
    tag: Tag
    value: float | None = None

    def __post_init__(self):
        if self.tag is Tag.FINITE:
            if self.value is None or not math.isfinite(self.value):
                raise ValueError(f"finite ExtReal needs a finite payload, got {self.value!r}")
            object.__setattr__(self, "value", float(self.value) + 0.0)  # no signed zero
        elif self.value is not None:
            raise ValueError("infinite ExtReal carries no payload")

    @classmethod
    def finite(cls, x) -> "ExtReal":
        return cls(Tag.FINITE, float(x))

    @classmethod
    def from_float(cls, x) -> "ExtReal":
        x = float(x)
        if math.isnan(x):
            raise EvaluationError("NaN cannot be represented as an extended real")
        if x == math.inf:
            return POS_INF
        if x == -math.inf:
            return NEG_INF
        return cls(Tag.FINITE, x)

    @classmethod
    def parse(cls, s: str) -> "ExtReal":
        s = s.strip().lower()
        if s in ("+inf", "inf"):
            return POS_INF
        if s == "-inf":
            return NEG_INF
        return cls.from_float(float(s))

    @property
    def is_finite(self) -> bool:
        return self.tag is Tag.FINITE

    def __float__(self) -> float:
        if self.tag is Tag.POS_INF:
            return math.inf
        if self.tag is Tag.NEG_INF:
            return -math.inf
        return self.value

    def __eq__(self, other):
        if isinstance(other, ExtReal):
            return self.tag is other.tag and self.value == other.value
        if isinstance(other, (int, float)):
            return float(self) == other
        return NotImplemented

    def __hash__(self):
        return hash((self.tag, self.value))

    def __lt__(self, other):
        if isinstance(other, (int, float)):
            other = ExtReal.from_float(other)
        if not isinstance(other, ExtReal):
            return NotImplemented
        return float(self) < float(other)

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = ExtReal.from_float(other)
        return ext_add(self, other)

    __radd__ = __add__

    def to_json(self):
        """Finite values serialize as numbers, infinities as "+inf"/"-inf"."""
        if self.tag is Tag.FINITE:
            return self.value
        return self.tag.value

    def __str__(self):
        return self.tag.value if self.tag is not Tag.FINITE else repr(self.value)

    def __repr__(self):
        return f"ExtReal({self})"


POS_INF = ExtReal(Tag.POS_INF)
NEG_INF = ExtReal(Tag.NEG_INF)


def ext_add(a: ExtReal, b: ExtReal) -> ExtReal:
    infs = {a.tag, b.tag} - {Tag.FINITE}
    if infs == {Tag.POS_INF, Tag.NEG_INF}:
        raise IndeterminateSum(f"{a} + {b}")
    if infs:
        return POS_INF if Tag.POS_INF in infs else NEG_INF
    s = a.value + b.value
    if not math.isfinite(s):
        # overflow of two finite reals; the sign survives
        return POS_INF if s > 0 else NEG_INF
    return ExtReal(Tag.FINITE, s)


def ext_scale(c: float, a: ExtReal) -> ExtReal:
    if not c > 0:
        raise NonPositiveScale(f"scale must be positive, got {c!r}")
    if a.tag is not Tag.FINITE:
        return a
    return ExtReal.from_float(c * a.value)


def ext_min(a: ExtReal, b: ExtReal) -> ExtReal:
    return a if a <= b else b


def check_values(values, *, allow_neg_inf=False, what="evaluator") -> np.ndarray:
    """Validate a float array of extended reals coming out of an evaluator."""
    values = np.asarray(values, dtype=float)
    if np.isnan(values).any():
        raise EvaluationError(f"{what} returned NaN")
    if not allow_neg_inf and (values == -np.inf).any():
        raise EvaluationError(f"{what} returned -inf; proper functions never do")
    return values


def guarded_sum(*terms: np.ndarray) -> np.ndarray:
    """Elementwise sum of extended-real arrays, raising on (+inf) + (-inf)."""
    arrs = np.broadcast_arrays(*[np.asarray(t, dtype=float) for t in terms])
    pos = np.zeros(arrs[0].shape, dtype=bool)
    neg = np.zeros(arrs[0].shape, dtype=bool)
    for a in arrs:
        pos |= a == np.inf
        neg |= a == -np.inf
    if (pos & neg).any():
        raise IndeterminateSum("(+inf) + (-inf) in an elementwise sum")
    with np.errstate(over="ignore", invalid="ignore"):
        total = np.sum(arrs, axis=0)
    total = np.where(pos, np.inf, np.where(neg, -np.inf, total))
    return total
