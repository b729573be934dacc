"""A small arithmetic expression language for user-supplied test functions.

Grammar (lowest precedence first)::

    expr    := 'if' cond 'then' expr 'else' expr | sum
    cond    := conj ('or' conj)*
    conj    := neg ('and' neg)*
    neg     := 'not' neg | sum CMP sum | '(' cond ')'
    sum     := term (('+'|'-') term)*
    term    := unary (('*'|'/') unary)*
    unary   := '-' unary | '+' unary | power
    power   := atom ('^' unary)?            # right associative
    atom    := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Names are the coordinates ``x1 .. xd`` (``x`` is accepted for ``x1``), the
constants ``inf``, ``pi`` and ``e``, and any integer/real parameters bound at
compile time (the corpus uses ``n``).  Each expression compiles to a
vectorized numpy evaluator and to a scalar mpmath evaluator; the latter is
used by the brute-force oracle to break floating-point ties.  Expressions
built from arithmetic, integer powers, abs, min/max and conditionals also
evaluate in double-double precision, which the high-order quotients use.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import mpmath
import numpy as np

from . import dd
from .errors import ExpressionError

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op><=|>=|==|!=|[-+*/^(),<>]))"
)
_KEYWORDS = {"if", "then", "else", "and", "or", "not"}
_FUNCS = {
    "abs": 1, "exp": 1, "log": 1, "sqrt": 1, "sin": 1, "cos": 1,
    "min": -1, "max": -1,
}
_CMP = {"<", "<=", ">", ">=", "==", "!="}


def _tokenize(src: str):
    pos, out = 0, []
    src = src.rstrip()
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            raise ExpressionError(f"unexpected character at {pos}: {src[pos:pos + 10]!r}")
        pos = m.end()
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
    out.append(("end", ""))
    return out


class _Parser:
    def __init__(self, src: str):
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, value=None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            raise ExpressionError(f"expected {value!r}, found {tok[1] or 'end of input'!r}")
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            raise ExpressionError(f"trailing input at {self.peek()[1]!r}")
        return node

    def expr(self):
        if self.peek() == ("name", "if"):
            self.take()
            cond = self.cond()
            self.take("then")
            a = self.expr()
            self.take("else")
            b = self.expr()
            return ("if", cond, a, b)
        return self.sum()

    def cond(self):
        node = self.conj()
        while self.peek() == ("name", "or"):
            self.take()
            node = ("or", node, self.conj())
        return node

    def conj(self):
        node = self.neg()
        while self.peek() == ("name", "and"):
            self.take()
            node = ("and", node, self.neg())
        return node

    def neg(self):
        if self.peek() == ("name", "not"):
            self.take()
            return ("not", self.neg())
        if self.peek()[1] == "(":
            # either a parenthesized condition or the start of a sum
            save = self.i
            self.take()
            try:
                inner = self.cond()
                self.take(")")
                if self.peek()[1] not in _CMP and inner[0] in ("cmp", "and", "or", "not"):
                    return inner
            except ExpressionError:
                pass
            self.i = save
        lhs = self.sum()
        op = self.peek()[1]
        if op not in _CMP:
            raise ExpressionError(f"expected a comparison, found {op or 'end of input'!r}")
        self.take()
        return ("cmp", op, lhs, self.sum())

    def sum(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            node = ("bin", op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            node = ("bin", op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return ("neg", self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            return ("bin", "^", base, self.unary())
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return ("num", float(val))
        if kind == "name":
            if val in _KEYWORDS:
                raise ExpressionError(f"unexpected keyword {val!r}")
            if self.peek()[1] == "(":
                if val not in _FUNCS:
                    raise ExpressionError(f"unknown function {val!r}")
                self.take("(")
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.take(")")
                arity = _FUNCS[val]
                if arity > 0 and len(args) != arity:
                    raise ExpressionError(f"{val} takes {arity} argument(s)")
                return ("call", val, args)
            return ("name", val)
        if val == "(":
            node = self.expr()
            self.take(")")
            return node
        raise ExpressionError(f"unexpected token {val or 'end of input'!r}")


_VAR = re.compile(r"x(\d+)$")


def _names(node, acc):
    tag = node[0]
    if tag == "name":
        acc.add(node[1])
    elif tag in ("bin", "cmp"):
        _names(node[2], acc)
        _names(node[3], acc)
    elif tag in ("neg", "not"):
        _names(node[1], acc)
    elif tag in ("and", "or"):
        _names(node[1], acc)
        _names(node[2], acc)
    elif tag == "if":
        for sub in node[1:]:
            _names(sub, acc)
    elif tag == "call":
        for sub in node[2]:
            _names(sub, acc)
    return acc


@dataclass(frozen=True)
class Expression:
    """A parsed expression bound to a dimension and a parameter set."""

    source: str
    tree: tuple
    dim: int
    params: tuple = ()

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise ExpressionError(f"expected points of dimension {self.dim}, got {X.shape[1]}")
        with np.errstate(all="ignore"):
            out = _np_eval(self.tree, X, dict(self.params))
        return np.broadcast_to(np.asarray(out, dtype=float), (X.shape[0],)).copy()

    @property
    def supports_dd(self) -> bool:
        return _dd_ok(self.tree, dict(self.params))

    def eval_dd(self, X):
        """Double-double values ``(hi, lo)`` at the rows of X (exact float inputs)."""
        if not self.supports_dd:
            raise ExpressionError(f"{self.source!r} has no double-double evaluator")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        m = X.shape[0]
        with np.errstate(all="ignore"):
            hi, lo = _dd_eval(self.tree, X, dict(self.params))
        return np.broadcast_to(hi, (m,)).copy(), np.broadcast_to(lo, (m,)).copy()

    def mp_function(self):
        """Scalar evaluator on mpf coordinates at the caller's working precision."""
        params = dict(self.params)
        return lambda *xs: _mp_eval(self.tree, list(xs), params)

    def eval_mp(self, x, dps: int = 50):
        """Evaluate at a single point in arbitrary precision (returns an mpf)."""
        with mpmath.workdps(dps):
            xs = [mpmath.mpf(float(v)) for v in np.ravel(x)]
            return _mp_eval(self.tree, xs, dict(self.params))


def compile_expression(source: str, dim: int | None = None, **params) -> Expression:
    tree = _Parser(source).parse()
    names = _names(tree, set())
    known = {"inf", "pi", "e", "x"} | set(params)
    idx = []
    for name in names:
        m = _VAR.match(name)
        if m:
            idx.append(int(m.group(1)))
        elif name not in known:
            raise ExpressionError(f"unknown name {name!r}")
    if any(i < 1 for i in idx):
        raise ExpressionError("coordinates are numbered from x1")
    need = max(idx, default=1)
    if "x" in names and need > 1:
        raise ExpressionError("'x' is only allowed in one-dimensional expressions")
    if dim is None:
        dim = need
    elif dim < need:
        raise ExpressionError(f"expression uses x{need} but dim={dim}")
    return Expression(source, tree, dim, tuple(sorted(params.items())))


def _coord(name, X):
    if name == "x":
        return X[:, 0]
    return X[:, int(name[1:]) - 1]


def _np_eval(node, X, params):
    tag = node[0]
    if tag == "num":
        return node[1]
    if tag == "name":
        name = node[1]
        if name in params:
            return float(params[name])
        if name == "inf":
            return math.inf
        if name == "pi":
            return math.pi
        if name == "e":
            return math.e
        return _coord(name, X)
    if tag == "neg":
        return -np.asarray(_np_eval(node[1], X, params))
    if tag == "bin":
        a = np.asarray(_np_eval(node[2], X, params), dtype=float)
        b = np.asarray(_np_eval(node[3], X, params), dtype=float)
        op = node[1]
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return a / b
        return np.power(a, b)
    if tag == "call":
        args = [np.asarray(_np_eval(a, X, params), dtype=float) for a in node[2]]
        fn = node[1]
        if fn == "min":
            return np.minimum.reduce(np.broadcast_arrays(*args))
        if fn == "max":
            return np.maximum.reduce(np.broadcast_arrays(*args))
        return getattr(np, fn)(args[0])
    if tag == "cmp":
        a = _np_eval(node[2], X, params)
        b = _np_eval(node[3], X, params)
        return {
            "<": np.less, "<=": np.less_equal, ">": np.greater,
            ">=": np.greater_equal, "==": np.equal, "!=": np.not_equal,
        }[node[1]](a, b)
    if tag == "and":
        return np.logical_and(_np_eval(node[1], X, params), _np_eval(node[2], X, params))
    if tag == "or":
        return np.logical_or(_np_eval(node[1], X, params), _np_eval(node[2], X, params))
    if tag == "not":
        return np.logical_not(_np_eval(node[1], X, params))
    if tag == "if":
        cond = _np_eval(node[1], X, params)
        return np.where(cond, _np_eval(node[2], X, params), _np_eval(node[3], X, params))
    raise ExpressionError(f"bad node {tag!r}")


def _mp_eval(node, xs, params):
    tag = node[0]
    if tag == "num":
        return mpmath.mpf(node[1])
    if tag == "name":
        name = node[1]
        if name in params:
            return mpmath.mpf(params[name])
        if name == "inf":
            return mpmath.inf
        if name == "pi":
            return +mpmath.pi
        if name == "e":
            return +mpmath.e
        return xs[0] if name == "x" else xs[int(name[1:]) - 1]
    if tag == "neg":
        return -_mp_eval(node[1], xs, params)
    if tag == "bin":
        a = _mp_eval(node[2], xs, params)
        b = _mp_eval(node[3], xs, params)
        op = node[1]
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b == 0:
                return mpmath.inf * mpmath.sign(a) if a != 0 else mpmath.nan
            return a / b
        if a < 0 and b != mpmath.floor(b):
            return mpmath.nan
        if a == 0 and b < 0:
            return mpmath.inf
        return mpmath.power(a, b)
    if tag == "call":
        args = [_mp_eval(a, xs, params) for a in node[2]]
        fn = node[1]
        if fn == "min":
            return min(args)
        if fn == "max":
            return max(args)
        if fn == "abs":
            return abs(args[0])
        if fn == "exp":
            return mpmath.exp(args[0])
        if fn == "log":
            return mpmath.log(args[0]) if args[0] > 0 else (-mpmath.inf if args[0] == 0 else mpmath.nan)
        if fn == "sqrt":
            return mpmath.sqrt(args[0]) if args[0] >= 0 else mpmath.nan
        return getattr(mpmath, fn)(args[0])
    if tag == "cmp":
        a = _mp_eval(node[2], xs, params)
        b = _mp_eval(node[3], xs, params)
        return {
            "<": a < b, "<=": a <= b, ">": a > b,
            ">=": a >= b, "==": a == b, "!=": a != b,
        }[node[1]]
    if tag == "and":
        return _mp_eval(node[1], xs, params) and _mp_eval(node[2], xs, params)
    if tag == "or":
        return _mp_eval(node[1], xs, params) or _mp_eval(node[2], xs, params)
    if tag == "not":
        return not _mp_eval(node[1], xs, params)
    if tag == "if":
        if _mp_eval(node[1], xs, params):
            return _mp_eval(node[2], xs, params)
        return _mp_eval(node[3], xs, params)
    raise ExpressionError(f"bad node {tag!r}")


def _int_exponent(node, params):
    """The exponent as an int when it is a constant integer, else None."""
    if any(_VAR.match(name) or name == "x" for name in _names(node, set())):
        return None
    with np.errstate(all="ignore"):
        v = float(np.asarray(_np_eval(node, np.zeros((1, 1)), params)).reshape(-1)[0])
    return int(v) if math.isfinite(v) and v == int(v) else None


def _dd_ok(node, params) -> bool:
    tag = node[0]
    if tag in ("num", "name"):
        return True
    if tag in ("neg", "not"):
        return _dd_ok(node[1], params)
    if tag == "bin":
        if node[1] == "^" and _int_exponent(node[3], params) is None:
            return False
        return _dd_ok(node[2], params) and _dd_ok(node[3], params)
    if tag == "call":
        return node[1] in ("abs", "min", "max") and all(_dd_ok(a, params) for a in node[2])
    if tag in ("cmp", "and", "or"):
        return _dd_ok(node[2] if tag == "cmp" else node[1], params) and \
            _dd_ok(node[3] if tag == "cmp" else node[2], params)
    if tag == "if":
        return all(_dd_ok(node[i], params) for i in (1, 2, 3))
    return False


def _dd_less(a, b):
    return (a[0] < b[0]) | ((a[0] == b[0]) & (a[1] < b[1]))


def _dd_where(c, a, b):
    return np.where(c, a[0], b[0]), np.where(c, a[1], b[1])


def _dd_eval(node, X, params):
    tag = node[0]
    if tag in ("num", "name"):
        if tag == "name" and node[1] not in params and node[1] not in ("inf", "pi", "e"):
            return dd.from_float(_coord(node[1], X))
        return dd.from_float(_np_eval(node, X, params))
    if tag == "neg":
        return dd.neg(_dd_eval(node[1], X, params))
    if tag == "bin":
        a = _dd_eval(node[2], X, params)
        op = node[1]
        if op == "^":
            return dd.ipow(a, _int_exponent(node[3], params))
        b = _dd_eval(node[3], X, params)
        return {"+": dd.add, "-": dd.sub, "*": dd.mul, "/": dd.div}[op](a, b)
    if tag == "call":
        args = [_dd_eval(a, X, params) for a in node[2]]
        if node[1] == "abs":
            return dd.absolute(args[0])
        out = args[0]
        for b in args[1:]:
            keep = _dd_less(out, b) if node[1] == "min" else _dd_less(b, out)
            out = _dd_where(keep, out, b)
        return out
    if tag == "cmp":
        a = _dd_eval(node[2], X, params)
        b = _dd_eval(node[3], X, params)
        eq = (a[0] == b[0]) & (a[1] == b[1])
        lt = _dd_less(a, b)
        return {"<": lt, "<=": lt | eq, ">": ~(lt | eq), ">=": ~lt,
                "==": eq, "!=": ~eq}[node[1]]
    if tag == "and":
        return _dd_eval(node[1], X, params) & _dd_eval(node[2], X, params)
    if tag == "or":
        return _dd_eval(node[1], X, params) | _dd_eval(node[2], X, params)
    if tag == "not":
        return ~_dd_eval(node[1], X, params)
    if tag == "if":
        cond = np.asarray(_dd_eval(node[1], X, params), dtype=bool)
        return _dd_where(cond, _dd_eval(node[2], X, params), _dd_eval(node[3], X, params))
    raise ExpressionError(f"bad node {tag!r}")
