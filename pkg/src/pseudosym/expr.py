"""Scalar expression kernel.

Expressions are immutable, hash-consed trees: two structurally identical
trees built in the same process are the same object, so equality is identity
and caches keyed on nodes (derivatives, evaluation) share work across the
many tensor components that reuse a subexpression.

Two families of constructors exist.  The raw ones (``Expr.node``) build
exactly the requested node and are what the parser uses, so that
``parse(to_string(e)) is e``.  The arithmetic operators and the helpers
``add``, ``mul``, ... apply the shallow simplifications listed in
:func:`simplify` while building.
"""

from __future__ import annotations

import math
import re
import threading
import weakref
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "Expr",
    "ExprError",
    "ExprSyntaxError",
    "UnknownFunctionError",
    "UnknownSymbolError",
    "DomainError",
    "FUNCTIONS",
    "num",
    "sym",
    "par",
    "add",
    "sub",
    "mul",
    "div",
    "neg",
    "power",
    "apply",
    "total",
    "as_expr",
    "parse",
    "to_string",
    "differentiate",
    "evaluate",
    "Evaluator",
    "simplify",
    "free_symbols",
    "substitute",
    "is_zero",
]

FUNCTIONS = ("exp", "ln", "sin", "cos", "sqrt")
_BINARY = ("add", "sub", "mul", "div", "pow")


class ExprError(Exception):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownFunctionError(ExprSyntaxError):
    pass


class UnknownSymbolError(ExprSyntaxError):
    pass


class DomainError(ExprError, ArithmeticError):
    """Evaluation left the real domain of a subexpression."""

    def __init__(self, message: str, subexpr: "Expr"):
        super().__init__(f"{message}: {to_string(subexpr)}")
        self.subexpr = subexpr


_table: "weakref.WeakValueDictionary[tuple, Expr]" = weakref.WeakValueDictionary()
_lock = threading.Lock()


class Expr:
    """A node of a scalar expression tree.

    ``kind`` is one of ``num``, ``sym`` (coordinate), ``par`` (parameter),
    ``neg``, ``add``, ``sub``, ``mul``, ``div``, ``pow`` or a function name
    from :data:`FUNCTIONS`.  ``value`` holds the float of a ``num`` or the
    name of a ``sym``/``par``.
    """

    __slots__ = ("kind", "args", "value", "__weakref__")

    kind: str
    args: tuple["Expr", ...]
    value: object

    def __init__(self, *a, **k):
        raise TypeError("use Expr.node or the module constructors")

    @classmethod
    def node(cls, kind: str, args: tuple["Expr", ...] = (), value=None) -> "Expr":
        if kind == "num":
            value = float(value)
            if value == 0.0:
                value = 0.0  # fold -0.0
        key = (kind, value, tuple(id(a) for a in args))
        with _lock:
            found = _table.get(key)
            if found is not None:
                return found
            obj = object.__new__(cls)
            object.__setattr__(obj, "kind", kind)
            object.__setattr__(obj, "args", tuple(args))
            object.__setattr__(obj, "value", value)
            _table[key] = obj
            return obj

    def __setattr__(self, name, value):
        raise AttributeError("Expr is immutable")

    def __reduce__(self):
        return (parse, (to_string(self),))

    def __repr__(self) -> str:
        return f"Expr({to_string(self)!r})"

    def __str__(self) -> str:
        return to_string(self)

    __hash__ = object.__hash__

    def __eq__(self, other):
        return self is other

    # arithmetic builds simplified trees
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self

    def __pow__(self, other):
        return power(self, as_expr(other))

    @property
    def is_number(self) -> bool:
        return self.kind == "num"


def num(value: float) -> Expr:
    return Expr.node("num", (), value)


def sym(name: str) -> Expr:
    return Expr.node("sym", (), name)


def par(name: str) -> Expr:
    return Expr.node("par", (), name)


ZERO = num(0.0)
ONE = num(1.0)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, np.integer, np.floating)):
        return num(float(x))
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def is_zero(x) -> bool:
    if isinstance(x, Expr):
        return x.kind == "num" and x.value == 0.0
    return x == 0


def _isnum(e: Expr, v: float | None = None) -> bool:
    return e.kind == "num" and (v is None or e.value == v)


def add(a: Expr, b: Expr) -> Expr:
    if _isnum(a) and _isnum(b):
        return num(a.value + b.value)
    if _isnum(a, 0.0):
        return b
    if _isnum(b, 0.0):
        return a
    if b.kind == "neg":
        return Expr.node("sub", (a, b.args[0]))
    return Expr.node("add", (a, b))


def sub(a: Expr, b: Expr) -> Expr:
    if _isnum(a) and _isnum(b):
        return num(a.value - b.value)
    if a is b:
        return ZERO
    if _isnum(b, 0.0):
        return a
    if _isnum(a, 0.0):
        return neg(b)
    if b.kind == "neg":
        return Expr.node("add", (a, b.args[0]))
    return Expr.node("sub", (a, b))


def neg(a: Expr) -> Expr:
    if _isnum(a):
        return num(-a.value)
    if a.kind == "neg":
        return a.args[0]
    return Expr.node("neg", (a,))


def mul(a: Expr, b: Expr) -> Expr:
    if _isnum(a) and _isnum(b):
        return num(a.value * b.value)
    if _isnum(a, 0.0) or _isnum(b, 0.0):
        return ZERO
    if _isnum(a, 1.0):
        return b
    if _isnum(b, 1.0):
        return a
    if _isnum(a, -1.0):
        return neg(b)
    if _isnum(b, -1.0):
        return neg(a)
    return Expr.node("mul", (a, b))


def div(a: Expr, b: Expr) -> Expr:
    if _isnum(b) and _isnum(a) and b.value != 0.0:
        return num(a.value / b.value)
    if _isnum(a, 0.0) and not _isnum(b, 0.0):
        return ZERO
    if _isnum(b, 1.0):
        return a
    return Expr.node("div", (a, b))


def power(a: Expr, b: Expr) -> Expr:
    if _isnum(b, 0.0):
        return ONE
    if _isnum(b, 1.0):
        return a
    if _isnum(a) and _isnum(b):
        try:
            v = _pow_scalar(a.value, b.value)
        except (ValueError, ZeroDivisionError, OverflowError):
            v = None
        if v is not None and math.isfinite(v):
            return num(v)
    return Expr.node("pow", (a, b))


def _pow_scalar(x: float, y: float) -> float:
    if x < 0 and not float(y).is_integer():
        raise ValueError
    return x**y


# numpy ufuncs, so folded constants round exactly as evaluation does
_FOLD = {"exp": np.exp, "ln": np.log, "sin": np.sin, "cos": np.cos, "sqrt": np.sqrt}


def apply(fname: str, a: Expr) -> Expr:
    if fname not in FUNCTIONS:
        raise UnknownFunctionError(f"unknown function {fname!r}", 0)
    if _isnum(a):
        with np.errstate(all="ignore"):
            v = float(_FOLD[fname](np.float64(a.value)))
        if math.isfinite(v):
            return num(v)
    return Expr.node(fname, (a,))


def exp(a) -> Expr:
    return apply("exp", as_expr(a))


def ln(a) -> Expr:
    return apply("ln", as_expr(a))


def sin(a) -> Expr:
    return apply("sin", as_expr(a))


def cos(a) -> Expr:
    return apply("cos", as_expr(a))


def sqrt(a) -> Expr:
    return apply("sqrt", as_expr(a))


def total(terms: Iterable) -> Expr:
    """Balanced sum of ``terms`` (keeps tree depth logarithmic)."""
    items = [as_expr(t) for t in terms if not is_zero(t)]
    if not items:
        return ZERO
    while len(items) > 1:
        nxt = [add(items[i], items[i + 1]) for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


# --------------------------------------------------------------------------
# parsing and printing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


class _Parser:
    def __init__(self, text: str, coordinates, parameters):
        self.text = text
        self.coordinates = None if coordinates is None else set(coordinates)
        self.parameters = set(parameters or ())
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
            kind = m.lastgroup
            start = m.start(kind)
            self.tokens.append((kind, m.group(kind), start))
            pos = m.end()
        self.end = len(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("eof", "", self.end)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, op: str):
        kind, val, off = self.take()
        if kind != "op" or val != op:
            raise ExprSyntaxError(f"expected {op!r}", off)

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, off = self.peek()
        if kind != "eof":
            raise ExprSyntaxError(f"unexpected {val!r}", off)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                e = Expr.node("add" if val == "+" else "sub", (e, self.term()))
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                e = Expr.node("mul" if val == "*" else "div", (e, self.factor()))
            else:
                return e

    def factor(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Expr.node("neg", (self.factor(),))
        base = self.base()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            return Expr.node("pow", (base, self.exponent()))
        return base

    def exponent(self) -> Expr:
        kind, val, off = self.peek()
        if kind == "op" and val == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        sign = 1.0
        if kind == "op" and val in "+-":
            self.take()
            sign = -1.0 if val == "-" else 1.0
            kind, val, off = self.peek()
        if kind != "num":
            raise ExprSyntaxError("exponent must be a number or parenthesized", off)
        self.take()
        return num(sign * float(val))

    def base(self) -> Expr:
        kind, val, off = self.take()
        if kind == "num":
            return num(float(val))
        if kind == "name":
            nk, nv, _ = self.peek()
            if nk == "op" and nv == "(":
                if val not in FUNCTIONS:
                    raise UnknownFunctionError(f"unknown function {val!r}", off)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Expr.node(val, (arg,))
            if val in FUNCTIONS:
                raise ExprSyntaxError(f"function {val!r} needs an argument", off)
            if val in self.parameters:
                return par(val)
            if self.coordinates is not None and val not in self.coordinates:
                raise UnknownSymbolError(f"unknown symbol {val!r}", off)
            return sym(val)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "eof":
            raise ExprSyntaxError("unexpected end of input", off)
        raise ExprSyntaxError(f"unexpected {val!r}", off)


def parse(source: str, coordinates: Iterable[str] | None = None,
          parameters: Iterable[str] | None = None) -> Expr:
    """Parse expression text.

    Names in ``parameters`` become parameter symbols; any other name is a
    coordinate.  When ``coordinates`` is given, names in neither set raise
    :class:`UnknownSymbolError`.  Unary minus binds looser than ``^``, so
    ``-r^2`` is ``-(r^2)``.
    """
    return _Parser(source, coordinates, parameters).parse()


_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


def _fmt_num(v: float) -> str:
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def to_string(e: Expr) -> str:
    return _print(e)


def _prec(e: Expr) -> int:
    if e.kind == "num" and e.value < 0:
        return 3
    return _PREC.get(e.kind, 5)


def _wrap(e: Expr, need: int) -> str:
    s = _print(e)
    return f"({s})" if _prec(e) < need else s


def _print(e: Expr) -> str:
    k = e.kind
    if k == "num":
        return _fmt_num(e.value)
    if k in ("sym", "par"):
        return e.value
    if k in FUNCTIONS:
        return f"{k}({_print(e.args[0])})"
    if k == "neg":
        return "-" + _wrap(e.args[0], 3)
    a, b = e.args
    if k in ("add", "sub"):
        op = " + " if k == "add" else " - "
        return _wrap(a, 1) + op + _wrap(b, 2)
    if k in ("mul", "div"):
        op = "*" if k == "mul" else "/"
        return _wrap(a, 2) + op + _wrap(b, 3)
    # pow: base must be atomic, exponent an integer literal or parenthesized
    base = _wrap(a, 5)
    if b.kind == "num" and b.value.is_integer():
        return f"{base}^{_fmt_num(b.value)}"
    return f"{base}^({_print(b)})"


# --------------------------------------------------------------------------
# structure queries


@lru_cache(maxsize=None)
def free_symbols(e: Expr) -> frozenset:
    """Names of coordinate and parameter symbols occurring in ``e``."""
    if e.kind in ("sym", "par"):
        return frozenset((e.value,))
    out = frozenset()
    for a in e.args:
        out = out | free_symbols(a)
    return out


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace symbols by expressions (simplifying constructors)."""
    memo: dict[Expr, Expr] = {}

    def go(x: Expr) -> Expr:
        if x in memo:
            return memo[x]
        if x.kind in ("sym", "par"):
            out = as_expr(mapping[x.value]) if x.value in mapping else x
        elif x.kind == "num":
            out = x
        else:
            out = _rebuild(x.kind, [go(a) for a in x.args])
        memo[x] = out
        return out

    return go(e)


def _rebuild(kind: str, args: list[Expr]) -> Expr:
    if kind == "neg":
        return neg(args[0])
    if kind == "add":
        return add(*args)
    if kind == "sub":
        return sub(*args)
    if kind == "mul":
        return mul(*args)
    if kind == "div":
        return div(*args)
    if kind == "pow":
        return power(*args)
    return apply(kind, args[0])


def simplify(e: Expr) -> Expr:
    """Shallow simplification: constant folding, 0/1 identities, x - x, x^0, x^1."""
    memo: dict[Expr, Expr] = {}
    stack = [e]
    while stack:
        x = stack[-1]
        if x in memo:
            stack.pop()
            continue
        pending = [a for a in x.args if a not in memo]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        memo[x] = x if not x.args else _rebuild(x.kind, [memo[a] for a in x.args])
    return memo[e]


# --------------------------------------------------------------------------
# differentiation


@lru_cache(maxsize=None)
def differentiate(e: Expr, coord: str) -> Expr:
    """Exact derivative of ``e`` with respect to the symbol named ``coord``."""
    if coord not in free_symbols(e):
        return ZERO
    k = e.kind
    if k in ("sym", "par"):
        return ONE
    if k == "neg":
        return neg(differentiate(e.args[0], coord))
    if k in ("add", "sub"):
        da = differentiate(e.args[0], coord)
        db = differentiate(e.args[1], coord)
        return add(da, db) if k == "add" else sub(da, db)
    if k == "mul":
        a, b = e.args
        return add(mul(differentiate(a, coord), b), mul(a, differentiate(b, coord)))
    if k == "div":
        a, b = e.args
        da, db = differentiate(a, coord), differentiate(b, coord)
        return sub(div(da, b), div(mul(a, db), power(b, num(2))))
    if k == "pow":
        a, b = e.args
        da = differentiate(a, coord)
        if coord not in free_symbols(b):
            return mul(mul(b, power(a, sub(b, ONE))), da)
        db = differentiate(b, coord)
        return mul(e, add(mul(db, apply("ln", a)), div(mul(b, da), a)))
    (a,) = e.args
    da = differentiate(a, coord)
    if k == "exp":
        return mul(e, da)
    if k == "ln":
        return div(da, a)
    if k == "sin":
        return mul(apply("cos", a), da)
    if k == "cos":
        return neg(mul(apply("sin", a), da))
    if k == "sqrt":
        return div(da, mul(num(2), e))
    raise ExprError(f"cannot differentiate node {k!r}")


# --------------------------------------------------------------------------
# evaluation


class Evaluator:
    """Memoizing evaluator over a fixed symbol binding.

    Bindings may be floats or equally shaped numpy arrays (one entry per
    sample point); results then have that shape.  All expressions evaluated
    through one instance share the cache, which is what makes evaluating a
    whole tensor field cheap.
    """

    def __init__(self, values: Mapping[str, object]):
        self.values = {k: np.asarray(v, dtype=float) for k, v in values.items()}
        shapes = {v.shape for v in self.values.values()}
        self.shape = max(shapes, key=len) if shapes else ()
        self.cache: dict[Expr, np.ndarray] = {}

    def __call__(self, e: Expr) -> np.ndarray:
        cache = self.cache
        if e in cache:
            return cache[e]
        stack = [e]
        while stack:
            x = stack[-1]
            if x in cache:
                stack.pop()
                continue
            pending = [a for a in x.args if a not in cache]
            if pending:
                stack.extend(pending)
                continue
            stack.pop()
            cache[x] = self._node(x, [cache[a] for a in x.args])
        return cache[e]

    def _node(self, x: Expr, v: list) -> np.ndarray:
        k = x.kind
        if k == "num":
            return np.float64(x.value)
        if k in ("sym", "par"):
            try:
                return self.values[x.value]
            except KeyError:
                raise ExprError(f"unbound symbol {x.value!r}") from None
        with np.errstate(all="ignore"):
            if k == "neg":
                return -v[0]
            if k == "add":
                return v[0] + v[1]
            if k == "sub":
                return v[0] - v[1]
            if k == "mul":
                return v[0] * v[1]
            if k == "div":
                if np.any(v[1] == 0):
                    raise DomainError("division by zero", x)
                return v[0] / v[1]
            if k == "pow":
                a, b = v
                if np.any((a < 0) & (np.floor(b) != b)):
                    raise DomainError("negative base with non-integer exponent", x)
                if np.any((a == 0) & (b < 0)):
                    raise DomainError("zero to a negative power", x)
                return np.power(a, b)
            a = v[0]
            if k == "exp":
                return np.exp(a)
            if k == "ln":
                if np.any(a <= 0):
                    raise DomainError("logarithm of a non-positive value", x)
                return np.log(a)
            if k == "sin":
                return np.sin(a)
            if k == "cos":
                return np.cos(a)
            if k == "sqrt":
                if np.any(a < 0):
                    raise DomainError("square root of a negative value", x)
                return np.sqrt(a)
        raise ExprError(f"unknown node {k!r}")

    def full(self, e: Expr) -> np.ndarray:
        """Like ``__call__`` but broadcast to the binding shape."""
        return np.broadcast_to(self(e), self.shape).astype(float)


def evaluate(e: Expr, point: Mapping[str, float], env: Mapping[str, float] | None = None) -> float:
    values = dict(point)
    if env:
        values.update(env)
    out = Evaluator(values)(e)
    if np.ndim(out):
        raise ExprError("evaluate() takes scalar bindings; use Evaluator for arrays")
    out = float(out)
    if not math.isfinite(out):
        raise DomainError("non-finite result", e)
    return out
