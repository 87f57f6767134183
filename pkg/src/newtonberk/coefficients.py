"""Residue-field coefficients.

Two backends are provided.  ``EXACT`` works over the Gaussian rationals
Q(i) with exact zero tests.  ``Backend("float", prec, ztol)`` works over
arbitrary-precision complex floats from a private mpmath context; any
value with modulus at most ``ztol`` counts as zero, and every time that
rule swallows a nonzero value the decision is recorded in the active
tolerance log (see :func:`tolerance_log`).
"""
from __future__ import annotations

import ast
import contextlib
import contextvars
import math
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Iterator

import mpmath
from gmpy2 import mpq


class Gaussian:
    """Exact element re + im*i of Q(i)."""

    __slots__ = ("re", "im")

    def __init__(self, re: Any = 0, im: Any = 0):
        self.re = re if type(re) is type(_MPQ0) else mpq(re)
        self.im = im if type(im) is type(_MPQ0) else mpq(im)

    @staticmethod
    def _lift(x: Any) -> "Gaussian | None":
        if isinstance(x, Gaussian):
            return x
        if isinstance(x, (int, Fraction)) or type(x) is type(_MPQ0):
            return Gaussian(x, 0)
        if isinstance(x, complex):
            return Gaussian(Fraction(x.real), Fraction(x.imag))
        return None

    def __add__(self, o):
        o = Gaussian._lift(o)
        if o is None:
            return NotImplemented
        return Gaussian(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = Gaussian._lift(o)
        if o is None:
            return NotImplemented
        return Gaussian(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        o = Gaussian._lift(o)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, o):
        if not isinstance(o, Gaussian):
            o = Gaussian._lift(o)
            if o is None:
                return NotImplemented
            if not o.im:
                return Gaussian(self.re * o.re, self.im * o.re)
        a, b, c, d = self.re, self.im, o.re, o.im
        return Gaussian(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = Gaussian._lift(o)
        if o is None:
            return NotImplemented
        n = o.re * o.re + o.im * o.im
        if not n:
            raise ZeroDivisionError("Gaussian division by zero")
        a, b, c, d = self.re, self.im, o.re, o.im
        return Gaussian((a * c + b * d) / n, (b * c - a * d) / n)

    def __rtruediv__(self, o):
        o = Gaussian._lift(o)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return Gaussian(-self.re, -self.im)

    def __pow__(self, n: int):
        if n < 0:
            return Gaussian(1) / (self ** (-n))
        out, base = Gaussian(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, o):
        o = Gaussian._lift(o)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def conjugate(self):
        return Gaussian(self.re, -self.im)

    def norm(self):
        return self.re * self.re + self.im * self.im

    def __abs__(self):
        return math.sqrt(float(self.norm()))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"Gaussian({fmt_coeff(self)})"

    def __str__(self):
        return fmt_coeff(self)


_MPQ0 = mpq(0)


class _Infinity:
    """The point at infinity of P^1 (residue labels and type I points)."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INFTY"

    def __str__(self):
        return "inf"

    def __reduce__(self):
        return (_Infinity, ())


INFTY = _Infinity()


def is_infty(x: Any) -> bool:
    return x is INFTY


# --------------------------------------------------------------------------
# tolerance bookkeeping

_TOL_LOG: contextvars.ContextVar = contextvars.ContextVar("tolerance_log", default=None)


@contextlib.contextmanager
def tolerance_log() -> Iterator[list]:
    """Collect tolerance decisions made by float backends inside the block."""
    events: list = []
    token = _TOL_LOG.set(events)
    try:
        yield events
    finally:
        _TOL_LOG.reset(token)


def note_tolerance(kind: str, magnitude: float) -> None:
    events = _TOL_LOG.get()
    if events is not None:
        if len(events) < 10000:
            events.append((kind, magnitude))


# --------------------------------------------------------------------------
# backends


@lru_cache(maxsize=None)
def _mp_context(prec: int) -> mpmath.MPContext:
    ctx = mpmath.MPContext()
    ctx.prec = prec
    return ctx


@dataclass(frozen=True)
class Backend:
    """Coefficient backend descriptor.

    kind is ``"exact"`` or ``"float"``.  ``prec`` is the binary precision of
    the float backend, ``ztol`` its zero tolerance and ``gcd_tol`` the
    relative tolerance used when clustering roots for gcd extraction.
    """

    kind: str = "exact"
    prec: int = 256
    ztol: float = 1e-40
    gcd_tol: float = 1e-20
    _ztol_mp: Any = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if self.kind not in ("exact", "float"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.is_float:
            object.__setattr__(self, "_ztol_mp", self.ctx.mpf(self.ztol))

    @property
    def is_exact(self) -> bool:
        return self.kind == "exact"

    @property
    def is_float(self) -> bool:
        return self.kind == "float"

    @property
    def ctx(self) -> mpmath.MPContext:
        return _mp_context(self.prec)

    # -- construction ---------------------------------------------------
    def zero(self):
        return Gaussian(0) if self.is_exact else self.ctx.mpc(0)

    def one(self):
        return Gaussian(1) if self.is_exact else self.ctx.mpc(1)

    def coerce(self, x: Any):
        """Convert ``x`` into this backend's coefficient type."""
        if self.is_exact:
            if isinstance(x, Gaussian):
                return x
            if isinstance(x, (int, Fraction)) or type(x) is type(_MPQ0):
                return Gaussian(x)
            if isinstance(x, tuple) and len(x) == 2:
                return Gaussian(_to_rational(x[0]), _to_rational(x[1]))
            if isinstance(x, str):
                return Gaussian(_to_rational(x))
            if isinstance(x, (float, complex)):
                z = complex(x)
                return Gaussian(Fraction(z.real), Fraction(z.imag))
            raise TypeError(f"cannot coerce {x!r} to the exact backend")
        ctx = self.ctx
        if isinstance(x, Gaussian):
            return ctx.mpc(ctx.mpf(int(x.re.numerator)) / int(x.re.denominator),
                           ctx.mpf(int(x.im.numerator)) / int(x.im.denominator))
        if isinstance(x, (int, Fraction)) or type(x) is type(_MPQ0):
            q = Fraction(int(x.numerator), int(x.denominator))
            return ctx.mpc(ctx.mpf(q.numerator) / q.denominator)
        if isinstance(x, tuple) and len(x) == 2:
            return ctx.mpc(self._real(x[0]), self._real(x[1]))
        if isinstance(x, str):
            return ctx.mpc(self._real(x))
        if isinstance(x, (mpmath.mpc, mpmath.mpf)) or hasattr(x, "_mpc_") or hasattr(x, "_mpf_"):
            return ctx.mpc(x)
        if isinstance(x, (float, complex)):
            return ctx.mpc(x)
        raise TypeError(f"cannot coerce {x!r} to the float backend")

    def _real(self, x: Any):
        ctx = self.ctx
        if isinstance(x, str):
            return ctx.mpf(eval_real_expr(x, ctx))
        if isinstance(x, (int,)):
            return ctx.mpf(x)
        if isinstance(x, Fraction) or type(x) is type(_MPQ0):
            return ctx.mpf(int(x.numerator)) / int(x.denominator)
        return ctx.mpf(x)

    def gauss(self, re: Any, im: Any = 0):
        return self.coerce((re, im))

    # -- predicates -----------------------------------------------------
    def is_zero(self, x: Any) -> bool:
        if self.is_exact:
            return not x
        if not x:
            return True
        m = abs(x)
        if m <= self._ztol_mp:
            note_tolerance("zero", float(m))
            return True
        return False

    def eq(self, a: Any, b: Any) -> bool:
        return self.is_zero(a - b)

    # -- conversions ----------------------------------------------------
    def to_mpc(self, x: Any, ctx: mpmath.MPContext | None = None):
        ctx = ctx or self.ctx
        if isinstance(x, Gaussian):
            return ctx.mpc(ctx.mpf(int(x.re.numerator)) / int(x.re.denominator),
                           ctx.mpf(int(x.im.numerator)) / int(x.im.denominator))
        return ctx.mpc(x)

    def join(self, other: "Backend") -> "Backend":
        """Common backend for mixed arithmetic (float wins)."""
        if self == other:
            return self
        if self.is_exact:
            return other
        if other.is_exact:
            return self
        if other.prec > self.prec:
            return other
        return self


EXACT = Backend("exact")
FLOAT256 = Backend("float", 256, 1e-40)


def to_complex(x: Any) -> complex:
    """Python complex value of a coefficient (lossy)."""
    if isinstance(x, Gaussian):
        return complex(x)
    return complex(x)


def fmt_rational(q: Any) -> str:
    q = Fraction(int(q.numerator), int(q.denominator))
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def fmt_coeff(c: Any) -> str:
    """Readable string for either coefficient type."""
    if isinstance(c, Gaussian):
        if not c.im:
            return fmt_rational(c.re)
        if not c.re:
            return f"{fmt_rational(c.im)}i"
        sign = "+" if c.im > 0 else "-"
        return f"{fmt_rational(c.re)}{sign}{fmt_rational(abs(c.im))}i"
    if c is INFTY:
        return "inf"
    z = complex(c)
    return f"{z.real:.12g}{z.imag:+.12g}i" if z.imag else f"{z.real:.12g}"


# --------------------------------------------------------------------------
# literal parsing


def _to_rational(x: Any) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if type(x) is type(_MPQ0):
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"not a rational literal: {x!r}")


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def eval_real_expr(text: str, ctx: mpmath.MPContext):
    """Evaluate a small arithmetic expression such as ``"sqrt(30)/3"``.

    Only numbers, the four operations, integer powers, ``sqrt`` and ``pi``
    are accepted; anything else raises ValueError.
    """
    node = ast.parse(text.strip(), mode="eval").body

    def ev(n):
        if isinstance(n, ast.Constant) and isinstance(n.value, (int, float)):
            if isinstance(n.value, int):
                return ctx.mpf(n.value)
            return ctx.mpf(repr(n.value))
        if isinstance(n, ast.BinOp) and type(n.op) in _BINOPS:
            return _BINOPS[type(n.op)](ev(n.left), ev(n.right))
        if isinstance(n, ast.UnaryOp) and isinstance(n.op, (ast.USub, ast.UAdd)):
            v = ev(n.operand)
            return -v if isinstance(n.op, ast.USub) else v
        if isinstance(n, ast.Call) and isinstance(n.func, ast.Name) and n.func.id == "sqrt" and len(n.args) == 1:
            return ctx.sqrt(ev(n.args[0]))
        if isinstance(n, ast.Name) and n.id == "pi":
            return +ctx.pi
        raise ValueError(f"unsupported expression in literal: {text!r}")

    return ev(node)


def _exact_fraction(x: Any) -> Fraction:
    if hasattr(x, "_mpf_"):
        p, q = mpmath.libmp.to_rational(x._mpf_)
        return Fraction(int(p), int(q))
    return Fraction(x)


def snap_gaussian(z: Any, max_den: int = 10**6) -> Gaussian:
    """Closest Gaussian rational with bounded denominators (no verification)."""
    if isinstance(z, Gaussian):
        return z
    if isinstance(z, complex):
        re_, im_ = Fraction(z.real), Fraction(z.imag)
    else:
        re_, im_ = _exact_fraction(z.real), _exact_fraction(z.imag)
    return Gaussian(re_.limit_denominator(max_den), im_.limit_denominator(max_den))
