"""Truncated Puiseux series, polynomials over them, Newton polygons and
Newton-Puiseux root expansion.

A series is stored as integer exponent numerators over a common
denominator ``ram``: the term ``(n, c)`` means ``c * t**(n/ram)``.  The
truncation ``trunc`` is again a numerator over ``ram`` (or ``None`` when
the series is known exactly); every coefficient of exponent at least
``trunc/ram`` is unknown.  Absolute values are never floated: a valuation
is an exact :class:`fractions.Fraction`, and ``math.inf`` stands for the
valuation of an exactly-known zero.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from typing import Any, Iterable, Sequence

from . import cpoly
from .coefficients import EXACT, FLOAT256, Backend, Gaussian, fmt_coeff, fmt_rational, note_tolerance
from .errors import InputError, PrecisionExhausted

Exponent = Fraction
INF = math.inf


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def _as_fraction(q: Any) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, int):
        return Fraction(q)
    if isinstance(q, tuple):
        return Fraction(q[0], q[1])
    if isinstance(q, str):
        return Fraction(q)
    raise TypeError(f"not an exponent: {q!r}")


class PuiseuxSeries:
    """Immutable truncated Puiseux series over a coefficient backend."""

    __slots__ = ("terms", "ram", "trunc", "backend")

    def __init__(self, terms: Iterable[tuple[int, Any]] = (), ram: int = 1,
                 trunc: int | None = None, backend: Backend = EXACT, *, _clean: bool = False):
        if ram < 1:
            raise ValueError("ram must be positive")
        self.ram = ram
        self.backend = backend
        self.trunc = trunc
        if _clean:
            self.terms = tuple(terms)
        else:
            acc: dict[int, Any] = {}
            for n, c in terms:
                if trunc is not None and n >= trunc:
                    continue
                acc[n] = acc[n] + c if n in acc else c
            self.terms = tuple((n, acc[n]) for n in sorted(acc) if not backend.is_zero(acc[n]))

    # ------------------------------------------------------------------ build
    @classmethod
    def from_terms(cls, terms: Iterable[tuple[Any, Any]], trunc: Any = None,
                   backend: Backend = EXACT) -> "PuiseuxSeries":
        """Build from ``(exponent, coefficient)`` pairs with rational exponents."""
        terms = [(_as_fraction(q), backend.coerce(c)) for q, c in terms]
        tr = None if trunc is None or trunc == INF else _as_fraction(trunc)
        ram = 1
        for q, _ in terms:
            ram = _lcm(ram, q.denominator)
        if tr is not None:
            ram = _lcm(ram, tr.denominator)
        out = [(int(q * ram), c) for q, c in terms]
        return cls(out, ram, None if tr is None else int(tr * ram), backend)

    @classmethod
    def constant(cls, c: Any, backend: Backend = EXACT) -> "PuiseuxSeries":
        return cls([(0, backend.coerce(c))], 1, None, backend)

    @classmethod
    def monomial(cls, c: Any, q: Any, backend: Backend = EXACT) -> "PuiseuxSeries":
        return cls.from_terms([(q, c)], None, backend)

    @classmethod
    def zero(cls, backend: Backend = EXACT) -> "PuiseuxSeries":
        return cls((), 1, None, backend)

    @classmethod
    def from_literal(cls, lit: Any, backend: Backend = EXACT) -> "PuiseuxSeries":
        """Parse the file literal: ``{"terms": [[num, den, re, im], ...],
        "trunc": [num, den]}`` or a bare list of terms.  ``re`` and ``im``
        may be integers, rational strings such as ``"-5/3"`` or, for the
        float backend, expressions such as ``"sqrt(30)/3"``."""
        if isinstance(lit, dict):
            raw, tr = lit.get("terms", []), lit.get("trunc")
        else:
            raw, tr = lit, None
        terms = []
        try:
            for entry in raw:
                if len(entry) not in (3, 4):
                    raise InputError(f"series term must be [num, den, re(, im)]: {entry!r}")
                num, den, re = entry[0], entry[1], entry[2]
                im = entry[3] if len(entry) == 4 else 0
                if int(den) <= 0:
                    raise InputError(f"exponent denominator must be positive: {entry!r}")
                terms.append((Fraction(int(num), int(den)), (re, im)))
            trunc = None if tr is None else Fraction(int(tr[0]), int(tr[1]))
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise InputError(f"bad series literal {lit!r}: {exc}") from exc
        try:
            return cls.from_terms(terms, trunc, backend)
        except (ValueError, TypeError) as exc:
            raise InputError(f"bad series coefficient in {lit!r}: {exc}") from exc

    def to_literal(self) -> dict:
        out = []
        for q, c in self.items():
            if self.backend.is_exact:
                re, im = fmt_rational(c.re), fmt_rational(c.im)
            else:
                re, im = self.backend.ctx.nstr(c.real, 30), self.backend.ctx.nstr(c.imag, 30)
            out.append([q.numerator, q.denominator, re, im])
        lit: dict = {"terms": out}
        if self.trunc is not None:
            tr = self.trunc_exponent
            lit["trunc"] = [tr.numerator, tr.denominator]
        return lit

    # ---------------------------------------------------------------- access
    def items(self) -> list[tuple[Fraction, Any]]:
        return [(Fraction(n, self.ram), c) for n, c in self.terms]

    @property
    def trunc_exponent(self) -> Fraction | float:
        return INF if self.trunc is None else Fraction(self.trunc, self.ram)

    @property
    def is_exact(self) -> bool:
        return self.trunc is None

    def is_known_zero(self) -> bool:
        return not self.terms and self.trunc is None

    def valuation(self) -> Fraction | float:
        if self.terms:
            return Fraction(self.terms[0][0], self.ram)
        if self.trunc is None:
            return INF
        raise PrecisionExhausted("valuation undecidable: no known term below the truncation")

    def valuation_lower_bound(self) -> Fraction | float:
        if self.terms:
            return Fraction(self.terms[0][0], self.ram)
        return self.trunc_exponent

    def leading(self) -> tuple[Fraction, Any]:
        v = self.valuation()
        if v == INF:
            raise PrecisionExhausted("zero series has no leading term")
        return v, self.terms[0][1]

    def coeff_at(self, q: Any) -> Any:
        q = _as_fraction(q)
        if q >= self.trunc_exponent:
            raise PrecisionExhausted(f"coefficient of t^{q} is beyond the truncation")
        n = q * self.ram
        if n.denominator != 1:
            return self.backend.zero()
        n = int(n)
        for m, c in self.terms:
            if m == n:
                return c
        return self.backend.zero()

    def reduction(self) -> Any:
        """Residue of a series of valuation >= 0 (coefficient of t^0)."""
        if self.valuation_lower_bound() < 0:
            raise ValueError("reduction of a series with negative valuation")
        return self.coeff_at(0)

    # ------------------------------------------------------------ plumbing
    def _lift(self, ram: int) -> "PuiseuxSeries":
        if ram == self.ram:
            return self
        k = ram // self.ram
        return PuiseuxSeries([(n * k, c) for n, c in self.terms], ram,
                             None if self.trunc is None else self.trunc * k, self.backend, _clean=True)

    def with_backend(self, backend: Backend) -> "PuiseuxSeries":
        if backend == self.backend:
            return self
        return PuiseuxSeries([(n, backend.coerce(c)) for n, c in self.terms], self.ram,
                             self.trunc, backend)

    @staticmethod
    def _harmonize(f: "PuiseuxSeries", g: "PuiseuxSeries"):
        bk = f.backend.join(g.backend)
        ram = _lcm(f.ram, g.ram)
        return f.with_backend(bk)._lift(ram), g.with_backend(bk)._lift(ram), ram, bk

    def _coerce_other(self, o: Any) -> "PuiseuxSeries":
        if isinstance(o, PuiseuxSeries):
            return o
        return PuiseuxSeries.constant(o, self.backend)

    def simplify_ram(self) -> "PuiseuxSeries":
        g = self.ram
        for n, _ in self.terms:
            g = math.gcd(g, n)
        if self.trunc is not None:
            g = math.gcd(g, self.trunc)
        if g <= 1:
            return self
        return PuiseuxSeries([(n // g, c) for n, c in self.terms], self.ram // g,
                             None if self.trunc is None else self.trunc // g, self.backend, _clean=True)

    # ----------------------------------------------------------- arithmetic
    def __add__(self, o):
        o = self._coerce_other(o)
        f, g, ram, bk = PuiseuxSeries._harmonize(self, o)
        tr = _min_trunc(f.trunc, g.trunc)
        return PuiseuxSeries(list(f.terms) + list(g.terms), ram, tr, bk).simplify_ram()

    __radd__ = __add__

    def __neg__(self):
        return PuiseuxSeries([(n, -c) for n, c in self.terms], self.ram, self.trunc,
                             self.backend, _clean=True)

    def __sub__(self, o):
        return self + (-self._coerce_other(o))

    def __rsub__(self, o):
        return self._coerce_other(o) - self

    def __mul__(self, o):
        if not isinstance(o, PuiseuxSeries):
            c = self.backend.coerce(o)
            return PuiseuxSeries([(n, c * a) for n, a in self.terms], self.ram, self.trunc, self.backend)
        f, g, ram, bk = PuiseuxSeries._harmonize(self, o)
        if f.is_known_zero() or g.is_known_zero():
            return PuiseuxSeries.zero(bk)
        tr = None
        if f.trunc is not None:
            tr = f.trunc + (g.terms[0][0] if g.terms else g.trunc)
        if g.trunc is not None:
            tr = _min_trunc(tr, g.trunc + (f.terms[0][0] if f.terms else f.trunc))
        acc: dict[int, Any] = {}
        limit = tr
        for n, a in f.terms:
            for m, b in g.terms:
                k = n + m
                if limit is not None and k >= limit:
                    break
                acc[k] = acc[k] + a * b if k in acc else a * b
        return PuiseuxSeries(acc.items(), ram, tr, bk).simplify_ram()

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("use invert for negative powers")
        out = PuiseuxSeries.constant(1, self.backend)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def scale_exponents(self, k: int) -> "PuiseuxSeries":
        """Substitute t -> t**k (k a positive integer)."""
        return PuiseuxSeries([(n * k, c) for n, c in self.terms], self.ram,
                             None if self.trunc is None else self.trunc * k, self.backend, _clean=True).simplify_ram()

    def shift(self, q: Any) -> "PuiseuxSeries":
        """Multiply by t**q."""
        q = _as_fraction(q)
        ram = _lcm(self.ram, q.denominator)
        f = self._lift(ram)
        s = int(q * ram)
        return PuiseuxSeries([(n + s, c) for n, c in f.terms], ram,
                             None if f.trunc is None else f.trunc + s, self.backend, _clean=True).simplify_ram()

    def truncate(self, q: Any) -> "PuiseuxSeries":
        """Forget every term of exponent >= q."""
        if q == INF:
            return self
        q = _as_fraction(q)
        ram = _lcm(self.ram, q.denominator)
        f = self._lift(ram)
        T = int(q * ram)
        tr = T if f.trunc is None else min(T, f.trunc)
        return PuiseuxSeries([(n, c) for n, c in f.terms if n < tr], ram, tr, self.backend,
                             _clean=True).simplify_ram()

    def drop_from(self, q: Any) -> "PuiseuxSeries":
        """Exact partial sum of the terms of exponent < q (truncation kept)."""
        q = _as_fraction(q)
        return PuiseuxSeries([(n, c) for n, c in self.terms if Fraction(n, self.ram) < q],
                             self.ram, self.trunc, self.backend, _clean=True)

    def invert(self, order: Any) -> "PuiseuxSeries":
        """1/f correct up to O(t**order) (relative to the product with f)."""
        order = _as_fraction(order)
        v, c0 = self.leading()
        # f = c0 t^v (1 + u), u of positive valuation; 1/f = c0^-1 t^-v sum (-u)^k
        need = order - v  # absolute order required in 1/f
        rel = need + v  # relative order in (1+u)^-1
        if self.trunc is not None and self.trunc_exponent - v < rel:
            raise PrecisionExhausted("truncation cannot support the requested inverse order")
        inv0 = self.backend.one() / c0
        u = (self.shift(-v) * inv0) - PuiseuxSeries.constant(1, self.backend)
        u = u.truncate(rel)
        acc = PuiseuxSeries.constant(1, self.backend)
        power = PuiseuxSeries.constant(1, self.backend)
        while u.terms:
            power = (power * (-u)).truncate(rel)
            if not power.terms:
                break
            acc = acc + power
        return (acc * inv0).shift(-v).truncate(need)

    def div(self, o: "PuiseuxSeries", order: Any) -> "PuiseuxSeries":
        """self / o correct below t**order."""
        order = _as_fraction(order)
        vo = o.valuation()
        vs = self.valuation_lower_bound()
        if vs == INF:
            return PuiseuxSeries.zero(self.backend.join(o.backend))
        inv = o.invert(order - vs + vo)
        return (self * inv).truncate(order)

    # ------------------------------------------------------------ equality
    def equal_to_order(self, o: "PuiseuxSeries", q: Any) -> bool:
        """Whether v(self - o) >= q; raises if undecidable."""
        d = self - o
        return d.valuation_geq(q)

    def valuation_geq(self, q: Any) -> bool:
        q = _as_fraction(q) if q != INF else INF
        if self.terms:
            return Fraction(self.terms[0][0], self.ram) >= q
        if self.trunc_exponent >= q:
            return True
        raise PrecisionExhausted("comparison needs terms beyond the truncation")

    def __eq__(self, o):
        if not isinstance(o, PuiseuxSeries):
            try:
                o = self._coerce_other(o)
            except TypeError:
                return NotImplemented
        if self.trunc_exponent != o.trunc_exponent:
            return False
        d = self - o
        return not d.terms

    def __hash__(self):
        return hash((tuple((q, str(fmt_coeff(c))) for q, c in self.items()), str(self.trunc_exponent)))

    # -------------------------------------------------------------- numeric
    def evaluate(self, t: complex) -> complex:
        """Numeric value at a complex parameter (principal branch of t^q)."""
        t = complex(t)
        if t == 0:
            raise ValueError("evaluation at t = 0")
        lt = cmath.log(t)
        s = 0j
        for q, c in self.items():
            s += complex(c) * cmath.exp(float(q) * lt)
        return s

    def evaluate_mp(self, t: Any, ctx) -> Any:
        lt = ctx.log(ctx.mpc(t))
        s = ctx.mpc(0)
        for q, c in self.items():
            s += self.backend.to_mpc(c, ctx) * ctx.exp(ctx.mpf(q.numerator) / q.denominator * lt)
        return s

    # -------------------------------------------------------------- display
    def __repr__(self):
        parts = []
        for q, c in self.items():
            if q == 0:
                parts.append(fmt_coeff(c))
            else:
                parts.append(f"({fmt_coeff(c)})t^{fmt_rational(q)}")
        body = " + ".join(parts) if parts else "0"
        if self.trunc is not None:
            body += f" + O(t^{fmt_rational(self.trunc_exponent)})"
        return body


def _min_trunc(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def series(x: Any, backend: Backend = EXACT) -> PuiseuxSeries:
    """Coerce a number or series into a series."""
    if isinstance(x, PuiseuxSeries):
        return x
    return PuiseuxSeries.constant(x, backend)


# ==========================================================================
# polynomials over the series field


class LPolynomial:
    """Polynomial sum_i coeffs[i] x^i with series coefficients."""

    __slots__ = ("coeffs", "backend")

    def __init__(self, coeffs: Sequence[Any], backend: Backend | None = None):
        cs = [c if isinstance(c, PuiseuxSeries) else None for c in coeffs]
        if backend is None:
            backend = EXACT
            for c in cs:
                if c is not None:
                    backend = backend.join(c.backend)
        self.backend = backend
        self.coeffs = tuple(
            (c.with_backend(backend) if isinstance(c, PuiseuxSeries) else PuiseuxSeries.constant(c, backend))
            for c in coeffs)
        # trim exactly-zero leading coefficients
        cc = list(self.coeffs)
        while cc and cc[-1].is_known_zero():
            cc.pop()
        self.coeffs = tuple(cc)

    @classmethod
    def from_roots(cls, roots: Sequence[PuiseuxSeries], backend: Backend | None = None) -> "LPolynomial":
        bk = backend or EXACT
        for r in roots:
            bk = bk.join(r.backend)
        p = cls([PuiseuxSeries.constant(1, bk)], bk)
        for r in roots:
            p = p * cls([-r, PuiseuxSeries.constant(1, bk)], bk)
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, i):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else PuiseuxSeries.zero(self.backend)

    def __add__(self, o: "LPolynomial") -> "LPolynomial":
        n = max(len(self.coeffs), len(o.coeffs))
        return LPolynomial([self[i] + o[i] for i in range(n)], self.backend.join(o.backend))

    def __sub__(self, o: "LPolynomial") -> "LPolynomial":
        n = max(len(self.coeffs), len(o.coeffs))
        return LPolynomial([self[i] - o[i] for i in range(n)], self.backend.join(o.backend))

    def __mul__(self, o):
        if not isinstance(o, LPolynomial):
            o = series(o, self.backend)
            return LPolynomial([c * o for c in self.coeffs], self.backend.join(o.backend))
        if not self.coeffs or not o.coeffs:
            return LPolynomial([], self.backend)
        bk = self.backend.join(o.backend)
        out = [PuiseuxSeries.zero(bk)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_known_zero():
                continue
            for j, b in enumerate(o.coeffs):
                if b.is_known_zero():
                    continue
                out[i + j] = out[i + j] + a * b
        return LPolynomial(out, bk)

    __rmul__ = __mul__

    def derivative(self) -> "LPolynomial":
        return LPolynomial([self.coeffs[i] * i for i in range(1, len(self.coeffs))], self.backend)

    def __call__(self, x: Any) -> PuiseuxSeries:
        x = series(x, self.backend)
        acc = PuiseuxSeries.zero(self.backend)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def taylor_shift(self, c: Any) -> "LPolynomial":
        """The polynomial x -> self(c + x)."""
        c = series(c, self.backend)
        out = LPolynomial([], self.backend.join(c.backend))
        lin = LPolynomial([c, PuiseuxSeries.constant(1, c.backend)])
        for a in reversed(self.coeffs):
            out = out * lin + LPolynomial([a])
        return out

    def scale_variable(self, s: Any) -> "LPolynomial":
        """The polynomial x -> self(s x)."""
        s = series(s, self.backend)
        out, pw = [], PuiseuxSeries.constant(1, self.backend)
        for a in self.coeffs:
            out.append(a * pw)
            pw = pw * s
        return LPolynomial(out, self.backend.join(s.backend))

    def truncate(self, q: Any) -> "LPolynomial":
        return LPolynomial([c.truncate(q) for c in self.coeffs], self.backend)

    def with_backend(self, bk: Backend) -> "LPolynomial":
        return LPolynomial([c.with_backend(bk) for c in self.coeffs], bk)

    def __repr__(self):
        return "LPolynomial([" + ", ".join(repr(c) for c in self.coeffs) + "])"


def as_lpoly(p: Any) -> LPolynomial:
    if isinstance(p, LPolynomial):
        return p
    return LPolynomial(list(p))


# ==========================================================================
# Newton polygons


def _lower_hull(points: list[tuple[int, Fraction]]) -> list[tuple[int, Fraction]]:
    hull: list[tuple[int, Fraction]] = []
    for p in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # keep hull[-1] only if it lies strictly below the chord hull[-2] -> p
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def newton_polygon(p: Any) -> list[tuple[Fraction | float, int]]:
    """Root valuations of ``p`` with multiplicities.

    Returns ``(slope, multiplicity)`` pairs where the slope is the common
    valuation of that many roots, ordered by decreasing valuation; roots at
    zero are reported first as ``(inf, k)``.  Coefficients that are not yet
    known are accepted when their truncation lies on or above the hull;
    otherwise :class:`PrecisionExhausted` is raised.
    """
    p = as_lpoly(p)
    if not p.coeffs:
        raise InputError("Newton polygon of the zero polynomial")
    lead = p.coeffs[-1]
    if not lead.terms:
        raise PrecisionExhausted("leading coefficient undecidable")
    known: list[tuple[int, Fraction]] = []
    unknown: list[tuple[int, Fraction]] = []
    for i, c in enumerate(p.coeffs):
        if c.terms:
            known.append((i, c.valuation()))
        elif c.trunc is not None:
            unknown.append((i, c.trunc_exponent))
    i0 = known[0][0]
    hull = _lower_hull(known)
    # an unknown coefficient left of the first known point, or under the hull, is fatal
    for i, T in unknown:
        if i < i0:
            raise PrecisionExhausted("coefficient below the first known one is undetermined")
        for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
            if x1 <= i <= x2:
                h = y1 + (y2 - y1) * Fraction(i - x1, x2 - x1)
                if T < h:
                    raise PrecisionExhausted("undetermined coefficient may lie under the Newton polygon")
                break
    out: list[tuple[Fraction | float, int]] = []
    if i0 > 0:
        out.append((INF, i0))
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        out.append(((y1 - y2) / (x2 - x1), x2 - x1))
    return out


def count_roots_in_disk(p: Any, center: Any, radius_val: Any, closed: bool = True) -> int:
    """Number of roots x of ``p`` with v(x - center) >= radius_val (closed)
    or > radius_val (strict), counted with multiplicity."""
    p = as_lpoly(p)
    r = _as_fraction(radius_val)
    center = series(center, p.backend)
    q = p.taylor_shift(center) if not center.is_known_zero() else p
    total = 0
    for s, m in newton_polygon(q):
        if s > r or (closed and s == r):
            total += m
    return total


# ==========================================================================
# Newton-Puiseux expansion


def puiseux_roots_with_multiplicity(p: Any, order: Any, float_backend: Backend = FLOAT256
                                    ) -> list[tuple[PuiseuxSeries, int]]:
    """Roots of ``p`` modulo O(t**order), grouped with multiplicity.

    Each returned series carries truncation ``order`` unless the expansion
    terminated exactly.  When an edge polynomial has roots outside Q(i)
    under the exact backend, the affected branch continues in
    ``float_backend`` and the change is logged as a tolerance decision.
    """
    p = as_lpoly(p)
    order = _as_fraction(order)
    if p.degree < 1:
        return []
    out: list[tuple[PuiseuxSeries, int]] = []
    _expand(p, PuiseuxSeries.zero(p.backend), -INF, order, float_backend, out)
    return out


def puiseux_roots(p: Any, order: Any, float_backend: Backend = FLOAT256) -> list[PuiseuxSeries]:
    """Roots of ``p`` modulo O(t**order), repeated according to multiplicity."""
    res = []
    for r, m in puiseux_roots_with_multiplicity(p, order, float_backend):
        res.extend([r] * m)
    return res


def _edge_equation(q: LPolynomial, slope: Fraction, i_lo: int, i_hi: int, bk: Backend) -> list:
    """Residual polynomial of the edge of q of the given root valuation."""
    m = None
    for i in range(i_lo, i_hi + 1):
        c = q.coeffs[i]
        if c.terms:
            val = c.valuation() + i * slope
            m = val if m is None or val < m else m
    coeffs = []
    for i in range(i_lo, i_hi + 1):
        e = m - i * slope
        coeffs.append(q.coeffs[i].coeff_at(e) if q.coeffs[i].valuation_lower_bound() <= e else bk.zero())
    return coeffs


def _expand(q: LPolynomial, acc: PuiseuxSeries, min_slope, order: Fraction, fbk: Backend,
            out: list) -> None:
    poly = newton_polygon(q)
    # positions along the polygon
    idx = 0
    for slope, mult in poly:
        lo, hi = idx, idx + mult
        idx = hi
        if slope == INF:
            out.append((acc, mult))
            continue
        if slope <= min_slope:
            continue
        if slope >= order:
            out.append((acc.truncate(order), mult))
            continue
        bk = q.backend
        eq = _edge_equation(q, slope, lo, hi, bk)
        for c, k in cpoly.roots(eq, bk):
            qq = q
            cc = c
            if bk.is_exact and not isinstance(c, Gaussian):
                note_tolerance("promote-to-float", 0.0)
                qq = q.with_backend(fbk)
                cc = fbk.coerce(c)
            term = PuiseuxSeries.monomial(cc, slope, qq.backend)
            nxt = qq.taylor_shift(term)
            _expand(nxt, acc.with_backend(qq.backend) + term, slope, order, fbk, out)
