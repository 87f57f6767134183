"""Rational maps over the Puiseux field and their residue-field shadows.

An :class:`LRationalMap` is a homogeneous pair of degree ``d`` stored by
its dehomogenisation: ``num[i]`` and ``den[i]`` are the coefficients of
``z**i`` in F(z, 1) and G(z, 1).  A :class:`ReducedMap` is a possibly
degenerate map over C in factored form ``H * (A : B)``: ``H`` is the common
factor (its roots are the holes) and ``(A : B)`` is the core.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Callable, Sequence

from . import cpoly
from .berktree import INF_POINT, BerkPoint, as_point, direction_of, gauss_point
from .coefficients import EXACT, FLOAT256, INFTY, Backend, Gaussian, fmt_coeff
from .errors import (DegenerateOverL, InputError, Indeterminate, PrecisionExhausted,
                     ValidationFailed)
from .puiseux_core import (INF, LPolynomial, PuiseuxSeries, count_roots_in_disk, series)

# ==========================================================================
# maps over C in factored form


def _form_deg(p: Sequence, bk: Backend) -> int:
    return len(cpoly.trim(p, bk)) - 1


def _hom_poly_str(p: Sequence, n: int, bk: Backend) -> str:
    p = cpoly.trim(p, bk)
    if not p:
        return "0"
    parts = []
    for i in range(len(p) - 1, -1, -1):
        c = p[i]
        if bk.is_zero(c):
            continue
        j = n - i
        mono = ""
        if i:
            mono += "X" + (f"^{i}" if i > 1 else "")
        if j:
            mono += "Y" + (f"^{j}" if j > 1 else "")
        cs = fmt_coeff(c)
        if mono and cs == "1":
            cs = ""
        elif mono and cs == "-1":
            cs = "-"
        elif mono and ("+" in cs[1:] or "-" in cs[1:]):
            cs = f"({cs})"
        parts.append(cs + mono)
    out = "+".join(parts).replace("+-", "-")
    return out


class ReducedMap:
    """Degenerate (or not) rational map H * (A : B) over the residue field.

    ``H`` is a monic form of degree ``h`` given by its dehomogenisation,
    ``A`` and ``B`` are coprime forms of degree ``e`` (the core degree);
    the ambient degree is ``h + e``.
    """

    def __init__(self, H: Sequence, h: int, A: Sequence, B: Sequence, e: int, backend: Backend):
        self.backend = backend
        self.H = cpoly.trim(H, backend)
        self.h = h
        self.A = cpoly.trim(A, backend)
        self.B = cpoly.trim(B, backend)
        self.e = e
        if e == 0:
            # projective normalisation of a constant core: [c:1] or [1:0]
            lead = self.B[0] if self.B else self.A[0]
            self.A = [c / lead for c in self.A]
            self.B = [c / lead for c in self.B]

    # -------------------------------------------------------------- build
    @classmethod
    def from_forms(cls, F: Sequence, G: Sequence, d: int, backend: Backend) -> "ReducedMap":
        bk = backend
        F, G = cpoly.trim(F, bk), cpoly.trim(G, bk)
        if not F and not G:
            raise InputError("the zero pair is not a point of the space of maps")
        g = cpoly.gcd(F, G, bk)
        inf_f = d - (len(F) - 1) if F else INF
        inf_g = d - (len(G) - 1) if G else INF
        m_inf = min(inf_f, inf_g)
        h = (len(g) - 1) + m_inf
        A = cpoly.divmod_poly(F, g, bk)[0] if F else []
        B = cpoly.divmod_poly(G, g, bk)[0] if G else []
        return cls(g, h, A, B, d - h, bk)

    @property
    def degree(self) -> int:
        return self.h + self.e

    @property
    def core_degree(self) -> int:
        return self.e

    def holes(self) -> list[tuple[Any, int]]:
        return cpoly.form_roots(self.H, self.h, self.backend)

    def depth(self, point: Any) -> int:
        if point is INFTY:
            return self.h - (len(self.H) - 1)
        return cpoly.multiplicity_at(self.H, point, self.backend)

    def constant_value(self):
        if self.e != 0:
            raise ValueError("core is not constant")
        a = self.A[0] if self.A else self.backend.zero()
        b = self.B[0] if self.B else self.backend.zero()
        if self.backend.is_zero(b):
            return INFTY
        return a / b

    def is_indeterminate(self) -> bool:
        """Membership in the indeterminacy locus: constant core equal to a hole."""
        if self.e != 0:
            return False
        c = self.constant_value()
        if c is INFTY:
            return self.h > len(self.H) - 1
        return self.backend.is_zero(cpoly.evaluate(self.H, c, self.backend))

    def is_polynomial_core(self) -> bool:
        """Whether the core's full preimage of infinity is infinity."""
        return self.e >= 1 and len(self.B) == 1 and len(self.A) - 1 == self.e

    def full_forms(self) -> tuple[list, list, int]:
        bk = self.backend
        return cpoly.mul(self.H, self.A, bk), cpoly.mul(self.H, self.B, bk), self.degree

    # --------------------------------------------------------------- eval
    def core_value(self, z: Any):
        """Value of the core at z (INFTY allowed on both sides)."""
        bk = self.backend
        if self.e == 0:
            return self.constant_value()
        if z is INFTY:
            da, db = len(self.A) - 1, len(self.B) - 1
            if da == self.e and db == self.e:
                return self.A[-1] / self.B[-1]
            if da == self.e:
                return INFTY
            return bk.zero()
        bk, A, B = self._forms_for(z)
        a = cpoly.evaluate(A, z, bk)
        b = cpoly.evaluate(B, z, bk)
        if bk.is_zero(b):
            return INFTY
        return a / b

    def _forms_for(self, z: Any) -> tuple[Backend, list, list]:
        """Backend and core forms able to take the point z: an exact core
        evaluated at a float label is lifted to the 256-bit backend."""
        if z is not INFTY and self.backend.is_exact and not isinstance(z, Gaussian):
            return FLOAT256, [FLOAT256.coerce(c) for c in self.A], [FLOAT256.coerce(c) for c in self.B]
        return self.backend, self.A, self.B

    def core_local_degree(self, z: Any) -> int:
        """Local degree of the core at z."""
        if self.e == 0:
            return 0
        w = self.core_value(z)
        bk, A, B = self._forms_for(w if z is INFTY else z)
        if w is INFTY:
            P = B
        else:
            P = cpoly.sub(A, cpoly.scale(B, w, bk), bk)
        if z is INFTY:
            return self.e - (len(cpoly.trim(P, bk)) - 1)
        return cpoly.multiplicity_at(P, z, bk)

    def core_preimages(self, w: Any) -> list[tuple[Any, int]]:
        bk, A, B = self._forms_for(w)
        P = B if w is INFTY else cpoly.sub(A, cpoly.scale(B, w, bk), bk)
        return cpoly.form_roots(P, self.e, bk)

    def multiplier(self, z: Any):
        """Derivative of the core at a finite fixed point z."""
        bk, A, B = self._forms_for(z)
        dA, dB = cpoly.derivative(A, bk), cpoly.derivative(B, bk)
        a, b = cpoly.evaluate(A, z, bk), cpoly.evaluate(B, z, bk)
        da, db = cpoly.evaluate(dA, z, bk), cpoly.evaluate(dB, z, bk)
        return (da * b - a * db) / (b * b)

    # ------------------------------------------------------------ algebra
    def iterate(self, n: int) -> "ReducedMap":
        """n-th iterate via prod_k (H o core^k)^(d^(n-k-1)) * core^n."""
        if self.is_indeterminate():
            raise Indeterminate("iterate of a map in the indeterminacy locus")
        bk = self.backend
        d = self.degree
        Ak, Bk, ek = [bk.zero(), bk.one()], [bk.one()], 1
        Htot, htot = [bk.one()], 0
        for k in range(n):
            Hk = _compose_form(self.H, self.h, Ak, Bk, ek, bk)
            hk = self.h * ek
            for _ in range(d ** (n - k - 1)):
                Htot = cpoly.mul(Htot, Hk, bk)
            htot += hk * d ** (n - k - 1)
            Ak, Bk = (_compose_form(self.A, self.e, Ak, Bk, ek, bk),
                      _compose_form(self.B, self.e, Ak, Bk, ek, bk))
            ek = ek * self.e
        lc = Htot[-1]
        Htot = [c / lc for c in Htot]
        Ak = [c * lc for c in Ak]
        Bk = [c * lc for c in Bk]
        # the core of the iterate can have fresh common factors only if e = 0
        return ReducedMap(Htot, htot, Ak, Bk, ek, bk)

    def compose_core(self, other: "ReducedMap") -> "ReducedMap":
        """Core of self o other (holes discarded)."""
        bk = self.backend
        A = _compose_form(self.A, self.e, other.A, other.B, other.e, bk)
        B = _compose_form(self.B, self.e, other.A, other.B, other.e, bk)
        return ReducedMap.from_forms(A, B, self.e * other.e, bk)

    def __eq__(self, o):
        if not isinstance(o, ReducedMap):
            return NotImplemented
        bk = self.backend.join(o.backend)
        if self.h != o.h or self.e != o.e:
            return False
        H1 = [bk.coerce(c) for c in self.H]
        H2 = [bk.coerce(c) for c in o.H]
        if len(cpoly.trim(cpoly.sub(H1, H2, bk), bk)) != 0:
            return False
        A1, B1 = [bk.coerce(c) for c in self.A], [bk.coerce(c) for c in self.B]
        A2, B2 = [bk.coerce(c) for c in o.A], [bk.coerce(c) for c in o.B]
        return not cpoly.sub(cpoly.mul(A1, B2, bk), cpoly.mul(A2, B1, bk), bk)

    __hash__ = None

    def holes_text(self) -> str:
        """The common factor as a product of linear forms."""
        bk = self.backend
        if self.h == 0:
            return ""
        rts = self.holes()
        if not all(r is INFTY or isinstance(r, Gaussian) for r, _ in rts):
            return "(" + _hom_poly_str(self.H, self.h, bk) + ")"
        parts = []
        for r, m in sorted(rts, key=lambda rm: (rm[0] is INFTY, str(rm[0]))):
            if r is INFTY:
                f = "Y"
            elif not r:
                f = "X"
            else:
                f = "(" + _hom_poly_str([-r, Gaussian(1)], 1, bk) + ")"
            parts.append(f + (f"^{m}" if m > 1 else ""))
        return "".join(parts)

    def to_text(self) -> str:
        bk = self.backend
        Hs = self.holes_text()
        core = f"[{_hom_poly_str(self.A, self.e, bk)}:{_hom_poly_str(self.B, self.e, bk)}]"
        return (Hs if Hs != "1" else "") + core

    def __repr__(self):
        return f"ReducedMap({self.to_text()})"


def _compose_form(P: Sequence, n: int, A: Sequence, B: Sequence, e: int, bk: Backend) -> list:
    """P(A, B) for a form P of degree n and forms A, B of degree e (dehomogenised)."""
    out: list = []
    if not P:
        return out
    Apow = [[bk.one()]]
    Bpow = [[bk.one()]]
    for _ in range(n):
        Apow.append(cpoly.mul(Apow[-1], A, bk))
        Bpow.append(cpoly.mul(Bpow[-1], B, bk))
    for i, c in enumerate(P):
        if bk.is_zero(c):
            continue
        out = cpoly.add(out, cpoly.scale(cpoly.mul(Apow[i], Bpow[n - i], bk), c, bk), bk)
    return out


def newton_from_roots_C(roots: Sequence[Any], d: int | None = None, backend: Backend = EXACT) -> ReducedMap:
    """Degenerate Newton map over C of a multiset of roots in P^1 (INFTY allowed).

    With m copies of infinity and P the monic polynomial of the finite
    roots, the map is Y^m * [zP' - P : P'] of formal degree d.
    """
    bk = backend
    d = len(roots) if d is None else d
    if d != len(roots):
        raise InputError("ambient degree must equal the number of roots")
    P = [bk.one()]
    for r in roots:
        if r is INFTY:
            continue
        P = cpoly.mul(P, [-bk.coerce(r), bk.one()], bk)
    dP = cpoly.derivative(P, bk)
    num = cpoly.sub(cpoly.mul([bk.zero(), bk.one()], dP, bk), P, bk)
    return ReducedMap.from_forms(num, dP, d, bk)


# ==========================================================================
# maps over the Puiseux field


def _spoly(coeffs: Sequence[Any], bk: Backend) -> list:
    return [c.with_backend(bk) if isinstance(c, PuiseuxSeries) else PuiseuxSeries.constant(c, bk) for c in coeffs]


def _lp(c: Sequence[PuiseuxSeries], bk: Backend) -> LPolynomial:
    return LPolynomial(list(c), bk)


def _pad(c: Sequence[PuiseuxSeries], n: int, bk: Backend) -> list:
    c = list(c)[: n + 1]
    while len(c) < n + 1:
        c.append(PuiseuxSeries.zero(bk))
    return c


class LRationalMap:
    """Degree ``d`` rational map over the Puiseux field as a homogeneous pair."""

    def __init__(self, num: Sequence[Any], den: Sequence[Any], degree: int, backend: Backend | None = None):
        bk = backend or EXACT
        for c in list(num) + list(den):
            if isinstance(c, PuiseuxSeries):
                bk = bk.join(c.backend)
        self.backend = bk
        self.d = degree
        self.num = _pad(_spoly(num, bk), degree, bk)
        self.den = _pad(_spoly(den, bk), degree, bk)
        if len(num) > degree + 1 or len(den) > degree + 1:
            extra = [c for c in list(num)[degree + 1:] + list(den)[degree + 1:]
                     if isinstance(c, PuiseuxSeries) and not c.is_known_zero()]
            if extra:
                raise InputError("coefficient list longer than the degree")

    # ------------------------------------------------------------ basics
    @property
    def degree(self) -> int:
        return self.d

    def coefficients(self) -> list[PuiseuxSeries]:
        return self.num + self.den

    def min_valuation(self):
        vals = []
        for c in self.coefficients():
            if c.terms:
                vals.append(c.valuation())
        if not vals:
            raise PrecisionExhausted("all coefficients undetermined")
        m = min(vals)
        for c in self.coefficients():
            if not c.terms and c.trunc is not None and c.trunc_exponent <= m:
                raise PrecisionExhausted("minimum coefficient valuation undecidable")
        return m

    def normalized(self) -> "LRationalMap":
        m = self.min_valuation()
        if m == 0:
            return self
        return LRationalMap([c.shift(-m) for c in self.num], [c.shift(-m) for c in self.den], self.d, self.backend)

    def reduce(self) -> ReducedMap:
        """Reduction of the normalised pair."""
        n = self.normalized()
        bk = self.backend
        F = [c.coeff_at(0) for c in n.num]
        G = [c.coeff_at(0) for c in n.den]
        return ReducedMap.from_forms(F, G, self.d, bk)

    def truncate(self, q: Any) -> "LRationalMap":
        return LRationalMap([c.truncate(q) for c in self.num], [c.truncate(q) for c in self.den], self.d, self.backend)

    def with_backend(self, bk: Backend) -> "LRationalMap":
        return LRationalMap([c.with_backend(bk) for c in self.num], [c.with_backend(bk) for c in self.den], self.d, bk)

    def num_poly(self) -> LPolynomial:
        return _lp(self.num, self.backend)

    def den_poly(self) -> LPolynomial:
        return _lp(self.den, self.backend)

    # ---------------------------------------------------------- algebra
    def substitute(self, a: Any, b: Any, c: Any, dd: Any) -> tuple[list, list]:
        """Coefficients of F(aX+bY, cX+dY) and G(aX+bY, cX+dY)."""
        bk = self.backend
        a, b, c, dd = (series(x, bk) for x in (a, b, c, dd))
        lin1 = LPolynomial([b, a], bk)
        lin2 = LPolynomial([dd, c], bk)
        p1 = [LPolynomial([PuiseuxSeries.constant(1, bk)], bk)]
        p2 = [LPolynomial([PuiseuxSeries.constant(1, bk)], bk)]
        affine = c.is_known_zero() and dd == PuiseuxSeries.constant(1, bk)
        for _ in range(self.d):
            p1.append(p1[-1] * lin1)
            if not affine:
                p2.append(p2[-1] * lin2)
        outs = []
        for coeffs in (self.num, self.den):
            acc = LPolynomial([], bk)
            for i, k in enumerate(coeffs):
                if k.is_known_zero():
                    continue
                term = p1[i] if affine else p1[i] * p2[self.d - i]
                acc = acc + term * k
            outs.append(_pad(acc.coeffs, self.d, bk))
        return outs[0], outs[1]

    def conjugate(self, frame: "MoebiusFrame") -> "LRationalMap":
        """frame^-1 o self o frame."""
        a, b, c, dd = frame.a, frame.b, frame.c, frame.d
        bk = self.backend.join(frame.backend)
        src = self if bk == self.backend else self.with_backend(bk)
        F1, G1 = src.substitute(a, b, c, dd)
        # adjugate [[d, -b], [-c, a]] applied to the output
        Fp = LPolynomial(F1, bk)
        Gp = LPolynomial(G1, bk)
        num = Fp * dd - Gp * b if not b.is_known_zero() else Fp * dd
        den = Gp * a - Fp * c if not c.is_known_zero() else Gp * a
        return LRationalMap(num.coeffs, den.coeffs, self.d, bk)

    def compose(self, other: "LRationalMap") -> "LRationalMap":
        """self o other."""
        bk = self.backend.join(other.backend)
        F2, G2 = other.num_poly(), other.den_poly()
        pf = [LPolynomial([PuiseuxSeries.constant(1, bk)], bk)]
        pg = [LPolynomial([PuiseuxSeries.constant(1, bk)], bk)]
        for _ in range(self.d):
            pf.append(pf[-1] * F2)
            pg.append(pg[-1] * G2)
        outs = []
        for coeffs in (self.num, self.den):
            acc = LPolynomial([], bk)
            for i, k in enumerate(coeffs):
                if k.is_known_zero():
                    continue
                acc = acc + (pf[i] * pg[self.d - i]) * k
            outs.append(acc.coeffs)
        D = self.d * other.d
        return LRationalMap(outs[0], outs[1], D, bk)

    def iterate(self, n: int) -> "LRationalMap":
        out = self
        for _ in range(n - 1):
            out = self.compose(out)
        return out

    def framed(self, point: BerkPoint) -> tuple[list, list]:
        """Coefficients of F(a + t^q w), G(a + t^q w) for point = xi_{a,q}."""
        a, q = point.center, point.radius_val
        return self.substitute(PuiseuxSeries.monomial(1, q, self.backend), a, 0, 1)

    # ----------------------------------------------------------- values
    def evaluate(self, x: Any) -> tuple[PuiseuxSeries, PuiseuxSeries]:
        """(F(x), G(x)) for a finite type I point x."""
        x = series(x, self.backend)
        return self.num_poly()(x), self.den_poly()(x)

    def image_of_type_one(self, x: Any, order: Any) -> Any:
        """phi(x) correct below t**order (INFTY for poles and phi(inf) = inf)."""
        if x is INFTY or (isinstance(x, BerkPoint) and x.is_infinity):
            Fd, Gd = self.num[-1], self.den[-1]
            if Gd.is_known_zero():
                return INFTY
            return Fd.div(Gd, order)
        if isinstance(x, BerkPoint):
            x = x.center
        f, g = self.evaluate(x)
        if g.is_known_zero():
            return INFTY
        if not g.terms:
            raise PrecisionExhausted("denominator undetermined at this truncation")
        return f.div(g, order)

    def push_forward(self, xi: Any, validate: bool = False) -> BerkPoint:
        return push_forward(self, xi, validate=validate)

    def __repr__(self):
        return f"LRationalMap(d={self.d}, num={self.num}, den={self.den})"


@dataclass(frozen=True)
class MoebiusFrame:
    """Moebius transformation z -> (a z + b) / (c z + d) over the Puiseux field."""

    a: PuiseuxSeries
    b: PuiseuxSeries
    c: PuiseuxSeries
    d: PuiseuxSeries

    @staticmethod
    def affine(scale: Any, center: Any, backend: Backend = EXACT) -> "MoebiusFrame":
        s, c = series(scale, backend), series(center, backend)
        bk = s.backend.join(c.backend)
        return MoebiusFrame(s.with_backend(bk), c.with_backend(bk), PuiseuxSeries.zero(bk),
                            PuiseuxSeries.constant(1, bk))

    @staticmethod
    def for_point(point: BerkPoint) -> "MoebiusFrame":
        """Affine frame w -> a + t^q w sending the Gauss point to xi_{a,q}."""
        bk = point.center.backend
        return MoebiusFrame.affine(PuiseuxSeries.monomial(1, point.radius_val, bk), point.center, bk)

    @property
    def backend(self) -> Backend:
        return self.a.backend.join(self.b.backend).join(self.c.backend).join(self.d.backend)

    @property
    def is_affine(self) -> bool:
        return self.c.is_known_zero()

    def determinant(self) -> PuiseuxSeries:
        return self.a * self.d - self.b * self.c

    def as_map(self) -> LRationalMap:
        return LRationalMap([self.b, self.a], [self.d, self.c], 1, self.backend)

    def image_of_gauss(self) -> BerkPoint:
        if not self.is_affine:
            return push_forward(self.as_map(), gauss_point())
        q = self.a.valuation() - self.d.valuation()
        return BerkPoint.disk(self.b.div(self.d, q), q)


# ==========================================================================
# Newton maps


class NewtonFamily:
    """Newton map of the monic polynomial with the given (distinct) roots."""

    def __init__(self, roots: Sequence[Any], backend: Backend | None = None):
        rs = [series(r, backend or EXACT) for r in roots]
        bk = backend or EXACT
        for r in rs:
            bk = bk.join(r.backend)
        self.backend = bk
        self.roots = [r.with_backend(bk) for r in rs]
        self.d = len(self.roots)
        if self.d < 2:
            raise InputError("a Newton family needs at least two roots")
        for i in range(self.d):
            for j in range(i + 1, self.d):
                diff = self.roots[i] - self.roots[j]
                if not diff.terms:
                    raise DegenerateOverL("roots coincide at the working truncation")
        self._map = None
        self._P = None

    def sigma(self, k: int) -> PuiseuxSeries:
        """Elementary symmetric function of degree k of the roots."""
        e = [PuiseuxSeries.constant(1, self.backend)] + [PuiseuxSeries.zero(self.backend)] * self.d
        for r in self.roots:
            for j in range(self.d, 0, -1):
                e[j] = e[j] + e[j - 1] * r
        return e[k]

    @property
    def polynomial(self) -> LPolynomial:
        if self._P is None:
            self._P = LPolynomial.from_roots(self.roots, self.backend)
        return self._P

    @property
    def map(self) -> LRationalMap:
        if self._map is None:
            self._map = newton_from_roots_L(self.roots, self.backend)
        return self._map

    def reduced_limit(self) -> ReducedMap:
        return self.map.reduce()


def newton_from_roots_L(roots: Sequence[PuiseuxSeries], backend: Backend | None = None) -> LRationalMap:
    """Newton map [zP' - P : P'] over the Puiseux field."""
    bk = backend or EXACT
    for r in roots:
        bk = bk.join(series(r).backend)
    P = LPolynomial.from_roots([series(r, bk) for r in roots], bk)
    dP = P.derivative()
    z = LPolynomial([PuiseuxSeries.zero(bk), PuiseuxSeries.constant(1, bk)], bk)
    num = z * dP - P
    return LRationalMap(num.coeffs, dP.coeffs, len(roots), bk)


def newton_from_roots(roots: Sequence[Any], d: int | None = None, backend: Backend | None = None):
    """Newton map of a root multiset: over C when every root is a number or
    INFTY (degenerate maps allowed), over the Puiseux field when the roots
    are series (distinct roots required)."""
    if any(isinstance(r, PuiseuxSeries) for r in roots):
        fam = NewtonFamily(roots, backend)
        if d is not None and d != fam.d:
            raise InputError("ambient degree must equal the number of roots")
        return fam.map
    return newton_from_roots_C(roots, d, backend or EXACT)


def subalgebraic_limit(family: Any) -> tuple[ReducedMap, bool]:
    """Reduction of a family (NewtonFamily, LRationalMap or root list) and
    whether the limit lies in the indeterminacy locus."""
    if isinstance(family, NewtonFamily):
        m = family.map
    elif isinstance(family, LRationalMap):
        m = family
    else:
        m = NewtonFamily(list(family)).map
    red = m.reduce()
    return red, red.is_indeterminate()


# ==========================================================================
# push-forward


def _fg_val(c: PuiseuxSeries):
    if c.terms:
        return c.valuation()
    if c.trunc is None:
        return INF
    raise PrecisionExhausted("coefficient valuation undecidable")


def push_forward(phi: LRationalMap, xi: Any, validate: bool = False, sampler: "GenericSampler | None" = None) -> BerkPoint:
    """Image of a point under phi.

    For a type II point the image is the Chebyshev center of the framed
    pair (F, G): the image disk has radius valuation
    max_c min_i v(F_i - c G_i) - min_i v(G_i), computed exactly from the
    pairwise quantities v(F_i G_j - F_j G_i) - min(v G_i, v G_j).
    """
    xi = as_point(xi)
    if xi.is_infinity:
        v = phi.image_of_type_one(INFTY, 0) if not phi.den[-1].is_known_zero() else INFTY
        if v is INFTY:
            return INF_POINT
        raise ValueError("use image_of_type_one with an explicit order for type I images")
    if xi.kind == "I":
        raise ValueError("use image_of_type_one with an explicit order for type I images")
    F, G = phi.framed(xi)
    n = len(F)
    gv = [_fg_val(G[i]) for i in range(n)]
    g0 = min(gv)
    if g0 == INF:
        raise InputError("denominator vanishes identically")
    T = INF
    for i in range(n):
        for j in range(i + 1, n):
            if gv[i] == INF and gv[j] == INF:
                continue
            w = F[i] * G[j] - F[j] * G[i]
            wv = _fg_val(w)
            if wv == INF:
                continue
            T = min(T, wv - min(gv[i], gv[j]))
    # single-index constraints: v(F_i) where G_i = 0 (already covered when n > 1)
    if n == 1 and gv[0] == INF:
        T = min(T, _fg_val(F[0]))
    if T == INF:
        raise InputError("constant map has no push-forward of type II points")
    s = T - g0
    istar = min(i for i in range(n) if gv[i] == g0)
    vF = F[istar].valuation_lower_bound()
    center = F[istar].div(G[istar], s) if vF != INF else PuiseuxSeries.zero(phi.backend)
    out = BerkPoint.disk(center, s)
    if validate:
        validate_push_forward(phi, xi, out, sampler)
    return out


class GenericSampler:
    """Deterministic stream of small Gaussian integers used as generic labels."""

    def __init__(self, seed: int = 0, radius: int = 6):
        self.seed = seed
        self.radius = radius
        self._rng = random.Random(seed)
        self._pool: list = []
        self._refill()

    def _refill(self):
        R = self.radius
        pool = [(a, b) for a in range(-R, R + 1) for b in range(-R, R + 1) if (a, b) != (0, 0)]
        pool.sort(key=lambda ab: (ab[0] ** 2 + ab[1] ** 2, ab))
        self._rng.shuffle(pool)
        self._pool = pool
        self.radius += 4

    def labels(self, count: int, exclude: Callable[[Gaussian], bool] = lambda g: False) -> list[Gaussian]:
        out: list[Gaussian] = []
        seen = set()
        while len(out) < count:
            if not self._pool:
                self._refill()
            a, b = self._pool.pop()
            if (a, b) in seen:
                continue
            seen.add((a, b))
            g = Gaussian(a, b)
            if not exclude(g):
                out.append(g)
        return out

    def label(self, exclude: Callable[[Gaussian], bool] = lambda g: False) -> Gaussian:
        return self.labels(1, exclude)[0]


def _reduced_poly(coeffs: Sequence[PuiseuxSeries], bk: Backend) -> list:
    vals = [c.valuation() for c in coeffs if c.terms]
    if not vals:
        return []
    m = min(vals)
    return cpoly.trim([c.shift(-m).coeff_at(0) if c.valuation_lower_bound() - m <= 0 else bk.zero()
                       for c in coeffs], bk)


def bad_labels_at(phi: LRationalMap, xi: BerkPoint) -> tuple[list, list]:
    """Residue polynomials at xi whose roots are the pole and critical labels."""
    bk = phi.backend
    F, G = phi.framed(xi)
    Fp, Gp = LPolynomial(F, bk), LPolynomial(G, bk)
    W = Fp.derivative() * Gp - Fp * Gp.derivative()
    return _reduced_poly(G, bk), _reduced_poly(list(W.coeffs), bk)


def validate_push_forward(phi: LRationalMap, xi: BerkPoint, image: BerkPoint,
                          sampler: "GenericSampler | None" = None) -> None:
    """Sampling oracle: generic type I points of xi must map into the closed
    disk of ``image`` and their images must span exactly ``image``."""
    bk = phi.backend
    sampler = sampler or GenericSampler(12345)
    gbar, wbar = bad_labels_at(phi, xi)

    def bad(u):
        uu = bk.coerce(u)
        return (bool(gbar) and bk.is_zero(cpoly.evaluate(gbar, uu, bk))) or \
               (bool(wbar) and bk.is_zero(cpoly.evaluate(wbar, uu, bk)))

    labels = sampler.labels(3 * phi.d + 5, bad)
    a, q = xi.center, xi.radius_val
    b, s = image.center, image.radius_val
    pairs = []
    for u in labels:
        x = a + PuiseuxSeries.monomial(u, q, bk)
        f, g = phi.evaluate(x)
        vg = _fg_val(g)
        diff = f - g * b
        vd = _fg_val(diff)
        if vd - vg < s:
            raise ValidationFailed(f"image of a generic point leaves the computed disk at label {u}")
        pairs.append((f, g, vg))
    worst = INF
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            f1, g1, v1 = pairs[i]
            f2, g2, v2 = pairs[j]
            w = _fg_val(f1 * g2 - f2 * g1) - v1 - v2
            worst = min(worst, w)
    if worst != s:
        raise ValidationFailed(f"images of generic points span radius {worst}, expected {s}")


def push_forward_by_sampling(phi: LRationalMap, xi: BerkPoint, sampler: "GenericSampler | None" = None) -> BerkPoint:
    """Independent oracle: join of the images of generic type I points."""
    bk = phi.backend
    sampler = sampler or GenericSampler(777)
    gbar, wbar = bad_labels_at(phi, xi)

    def bad(u):
        uu = bk.coerce(u)
        return (bool(gbar) and bk.is_zero(cpoly.evaluate(gbar, uu, bk))) or \
               (bool(wbar) and bk.is_zero(cpoly.evaluate(wbar, uu, bk)))

    labels = sampler.labels(3 * phi.d + 5, bad)
    a, q = xi.center, xi.radius_val
    imgs = []
    for u in labels:
        x = a + PuiseuxSeries.monomial(u, q, bk)
        f, g = phi.evaluate(x)
        imgs.append((f, g, _fg_val(g)))
    worst = INF
    for i in range(len(imgs)):
        for j in range(i + 1, len(imgs)):
            f1, g1, v1 = imgs[i]
            f2, g2, v2 = imgs[j]
            worst = min(worst, _fg_val(f1 * g2 - f2 * g1) - v1 - v2)
    f, g, _ = imgs[0]
    c = f.div(g, worst)
    return BerkPoint.disk(c, worst)


# ==========================================================================
# reduction at a point


@dataclass
class LocalReduction:
    """Reduction of phi between the frames of xi and of its image."""

    source: BerkPoint
    target: BerkPoint
    reduced: ReducedMap

    @property
    def local_degree(self) -> int:
        return self.reduced.core_degree

    def image_direction(self, label: Any):
        return self.reduced.core_value(label)

    def multiplicity(self, label: Any) -> int:
        return self.reduced.core_local_degree(label)


def conjugating_pair(phi: LRationalMap, src: BerkPoint, dst: BerkPoint) -> LRationalMap:
    """M_dst^-1 o phi o M_src for the affine frames of two type II points."""
    F1, G1 = phi.framed(src)
    bk = phi.backend.join(src.center.backend).join(dst.center.backend)
    b, s = dst.center.with_backend(bk), dst.radius_val
    Fp, Gp = LPolynomial(F1, bk), LPolynomial(G1, bk)
    num = Fp - Gp * b if not b.is_known_zero() else Fp
    den = Gp * PuiseuxSeries.monomial(1, s, bk)
    return LRationalMap(num.coeffs, den.coeffs, phi.d, bk)


def reduction_at(phi: LRationalMap, xi: BerkPoint) -> LocalReduction:
    """Red(M_2^-1 o phi o M_1) with M_1(xi_g) = xi and M_2(xi_g) = phi(xi)."""
    img = push_forward(phi, xi)
    psi = conjugating_pair(phi, xi, img)
    return LocalReduction(xi, img, psi.reduce())


# ==========================================================================
# fibres and preimage counts


def fiber_polynomial(phi: LRationalMap, y: Any) -> LPolynomial:
    """F - y G (or G when y is infinity), as a polynomial of formal degree d."""
    bk = phi.backend
    if y is INFTY or (isinstance(y, BerkPoint) and y.is_infinity):
        return phi.den_poly()
    if isinstance(y, BerkPoint):
        y = y.center
    y = series(y, bk)
    return phi.num_poly() - phi.den_poly() * y


@dataclass(frozen=True)
class Region:
    """A connected open subset of the line cut out by finitely many type II points.

    ``top`` is ``(point, label)`` when the region is the open direction ball
    minus the closed disks of ``holes``, and ``None`` when the region
    contains infinity (then it is the complement of the closed disks).
    """

    top: tuple | None
    holes: tuple = ()

    @staticmethod
    def ball(point: BerkPoint, label: Any) -> "Region":
        if label is INFTY:
            return Region(None, (point,))
        return Region((point, label), ())

    @staticmethod
    def annulus(outer: BerkPoint, inner: BerkPoint) -> "Region":
        lab = direction_of(outer, inner)
        return Region((outer, lab), (inner,))


def _closed_count(h: LPolynomial, p: BerkPoint) -> int:
    return count_roots_in_disk(h, p.center, p.radius_val, closed=True)


def preimage_count_in_region(phi: LRationalMap, target: Any, region: Region) -> int:
    """Number of preimages (with multiplicity) of a type I target in region."""
    h = fiber_polynomial(phi, target)
    d = phi.d
    if region.top is None:
        total = d
    else:
        p, lab = region.top
        bk = h.backend.join(p.center.backend)
        if not isinstance(lab, Gaussian):
            bk = bk.join(FLOAT256)
        c = p.center.with_backend(bk) + PuiseuxSeries.monomial(lab, p.radius_val, bk)
        total = count_roots_in_disk(h.with_backend(bk), c, p.radius_val, closed=False)
    for hole in region.holes:
        total -= _closed_count(h, hole)
    return total


def direction_counts(phi: LRationalMap, y: Any, xi: BerkPoint) -> list[tuple[Any, int]]:
    """Labels at xi of the preimages of the type I point y, with multiplicity.

    These are the roots on P^1 of the reduction of (F - yG)(a + t^q w).
    """
    h = fiber_polynomial(phi, y)
    bk = h.backend.join(xi.center.backend)
    tmp = LRationalMap(h.coeffs, [PuiseuxSeries.zero(bk)], phi.d, bk)
    H, _ = tmp.framed(xi)
    red = _reduced_poly(H, bk)
    return cpoly.form_roots(red, phi.d, bk)
