"""Points of the Berkovich projective line over the Puiseux field and the
tree structure between them.

Type II points are disks ``xi_{a,q}`` = closed disk of center ``a`` and
radius ``e^-q``; ``q`` is called the radius valuation.  The tree is
viewed as rooted at the point ``INF_POINT`` (the type I point infinity):
the join of two finite points is the smallest disk containing both, and
the unique path between two points runs through their join.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable

from .coefficients import INFTY, fmt_rational
from .errors import InputError, PrecisionExhausted, TypeIInput
from .puiseux_core import INF, PuiseuxSeries, series

NEG_INF = -math.inf


def _exact_below(a: PuiseuxSeries, q) -> PuiseuxSeries:
    """Exact partial sum of the terms of ``a`` with exponent < q."""
    if a.trunc_exponent < q:
        raise PrecisionExhausted("center is not known up to the radius")
    if a.trunc is None and (not a.terms or Fraction(a.terms[-1][0], a.ram) < q):
        return a
    keep = [(n, c) for n, c in a.terms if Fraction(n, a.ram) < q]
    return PuiseuxSeries(keep, a.ram, None, a.backend, _clean=True).simplify_ram()


class BerkPoint:
    """A point of type I (finite or infinity) or of type II."""

    __slots__ = ("kind", "center", "radius_val", "_key")

    def __init__(self, kind: str, center: PuiseuxSeries | None, radius_val):
        self.kind = kind
        self.center = center
        self.radius_val = radius_val
        if kind == "II":
            self._key = ("II", radius_val, center.terms, center.ram)
        elif kind == "I":
            self._key = ("I", center.terms, center.ram, center.trunc)
        else:
            self._key = ("inf",)

    # constructors ---------------------------------------------------------
    @staticmethod
    def disk(center: Any, radius_val: Any) -> "BerkPoint":
        q = Fraction(radius_val)
        c = series(center)
        return BerkPoint("II", _exact_below(c, q), q)

    @staticmethod
    def type_one(value: Any) -> "BerkPoint":
        if value is INFTY:
            return INF_POINT
        return BerkPoint("I", series(value), INF)

    # predicates -------------------------------------------------------------
    @property
    def is_infinity(self) -> bool:
        return self.kind == "inf"

    @property
    def is_type_one(self) -> bool:
        return self.kind in ("I", "inf")

    @property
    def is_type_two(self) -> bool:
        return self.kind == "II"

    def tree_height(self):
        """Radius valuation, with +inf for finite type I and -inf for infinity."""
        if self.kind == "inf":
            return NEG_INF
        return self.radius_val

    def __eq__(self, o):
        if not isinstance(o, BerkPoint):
            return NotImplemented
        if self.kind != o.kind:
            return False
        if self.kind == "inf":
            return True
        if self.kind == "II":
            if self.radius_val != o.radius_val:
                return False
            return _diff_geq(self.center, o.center, self.radius_val)
        return _diff_geq(self.center, o.center, INF)

    def __hash__(self):
        if self.kind == "II":
            return hash(("II", self.radius_val, len(self.center.terms)))
        return hash(self.kind)

    def __repr__(self):
        if self.kind == "inf":
            return "inf"
        if self.kind == "I":
            return f"<{self.center!r}>"
        return f"xi({self.center!r}, {fmt_rational(self.radius_val)})"

    def label(self) -> str:
        """Short textual label (center, radius valuation)."""
        if self.kind == "inf":
            return "inf"
        if self.kind == "I":
            return repr(self.center)
        return f"({self.center!r}, {fmt_rational(self.radius_val)})"


INF_POINT = BerkPoint("inf", None, NEG_INF)


def gauss_point() -> BerkPoint:
    return BerkPoint.disk(0, 0)


def as_point(x: Any) -> BerkPoint:
    if isinstance(x, BerkPoint):
        return x
    return BerkPoint.type_one(x)


def _diff_valuation_capped(a: PuiseuxSeries, b: PuiseuxSeries, cap):
    """min(v(a - b), cap); raises when the truncation hides the answer."""
    d = a - b
    if d.terms:
        v = Fraction(d.terms[0][0], d.ram)
        return v if v < cap else cap
    if d.trunc_exponent >= cap:
        return cap
    raise PrecisionExhausted("distance between centers is undecidable at this truncation")


def _diff_geq(a: PuiseuxSeries, b: PuiseuxSeries, q) -> bool:
    return _diff_valuation_capped(a, b, q) >= q


# ---------------------------------------------------------------- order ----


def join(x: Any, y: Any) -> BerkPoint:
    """Least upper bound of two points (infinity absorbs everything)."""
    x, y = as_point(x), as_point(y)
    if x.is_infinity or y.is_infinity:
        return INF_POINT
    cap = min(x.radius_val, y.radius_val)
    r = _diff_valuation_capped(x.center, y.center, cap)
    if r == INF:
        return x
    if x.kind == "II" and r == x.radius_val:
        return x
    if y.kind == "II" and r == y.radius_val:
        return y
    return BerkPoint("II", _exact_below(x.center, r), r)


def join_all(points: Iterable[Any]) -> BerkPoint:
    it = iter(points)
    acc = as_point(next(it))
    for p in it:
        acc = join(acc, p)
    return acc


def leq(x: Any, y: Any) -> bool:
    """x <= y in the disk-containment order (y is on the path from x to infinity)."""
    x, y = as_point(x), as_point(y)
    if y.is_infinity:
        return True
    if x.is_infinity:
        return False
    if y.radius_val > x.radius_val:
        return False
    return _diff_geq(x.center, y.center, y.radius_val)


def median(x: Any, a: Any, b: Any) -> BerkPoint:
    """The unique point common to the three geodesics [x,a], [a,b], [x,b]."""
    x, a, b = as_point(x), as_point(a), as_point(b)
    if x.is_infinity:
        return join(a, b)
    if a.is_infinity:
        return join(x, b)
    if b.is_infinity:
        return join(x, a)
    cands = [join(x, a), join(a, b), join(x, b)]
    return max(cands, key=lambda p: p.tree_height())


def in_segment(x: Any, a: Any, b: Any) -> bool:
    """Whether x lies on the closed segment [a, b]."""
    return median(x, a, b) == as_point(x)


def path_distance(x: Any, y: Any) -> Fraction:
    """Hyperbolic distance rho between two type II points (exact)."""
    x, y = as_point(x), as_point(y)
    if x.is_type_one or y.is_type_one:
        raise TypeIInput("path distance is defined on hyperbolic points only")
    j = join(x, y)
    return (x.radius_val - j.radius_val) + (y.radius_val - j.radius_val)


def small_metric(x: Any, y: Any) -> list[tuple[int, Fraction | float]]:
    """d(x,y) = 2 diam(x v y) - diam x - diam y as signed exponent terms.

    Each entry ``(k, q)`` stands for ``k * e^-q``; the list is combined so
    that no exponent repeats.  Type I points contribute nothing (diameter 0).
    """
    x, y = as_point(x), as_point(y)
    j = join(x, y)
    acc: dict = {}
    for k, p in ((2, j), (-1, x), (-1, y)):
        if p.is_infinity:
            raise TypeIInput("small metric is not defined at infinity")
        if p.kind == "I":
            continue
        acc[p.radius_val] = acc.get(p.radius_val, 0) + k
    return sorted(((k, q) for q, k in acc.items() if k), key=lambda kv: kv[1])


def small_metric_value(x: Any, y: Any) -> float:
    return sum(k * math.exp(-float(q)) for k, q in small_metric(x, y))


def segment_point(x: Any, y: Any, s: Any) -> BerkPoint:
    """Point of [x, y] at rho-distance s from the type II point x."""
    x, y = as_point(x), as_point(y)
    s = Fraction(s)
    j = join(x, y)
    up = x.radius_val - j.tree_height() if not j.is_infinity else INF
    if s <= up:
        return BerkPoint.disk(x.center, x.radius_val - s)
    down = s - up
    if y.is_type_two and j.radius_val + down > y.radius_val:
        raise InputError("segment parameter beyond the end point")
    return BerkPoint.disk(y.center, j.radius_val + down)


# ------------------------------------------------------------ directions ---


def direction_of(base: BerkPoint, target: Any):
    """Residue label of the direction at the type II ``base`` containing target.

    The label is the reduction of (target - a)/t^q for ``base = xi_{a,q}``
    when target lies in the closed disk of base, and INFTY otherwise.
    """
    target = as_point(target)
    if not base.is_type_two:
        raise InputError("directions are taken at type II points")
    if target.is_infinity:
        return INFTY
    q = base.radius_val
    tq = target.radius_val
    d = _diff_valuation_capped(target.center, base.center, min(q, tq))
    if d < q:
        return INFTY
    if tq < q:
        return INFTY
    if tq == q:
        raise InputError("target coincides with the base point")
    return (target.center - base.center).coeff_at(q)


def same_direction(base: BerkPoint, x: Any, y: Any) -> bool:
    """Whether x and y lie in the same component of the complement of base."""
    x, y = as_point(x), as_point(y)
    xin = x != base and leq(x, base)
    yin = y != base and leq(y, base)
    if xin and yin:
        return join(x, y) != base
    return not xin and not yin and x != base and y != base


def direction_point(base: BerkPoint, label: Any, depth: Any = 1) -> BerkPoint:
    """A type II point inside the direction ``label`` at base, at distance ``depth``."""
    depth = Fraction(depth)
    a, q = base.center, base.radius_val
    if label is INFTY:
        return BerkPoint.disk(a, q - depth)
    c = a + PuiseuxSeries.monomial(label, q, _label_backend(a, label))
    return BerkPoint.disk(c, q + depth)


def direction_type_one(base: BerkPoint, label: Any, generic: Any, backend=None) -> PuiseuxSeries:
    """A type I point in direction ``label`` at base: a + label t^q + generic t^(q+1),
    or a + generic t^(q-1) for the outward direction."""
    a, q = base.center, base.radius_val
    bk = backend or _label_backend(a, label)
    if label is INFTY:
        return a + PuiseuxSeries.monomial(generic, q - 1, bk)
    return a + PuiseuxSeries.monomial(label, q, bk) + PuiseuxSeries.monomial(generic, q + 1, bk)


def _label_backend(a: PuiseuxSeries, label: Any):
    from .coefficients import FLOAT256, Gaussian
    if isinstance(label, Gaussian) or isinstance(label, int):
        return a.backend
    return a.backend.join(FLOAT256)


# ------------------------------------------------------------------ trees --


@dataclass
class FiniteTree:
    """Finite subtree of the Berkovich line spanned by finitely many points.

    ``edges`` holds index pairs ``(child, parent)`` with their rho-lengths
    (``inf`` for edges ending at a type I point).  Every vertex except the
    top one has exactly one parent; the top vertex is the join of all
    vertices, or ``INF_POINT`` when infinity is a vertex.
    """

    vertices: list = field(default_factory=list)
    edges: list = field(default_factory=list)

    def index(self, p: BerkPoint) -> int:
        for i, v in enumerate(self.vertices):
            if v == p:
                return i
        raise KeyError(p)

    def valence(self, p: BerkPoint) -> int:
        i = self.index(p)
        return sum(1 for a, b, _ in self.edges if a == i or b == i)

    def internal_vertices(self) -> list:
        return [v for v in self.vertices if self.valence(v) >= 2]

    def branch_vertices(self) -> list:
        return [v for v in self.vertices if v.is_type_two and self.valence(v) >= 3]

    def contains(self, x: Any) -> bool:
        x = as_point(x)
        if len(self.vertices) == 1:
            return self.vertices[0] == x
        for a, b, _ in self.edges:
            if in_segment(x, self.vertices[a], self.vertices[b]):
                return True
        return False

    def distance_sum(self) -> Fraction | float:
        return sum(l for _, _, l in self.edges)

    def to_dot(self, name: str = "tree") -> str:
        lines = [f"graph {name} {{"]
        for i, v in enumerate(self.vertices):
            lines.append(f'  v{i} [label="{v.label()}"];')
        for a, b, l in self.edges:
            ltxt = "inf" if l == INF else fmt_rational(l)
            lines.append(f'  v{a} -- v{b} [label="{ltxt}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _dedupe(points: Iterable[BerkPoint]) -> list[BerkPoint]:
    out: list[BerkPoint] = []
    for p in points:
        if not any(p == q for q in out):
            out.append(p)
    return out


def hull(points: Iterable[Any]) -> FiniteTree:
    """Convex hull of finitely many points, with all pairwise joins as vertices."""
    pts = _dedupe(as_point(p) for p in points)
    if not pts:
        raise InputError("hull of the empty set")
    verts = list(pts)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            verts.append(join(pts[i], pts[j]))
    verts = _dedupe(verts)
    # canonical order: by decreasing size (radius valuation), then textual label
    verts.sort(key=lambda p: (p.tree_height(), p.label()))
    edges = []
    for i, v in enumerate(verts):
        if v.is_infinity:
            continue
        best = None
        for j, w in enumerate(verts):
            if j == i or w.tree_height() >= v.tree_height():
                continue
            if leq(v, w) and (best is None or w.tree_height() > verts[best].tree_height()):
                best = j
        if best is not None:
            w = verts[best]
            length = INF if (v.is_type_one or w.is_type_one) else v.radius_val - w.radius_val
            edges.append((i, best, length))
    return FiniteTree(verts, edges)


def visible_point(x: Any, E: FiniteTree) -> BerkPoint:
    """Nearest-point projection of x onto the tree E."""
    x = as_point(x)
    if E.contains(x):
        return x
    if len(E.vertices) == 1:
        return E.vertices[0]
    cands = _dedupe(median(x, E.vertices[a], E.vertices[b]) for a, b, _ in E.edges)
    for m in cands:
        if all(m == o or in_segment(m, x, o) for o in cands):
            return m
    raise PrecisionExhausted("visible point could not be isolated")
