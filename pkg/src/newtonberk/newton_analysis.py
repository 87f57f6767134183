"""Structure of a Newton family on the Berkovich line.

Fixed tree and repelling vertices, critical portrait, period-1 rescalings
and the search for rescalings of higher period.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from . import cpoly
from .berktree import (INF_POINT, BerkPoint, FiniteTree, direction_of, hull, in_segment, join, path_distance, segment_point, visible_point)
from .coefficients import FLOAT256, INFTY, Backend, Gaussian, to_complex
from .errors import (InternalInvariantViolation, PrecisionExhausted)
from .lrat import (LRationalMap, MoebiusFrame, NewtonFamily, ReducedMap, newton_from_roots_C,
                   push_forward, reduction_at)
from .puiseux_core import PuiseuxSeries, puiseux_roots_with_multiplicity

# ==========================================================================
# fixed tree


@dataclass
class FixedTreeReport:
    H_fix: FiniteTree
    H_r: FiniteTree
    H_V: FiniteTree
    H_V_inf: FiniteTree
    V: list
    degrees: list
    good_reduction: bool
    pi_HV_of_infinity: BerkPoint

    def degree_at(self, v: BerkPoint) -> int:
        for w, d in zip(self.V, self.degrees):
            if w == v:
                return d
        raise KeyError(v)


def fixed_tree(family: NewtonFamily) -> FixedTreeReport:
    """Hulls of the roots, the vertex set V and local degrees at V.

    The local degree at v is Val(v) - 1 in the hull of the roots and
    infinity; it is cross-checked against the core degree of the reduction.
    """
    roots = [BerkPoint.type_one(r) for r in family.roots]
    H_fix = hull(roots + [INF_POINT])
    H_r = hull(roots)
    V = H_fix.branch_vertices()
    degrees = []
    N = family.map
    for v in V:
        dv = H_fix.valence(v) - 1
        lr = reduction_at(N, v)
        if not (lr.target == v):
            raise InternalInvariantViolation(f"vertex {v!r} of V is not fixed")
        if lr.local_degree != dv:
            raise InternalInvariantViolation(
                f"local degree at {v!r}: valence rule {dv}, reduction {lr.local_degree}")
        degrees.append(dv)
    H_V = hull(V)
    H_V_inf = hull(V + [INF_POINT])
    pi_inf = visible_point(INF_POINT, H_V)
    return FixedTreeReport(H_fix, H_r, H_V, H_V_inf, V, degrees, len(V) == 1, pi_inf)


# ==========================================================================
# critical portrait


@dataclass
class CriticalPoint:
    value: PuiseuxSeries
    multiplicity: int
    free: bool
    visible: BerkPoint
    label: Any
    totally_free: str = "n/a"


@dataclass
class CriticalPortrait:
    critical_points: list
    H_big: FiniteTree
    H_crit: FiniteTree
    ramification: dict
    counts_ok: bool

    @property
    def free(self) -> list:
        return [c for c in self.critical_points if c.free]


ITER_CONVERGE = 1e-8
ITER_ESCAPE = 1e8
ITER_BUDGET = 10_000
EXACT_STEPS = 8


def _eq_label(a: Any, b: Any, bk: Backend) -> bool:
    if a is INFTY or b is INFTY:
        return a is b
    if isinstance(a, Gaussian) and isinstance(b, Gaussian):
        return a == b
    fb = bk.join(FLOAT256)
    return fb.is_zero(fb.coerce(a) - fb.coerce(b))


def classify_totally_free(core: ReducedMap, label: Any) -> str:
    """Yes when the direction's orbit lands exactly on a hole, No when it
    is captured by an attracting fixed point without landing, Unknown when
    the iteration budget is inconclusive."""
    holes = [h for h, _ in core.holes()]
    bk = core.backend
    z = label
    for _ in range(EXACT_STEPS):
        if any(_eq_label(z, h, bk) for h in holes):
            return "Yes"
        if core.e == 0:
            return "No"
        z = core.core_value(z)
    attracting = []
    for r, _ in cpoly.form_roots(cpoly.sub(core.A, cpoly.mul([0, 1], core.B, bk), bk), core.e + 1, bk):
        if r is INFTY:
            continue
        try:
            m = core.multiplier(r)
        except ZeroDivisionError:
            continue
        if abs(to_complex(m)) < 1:
            attracting.append(complex(to_complex(r)))
    if z is INFTY:
        return "Unknown"
    w = complex(to_complex(z))
    A = [complex(to_complex(c)) for c in core.A]
    B = [complex(to_complex(c)) for c in core.B]
    hole_c = [complex(to_complex(h)) for h in holes if h is not INFTY]
    for _ in range(ITER_BUDGET):
        den = sum(c * w ** i for i, c in enumerate(B))
        if den == 0:
            return "Unknown"
        w = sum(c * w ** i for i, c in enumerate(A)) / den
        if abs(w) > ITER_ESCAPE:
            return "Unknown"
        for a in attracting:
            if abs(w - a) < ITER_CONVERGE:
                if any(abs(a - h) < ITER_CONVERGE for h in hole_c):
                    # converging to a multiple root without landing exactly on it
                    return "No"
                return "No"
    return "Unknown"


def critical_portrait(family: NewtonFamily, tree: FixedTreeReport | None = None,
                      order: Any = None) -> CriticalPortrait:
    tree = tree or fixed_tree(family)
    P = family.polynomial
    P2 = P.derivative().derivative()
    vmin = min([v.radius_val for v in tree.V] + [r.valuation() for r in family.roots])
    vmax = max([v.radius_val for v in tree.V])
    order = order if order is not None else Fraction(vmax) + 6 - min(vmin, 0)
    free = puiseux_roots_with_multiplicity(P2, order)
    cps: list[CriticalPoint] = []
    for r in family.roots:
        v = visible_point(BerkPoint.type_one(r), tree.H_V)
        cps.append(CriticalPoint(r, 1, False, v, direction_of(v, r)))
    reductions = {}
    for c, m in free:
        v = visible_point(BerkPoint.type_one(c), tree.H_V)
        lab = direction_of(v, c)
        key = v.label()
        if key not in reductions:
            reductions[key] = family.map.conjugate(MoebiusFrame.for_point(v)).reduce()
        status = classify_totally_free(reductions[key], lab)
        cps.append(CriticalPoint(c, m, True, v, lab, status))
    counts_ok = True
    for v, dv in zip(tree.V, tree.degrees):
        n = sum(c.multiplicity for c in cps if c.visible == v)
        if n != 2 * dv - 2:
            counts_ok = False
    pts = [BerkPoint.type_one(c.value) for c in cps]
    H_big = hull(pts + list(tree.V) + [INF_POINT])
    H_crit = hull(pts)
    ram = {"vertices": list(tree.V),
           "segments": [(c.value, c.visible) for c in cps]}
    if not counts_ok:
        raise InternalInvariantViolation("critical points visible at V do not match 2 deg - 2")
    return CriticalPortrait(cps, H_big, H_crit, ram, counts_ok)


# ==========================================================================
# period one


@dataclass
class PeriodOneRecord:
    vertex: BerkPoint
    frame: MoebiusFrame
    limit: ReducedMap
    labels: list


def residue_labels(family: NewtonFamily, v: BerkPoint) -> list:
    out = []
    for r in family.roots:
        out.append(direction_of(v, BerkPoint.type_one(r)))
    return out


def period_one_rescalings(family: NewtonFamily, tree: FixedTreeReport | None = None) -> list[PeriodOneRecord]:
    """One frame per vertex of V; the limit is computed by conjugating and
    reducing, and independently as the complex Newton map of the residue
    labels of the roots."""
    tree = tree or fixed_tree(family)
    out = []
    for v in tree.V:
        frame = MoebiusFrame.for_point(v)
        lim = family.map.conjugate(frame).reduce()
        labels = residue_labels(family, v)
        other = newton_from_roots_C(labels, family.d, lim.backend)
        if not lim == other:
            raise InternalInvariantViolation(f"period-1 limit at {v!r} disagrees with the residue-label map")
        out.append(PeriodOneRecord(v, frame, lim, labels))
    return out


# ==========================================================================
# higher periods


@dataclass
class HigherRecord:
    period: int
    cycle: list
    xi_inf: BerkPoint
    frame: MoebiusFrame
    limit: ReducedMap
    K: int
    critical_point: PuiseuxSeries
    vertex: BerkPoint
    rho_to_vertex: Fraction
    normalized_core: list
    verified: bool = True
    note: str = ""


DEFAULT_ORBIT_BUDGET = 64


IMAGE_SLACK = 8


def _image_series(N: LRationalMap, x: Any, q: int, order: Any):
    """N^q(x) correct below t**order; intermediate images carry extra
    terms because a later division may consume absolute precision."""
    for k in range(q):
        if x is INFTY:
            return INFTY
        x = N.image_of_type_one(x, order + IMAGE_SLACK * (q - 1 - k))
    return x


def _iterate_point(N: LRationalMap, p: BerkPoint, q: int) -> BerkPoint:
    for _ in range(q):
        p = push_forward(N, p)
    return p


def _position(v: BerkPoint, eta: BerkPoint, p: BerkPoint):
    if p.is_type_two and in_segment(p, v, eta):
        return path_distance(v, p)
    return None


def _locate_periodic(N, v, eta, q, budget) -> BerkPoint | None:
    """Repelling fixed point of N^q on (v, eta] by exact secant steps on
    the piecewise linear action of N^q along the segment."""
    L = path_distance(v, eta)
    if _iterate_point(N, eta, q) == eta:
        return eta
    used = 0
    s1, s2 = L * Fraction(7, 8), L * Fraction(15, 16)
    while used < budget:
        pts = []
        for s in (s1, s2):
            img = _iterate_point(N, segment_point(v, eta, s), q)
            used += q
            pts.append((s, _position(v, eta, img)))
        (a, fa), (b, fb) = pts
        if fa is None or fb is None or a == b or fa == fb:
            s1, s2 = (s1 + L) / 2, (s2 + L) / 2
            if L - s1 < Fraction(1, 10 ** 6):
                return None
            continue
        K = (fb - fa) / (b - a)
        if K == 1:
            return None
        s = (K * a - fa) / (K - 1)
        if not (0 < s <= L):
            return None
        cand = segment_point(v, eta, s)
        used += q
        if _iterate_point(N, cand, q) == cand:
            return cand
        s1, s2 = (s + a) / 2, (s + b) / 2
    return None


def normalizing_affine(core: ReducedMap) -> tuple[complex, complex]:
    """(alpha, beta) with w -> alpha w + beta conjugating a polynomial core
    of degree k to a monic centred polynomial; f(z) = sum c_i z^i goes to
    g(w) = (f(alpha w + beta) - beta) / alpha."""
    k = core.e
    b0 = complex(to_complex(core.B[0]))
    coeffs = [complex(to_complex(c)) / b0 for c in core.A]
    lead = coeffs[-1]
    alpha = lead ** (-1.0 / (k - 1)) if k > 1 else 1.0
    beta = -coeffs[k - 1] / (k * lead) if k > 1 else 0.0
    return alpha, beta


def normalize_polynomial_core(core: ReducedMap) -> list:
    """Coefficients of the monic centred conjugate of a polynomial core.

    For degree k the conjugacy w -> alpha w + beta with alpha^(k-1) equal
    to the leading coefficient and beta removing the sub-leading term
    gives z^k + 0 z^(k-1) + ...; returned as complex numbers low to high.
    """
    k = core.e
    b0 = complex(to_complex(core.B[0]))
    coeffs = [complex(to_complex(c)) / b0 for c in core.A]
    alpha, beta = normalizing_affine(core)
    # polynomial composition in floating point
    out = [0j] * (k + 1)
    lin = [beta, alpha]
    power = [1 + 0j]
    for i, c in enumerate(coeffs):
        for j, p in enumerate(power):
            out[j] += c * p
        nxt = [0j] * (len(power) + 1)
        for j, p in enumerate(power):
            nxt[j] += p * lin[0]
            nxt[j + 1] += p * lin[1]
        power = nxt
    out[0] -= beta
    return [c / alpha for c in out]


def quadratic_invariant(core: ReducedMap) -> complex:
    """The constant c of the conjugate z^2 + c of a quadratic polynomial core."""
    b0 = complex(to_complex(core.B[0]))
    e, b, a = (complex(to_complex(x)) / b0 for x in core.A)
    return a * e + b / 2 - b * b / 4


def directional_K(N: LRationalMap, tree: FixedTreeReport, c: PuiseuxSeries, q: int, order: Any) -> int:
    """Product of directional multiplicities of the directions of N^j(c) at
    their visible vertices, j = 0..q-1."""
    K = 1
    x = c
    for k in range(q):
        v = visible_point(BerkPoint.type_one(x), tree.H_V)
        lab = direction_of(v, BerkPoint.type_one(x))
        K *= reduction_at(N, v).multiplicity(lab)
        if k < q - 1:
            x = N.image_of_type_one(x, order + IMAGE_SLACK * (q - 1 - k))
    return K


def _refine_critical(family: NewtonFamily, c: PuiseuxSeries, order: Any) -> PuiseuxSeries:
    """The zero of P'' agreeing with c to its known truncation, re-expanded
    to the given order."""
    if c.trunc is None or order <= c.trunc_exponent:
        return c
    P2 = family.polynomial.derivative().derivative()
    for r, _ in puiseux_roots_with_multiplicity(P2, order):
        d = r - c
        if not d.terms:
            return r
    return c


def higher_period_search(family: NewtonFamily, max_period: int | None = None,
                         tree: FixedTreeReport | None = None,
                         portrait: CriticalPortrait | None = None,
                         budget: int = DEFAULT_ORBIT_BUDGET) -> list[HigherRecord]:
    """Search for repelling periodic type II cycles of period >= 2 through
    the segments from totally free critical points to their visible vertices."""
    tree = tree or fixed_tree(family)
    portrait = portrait or critical_portrait(family, tree)
    N = family.map
    max_period = max_period if max_period is not None else family.d
    records: list[HigherRecord] = []
    for cp in portrait.free:
        if cp.totally_free == "No":
            continue
        v, lab = cp.visible, cp.label
        red_v = N.conjugate(MoebiusFrame.for_point(v)).reduce()
        holes = [h for h, _ in red_v.holes()]
        for q in range(2, max_period + 1):
            # hole condition along the tangent orbit
            z, hit = lab, False
            for _ in range(1, q):
                z = red_v.core_value(z) if red_v.e > 0 else red_v.constant_value()
                if any(_eq_label(z, h, red_v.backend) for h in holes):
                    hit = True
                    break
            if not hit:
                continue
            order = Fraction(max(v.radius_val, 0)) + 8
            eta = None
            cval = cp.value
            for _ in range(4):
                try:
                    img = _image_series(N, cval, q, order)
                except PrecisionExhausted:
                    order += 8
                    cval = _refine_critical(family, cp.value, order + IMAGE_SLACK * q)
                    continue
                if img is INFTY:
                    break
                if direction_of(v, BerkPoint.type_one(img)) is INFTY or \
                        not _eq_label(direction_of(v, BerkPoint.type_one(img)), lab, red_v.backend):
                    break
                eta = join(BerkPoint.type_one(cval), BerkPoint.type_one(img))
                if eta.radius_val < order - 2:
                    break
                order += 8
                cval = _refine_critical(family, cp.value, order + IMAGE_SLACK * q)
                eta = None
            if eta is None or eta == v:
                continue
            xi = _locate_periodic(N, v, eta, q, budget)
            if xi is None:
                records.append(HigherRecord(q, [], eta, MoebiusFrame.for_point(eta), None, 0, cp.value, v,
                                            path_distance(v, eta), [], False, "periodic point not isolated"))
                continue
            cycle = [xi]
            p = push_forward(N, xi)
            while not p == xi and len(cycle) <= q:
                cycle.append(p)
                p = push_forward(N, p)
            if len(cycle) != q:
                continue  # minimal period smaller than q: found at that period
            if any(any(c == x for x in r.cycle) for r in records for c in cycle):
                continue
            frame = MoebiusFrame.for_point(xi)
            psi = N.conjugate(frame)
            lim = psi.iterate(q).reduce()
            if lim.core_degree < 2:
                continue
            K = directional_K(N, tree, cval, q, order)
            norm = normalize_polynomial_core(lim) if lim.is_polynomial_core() else []
            records.append(HigherRecord(q, cycle, xi, frame, lim, K, cp.value, v,
                                        path_distance(v, xi), norm))
    return records


# ==========================================================================
# bounds and semistability


def semistable(f: ReducedMap) -> bool:
    """Hole-depth test: every depth <= (D+1)/2 and no fixed hole of depth >= D/2."""
    D = f.degree
    for h, m in f.holes():
        if 2 * m > D + 1:
            return False
        if 2 * m >= D:
            try:
                if f.e > 0 and _eq_label(f.core_value(h), h, f.backend):
                    return False
            except ZeroDivisionError:
                pass
    return True


@dataclass
class Verdicts:
    period_one_count: int
    period_one_ok: bool
    higher_count: int
    higher_ok: bool
    records: list = field(default_factory=list)


def bounds_and_semistability(period_one: list, higher: list, family: NewtonFamily) -> Verdicts:
    d = family.d
    recs = []
    ok = len([h for h in higher if h.verified]) <= max(d - 3, 0)
    for h in higher:
        if not h.verified:
            continue
        f = h.limit
        holes = f.holes()
        unique_inf = len(holes) == 1 and holes[0][0] is INFTY
        poly = f.is_polynomial_core()
        deg_ok = f.core_degree <= 2 ** (d - 3)
        ss = semistable(f)
        depth_inf = f.depth(INFTY)
        recs.append({"period": h.period, "unique_hole_at_infinity": unique_inf, "polynomial_core": poly,
                     "core_degree": f.core_degree, "degree_bound": 2 ** (d - 3), "degree_ok": deg_ok,
                     "depth_at_infinity": depth_inf, "semistable": ss})
        ok = ok and unique_inf and poly and deg_ok and not ss
    return Verdicts(len(period_one), len(period_one) <= d - 1, len([h for h in higher if h.verified]), ok, recs)


def multiple_root_multiplier(m: int, d: int | None = None) -> Fraction:
    """Multiplier (m-1)/m of a degenerate complex Newton map at a root of multiplicity m."""
    return Fraction(m - 1, m)
