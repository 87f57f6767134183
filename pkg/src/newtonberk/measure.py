"""Limits of maximal-entropy measures along degenerating Newton families.

The residual equilibrium measure is computed through a vertex set Gamma
making the induced map analytically stable: the J-domains of Gamma form
a Markov chain with transitions m_{U,V}/d, whose stationary vector is
then read off as a measure on the directions at the Gauss point.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np
from numpy.polynomial import Polynomial

from .berktree import (INF_POINT, BerkPoint, direction_of, gauss_point, in_segment, leq,
                       path_distance, same_direction, segment_point, visible_point)
from .coefficients import FLOAT256, INFTY, Gaussian, fmt_coeff, note_tolerance, snap_gaussian
from .errors import (BoundaryAmbiguous, BudgetExhausted, InputError, NonUniqueStationary,
                     StabilityCheckFailed)
from .lrat import (GenericSampler, LRationalMap, NewtonFamily, ReducedMap, Region,
                   direction_counts, preimage_count_in_region, push_forward, reduction_at)
from .newton_analysis import FixedTreeReport, _eq_label, fixed_tree
from .puiseux_core import INF, PuiseuxSeries

# ==========================================================================
# orbit of the Gauss point


@dataclass
class OrbitData:
    tag: str
    orbit: list
    n0: int | None
    note: str = ""


def gauss_orbit_classify(family: NewtonFamily, budget: int = 64,
                         tree: FixedTreeReport | None = None, max_bits: int = 2048) -> OrbitData:
    """Follow xi_g under N until one of the theorem branches applies."""
    tree = tree or fixed_tree(family)
    N = family.map
    g = gauss_point()
    red = N.reduce()
    if not red.is_indeterminate():
        raise InputError("the family does not converge into the indeterminacy locus")
    pi_g = visible_point(g, tree.H_V)
    eta_inf = tree.pi_HV_of_infinity
    orbit = [g]
    x = g
    for n in range(1, budget + 1):
        x = push_forward(N, x)
        if x == g:
            orbit.append(x)
            return OrbitData("GaussPeriodic", orbit, n)
        orbit.append(x)
        if tree.H_V.contains(x):
            return OrbitData("CaseI", orbit, n)
        if not (pi_g == g) and in_segment(x, g, pi_g) and not x == pi_g:
            return OrbitData("CaseII", orbit, n)
        if in_segment(x, eta_inf, INF_POINT) and not x == eta_inf:
            return OrbitData("DeltaInfinity", orbit, None, "orbit reaches the fixed ray to infinity")
        pv = visible_point(x, tree.H_V)
        if not any(pv == v for v in tree.V):
            # x lies in a fixed Rivera domain attached at an edge point of H_V
            pg_branch = not (pi_g == pv) or not same_direction(pv, x, g)
            if pg_branch:
                return OrbitData("DeltaInfinity", orbit, None, "visible point leaves V")
        if _in_root_basin(family, x, tree):
            return OrbitData("DeltaInfinity", orbit, None, "orbit enters the immediate basin of a root")
        if _in_residual_basin(N, x, tree):
            return OrbitData("DeltaInfinity", orbit, None,
                             "orbit enters an attracting basin of a fixed reduction")
        if _coefficient_bits(x) > max_bits:
            return OrbitData("Undetermined", orbit, None,
                             f"exact coefficients exceed {max_bits} bits after {n} steps")
        if any(x == y for y in orbit[1:-1]):
            return OrbitData("DeltaInfinity", orbit, None, "orbit cycles away from the Gauss hull")
    return OrbitData("Undetermined", orbit, None, f"budget {budget} exhausted")


def _coefficient_bits(x: BerkPoint) -> int:
    """Bit size of the largest exact coefficient in the center of x."""
    if not x.is_type_two:
        return 0
    bits = 0
    for _, c in x.center.terms:
        if isinstance(c, Gaussian):
            for q in (c.re, c.im):
                bits = max(bits, int(q.numerator).bit_length(), int(q.denominator).bit_length())
    return bits


def _in_root_basin(family: NewtonFamily, x: BerkPoint, tree) -> bool:
    """True when x lies in a closed ball B(r, R) around a root r with
    R < min |r - s| over the other roots s.

    Writing P = (z - r) S gives N(z) - r = (z - r)^2 S'/(S + (z - r) S'),
    so such a ball maps into the ball of radius R^2 / min |r - s| and the
    orbit of x never leaves it."""
    if not x.is_type_two:
        return False
    for i, r in enumerate(family.roots):
        gap = (x.center - r).valuation()
        q = x.radius_val if gap == INF else min(x.radius_val, gap)
        far = max((r - s).valuation() for j, s in enumerate(family.roots) if j != i)
        if q <= far:
            continue
        ball = BerkPoint.disk(r, q)
        return not any(leq(v, ball) for v in tree.V) and not leq(gauss_point(), ball)
    return False


def _in_residual_basin(N: LRationalMap, x: BerkPoint, tree, radius: float = 0.3) -> bool:
    """Certificate that the orbit of x avoids the hull of V and xi_g forever.

    With w the point of the fixed tree seen from x, w fixed by N and x in
    direction lam at w, the directions of the orbit follow the reduced map
    f at w.  If lam sits in a disk D around an attracting fixed point z of
    f with f(D) inside D, D meets no hole of f and no direction leading to
    V or xi_g other than z itself, and z has no other preimage in D, then
    the orbit never meets those directions.  The disk test is numerical and
    recorded as a tolerance decision."""
    if not x.is_type_two:
        return False
    w = visible_point(x, tree.H_fix)
    if w == x or not w.is_type_two or not (push_forward(N, w) == w):
        return False
    red = reduction_at(N, w).reduced
    if red.is_indeterminate() or red.core_degree == 0:
        return False
    lam = direction_of(w, x)
    if lam is INFTY:
        return False
    lam = complex(lam)
    A = Polynomial([complex(c) for c in red.A])
    B = Polynomial([complex(c) for c in red.B])
    zpoly = Polynomial([0, 1])
    blocked = [complex(h) for h, _ in red.holes() if h is not INFTY]
    for v in list(tree.V) + [gauss_point()]:
        if not (v == w):
            lab = direction_of(w, v)
            if lab is not INFTY:
                blocked.append(complex(lab))
    unit = np.exp(2j * np.pi * np.arange(64) / 64)
    roots_fixed = (A - zpoly * B).trim(1e-30).roots()
    for r in (radius, radius / 3, radius / 10, radius / 30):
        for z in roots_fixed:
            if abs(lam - z) >= r or abs(lam - z) < 1e-9:
                continue
            ring = z + r * unit
            den = B(ring)
            if np.min(np.abs(den)) < 1e-12:
                continue
            if np.max(np.abs(A(ring) / den - z)) >= 0.9 * r:
                continue
            if any(1e-9 < abs(b - z) < r for b in blocked):
                continue
            fibre = (A - z * B).trim(1e-30).roots()
            if any(1e-6 < abs(p - z) < r for p in fibre):
                continue
            note_tolerance("basin", float(abs(lam - z)))
            return True
    return False




# ==========================================================================
# vertex sets


@dataclass
class VertexSet:
    Gamma: list
    stable: bool
    tag: str
    note: str = ""


def _locate_fixed_on_segment(N: LRationalMap, a: BerkPoint, b: BerkPoint, q: int,
                             budget: int = 200) -> BerkPoint | None:
    """A fixed point of N^q on the open segment (a, b), found by bracketing
    the piecewise linear displacement and exact secant steps."""
    L = path_distance(a, b)

    def disp(s):
        p = segment_point(a, b, s)
        img = p
        for _ in range(q):
            img = push_forward(N, img)
        if img.is_type_two and in_segment(img, a, b):
            return path_distance(a, img) - s, p
        return None, p

    grid = [L * Fraction(k, 32) for k in range(1, 32)]
    vals = []
    used = 0
    for s in grid:
        dv, p = disp(s)
        used += 1
        if dv == 0:
            return p
        vals.append((s, dv))
    for (s1, d1), (s2, d2) in zip(vals, vals[1:]):
        if d1 is None or d2 is None or (d1 > 0) == (d2 > 0):
            continue
        lo, dlo, hi, dhi = s1, d1, s2, d2
        while used < budget:
            s = lo - dlo * (hi - lo) / (dhi - dlo)
            dv, p = disp(s)
            used += 1
            if dv == 0:
                return p
            if dv is None:
                s = (lo + hi) / 2
                dv, p = disp(s)
                used += 1
                if dv is None:
                    break
                if dv == 0:
                    return p
            if (dv > 0) == (dlo > 0):
                lo, dlo = s, dv
            else:
                hi, dhi = s, dv
    return None


def build_stable_vertex_set(family: NewtonFamily, orbit: OrbitData,
                            tree: FixedTreeReport | None = None) -> VertexSet:
    tree = tree or fixed_tree(family)
    N = family.map
    g = gauss_point()
    if orbit.tag == "DeltaInfinity":
        return VertexSet([g], True, orbit.tag, "measure decided by the orbit")
    if orbit.tag == "GaussPeriodic":
        return VertexSet(list(orbit.orbit[:-1]), True, orbit.tag)
    if orbit.tag == "CaseI":
        Gamma = list(orbit.orbit[: orbit.n0 + 1])
        _check_stable(N, Gamma, [])
        return VertexSet(Gamma, True, orbit.tag)
    if orbit.tag == "CaseII":
        n0 = orbit.n0
        pi_g = visible_point(g, tree.H_V)
        eta = _locate_fixed_on_segment(N, g, pi_g, n0)
        if eta is None:
            raise BudgetExhausted("periodic point on the Gauss segment not isolated")
        cyc = [eta]
        p = push_forward(N, eta)
        while not p == eta:
            cyc.append(p)
            p = push_forward(N, p)
            if len(cyc) > n0:
                raise StabilityCheckFailed("auxiliary orbit is not periodic of the expected period")
        Gamma = _dedupe(list(orbit.orbit[:n0]) + list(tree.V) + cyc)
        _check_stable(N, Gamma, [orbit.orbit[n0]])
        return VertexSet(Gamma, True, orbit.tag, f"auxiliary cycle of length {len(cyc)}")
    raise BudgetExhausted(f"orbit classification {orbit.tag}: {orbit.note}")


def _dedupe(pts):
    out = []
    for p in pts:
        if not any(p == q for q in out):
            out.append(p)
    return out


def _check_stable(N: LRationalMap, Gamma: list, allowed_outside: list) -> None:
    for p in Gamma:
        img = push_forward(N, p)
        if any(img == q for q in Gamma):
            continue
        if any(img == q for q in allowed_outside):
            continue
        raise StabilityCheckFailed(f"vertex {p!r} maps outside the vertex set")


# ==========================================================================
# domains


def _label_key(lab: Any):
    if lab is INFTY:
        return ("inf",)
    if isinstance(lab, Gaussian):
        return ("g", lab.re, lab.im)
    return ("f", f"{complex(lab).real:.14e}", f"{complex(lab).imag:.14e}")


@dataclass(frozen=True)
class DomainKey:
    top: tuple | None  # (gamma index, label key)
    holes: frozenset


@dataclass
class DomainState:
    kind: str
    key: Any
    boundary: list
    label: Any = None
    representative: Any = None
    region: Region | None = None
    base_direction: Any = None

    def name(self, Gamma) -> str:
        if self.kind == "Vertex":
            return self.boundary[0].label()
        parts = []
        if self.region.top is not None:
            parts.append(f"B({self.region.top[0].label()},{_lab_str(self.label)})")
        else:
            parts.append("B(inf)")
        for h in self.region.holes:
            parts.append(f"-{h.label()}")
        return "".join(parts)


def _lab_str(lab):
    return "inf" if lab is INFTY else fmt_coeff(lab)


class DomainFinder:
    """Components of the complement of Gamma, keyed canonically."""

    def __init__(self, Gamma: list, sampler: GenericSampler):
        self.Gamma = Gamma
        self.sampler = sampler
        self.cache: dict = {}
        self.labels: dict = {}

    def canonical(self, i: int, lab: Any):
        """The first label seen at Gamma[i] naming the same direction as lab
        (an exact Gaussian and a float approximation of it are identified)."""
        if lab is not INFTY and not isinstance(lab, Gaussian):
            for den in (1, 2, 3, 4, 6, 8, 12):
                g = snap_gaussian(lab, den)
                if abs(complex(lab) - complex(g)) < 1e-30:
                    lab = g
                    break
        seen = self.labels.setdefault(i, [])
        for old in seen:
            if _eq_label(old, lab, FLOAT256):
                return old
        seen.append(lab)
        return lab

    def _index(self, p):
        for i, q in enumerate(self.Gamma):
            if p == q:
                return i
        raise KeyError(p)

    def _maximal(self, pts):
        out = []
        for p in pts:
            if not any((q is not p) and not (q == p) and leq(p, q) for q in pts):
                out.append(p)
        return out

    def component(self, gamma: BerkPoint, lab: Any) -> DomainState:
        """Component of P^1 minus Gamma containing direction lab at gamma."""
        if lab is INFTY:
            ups = [p for p in self.Gamma if not (p == gamma) and leq(gamma, p)]
            if ups:
                up = min(ups, key=lambda p: -p.radius_val)  # closest above gamma
                return self.component(up, direction_of(up, gamma))
            holes = self._maximal(list(self.Gamma))
            key = DomainKey(None, frozenset(self._index(h) for h in holes))
            return self._make(key, None, None, holes)
        lab = self.canonical(self._index(gamma), lab)
        inside = [p for p in self.Gamma if not (p == gamma) and leq(p, gamma)
                  and _eq_label(direction_of(gamma, p), lab, gamma.center.backend)]
        holes = self._maximal(inside)
        key = DomainKey((self._index(gamma), _label_key(lab)), frozenset(self._index(h) for h in holes))
        return self._make(key, gamma, lab, holes)

    def _make(self, key, gamma, lab, holes) -> DomainState:
        if key in self.cache:
            return self.cache[key]
        gnum = self.sampler.label()
        if gamma is None:
            m = min([h.radius_val for h in holes] +
                    [h.center.valuation() for h in holes if h.center.terms])
            y = PuiseuxSeries.monomial(gnum, m - 1)
            region = Region(None, tuple(holes))
        else:
            a, q = gamma.center, gamma.radius_val
            delta = (min(h.radius_val for h in holes) - q) / 2 if holes else Fraction(1)
            bk = a.backend if isinstance(lab, Gaussian) else a.backend.join(FLOAT256)
            y = a.with_backend(bk) + PuiseuxSeries.monomial(lab, q, bk) + PuiseuxSeries.monomial(gnum, q + delta, bk)
            region = Region((gamma, lab), tuple(holes))
        kind = "Ball" if not holes else ("Annulus" if len(holes) == 1 and gamma is not None else "Domain")
        bd = ([gamma] if gamma is not None else []) + list(holes)
        st = DomainState(kind, key, bd, lab, y, region, direction_of(gauss_point(), BerkPoint.type_one(y)))
        self.cache[key] = st
        return st


@dataclass
class MarkovSystem:
    states: list
    P: list
    truncated: bool
    leak: Fraction
    Gamma: list
    counts: list

    def names(self) -> list[str]:
        return [s.name(self.Gamma) for s in self.states]


def _vertex_row_counts(N, finder, gamma0, Gamma, samples: int = 3):
    """m_{gamma0, U}: counts of preimages of generic points near gamma0."""
    b, s = gamma0.center, gamma0.radius_val
    gens = finder.sampler.labels(samples)
    per_g = []
    for gnum in gens:
        y = b + PuiseuxSeries.monomial(gnum, s, b.backend)
        found = {}
        for gm in Gamma:
            for lab, mult in direction_counts(N, y, gm):
                st = finder.component(gm, lab)
                if st.key not in found:
                    found[st.key] = st
        per_g.append((y, found))
    keys = {}
    for _, found in per_g:
        for k, st in found.items():
            keys[k] = st
    out = {}
    for k, st in keys.items():
        vals = [preimage_count_in_region(N, y, st.region) for y, _ in per_g]
        vals.sort()
        m = vals[0]
        if vals.count(m) < 2:
            raise BoundaryAmbiguous("generic preimage counts disagree")
        if m:
            out[k] = (st, m)
    return out


def _domain_row_counts(N, finder, st: DomainState, Gamma):
    y = st.representative
    found = {}
    for gm in Gamma:
        for lab, mult in direction_counts(N, y, gm):
            s2 = finder.component(gm, lab)
            found.setdefault(s2.key, s2)
    out = {}
    for k, s2 in found.items():
        m = preimage_count_in_region(N, y, s2.region)
        if m:
            out[k] = (s2, m)
    return out


def markov_system(family: NewtonFamily, vs: VertexSet, budget: int = 256, seed: int = 2024) -> MarkovSystem:
    """States reachable backwards from Gamma and their transition counts."""
    N = family.map
    d = family.d
    Gamma = vs.Gamma
    finder = DomainFinder(Gamma, GenericSampler(seed))
    states: list = []
    index: dict = {}
    for i, gm in enumerate(Gamma):
        st = DomainState("Vertex", ("v", i), [gm], base_direction=None if gm == gauss_point()
                         else direction_of(gauss_point(), gm))
        index[st.key] = len(states)
        states.append(st)
    images = [push_forward(N, gm) for gm in Gamma]
    degrees = [reduction_at(N, gm).local_degree for gm in Gamma]
    rows: dict = {}
    queue = deque(range(len(states)))
    truncated = False
    while queue:
        i = queue.popleft()
        st = states[i]
        if st.kind == "Vertex":
            cnt = _vertex_row_counts(N, finder, st.boundary[0], Gamma)
            row = {}
            for j, gm in enumerate(Gamma):
                if images[j] == st.boundary[0]:
                    row[("v", j)] = degrees[j]
        else:
            cnt = _domain_row_counts(N, finder, st, Gamma)
            row = {}
        for k, (s2, m) in cnt.items():
            if k not in index:
                if len(states) >= budget:
                    truncated = True
                    continue
                index[k] = len(states)
                states.append(s2)
                queue.append(index[k])
            row[k] = row.get(k, 0) + m
        total = sum(row.values())
        if total != d and not truncated:
            raise StabilityCheckFailed(f"row {st.name(Gamma)} counts {total} preimages, expected {d}: "
                                       + ", ".join(f"{k}:{m}" for k, m in row.items()))
        rows[i] = row
    n = len(states)
    counts = [[0] * n for _ in range(n)]
    for i, row in rows.items():
        for k, m in row.items():
            if k in index:
                counts[i][index[k]] = m
    P = [[Fraction(c, d) for c in r] for r in counts]
    leak = Fraction(0)
    if truncated:
        leak = max(1 - sum(r) for r in P)
    return MarkovSystem(states, P, truncated, leak, Gamma, counts)


# ==========================================================================
# stationary vectors and the limit measure


def stationary_vector(P: list) -> list[Fraction]:
    """Unique nu with nu P = nu and sum nu = 1, by exact elimination."""
    n = len(P)
    # equations: sum_i nu_i (P_ij - delta_ij) = 0 for each j, plus sum nu = 1
    A = [[P[i][j] - (1 if i == j else 0) for i in range(n)] for j in range(n)]
    A.append([Fraction(1)] * n)
    b = [Fraction(0)] * n + [Fraction(1)]
    M = [row[:] + [bb] for row, bb in zip(A, b)]
    rows, cols = len(M), n
    piv_cols = []
    r = 0
    for c in range(cols):
        pr = next((k for k in range(r, rows) if M[k][c] != 0), None)
        if pr is None:
            continue
        M[r], M[pr] = M[pr], M[r]
        pv = M[r][c]
        M[r] = [x / pv for x in M[r]]
        for k in range(rows):
            if k != r and M[k][c] != 0:
                f = M[k][c]
                M[k] = [x - f * y for x, y in zip(M[k], M[r])]
        piv_cols.append(c)
        r += 1
    if len(piv_cols) < n:
        raise NonUniqueStationary("stationary vector is not unique")
    for k in range(r, rows):
        if M[k][-1] != 0:
            raise NonUniqueStationary("no stationary probability vector")
    nu = [Fraction(0)] * n
    for k, c in enumerate(piv_cols):
        nu[c] = M[k][-1]
    if any(x < 0 for x in nu):
        raise NonUniqueStationary("stationary vector has negative entries")
    return nu


def quasi_stationary(P: list, tol: float = 1e-13, iterations: int = 20000) -> tuple[list[Fraction], Fraction]:
    """Normalized left Perron vector of a truncated (sub-stochastic) chain.

    Returns the vector and 1 - lambda, the mass lost per step through the
    truncation boundary; the vector tends to the stationary one as the
    truncation grows.  Entries are rounded to rationals."""
    M = np.array([[float(x) for x in row] for row in P])
    n = len(M)
    nu = np.full(n, 1.0 / n)
    lam = 1.0
    for _ in range(iterations):
        new = nu @ M
        lam = float(new.sum())
        if lam == 0.0:
            raise NonUniqueStationary("truncated chain loses all mass")
        new /= lam
        # damping removes periodic oscillation without moving the fixed vector
        new = 0.5 * (new + nu)
        if float(np.abs(new - nu).sum()) < tol:
            nu = new
            break
        nu = new
    note_tolerance("quasi-stationary", 1.0 - lam)
    out = [Fraction(float(x)).limit_denominator(10 ** 9) for x in nu]
    return out, Fraction(max(0.0, 1.0 - lam)).limit_denominator(10 ** 9)


@dataclass
class LimitMeasureReport:
    atoms: list
    case_tag: str
    nu: list | None = None
    leak: Fraction = Fraction(0)
    bound_ok: bool = True
    system: MarkovSystem | None = None

    def mass_at(self, label: Any):
        for lab, m in self.atoms:
            if _eq_label(lab, label, FLOAT256) if not (lab is INFTY or label is INFTY) else lab is label:
                return m
        return Fraction(0)


def _add_atom(atoms: list, lab: Any, m: Fraction):
    for i, (l2, m2) in enumerate(atoms):
        same = (l2 is INFTY and lab is INFTY) or (l2 is not INFTY and lab is not INFTY and _eq_label(l2, lab, FLOAT256))
        if same:
            atoms[i] = (l2, m2 + m)
            return
    atoms.append((lab, m))


def limit_measure(system: MarkovSystem | None, family: NewtonFamily, tag: str = "CaseI") -> LimitMeasureReport:
    d = family.d
    bound = Fraction(d, 2 * d - 1)
    if system is None:
        return LimitMeasureReport([(INFTY, Fraction(1))], tag, None, Fraction(0), True)
    if system.truncated:
        nu, leak = quasi_stationary(system.P)
    else:
        nu = stationary_vector(system.P)
        leak = Fraction(0)
    atoms: list = []
    for st, m in zip(system.states, nu):
        if m == 0:
            continue
        if st.kind == "Vertex":
            if st.base_direction is None:
                raise NonUniqueStationary("equilibrium mass on the Gauss point")
            _add_atom(atoms, st.base_direction, m)
        else:
            _add_atom(atoms, st.base_direction, m)
    atoms.sort(key=lambda am: (am[0] is not INFTY, str(am[0])))
    rep = LimitMeasureReport(atoms, tag, nu, leak, True, system)
    rep.bound_ok = rep.mass_at(INFTY) >= bound
    return rep


def family_limit_measure(family: NewtonFamily, budget: int = 64, depth_budget: int = 64,
                         seed: int = 2024) -> LimitMeasureReport:
    """Orbit classification, vertex set, Markov chain and stationary measure."""
    tree = fixed_tree(family)
    orbit = gauss_orbit_classify(family, budget, tree)
    if orbit.tag == "DeltaInfinity":
        return limit_measure(None, family, orbit.tag)
    if orbit.tag == "Undetermined":
        raise BudgetExhausted(orbit.note)
    vs = build_stable_vertex_set(family, orbit, tree)
    system = markov_system(family, vs, depth_budget, seed)
    rep = limit_measure(system, family, orbit.tag)
    if orbit.tag == "GaussPeriodic" and not (len(rep.atoms) == 1 and rep.atoms[0][0] is INFTY):
        raise StabilityCheckFailed("periodic Gauss point must give the point mass at infinity")
    return rep


# ==========================================================================
# atomic measures of degenerate complex maps


@dataclass
class AtomicMeasure:
    atoms: list
    residual: Fraction
    depth: int
    exact: dict = field(default_factory=dict)

    def mass_at(self, point: Any):
        for p, m in self.atoms:
            if (p is INFTY and point is INFTY) or (p is not INFTY and point is not INFTY and _eq_label(p, point, FLOAT256)):
                return m
        return Fraction(0)


def atomic_measure_degenerate(f: ReducedMap, depth: int) -> AtomicMeasure:
    """sum_{n <= depth} d^-(n+1) sum_holes sum_{core^n(z) = h} delta_z, with
    the untruncated remainder (e/d)^(depth+1); fixed holes also get their
    exact total mass depth_h / (d - l), l the core's local degree there."""
    if f.is_indeterminate():
        raise InputError("the measure is not defined on the indeterminacy locus")
    d, e = f.degree, f.core_degree
    holes = f.holes()
    atoms: list = []
    if e == 0:
        for h, m in holes:
            _add_atom(atoms, h, Fraction(m, d))
        return AtomicMeasure(atoms, Fraction(0), depth)
    level = list(holes)
    for n in range(depth + 1):
        w = Fraction(1, d ** (n + 1))
        merged: list = []
        for z, m in level:
            _add_atom(atoms, z, w * m)
        if n == depth:
            break
        for z, m in level:
            for p, k in f.core_preimages(z):
                _add_atom(merged, p, Fraction(m * k))
        level = [(p, int(m)) for p, m in merged]
    residual = Fraction(e, d) ** (depth + 1)
    exact = {}
    for h, m in holes:
        try:
            fixed = (f.core_value(h) is INFTY and h is INFTY) or (
                h is not INFTY and f.core_value(h) is not INFTY and _eq_label(f.core_value(h), h, f.backend))
        except ZeroDivisionError:
            fixed = False
        if fixed:
            ell = f.core_local_degree(h)
            exact[_label_key(h)] = (h, Fraction(m, d - ell))
    return AtomicMeasure(atoms, residual, depth, exact)
