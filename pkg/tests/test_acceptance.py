"""One test per acceptance criterion; each records a PASS/FAIL line that is
printed in the pytest terminal summary."""
import random
import time
from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from families import degenerating_family, mixed_family, random_map, random_type_two
from newtonberk import classical_verify as cv
from newtonberk.berktree import BerkPoint, gauss_point, join, leq, path_distance, segment_point, visible_point
from newtonberk.coefficients import FLOAT256, INFTY, Gaussian
from newtonberk.errors import InputError
from newtonberk.lrat import (LRationalMap, NewtonFamily, Region, direction_counts, newton_from_roots_C,
                             preimage_count_in_region, push_forward, subalgebraic_limit)
from newtonberk.measure import (atomic_measure_degenerate, build_stable_vertex_set, family_limit_measure,
                                gauss_orbit_classify, limit_measure, markov_system)
from newtonberk.newton_analysis import (bounds_and_semistability, fixed_tree, higher_period_search,
                                        normalizing_affine, period_one_rescalings, residue_labels, semistable)
from newtonberk.puiseux_core import PuiseuxSeries

S = PuiseuxSeries
F = Fraction
T = S.monomial(Gaussian(1), 1)


def cubic():
    return NewtonFamily([S.monomial(Gaussian(1), -1), S.monomial(Gaussian(-1), -1), S.monomial(Gaussian(1), -3)])


def quartic(a=0, scale=1, shift=0):
    bk = FLOAT256
    ctx = bk.ctx
    s3, s30, i = ctx.sqrt(3), ctx.sqrt(30), ctx.mpc(0, 1)

    def ser(terms):
        return S.from_terms(terms, None, bk)
    roots = [ser([(0, -1 - s3 * i), (2, 5 + 40 * s3 / 9 * i)]), ser([(0, -1 + s3 * i), (2, 5 - 40 * s3 / 9 * i)]),
             ser([(0, 2), (1, s30 / 3), (2, -5), (3, a)]), ser([(0, 2), (1, -s30 / 3), (2, -5), (3, -a)])]
    return NewtonFamily([ser([(0, scale)]) * r + ser([(0, shift)]) for r in roots], bk)


def finish(record, number, checks: dict, elapsed: float, limit: float, extra: str = ""):
    checks = dict(checks)
    checks[f"runtime<{limit:g}s"] = elapsed < limit
    failed = [k for k, ok in checks.items() if not ok]
    detail = f"{elapsed:.1f}s {extra}".strip()
    record(number, not failed, detail + (f" failed: {', '.join(failed)}" if failed else ""))
    assert not failed, failed


# --------------------------------------------------------------------- 1


def test_criterion_1_worked_cubic_measure(record_criterion):
    t0 = time.perf_counter()
    fam = cubic()
    checks = {
        "sigma1": fam.sigma(1) == S.monomial(Gaussian(1), -3),
        "sigma2": fam.sigma(2) == S.monomial(Gaussian(-1), -2),
        "sigma3": fam.sigma(3) == S.monomial(Gaussian(-1), -5),
        "N(xi_g)": push_forward(fam.map, gauss_point()) == BerkPoint.disk(0, -2),
    }
    tree = fixed_tree(fam)
    checks["V"] = sorted(v.radius_val for v in tree.V) == [-3, -1] and all(v.center.is_known_zero() for v in tree.V)
    orbit = gauss_orbit_classify(fam, tree=tree)
    system = markov_system(fam, build_stable_vertex_set(fam, orbit, tree))
    rep = limit_measure(system, fam, orbit.tag)
    g, w = gauss_point().label(), BerkPoint.disk(0, -2).label()
    order = [g, w, f"B(inf)-{w}", f"B({w},0)-{g}", f"B({g},0)"]  # xi_g, xi_{0,-2}, V1, V2, V3
    names = system.names()
    checks["five states"] = sorted(names) == sorted(order) and not system.truncated
    idx = [names.index(n) for n in order] if checks["five states"] else list(range(len(names)))
    matrix = [[system.P[i][j] for j in idx] for i in idx]
    checks["matrix"] = matrix == [[0, 0, F(1, 3), F(2, 3), 0],
                                  [F(1, 3), F(1, 3), F(1, 3), 0, 0],
                                  [0, 0, F(2, 3), 0, F(1, 3)],
                                  [0, 0, F(1, 3), F(2, 3), 0],
                                  [0, 0, F(1, 3), F(2, 3), 0]]
    checks["stationary"] = [rep.nu[i] for i in idx] == [0, 0, F(1, 2), F(1, 3), F(1, 6)]
    checks["mu"] = rep.atoms == [(INFTY, F(5, 6)), (Gaussian(0), F(1, 6))]
    finish(record_criterion, 1, checks, time.perf_counter() - t0, 5, "mu = 5/6 d_inf + 1/6 d_0")


# --------------------------------------------------------------------- 2


def test_criterion_2_measure_bound(record_criterion):
    t0 = time.perf_counter()
    checks = {}
    reps = [(3, family_limit_measure(cubic()))]
    seeds = [(d, 100 * d + k) for d in (2, 3, 4, 5) for k in range(6)]
    for d, seed in seeds:
        fam = degenerating_family(seed, d)
        assert all(r.valuation() < 0 for r in fam.roots)
        reps.append((d, family_limit_measure(fam)))
    worst = min(float(r.mass_at(INFTY) - F(d, 2 * d - 1)) for d, r in reps)
    checks["bound"] = all(r.mass_at(INFTY) >= F(d, 2 * d - 1) for d, r in reps)
    checks["d=2 is delta_inf"] = all(r.atoms == [(INFTY, F(1))] for d, r in reps if d == 2)
    checks[">=20 random"] = len(seeds) >= 20
    tags = sorted({r.case_tag for _, r in reps})
    finish(record_criterion, 2, checks, time.perf_counter() - t0, 120,
           f"{len(reps)} families, tags {tags}, min margin {worst:.3f}")


# --------------------------------------------------------------------- 3


def test_criterion_3_quartic_rescaling(record_criterion):
    t0 = time.perf_counter()
    recs = higher_period_search(quartic(), 4)
    checks = {"one record": len(recs) == 1}
    h = recs[0]
    c0, c1, c2 = h.normalized_core
    checks["period 2"] = h.period == 2
    checks["frame scale valuation 2"] = h.frame.a.valuation() - h.frame.d.valuation() == 2
    checks["rho(xi_g, xi_inf) = 2"] = path_distance(gauss_point(), h.xi_inf) == 2
    checks["|c-62|"] = abs(c0 - 62) <= 1e-6
    checks["linear"] = abs(c1) <= 1e-6
    checks["quadratic"] = abs(c2 - 1) <= 1e-6
    ra = higher_period_search(quartic(1), 4)
    ca = 62 + 144 * 30 ** 0.5 / 25
    checks["a=1 constant"] = len(ra) == 1 and abs(ra[0].normalized_core[0] - ca) <= 1e-6
    finish(record_criterion, 3, checks, time.perf_counter() - t0, 30,
           f"c = {c0.real:.9f}, c(a=1) = {ra[0].normalized_core[0].real:.9f}")


# --------------------------------------------------------------------- 4


def _structure_checks(fam, checks, counts, exact=True):
    d = fam.d
    tree = fixed_tree(fam)
    p1 = period_one_rescalings(fam, tree)
    hs = higher_period_search(fam, None, tree)
    v = bounds_and_semistability(p1, hs, fam)
    ok_p1 = len(p1) <= d - 1
    for r in p1:
        labels = residue_labels(fam, r.vertex)
        ok_p1 &= r.limit == newton_from_roots_C(labels, d, r.limit.backend)
        if exact:
            ok_p1 &= r.limit.backend.is_exact
    ok_h = len([h for h in hs if h.verified]) <= max(d - 3, 0) and v.higher_ok
    for h in hs:
        if not h.verified:
            continue
        ok_h &= h.limit.is_polynomial_core() and h.limit.core_degree <= 2 ** (d - 3)
        ok_h &= not semistable(h.limit)
    checks.setdefault(f"period-1 d={d}", True)
    checks.setdefault(f"higher d={d}", True)
    checks[f"period-1 d={d}"] &= bool(ok_p1)
    checks[f"higher d={d}"] &= bool(ok_h)
    counts[d] = counts.get(d, 0) + len(hs)


def test_criterion_4_rescaling_structure(record_criterion):
    t0 = time.perf_counter()
    checks, counts = {}, {}
    for d in (3, 4, 5):
        for k in range(50):
            _structure_checks(mixed_family(1000 * d + k, d), checks, counts)
    checks["no cubic higher records"] = counts.get(3, 0) == 0
    # affine images of the quartic example carry one period-2 rescaling each
    qcounts: dict = {}
    for a, scale, shift in [(0, 1, 0), (1, 2, 0), (-1, 1, 3), (2, 1j, 1)]:
        _structure_checks(quartic(a, scale, shift), checks, qcounts, exact=False)
    checks["quartic images have a higher record"] = qcounts.get(4, 0) == 4
    finish(record_criterion, 4, checks, time.perf_counter() - t0, 600,
           f"150 random families, higher records {counts}, quartic images {qcounts}")


# --------------------------------------------------------------------- 5


def _fixed_point_form(mu1):
    return LRationalMap([0, mu1, 1], [1, mu1.invert(10) + T, 0], 2)


def test_criterion_5_degenerate_constructions(record_criterion):
    t0 = time.perf_counter()
    checks = {"N_{0,0,1,inf}": newton_from_roots_C([0, 0, 1, INFTY]).to_text() == "XY[2X^2-XY:3XY-2Y^2]"}
    f = newton_from_roots_C([0, 0, 1])
    ok = True
    for depth in range(0, 8):
        am = atomic_measure_degenerate(f, depth)
        m0 = am.mass_at(Gaussian(0))
        (h, exact), = am.exact.values()
        ok &= exact == F(1, 2) and m0 <= F(1, 2) <= m0 + am.residual and am.residual == F(2, 3) ** (depth + 1)
    checks["mu({0}) = 1/2"] = ok
    checks["mu1 -> inf"] = subalgebraic_limit(_fixed_point_form(S.monomial(Gaussian(1), -1)))[0].to_text() == "XY[1:0]"
    checks["mu1 -> 0"] = subalgebraic_limit(_fixed_point_form(T))[0].to_text() == "XY[0:1]"
    lim1 = subalgebraic_limit(_fixed_point_form(S.constant(1) + T))[0]
    checks["mu1 -> 1: (X+Y)[X:Y]"] = lim1.to_text() == "(X+Y)[X:Y]"
    erratum = True
    for c in (Gaussian(3), Gaussian(-2), Gaussian(1, 1)):
        lim = subalgebraic_limit(_fixed_point_form(S.constant(c) + T))[0]
        erratum &= lim.holes() == [(-c, 1)] and lim.core_value(Gaussian(5)) == 5 * c
    checks["mu1 -> c: hole (X+cY), core [cX:Y]"] = erratum
    finish(record_criterion, 5, checks, time.perf_counter() - t0, 5,
           "printed [X:Y] core holds only at c = 1 (strict xfail in test_lrat)")


# --------------------------------------------------------------------- 6

_C6 = {"start": None, "done": set()}
gauss = st.builds(lambda a, b: Gaussian(a, b), st.integers(-4, 4), st.integers(-3, 3)).filter(bool)
series_st = st.lists(st.tuples(st.fractions(min_value=-4, max_value=4, max_denominator=3), gauss),
                     min_size=1, max_size=4).map(lambda ts: S.from_terms(ts))
point_st = st.builds(lambda ts, r: BerkPoint.disk(S.from_terms(ts), r),
                     st.lists(st.tuples(st.integers(-3, 4), gauss), max_size=2),
                     st.fractions(min_value=-4, max_value=5, max_denominator=2))
N6 = 1000


def _c6_start():
    if _C6["start"] is None:
        _C6["start"] = time.perf_counter()


@settings(max_examples=N6)
@given(series_st, series_st)
def test_criterion_6a_valuations(a, b):
    _c6_start()
    assert (a * b).valuation() == a.valuation() + b.valuation()
    s = a + b
    if s.terms:
        assert s.valuation() >= min(a.valuation(), b.valuation())
        if a.valuation() != b.valuation():
            assert s.valuation() == min(a.valuation(), b.valuation())
    _C6["done"].add("valuations")


@settings(max_examples=N6)
@given(point_st, point_st, point_st)
def test_criterion_6b_join_and_metric(a, b, c):
    j = join(a, b)
    assert j == join(b, a) and leq(a, j) and leq(b, j)
    assert join(join(a, b), c) == join(a, join(b, c))
    ab, bc, ac = path_distance(a, b), path_distance(b, c), path_distance(a, c)
    assert ab == path_distance(b, a) and (ab == 0) == (a == b) and ac <= ab + bc
    _C6["done"].add("join/metric")


@settings(max_examples=N6)
@given(st.integers(0, 10 ** 9))
def test_criterion_6c_push_forward_validation(seed):
    rng = random.Random(seed)
    phi, xi = random_map(rng, 5), random_type_two(rng)
    try:
        push_forward(phi, xi, validate=True)
    except InputError:
        pass  # constant maps have no push-forward of type II points
    _C6["done"].add("push_forward validation")


@settings(max_examples=N6)
@given(st.integers(0, 10 ** 9))
def test_criterion_6d_preimage_partitions(seed):
    rng = random.Random(seed)
    phi, xi = random_map(rng, 5), random_type_two(rng)
    y = S.from_terms([(rng.randint(-3, 3), Gaussian(rng.randint(1, 3), rng.randint(-2, 2)))])
    counts = direction_counts(phi, y, xi)
    assert sum(m for _, m in counts) == phi.d
    assert sum(preimage_count_in_region(phi, y, Region.ball(xi, lab)) for lab, _ in counts) == phi.d
    _C6["done"].add("preimage partitions")


@settings(max_examples=N6)
@given(st.integers(0, 10 ** 9), st.sampled_from([2, 3, 4, 5]))
def test_criterion_6e_fixed_tree_and_expansion(seed, d):
    rng = random.Random(seed)
    fam = degenerating_family(seed, d) if seed % 2 else mixed_family(seed, d)
    tree = fixed_tree(fam)
    N = fam.map
    for v in tree.V:
        assert push_forward(N, v) == v
    for a, b, length in tree.H_V.edges:
        va, vb = tree.H_V.vertices[a], tree.H_V.vertices[b]
        p = segment_point(va, vb, length * F(rng.randint(1, 7), 8))
        assert push_forward(N, p) == p
    top = tree.pi_HV_of_infinity
    up = BerkPoint.disk(top.center, top.radius_val - rng.randint(1, 4))
    assert push_forward(N, up) == up
    r = rng.choice(fam.roots)
    base = visible_point(BerkPoint.type_one(r), tree.H_V)
    s1 = F(rng.randint(0, 8), rng.choice([1, 2, 4]))
    s2 = s1 + F(rng.randint(1, 8), rng.choice([1, 2, 4]))
    x1, x2 = BerkPoint.disk(r, base.radius_val + s1), BerkPoint.disk(r, base.radius_val + s2)
    assert path_distance(push_forward(N, x1), push_forward(N, x2)) >= 2 * path_distance(x1, x2)
    _C6["done"].add("fixed tree and expansion")


def test_criterion_6_summary(record_criterion):
    """Runs after the property tests above (file order)."""
    elapsed = time.perf_counter() - (_C6["start"] or time.perf_counter())
    want = {"valuations", "join/metric", "push_forward validation", "preimage partitions",
            "fixed tree and expansion"}
    finish(record_criterion, 6, {"all properties ran": _C6["done"] == want}, elapsed, 300,
           f"{N6} cases each: {', '.join(sorted(_C6['done']))}")


# --------------------------------------------------------------------- 7


def test_criterion_7_numeric_cross_check(record_criterion):
    t0 = time.perf_counter()
    est = cv.estimate_limit_measure(cubic(), 1e-3, [INFTY, 0], depth=12, samples=10000)
    checks = {"atom inf": abs(est.mass_at(INFTY) - 5 / 6) <= 0.1, "atom 0": abs(est.mass_at(0) - 1 / 6) <= 0.1}
    fam = quartic()
    h = higher_period_search(fam, 4)[0]
    alpha, beta = normalizing_affine(h.limit)

    def target(z):
        with np.errstate(over="ignore", invalid="ignore"):
            return np.where(np.isfinite(z), z * z + 62, np.inf)
    tab = cv.verify_rescaling_limit(fam, h.frame, 2, target, [1e-1, 1e-2, 1e-3], 64,
                                    holes=[INFTY], post=(alpha, beta, 0, 1))
    checks["64-point grid"] = all(row.points == 64 for row in tab.rows)
    checks["sup error decreasing"] = tab.decreasing
    errs = ", ".join(f"{e:.1e}" for e in tab.errors)
    finish(record_criterion, 7, checks, time.perf_counter() - t0, 180,
           f"atoms {est.mass_at(INFTY):.3f}/{est.mass_at(0):.3f}, sup errors {errs}")
