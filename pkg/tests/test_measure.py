from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from families import degenerating_family
from newtonberk.berktree import BerkPoint, gauss_point
from newtonberk.coefficients import FLOAT256, INFTY, Gaussian
from newtonberk.errors import InputError, NonUniqueStationary
from newtonberk.lrat import NewtonFamily, newton_from_roots_C
from newtonberk.measure import (atomic_measure_degenerate, build_stable_vertex_set, family_limit_measure,
                                gauss_orbit_classify, limit_measure, markov_system, quasi_stationary,
                                stationary_vector)
from newtonberk.puiseux_core import PuiseuxSeries

S = PuiseuxSeries
F = Fraction


def cubic():
    return NewtonFamily([S.monomial(Gaussian(1), -1), S.monomial(Gaussian(-1), -1), S.monomial(Gaussian(1), -3)])


def perron_oracle(P):
    """Left eigenvector for eigenvalue 1 by numpy, normalised to mass 1."""
    A = np.array([[float(x) for x in row] for row in P])
    w, v = np.linalg.eig(A.T)
    k = int(np.argmin(abs(w - 1)))
    vec = np.real(v[:, k])
    return vec / vec.sum()


# ------------------------------------------------------- worked cubic chain


@pytest.fixture(scope="module")
def cubic_chain():
    fam = cubic()
    orbit = gauss_orbit_classify(fam)
    vs = build_stable_vertex_set(fam, orbit)
    system = markov_system(fam, vs)
    return fam, orbit, vs, system


def test_cubic_orbit_is_case_one(cubic_chain):
    _, orbit, vs, _ = cubic_chain
    assert orbit.tag == "CaseI" and orbit.n0 == 1
    assert orbit.orbit[1] == BerkPoint.disk(0, -2)
    assert vs.Gamma == [gauss_point(), BerkPoint.disk(0, -2)]


def test_cubic_matrix_by_state(cubic_chain):
    _, _, _, system = cubic_chain
    names = system.names()
    g, w = gauss_point().label(), BerkPoint.disk(0, -2).label()
    V1 = f"B(inf)-{w}"  # ball at the outer vertex containing infinity
    V2 = f"B({w},0)-{g}"  # annulus between the two vertices
    V3 = f"B({g},0)"  # ball at the Gauss point containing 0
    order = [g, w, V1, V2, V3]
    idx = [names.index(n) for n in order]
    want = [[0, 0, F(1, 3), F(2, 3), 0],
            [F(1, 3), F(1, 3), F(1, 3), 0, 0],
            [0, 0, F(2, 3), 0, F(1, 3)],
            [0, 0, F(1, 3), F(2, 3), 0],
            [0, 0, F(1, 3), F(2, 3), 0]]
    got = [[system.P[i][j] for j in idx] for i in idx]
    assert got == want
    assert not system.truncated


def test_cubic_stationary_and_measure(cubic_chain):
    fam, _, _, system = cubic_chain
    nu = stationary_vector(system.P)
    assert np.allclose([float(x) for x in nu], perron_oracle(system.P), atol=1e-12)
    rep = limit_measure(system, fam)
    assert rep.atoms == [(INFTY, F(5, 6)), (Gaussian(0), F(1, 6))]
    assert rep.bound_ok and rep.leak == 0


def test_stationary_vector_rejects_reducible_chains():
    with pytest.raises(NonUniqueStationary):
        stationary_vector([[F(1), F(0)], [F(0), F(1)]])


@settings(max_examples=100)
@given(st.lists(st.lists(st.integers(1, 9), min_size=4, max_size=4), min_size=4, max_size=4))
def test_stationary_vector_matches_eigen_oracle(rows):
    P = [[F(x, sum(r)) for x in r] for r in rows]
    nu = stationary_vector(P)
    assert sum(nu) == 1
    for j in range(4):
        assert sum(nu[i] * P[i][j] for i in range(4)) == nu[j]
    assert np.allclose([float(x) for x in nu], perron_oracle(P), atol=1e-9)


def test_quasi_stationary_of_leaky_chain():
    # substochastic: row 0 keeps 1/2, row 1 keeps 3/4; Perron value 3/4
    P = [[F(1, 4), F(1, 4)], [F(0), F(3, 4)]]
    nu, leak = quasi_stationary(P)
    assert float(leak) == pytest.approx(0.25, abs=1e-9)
    assert float(nu[1]) == pytest.approx(1.0, abs=1e-6)


# ----------------------------------------------------------- other branches


@pytest.mark.parametrize("seed", range(6))
def test_quadratic_families_give_point_mass_at_infinity(seed):
    rep = family_limit_measure(degenerating_family(seed, 2))
    assert rep.atoms == [(INFTY, F(1))]


def test_periodic_gauss_point_gives_point_mass_at_infinity():
    bk = FLOAT256
    ctx = bk.ctx
    s3, s30, i = ctx.sqrt(3), ctx.sqrt(30), ctx.mpc(0, 1)
    sc = S.monomial(ctx.mpf(18) / 5, -2, bk)

    def ser(terms):
        return S.from_terms(terms, None, bk)
    roots = [ser([(0, -1 - s3 * i), (2, 5 + 40 * s3 / 9 * i)]), ser([(0, -1 + s3 * i), (2, 5 - 40 * s3 / 9 * i)]),
             ser([(0, 2), (1, s30 / 3), (2, -5)]), ser([(0, 2), (1, -s30 / 3), (2, -5)])]
    fam = NewtonFamily([r * sc for r in roots], bk)
    assert gauss_orbit_classify(fam).tag == "GaussPeriodic"
    assert family_limit_measure(fam).atoms == [(INFTY, F(1))]


@pytest.mark.parametrize("seed", [3, 11, 17])
def test_degenerating_families_respect_the_bound(seed):
    fam = degenerating_family(seed, 3)
    rep = family_limit_measure(fam)
    assert rep.mass_at(INFTY) >= F(3, 5)
    assert sum(m for _, m in rep.atoms) == 1 - rep.leak


# --------------------------------------------------------- atomic measures


@pytest.mark.parametrize("depth", [0, 1, 2, 5, 9])
def test_atomic_measure_at_double_root(depth):
    f = newton_from_roots_C([0, 0, 1])
    am = atomic_measure_degenerate(f, depth)
    # oracle: sum_{n <= depth} 3^-(n+1) * (one hole of depth 1, fixed, local degree 2) = (1 - 3^-(depth+1)) / 2
    assert am.mass_at(Gaussian(0)) == F(1, 2) * (1 - F(1, 3 ** (depth + 1)))
    assert am.residual == F(2, 3) ** (depth + 1)
    assert am.mass_at(Gaussian(0)) <= F(1, 2) <= am.mass_at(Gaussian(0)) + am.residual
    (h, exact), = am.exact.values()
    assert h == Gaussian(0) and exact == F(1, 2)


def test_atomic_measure_total_mass():
    f = newton_from_roots_C([0, 0, 1, INFTY])
    am = atomic_measure_degenerate(f, 4)
    assert sum(m for _, m in am.atoms) + am.residual == 1


def test_atomic_measure_undefined_on_indeterminacy_locus():
    red = cubic().map.reduce()
    with pytest.raises(InputError):
        atomic_measure_degenerate(red, 2)
