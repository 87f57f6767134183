import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from newtonberk import classical_verify as cv
from newtonberk.coefficients import INFTY, Gaussian
from newtonberk.lrat import MoebiusFrame, NewtonFamily, newton_from_roots_C
from newtonberk.puiseux_core import PuiseuxSeries

S = PuiseuxSeries

finite = st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=200)
@given(finite, finite, finite)
def test_chordal_is_a_metric(a, b, c):
    assert cv.chordal(a, b) == pytest.approx(cv.chordal(b, a))
    assert cv.chordal(a, a) == 0
    assert cv.chordal(a, c) <= cv.chordal(a, b) + cv.chordal(b, c) + 1e-12
    assert 0 <= cv.chordal(a, b) <= 1


def test_chordal_at_infinity():
    assert cv.chordal(np.inf, 0) == pytest.approx(1.0)
    assert cv.chordal(np.inf, np.inf) == 0
    assert cv.chordal(1j, np.inf) == pytest.approx(2 ** -0.5)


def test_sphere_grid_size_and_spread():
    g = cv.sphere_grid(64)
    assert g.shape == (64,)
    assert len(set(np.round(g, 12))) == 64


@settings(max_examples=100)
@given(st.lists(finite, min_size=2, max_size=5, unique=True), finite)
def test_newton_preimages_map_back(roots, z):
    roots = np.array(roots)
    if min(abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1:]) < 1e-2:
        return
    pre = cv.newton_preimages(roots, np.array([z]))[0]
    assert pre.shape == (len(roots),)
    img = cv.newton_step(roots, pre)
    fin = np.isfinite(img)
    assert np.all(cv.chordal_array(img[fin], z) < 1e-6)


def test_newton_step_fixes_roots_and_infinity():
    roots = np.array([0, 1, 1j])
    out = cv.newton_step(roots, np.array([0, 1, 1j, np.inf]))
    assert np.allclose(out[:3], roots) and np.isinf(out[3])


def test_sample_map_at_evaluates_series():
    fam = NewtonFamily([S.monomial(Gaussian(1), -1), S.constant(Gaussian(2))])
    smp = cv.sample_map_at(fam, 0.1)
    assert sorted(np.round(smp.roots.real, 12)) == [2.0, 10.0]


def test_period_one_rescaling_converges():
    fam = NewtonFamily([S.zero(), S.constant(1), S.monomial(Gaussian(1), 1)])
    frame = MoebiusFrame.affine(S.monomial(Gaussian(1), 1), 0)
    lim = fam.map.conjugate(frame).reduce()
    assert lim == newton_from_roots_C([0, 1, INFTY])
    table = cv.verify_rescaling_limit(fam, frame, 1, lim, [1e-1, 1e-2, 1e-3])
    assert table.decreasing and table.errors[-1] < 1e-2


def test_quadratic_mass_concentrates_at_infinity():
    fam = NewtonFamily([S.monomial(Gaussian(1), -1), S.monomial(Gaussian(2), -2)])
    est = cv.estimate_limit_measure(fam, 1e-3, [INFTY], samples=4000)
    assert est.mass_at(INFTY) > 0.95


def test_nondegenerate_family_has_no_large_atom():
    fam = NewtonFamily([0, 1, Gaussian(0, 1)])
    assert cv.largest_atom(fam, 1e-3, samples=4000) < 0.1


def test_render_is_deterministic_ppm():
    smp = cv.sample_map_at(NewtonFamily([0, 1, S.monomial(Gaussian(0, 1), 1)]), 1.0)
    a = cv.render_basins(smp, resolution=(32, 24))
    b = cv.render_basins(smp, resolution=(32, 24))
    assert a == b
    assert a.startswith(b"P6\n32 24\n255\n") and len(a) == len(b"P6\n32 24\n255\n") + 32 * 24 * 3
