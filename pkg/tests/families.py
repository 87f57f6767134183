"""Seeded generators of random families shared by several test modules."""
from __future__ import annotations

import random
from fractions import Fraction

from newtonberk.berktree import BerkPoint
from newtonberk.coefficients import Gaussian
from newtonberk.lrat import LRationalMap, NewtonFamily
from newtonberk.puiseux_core import PuiseuxSeries


def random_roots(rng: random.Random, d: int, exponents, negative_only: bool = False) -> list:
    """d distinct exact series, each one or two monomials with Gaussian
    integer coefficients; with negative_only the leading exponent is < 0."""
    roots: list = []
    while len(roots) < d:
        q = rng.choice(exponents)
        c = Gaussian(rng.randint(-3, 3), rng.choice([0, 0, rng.randint(-2, 2)]))
        if not c:
            continue
        terms = [(q, c)]
        if rng.random() < 0.5:
            q2 = q + rng.randint(1, 3)
            c2 = Gaussian(rng.randint(-2, 2))
            if c2:
                terms.append((q2, c2))
        s = PuiseuxSeries.from_terms(terms)
        if negative_only and not s.valuation() < 0:
            continue
        if any(not (s - r).terms for r in roots):
            continue
        roots.append(s)
    return roots


def degenerating_family(seed: int, d: int) -> NewtonFamily:
    """All roots of negative valuation, so the limit is indeterminate."""
    rng = random.Random(seed)
    return NewtonFamily(random_roots(rng, d, [-1, -1, -2, -3], negative_only=True))


def mixed_family(seed: int, d: int) -> NewtonFamily:
    rng = random.Random(seed)
    return NewtonFamily(random_roots(rng, d, [-2, -1, 0, 0, 1, 2]))


def random_series(rng: random.Random, zero_chance: float = 0.25) -> PuiseuxSeries:
    if rng.random() < zero_chance:
        return PuiseuxSeries.zero()
    q = rng.randint(-3, 3)
    terms = [(q, Gaussian(rng.randint(-3, 3) or 1, rng.choice([0, 0, rng.randint(-2, 2)])))]
    if rng.random() < 0.4:
        terms.append((q + rng.randint(1, 3), Gaussian(rng.randint(1, 3))))
    return PuiseuxSeries.from_terms(terms)


def random_map(rng: random.Random, max_degree: int = 5) -> LRationalMap:
    """A pair (F, G) of formal degree 1..max_degree with a nonzero top
    coefficient somewhere and G not identically zero."""
    d = rng.randint(1, max_degree)
    while True:
        num = [random_series(rng) for _ in range(d + 1)]
        den = [random_series(rng) for _ in range(d + 1)]
        if num[d].is_known_zero() and den[d].is_known_zero():
            continue
        if all(c.is_known_zero() for c in den):
            continue
        return LRationalMap(num, den, d)


def random_type_two(rng: random.Random) -> BerkPoint:
    c = PuiseuxSeries.from_terms([(rng.randint(-2, 2), Gaussian(rng.randint(-3, 3), rng.randint(-1, 1)))])
    return BerkPoint.disk(c, Fraction(rng.randint(-6, 6), rng.choice([1, 1, 2])))
