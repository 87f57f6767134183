"""Complex-side numerical oracle for the Berkovich predictions.

A family is instantiated at small complex t.  Conjugated iterates are
compared with predicted rescaling limits on a grid of the Riemann sphere,
limiting measures are estimated by random backward iteration, and basin
pictures are rendered as portable pixmaps.  Newton maps are evaluated
through N(z) = z - 1 / sum_i 1/(z - r_i), which involves no polynomial
coefficients and stays accurate when the roots live on different scales.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import mpmath
import numpy as np

from .coefficients import INFTY, note_tolerance
from .errors import InputError, TailBoundTooLoose
from .lrat import MoebiusFrame, NewtonFamily, ReducedMap
from .puiseux_core import PuiseuxSeries

CONDITION_LIMIT = 1e12


# ==========================================================================
# the sphere


def chordal(z: Any, w: Any) -> float:
    """Chordal distance |z - w| / sqrt((1 + |z|^2)(1 + |w|^2)), at most 1."""
    zi, wi = _is_inf(z), _is_inf(w)
    if zi and wi:
        return 0.0
    if zi:
        return 1.0 / float(np.sqrt(1.0 + abs(complex(w)) ** 2))
    if wi:
        return 1.0 / float(np.sqrt(1.0 + abs(complex(z)) ** 2))
    z, w = complex(z), complex(w)
    return abs(z - w) / float(np.sqrt((1 + abs(z) ** 2) * (1 + abs(w) ** 2)))


def chordal_array(z: np.ndarray, w: Any) -> np.ndarray:
    """Vectorized chordal distance from the points z (inf allowed) to w."""
    z = np.asarray(z, dtype=complex)
    zinf = ~np.isfinite(z)
    with np.errstate(invalid="ignore", over="ignore"):
        if _is_inf(w):
            out = 1.0 / np.sqrt(1.0 + np.abs(z) ** 2)
        else:
            w = complex(w)
            out = np.abs(z - w) / np.sqrt((1 + np.abs(z) ** 2) * (1 + abs(w) ** 2))
            out[zinf] = 1.0 / np.sqrt(1.0 + abs(w) ** 2)
    if _is_inf(w):
        out[zinf] = 0.0
    return out


def _is_inf(z: Any) -> bool:
    if z is INFTY or z is None:
        return True
    try:
        return not np.isfinite(complex(z))
    except (TypeError, OverflowError):
        return True


def sphere_grid(n: int) -> np.ndarray:
    """n points of a Fibonacci lattice on the sphere, as points of C
    (stereographic projection from the north pole)."""
    k = np.arange(n) + 0.5
    zc = 1 - 2 * k / n
    phi = np.pi * (1 + 5 ** 0.5) * k
    r = np.sqrt(1 - zc ** 2)
    with np.errstate(divide="ignore"):
        return r * np.exp(1j * phi) / (1 - zc)


# ==========================================================================
# instantiating a family


@dataclass
class ComplexMapSample:
    """A Newton map of the family at one value of t."""

    t: complex
    roots: np.ndarray
    degree: int
    condition: float
    tail: float
    high_precision: bool = False
    mp_roots: list = field(default_factory=list)

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return newton_step(self.roots, z)

    def preimages(self, z: np.ndarray) -> np.ndarray:
        """All d preimages of each entry of z, shape (len(z), d)."""
        return newton_preimages(self.roots, z)

    def evaluate_mp(self, z: Any):
        """One Newton step in multiprecision (inf maps to inf)."""
        if z is INFTY:
            return INFTY
        s = mpmath.mpc(0)
        for r in self.mp_roots:
            if z == r:
                return r
            s += 1 / (z - r)
        if s == 0:
            return INFTY
        return z - 1 / s


def _evaluate_series(s: PuiseuxSeries, t: complex) -> tuple[complex, float]:
    """Value of a series at t together with a tail estimate."""
    val = s.evaluate(t)
    tau = s.trunc_exponent
    if tau == float("inf") or s.trunc is None:
        return val, 0.0
    mags = [abs(complex(c)) for _, c in s.items()] or [1.0]
    tail = max(mags) * abs(t) ** float(tau)
    return val, tail


def sample_map_at(family: NewtonFamily, t: complex, tail_limit: float = 1e-6) -> ComplexMapSample:
    """Roots of the family evaluated at t, the Newton map they define."""
    if t == 0:
        raise InputError("a sample needs t != 0")
    vals, tails = [], []
    for r in family.roots:
        v, tl = _evaluate_series(r, t)
        vals.append(v)
        tails.append(tl)
    roots = np.array(vals, dtype=complex)
    spread = max(abs(roots).max(), 1.0)
    gaps = [abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1:]]
    gap = min(gaps) if gaps else 1.0
    if gap == 0:
        raise TailBoundTooLoose("roots coincide at this parameter")
    tail = max(tails) if tails else 0.0
    if tail > tail_limit * gap:
        raise TailBoundTooLoose(f"truncation tail {tail:.3g} exceeds the root separation {gap:.3g}")
    condition = spread / gap
    sample = ComplexMapSample(complex(t), roots, family.d, float(condition), float(tail))
    if condition > CONDITION_LIMIT:
        note_tolerance("high-precision-sample", float(condition))
        sample.high_precision = True
        ctx = mpmath.mp
        sample.mp_roots = [r.evaluate_mp(t, ctx) for r in family.roots]
    return sample


def newton_step(roots: np.ndarray, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    finite = np.isfinite(z)
    out = np.full(z.shape, np.inf + 0j)
    zf = z[finite]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        s = np.sum(1.0 / (zf[:, None] - roots[None, :]), axis=1)
        val = zf - 1.0 / s
    hit = ~np.isfinite(s)
    if hit.any():
        val[hit] = zf[hit]
    pole = s == 0
    val[pole] = np.inf
    out[finite] = val
    return out


def newton_preimages(roots: np.ndarray, z: np.ndarray, polish: int = 4) -> np.ndarray:
    """Preimages under the Newton map: roots of z P' - (w P' - P) in w."""
    z = np.asarray(z, dtype=complex)
    d = len(roots)
    P = np.poly(roots)  # high to low
    dP = np.polyder(P)
    # Q_z(w) = w P'(w) - P(w) - z P'(w), degree d with leading coeff d - 1
    wdP = np.concatenate([dP, [0]])
    base = wdP - P
    dPpad = np.concatenate([[0], dP])
    n = len(z)
    coeffs = base[None, :] - z[:, None] * dPpad[None, :]
    lead = coeffs[:, :1]
    mon = coeffs[:, 1:] / lead
    comp = np.zeros((n, d, d), dtype=complex)
    comp[:, 0, :] = -mon
    if d > 1:
        comp[:, np.arange(1, d), np.arange(0, d - 1)] = 1.0
    w = np.linalg.eigvals(comp)
    for _ in range(polish):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            inv = 1.0 / (w[:, :, None] - roots[None, None, :])
            s1 = inv.sum(axis=2)
            s2 = (inv ** 2).sum(axis=2)
            f = w - 1.0 / s1 - z[:, None]
            fp = 1.0 - s2 / s1 ** 2
            step = f / fp
        ok = np.isfinite(step)
        w = np.where(ok, w - np.where(ok, step, 0), w)
    return w


# ==========================================================================
# rescaling limits


@dataclass
class SupErrorRow:
    t: complex
    sup_error: float
    points: int


@dataclass
class SupErrorTable:
    rows: list

    @property
    def errors(self) -> list[float]:
        return [r.sup_error for r in self.rows]

    @property
    def decreasing(self) -> bool:
        e = self.errors
        return all(b < a for a, b in zip(e, e[1:]))


def _frame_values(frame: MoebiusFrame, t: complex):
    return tuple(x.evaluate(t) for x in (frame.a, frame.b, frame.c, frame.d))


def _moebius(m, z: np.ndarray) -> np.ndarray:
    a, b, c, d = m
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    fin = np.isfinite(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        num = a * z[fin] + b
        den = c * z[fin] + d
        val = num / den
        val[den == 0] = np.inf
    out[fin] = val
    out[~fin] = a / c if c != 0 else np.inf
    return out


def _inverse(m):
    a, b, c, d = m
    return (d, -b, -c, a)


def core_evaluator(core: ReducedMap) -> Callable[[np.ndarray], np.ndarray]:
    A = np.array([complex(x) for x in core.A][::-1])
    B = np.array([complex(x) for x in core.B][::-1])
    e = core.e
    dA, dB = len(core.A) - 1, len(core.B) - 1

    def f(z):
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape, dtype=complex)
        fin = np.isfinite(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            num = np.polyval(A, z[fin])
            den = np.polyval(B, z[fin])
            val = num / den
            val[den == 0] = np.inf
        out[fin] = val
        # at infinity compare the degree-e parts
        if dA == e and (dB < e):
            out[~fin] = np.inf
        elif dA < e and dB == e:
            out[~fin] = 0
        elif dA == e and dB == e:
            out[~fin] = A[0] / B[0]
        else:
            out[~fin] = np.nan
        return out

    return f


def verify_rescaling_limit(family: NewtonFamily, frame: MoebiusFrame, q: int,
                           predicted: Any, ts: Sequence[complex] = (1e-1, 1e-2, 1e-3),
                           grid: int = 64, exclusion: float = 0.05,
                           holes: Sequence[Any] | None = None,
                           post: tuple | None = None) -> SupErrorTable:
    """Spherical sup distance between M^-1 N^q M and the predicted limit.

    ``predicted`` is a ReducedMap (its core is used and its holes are
    excluded) or a vectorized callable.  ``post`` optionally composes the
    frame with a further complex Moebius map (a, b, c, d), e.g. the affine
    normalization of a polynomial core."""
    if isinstance(predicted, ReducedMap):
        if holes is None:
            holes = [h for h, _ in predicted.holes()]
        g = core_evaluator(predicted)
    else:
        g = predicted
    holes = list(holes or [])
    pts = sphere_grid(grid)
    keep = np.ones(len(pts), dtype=bool)
    for h in holes:
        keep &= chordal_array(pts, h) > exclusion
    pts = pts[keep]
    expected = g(pts)
    rows = []
    for t in ts:
        smp = sample_map_at(family, t)
        m = _frame_values(frame, t)
        z = _moebius(post, pts) if post is not None else pts
        z = _moebius(m, z)
        if smp.high_precision:
            z = _iterate_mp(smp, z, q)
        else:
            for _ in range(q):
                z = smp(z)
        z = _moebius(_inverse(m), z)
        if post is not None:
            z = _moebius(_inverse(post), z)
        err = max(chordal(a, b) for a, b in zip(z, expected))
        rows.append(SupErrorRow(complex(t), float(err), int(len(pts))))
    return SupErrorTable(rows)


def _iterate_mp(smp: ComplexMapSample, z: np.ndarray, q: int) -> np.ndarray:
    out = []
    for x in z:
        v = INFTY if not np.isfinite(x) else mpmath.mpc(complex(x))
        for _ in range(q):
            v = smp.evaluate_mp(v)
        out.append(np.inf if v is INFTY else complex(v))
    return np.array(out, dtype=complex)


# ==========================================================================
# limiting measures


@dataclass
class AtomEstimate:
    points: list
    masses: list
    errors: list
    depth: int
    samples: int
    t: complex
    radius: float

    def mass_at(self, point: Any) -> float:
        for p, m in zip(self.points, self.masses):
            if (_is_inf(p) and _is_inf(point)) or (not _is_inf(p) and not _is_inf(point)
                                                   and abs(complex(p) - complex(point)) < 1e-12):
                return m
        raise KeyError(point)


def backward_orbit(sample: ComplexMapSample, start: complex, depth: int, samples: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Endpoints of random backward branches: at each level a preimage is
    chosen uniformly among the d preimages."""
    z = np.full(samples, complex(start))
    for _ in range(depth):
        pre = sample.preimages(z)
        pick = rng.integers(0, sample.degree, size=samples)
        z = pre[np.arange(samples), pick]
    return z


def estimate_limit_measure(family: NewtonFamily, t: complex, atoms: Sequence[Any],
                           depth: int = 12, samples: int = 10000, radius: float = 0.1,
                           seed: int = 0, start: complex = 0.5 + 0.3j,
                           bootstrap: int = 200) -> AtomEstimate:
    """Fraction of depth-n backward branches ending within chordal radius of
    each candidate atom, with bootstrap standard errors."""
    smp = sample_map_at(family, t)
    rng = np.random.default_rng(seed)
    z = backward_orbit(smp, start, depth, samples, rng)
    masses, errors = [], []
    for a in atoms:
        hit = chordal_array(z, a) < radius
        m = float(hit.mean())
        idx = rng.integers(0, samples, size=(bootstrap, samples))
        boot = hit[idx].mean(axis=1)
        masses.append(m)
        errors.append(float(boot.std()))
    return AtomEstimate(list(atoms), masses, errors, depth, samples, complex(t), radius)


def largest_atom(family: NewtonFamily, t: complex, depth: int = 12, samples: int = 10000,
                 radius: float = 0.02, seed: int = 0) -> float:
    """Largest mass carried by a chordal ball of the given radius centred at
    a sampled point; small for measures without atoms."""
    smp = sample_map_at(family, t)
    rng = np.random.default_rng(seed)
    z = backward_orbit(smp, 0.5 + 0.3j, depth, samples, rng)
    centres = z[rng.integers(0, samples, size=64)]
    best = 0.0
    for c in list(centres) + [np.inf]:
        best = max(best, float((chordal_array(z, c) < radius).mean()))
    return best


# ==========================================================================
# pictures


_PALETTE = [(230, 80, 60), (60, 140, 230), (250, 200, 50), (90, 190, 110),
            (170, 90, 200), (240, 140, 40), (60, 200, 200), (200, 200, 200)]


def render_basins(sample: ComplexMapSample, window: tuple = (-2.0, 2.0, -2.0, 2.0),
                  resolution: tuple = (200, 200), iterations: int = 60,
                  tol: float = 1e-6) -> bytes:
    """Binary PPM image colouring each pixel by the root its Newton orbit
    reaches; shading by the number of steps, black when undecided."""
    x0, x1, y0, y1 = window
    w, h = resolution
    xs = np.linspace(x0, x1, w)
    ys = np.linspace(y1, y0, h)
    z = (xs[None, :] + 1j * ys[:, None]).ravel()
    steps = np.full(z.shape, iterations)
    which = np.full(z.shape, -1)
    for k in range(iterations):
        z = sample(z)
        dist = np.abs(z[:, None] - sample.roots[None, :])
        near = dist.min(axis=1) < tol * max(1.0, float(np.abs(sample.roots).max()))
        new = near & (which < 0)
        which[new] = dist[new].argmin(axis=1)
        steps[new] = k
    img = np.zeros((z.size, 3), dtype=np.uint8)
    for i in range(sample.degree):
        sel = which == i
        shade = 1.0 - 0.6 * np.minimum(steps[sel], 30) / 30.0
        col = np.array(_PALETTE[i % len(_PALETTE)], dtype=float)
        img[sel] = (shade[:, None] * col[None, :]).astype(np.uint8)
    header = f"P6\n{w} {h}\n255\n".encode()
    return header + img.reshape(h, w, 3).tobytes()
