"""Univariate polynomials over the residue field.

A polynomial is a list of coefficients, constant term first.  A binary
form of degree n is stored as its dehomogenisation p(z) = F(z, 1) together
with the formal degree n; the multiplicity of the root at infinity is then
n - deg p.
"""
from __future__ import annotations

from typing import Any, Sequence

from .coefficients import INFTY, Backend, Gaussian, note_tolerance, snap_gaussian

Poly = list


def trim(p: Sequence, bk: Backend) -> Poly:
    p = list(p)
    while p and bk.is_zero(p[-1]):
        p.pop()
    return p


def deg(p: Sequence, bk: Backend) -> int:
    return len(trim(p, bk)) - 1


def add(a: Sequence, b: Sequence, bk: Backend) -> Poly:
    n = max(len(a), len(b))
    z = bk.zero()
    return trim([(a[i] if i < len(a) else z) + (b[i] if i < len(b) else z) for i in range(n)], bk)


def sub(a: Sequence, b: Sequence, bk: Backend) -> Poly:
    n = max(len(a), len(b))
    z = bk.zero()
    return trim([(a[i] if i < len(a) else z) - (b[i] if i < len(b) else z) for i in range(n)], bk)


def scale(a: Sequence, c: Any, bk: Backend) -> Poly:
    return trim([c * x for x in a], bk)


def mul(a: Sequence, b: Sequence, bk: Backend) -> Poly:
    if not a or not b:
        return []
    out = [bk.zero()] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if bk.is_zero(x):
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return trim(out, bk)


def power(a: Sequence, n: int, bk: Backend) -> Poly:
    out: Poly = [bk.one()]
    for _ in range(n):
        out = mul(out, a, bk)
    return out


def derivative(a: Sequence, bk: Backend) -> Poly:
    return trim([a[i] * i for i in range(1, len(a))], bk)


def evaluate(a: Sequence, z: Any, bk: Backend):
    acc = bk.zero()
    for c in reversed(a):
        acc = acc * z + c
    return acc


def compose(a: Sequence, b: Sequence, bk: Backend) -> Poly:
    """a(b(z))."""
    out: Poly = []
    for c in reversed(a):
        out = add(mul(out, b, bk), [c], bk)
    return out


def divmod_poly(a: Sequence, b: Sequence, bk: Backend) -> tuple[Poly, Poly]:
    a = trim(a, bk)
    b = trim(b, bk)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [bk.zero()] * max(len(a) - len(b) + 1, 0)
    r = list(a)
    lb = b[-1]
    while len(r) >= len(b) and r:
        k = len(r) - len(b)
        c = r[-1] / lb
        q[k] = c
        for i, y in enumerate(b):
            r[i + k] = r[i + k] - c * y
        r.pop()
        r = trim(r, bk)
    return trim(q, bk), r


def monic(a: Sequence, bk: Backend) -> Poly:
    a = trim(a, bk)
    if not a:
        return a
    lc = a[-1]
    return [x / lc for x in a]


def multiplicity_at(a: Sequence, z: Any, bk: Backend) -> int:
    """Order of vanishing of ``a`` at the finite point ``z``."""
    a = trim(a, bk)
    m = 0
    while a and bk.is_zero(evaluate(a, z, bk)):
        q, _ = divmod_poly(a, [-z, bk.one()], bk)
        a = q
        m += 1
    return m


def gcd_exact(a: Sequence, b: Sequence, bk: Backend) -> Poly:
    a, b = trim(a, bk), trim(b, bk)
    while b:
        _, r = divmod_poly(a, b, bk)
        a, b = b, r
    return monic(a, bk)


def squarefree_decomposition(a: Sequence, bk: Backend) -> list[tuple[Poly, int]]:
    """Yun's algorithm over an exact field: a = lc * prod f_i^i."""
    a = monic(a, bk)
    if len(a) <= 1:
        return []
    out = []
    b = gcd_exact(a, derivative(a, bk), bk)
    c, _ = divmod_poly(a, b, bk)
    d, _ = divmod_poly(derivative(a, bk), b, bk)
    d = sub(d, derivative(c, bk), bk)
    i = 1
    while len(c) > 1:
        g = gcd_exact(c, d, bk)
        if len(g) > 1:
            out.append((g, i))
        c, _ = divmod_poly(c, g, bk)
        d, _ = divmod_poly(d, g, bk)
        d = sub(d, derivative(c, bk), bk)
        i += 1
    return out


def _numeric_roots(a: Sequence, bk: Backend):
    ctx = bk.ctx if bk.is_float else _EXACT_ROOT_CTX
    coeffs = [bk.to_mpc(c, ctx) for c in reversed(trim(a, bk))]
    n = len(coeffs) - 1
    if n <= 0:
        return []
    if n == 1:
        return [-coeffs[1] / coeffs[0]]
    if n == 2:
        A, B, C = coeffs
        s = ctx.sqrt(B * B - 4 * A * C)
        q = -(B + s) / 2 if ctx.re(ctx.conj(B) * s) >= 0 else -(B - s) / 2
        if q == 0:
            return [ctx.mpc(0), ctx.mpc(0)]
        return [q / A, C / q]
    try:
        with ctx.extraprec(2 * ctx.prec):
            rts = ctx.polyroots(coeffs, maxsteps=120, extraprec=2 * ctx.prec)
    except ctx.NoConvergence:
        note_tolerance("clustered-roots", float(n))
        rts = _clustered_roots(coeffs, ctx)
    if not isinstance(rts, (list, tuple)):
        rts = [rts]
    return [ctx.mpc(r) for r in rts]


def _clustered_roots(coeffs, ctx):
    """Roots of a polynomial with (near) multiple roots.

    Double precision eigenvalues of the companion matrix are grouped into
    clusters; a cluster of size m is refined by Newton's method on the
    (m-1)-th derivative, which has a simple root there."""
    import numpy as np

    lead = complex(coeffs[0])
    approx = np.roots([complex(c) / lead for c in coeffs])
    scale = max(1.0, float(np.max(np.abs(approx)))) if len(approx) else 1.0
    groups: list[list] = []
    for r in approx:
        for g in groups:
            if abs(g[0] - r) <= 1e-4 * scale:
                g.append(r)
                break
        else:
            groups.append([r])
    out = []
    for g in groups:
        m = len(g)
        der = list(coeffs)
        for _ in range(m - 1):
            k = len(der) - 1
            der = [c * (k - i) for i, c in enumerate(der[:-1])]
        d1 = [c * (len(der) - 1 - i) for i, c in enumerate(der[:-1])]
        z = ctx.mpc(complex(sum(g) / m))
        with ctx.extraprec(ctx.prec):
            for _ in range(200):
                fz, dz = ctx.polyval(der, z), ctx.polyval(d1, z)
                if dz == 0:
                    break
                step = fz / dz
                z -= step
                if abs(step) <= ctx.mpf(2) ** (-ctx.prec) * max(1, abs(z)):
                    break
        out.extend([ctx.mpc(z)] * m)
    return out


import mpmath as _mpmath

_EXACT_ROOT_CTX = _mpmath.MPContext()
_EXACT_ROOT_CTX.prec = 320


def _snap(r, a: Sequence, bk: Backend):
    """Try to return r as an exact Gaussian rational root of a."""
    for den in (1, 2, 12, 360, 10**4, 10**8):
        g = snap_gaussian(r, den)
        if not evaluate(a, g, bk):
            return g
    return None


def roots(a: Sequence, bk: Backend) -> list[tuple[Any, int]]:
    """Roots of ``a`` with multiplicity.

    Exact backend: Gaussian-rational roots are returned exactly; other
    algebraic roots are returned as high-precision mpc values (and the
    fact is logged as a tolerance decision).  Float backend: numeric roots
    clustered with the backend's gcd tolerance.
    """
    a = trim(a, bk)
    if len(a) <= 1:
        return []
    if bk.is_exact:
        out = []
        for f, m in squarefree_decomposition(a, bk):
            rest = list(f)
            for r in _numeric_roots(f, bk):
                if len(rest) <= 1:
                    break
                g = _snap(r, rest, bk)
                if g is not None:
                    rest, _ = divmod_poly(rest, [-g, bk.one()], bk)
                    out.append((g, m))
            if len(rest) > 1:
                note_tolerance("algebraic-root", 0.0)
                for r in _numeric_roots(rest, bk):
                    out.append((r, m))
        return out
    rts = _numeric_roots(a, bk)
    return cluster(rts, bk)


def cluster(rts, bk: Backend):
    ctx = bk.ctx
    tol = ctx.mpf(bk.gcd_tol)
    groups: list[list] = []
    for r in rts:
        for g in groups:
            if abs(g[0] - r) <= tol * max(1, abs(r)):
                g.append(r)
                break
        else:
            groups.append([r])
    out = []
    for g in groups:
        if len(g) > 1:
            note_tolerance("cluster", float(max(abs(x - g[0]) for x in g)))
        out.append((sum(g, ctx.mpc(0)) / len(g), len(g)))
    return out


def form_roots(p: Sequence, fdeg: int, bk: Backend) -> list[tuple[Any, int]]:
    """Roots on P^1 of the binary form (p, fdeg), infinity included."""
    p = trim(p, bk)
    out = roots(p, bk)
    k = fdeg - (len(p) - 1)
    if k > 0:
        out.append((INFTY, k))
    return out


def from_roots(rts: Sequence[tuple[Any, int]], bk: Backend) -> tuple[Poly, int]:
    """Monic form with the given roots (INFTY allowed)."""
    p: Poly = [bk.one()]
    n = 0
    for r, m in rts:
        n += m
        if r is INFTY:
            continue
        for _ in range(m):
            p = mul(p, [-bk.coerce(r), bk.one()], bk)
    return p, n


def gcd(a: Sequence, b: Sequence, bk: Backend) -> Poly:
    """Monic gcd; exact Euclid or, for floats, root clustering."""
    a, b = trim(a, bk), trim(b, bk)
    if bk.is_exact:
        if not a:
            return monic(b, bk)
        if not b:
            return monic(a, bk)
        return gcd_exact(a, b, bk)
    if not a:
        return monic(b, bk)
    if not b:
        return monic(a, bk)
    ra, rb = roots(a, bk), roots(b, bk)
    common = []
    tol = bk.ctx.mpf(bk.gcd_tol)
    used = [False] * len(rb)
    for r, m in ra:
        for j, (s, n) in enumerate(rb):
            if not used[j] and abs(r - s) <= tol * max(1, abs(r)):
                used[j] = True
                note_tolerance("gcd-cluster", float(abs(r - s)))
                common.append(((r + s) / 2, min(m, n)))
                break
    p, _ = from_roots(common, bk)
    return p


def is_gaussian(x) -> bool:
    return isinstance(x, Gaussian)
