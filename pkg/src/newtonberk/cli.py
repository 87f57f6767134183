"""Command-line front end: family-spec files in, JSON reports out.

Usage::

    python -m newtonberk.cli tree good_reduction.json --dot tree.dot
    python -m newtonberk.cli rescalings quartic_example.json --max-period 4
    python -m newtonberk.cli measure cubic_worked.json
    python -m newtonberk.cli verify quartic_example.json --t 0.1 --t 0.01
    python -m newtonberk.cli selftest

A family spec is a JSON object with ``roots`` (series literals, see
``PuiseuxSeries.from_literal``), optional ``degree``, ``backend`` (``"exact"``
or ``{"kind": "float", "prec": 256, "ztol": 1e-40}``) and ``label``.
Exact rationals in reports are written as ``"n/d"`` strings.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

from . import classical_verify as cv
from .berktree import BerkPoint, gauss_point, path_distance
from .coefficients import EXACT, INFTY, Backend, Gaussian, fmt_coeff, tolerance_log
from .errors import InputError, InternalInvariantViolation, NewtonBerkError
from .lrat import NewtonFamily, ReducedMap
from .measure import (atomic_measure_degenerate, build_stable_vertex_set, gauss_orbit_classify,
                      limit_measure, markov_system)
from .newton_analysis import (bounds_and_semistability, critical_portrait, fixed_tree,
                              higher_period_search, normalizing_affine, period_one_rescalings)
from .puiseux_core import PuiseuxSeries

SCHEMA = "newtonberk-report/1"


# ==========================================================================
# family specs


def load_spec(path: str | Path, overrides: dict | None = None) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(spec, dict) or "roots" not in spec:
        raise InputError("a family spec needs a 'roots' list")
    if overrides:
        spec = dict(spec)
        spec.update({k: v for k, v in overrides.items() if v is not None})
    return spec


def spec_backend(spec: dict) -> Backend:
    b = spec.get("backend", "exact")
    if b == "exact":
        return EXACT
    if b == "float":
        return Backend("float")
    if isinstance(b, dict) and b.get("kind") in ("exact", "float"):
        if b["kind"] == "exact":
            return EXACT
        return Backend("float", int(b.get("prec", 256)), float(b.get("ztol", 1e-40)))
    raise InputError(f"unknown backend {b!r}")


def family_from_spec(spec: dict) -> NewtonFamily:
    bk = spec_backend(spec)
    roots = [PuiseuxSeries.from_literal(lit, bk) for lit in spec["roots"]]
    if "degree" in spec and int(spec["degree"]) != len(roots):
        raise InputError(f"degree {spec['degree']} does not match {len(roots)} roots")
    return NewtonFamily(roots, bk)


# ==========================================================================
# serialization


def q(x: Any) -> Any:
    """Exact rationals as 'n/d' strings; other values made JSON friendly."""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    if x is INFTY:
        return "inf"
    if isinstance(x, Gaussian):
        return fmt_coeff(x)
    if isinstance(x, complex):
        return _cfmt(x)
    if isinstance(x, float):
        return float(f"{x:.12g}")
    if hasattr(x, "real") and hasattr(x, "imag"):
        return fmt_coeff(x)
    return x


def _cfmt(z: complex) -> str:
    if z.imag == 0:
        return f"{z.real:.12g}"
    return f"{z.real:.12g}{z.imag:+.12g}i"


def point_json(p: BerkPoint) -> dict:
    if p.is_infinity:
        return {"type": "inf", "label": "inf"}
    if p.is_type_one:
        return {"type": "I", "label": p.label(), "center": p.center.to_literal()}
    return {"type": "II", "label": p.label(), "center": p.center.to_literal(),
            "radius_val": q(Fraction(p.radius_val))}


def reduced_json(f: ReducedMap) -> dict:
    return {"text": f.to_text(), "degree": f.degree, "core_degree": f.core_degree,
            "holes": [[q(h), m] for h, m in f.holes()], "indeterminate": f.is_indeterminate()}


def frame_json(frame) -> dict:
    return {k: getattr(frame, k).to_literal() for k in ("a", "b", "c", "d")}


def dump(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


# ==========================================================================
# commands


def cmd_tree(family: NewtonFamily, args) -> tuple[dict, list]:
    tree = fixed_tree(family)
    portrait = critical_portrait(family, tree)
    if args.dot:
        Path(args.dot).write_text(tree.H_fix.to_dot("H_fix"))
    res = {
        "V": [point_json(v) for v in tree.V],
        "degrees": tree.degrees,
        "good_reduction": tree.good_reduction,
        "pi_HV_of_infinity": point_json(tree.pi_HV_of_infinity),
        "critical_points": [
            {"value": c.value.to_literal(), "multiplicity": c.multiplicity, "free": c.free,
             "visible": point_json(c.visible), "label": q(c.label), "totally_free": c.totally_free}
            for c in portrait.critical_points],
        "critical_count_ok": portrait.counts_ok,
    }
    tags = ["fixed-tree", "valence-degree"]
    return res, tags


def cmd_rescalings(family: NewtonFamily, args) -> tuple[dict, list]:
    tree = fixed_tree(family)
    p1 = period_one_rescalings(family, tree)
    higher = higher_period_search(family, args.max_period, tree, budget=args.budget)
    verdicts = bounds_and_semistability(p1, higher, family)
    res = {
        "period_one": [{"vertex": point_json(r.vertex), "limit": reduced_json(r.limit),
                        "residue_labels": [q(x) for x in r.labels]} for r in p1],
        "higher": [{"period": h.period, "xi_inf": point_json(h.xi_inf), "frame": frame_json(h.frame),
                    "limit": reduced_json(h.limit), "K": h.K, "rho_from_gauss": q(path_distance(gauss_point(), h.xi_inf)),
                    "rho_to_vertex": q(Fraction(h.rho_to_vertex)),
                    "normalized_core": [q(complex(c)) for c in h.normalized_core],
                    "verified": h.verified, "note": h.note} for h in higher],
        "verdicts": {"period_one_count": verdicts.period_one_count, "period_one_ok": verdicts.period_one_ok,
                     "higher_count": verdicts.higher_count, "higher_ok": verdicts.higher_ok,
                     "records": verdicts.records},
    }
    return res, ["period-one-count", "higher-count", "rescaling-limit-polynomial", "not-semistable"]


def measure_report(family: NewtonFamily, budget: int, depth: int, seed: int) -> tuple[dict, list]:
    tree = fixed_tree(family)
    red = family.map.reduce()
    if not red.is_indeterminate():
        am = atomic_measure_degenerate(red, 6) if red.core_degree < red.degree else None
        res = {"case_tag": "NotDegenerating", "reduction": reduced_json(red)}
        if am is not None:
            res["atomic_measure"] = {"atoms": [[q(p), q(m)] for p, m in am.atoms], "residual": q(am.residual)}
        return res, []
    orbit = gauss_orbit_classify(family, budget, tree)
    res: dict = {"case_tag": orbit.tag, "orbit": [point_json(p) for p in orbit.orbit],
                 "n0": orbit.n0, "note": orbit.note}
    if orbit.tag == "DeltaInfinity":
        rep = limit_measure(None, family, orbit.tag)
    else:
        vs = build_stable_vertex_set(family, orbit, tree)
        system = markov_system(family, vs, depth, seed)
        rep = limit_measure(system, family, orbit.tag)
        res["Gamma"] = [point_json(p) for p in vs.Gamma]
        res["states"] = system.names()
        res["matrix"] = [[q(x) for x in row] for row in system.P]
        res["truncated"] = system.truncated
        res["stationary"] = [q(x) for x in rep.nu]
    res["atoms"] = [[q(l), q(m)] for l, m in rep.atoms]
    res["leak"] = q(rep.leak)
    res["mu_infinity"] = q(rep.mass_at(INFTY))
    res["bound"] = q(Fraction(family.d, 2 * family.d - 1))
    res["bound_ok"] = rep.bound_ok
    return res, ["limit-measure", orbit.tag]


def cmd_measure(family: NewtonFamily, args) -> tuple[dict, list]:
    return measure_report(family, args.budget, args.depth, args.seed)


def cmd_verify(family: NewtonFamily, args) -> tuple[dict, list]:
    ts = args.t or [1e-1, 1e-2, 1e-3]
    tree = fixed_tree(family)
    out: dict = {"t": ts, "rescalings": []}
    for r in period_one_rescalings(family, tree):
        tab = cv.verify_rescaling_limit(family, r.frame, 1, r.limit, ts, args.grid)
        out["rescalings"].append({"period": 1, "vertex": r.vertex.label(), "sup_errors": tab.errors,
                                  "decreasing": tab.decreasing})
    for h in higher_period_search(family, args.max_period, tree, budget=args.budget):
        alpha, beta = normalizing_affine(h.limit)
        c = [complex(x) for x in h.normalized_core]

        def g(z, c=c):
            import numpy as np
            return np.where(np.isfinite(z), np.polyval(c[::-1], z), np.inf)
        tab = cv.verify_rescaling_limit(family, h.frame, h.period, g, ts, args.grid,
                                        holes=[INFTY], post=(alpha, beta, 0, 1))
        out["rescalings"].append({"period": h.period, "vertex": h.xi_inf.label(), "sup_errors": tab.errors,
                                  "decreasing": tab.decreasing})
    if family.map.reduce().is_indeterminate():
        meas, _ = measure_report(family, args.budget, args.depth, args.seed)
        atoms = [INFTY if a == "inf" else complex(str(a).replace("i", "j")) for a, _ in meas["atoms"]]
        est = cv.estimate_limit_measure(family, ts[-1], atoms, seed=args.seed)
        out["measure"] = {"predicted": meas["atoms"], "t": ts[-1],
                          "estimated": [[q(a), m, e] for a, m, e in zip(est.points, est.masses, est.errors)]}
    return out, ["numeric-cross-check"]


def cmd_selftest(args) -> tuple[dict, bool]:
    results = []
    for name, check in _SELFTESTS:
        spec = json.loads(resources.files("newtonberk").joinpath("fixtures", name).read_text())
        fam = family_from_spec(spec)
        try:
            ok, detail = check(fam)
        except NewtonBerkError as exc:  # reported, not raised
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append({"fixture": name, "ok": ok, "detail": detail})
    return {"checks": results}, all(r["ok"] for r in results)


def _check_cubic(fam):
    res, _ = measure_report(fam, 64, 64, 2024)
    ok = res["atoms"] == [["inf", "5/6"], ["0", "1/6"]] and len(res["states"]) == 5
    return ok, f"atoms {res['atoms']}"


def _check_quartic(fam):
    hs = higher_period_search(fam, 4)
    ok = len(hs) == 1 and hs[0].period == 2 and abs(complex(hs[0].normalized_core[0]) - 62) < 1e-6
    return ok, f"{len(hs)} higher records"


def _check_good(fam):
    tree = fixed_tree(fam)
    return len(tree.V) == 1 and tree.good_reduction, f"V = {[v.label() for v in tree.V]}"


_SELFTESTS = [("cubic_worked.json", _check_cubic), ("quartic_example.json", _check_quartic),
              ("good_reduction.json", _check_good)]


COMMANDS = {"tree": cmd_tree, "rescalings": cmd_rescalings, "measure": cmd_measure, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="python -m newtonberk.cli",
                                description="Berkovich analysis of degenerating Newton families")
    p.add_argument("command", choices=sorted(COMMANDS) + ["selftest"])
    p.add_argument("spec", nargs="?", help="family spec (JSON)")
    p.add_argument("--backend", choices=["exact", "float"], help="override the spec's backend")
    p.add_argument("--prec", type=int, default=None, help="float backend precision in bits")
    p.add_argument("--ztol", type=float, default=None, help="float backend zero tolerance")
    p.add_argument("--max-period", type=int, default=None)
    p.add_argument("--depth", type=int, default=64, help="state budget of the Markov chain")
    p.add_argument("--budget", type=int, default=64, help="orbit step budget")
    p.add_argument("--t", type=float, action="append", help="parameter values for verify")
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--dot", help="write the fixed tree as DOT to this path")
    p.add_argument("--out", help="write the report here instead of stdout")
    return p


def _backend_override(args) -> dict | None:
    if args.backend is None and args.prec is None and args.ztol is None:
        return None
    kind = args.backend or ("float" if args.prec or args.ztol else "exact")
    if kind == "exact":
        return {"backend": "exact"}
    return {"backend": {"kind": "float", "prec": args.prec or 256, "ztol": args.ztol or 1e-40}}


def run(argv: list[str] | None = None) -> tuple[dict, int]:
    args = build_parser().parse_args(argv)
    report: dict = {"schema": SCHEMA, "command": args.command}
    try:
        with tolerance_log() as events:
            if args.command == "selftest":
                results, ok = cmd_selftest(args)
                report["results"] = results
                code = 0 if ok else 5
            else:
                if not args.spec:
                    raise InputError(f"{args.command} needs a family spec")
                spec = load_spec(args.spec, _backend_override(args))
                report["inputs"] = {"spec": spec, "flags": {k: v for k, v in vars(args).items()
                                                            if k not in ("command", "spec", "out")}}
                family = family_from_spec(spec)
                results, tags = COMMANDS[args.command](family, args)
                report["results"] = results
                report["theorem_tags"] = tags
                code = 0
        report["tolerance_log"] = [f"{k} {m:.3e}" for k, m in events]
        summary: dict = {}
        for k, m in events:
            n, worst = summary.get(k, (0, 0.0))
            summary[k] = (n + 1, max(worst, float(m)))
        report["tolerance_summary"] = {k: {"count": n, "max": float(f"{w:.3e}")} for k, (n, w) in summary.items()}
        report["tolerance_dependent"] = bool(events)
    except NewtonBerkError as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        code = exc.exit_code
    except (ArithmeticError, ValueError) as exc:
        report["error"] = {"type": "InternalInvariantViolation", "message": f"{type(exc).__name__}: {exc}"}
        code = InternalInvariantViolation.exit_code
    return report, code


def main(argv: list[str] | None = None) -> int:
    report, code = run(argv)
    text = dump(report)
    args = build_parser().parse_args(argv)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
