"""hermcalc command line.

Exit codes: 0 success, 1 verification failure, 2 invalid input, 3 precondition
violation (for example a non-acyclic complex where an acyclic one is needed).
Errors are reported as a JSON body on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from fractions import Fraction

from . import genera, osm
from .derived import (
    HermStructure, Roof, class_of_iso, class_of_triangle, herm_cone, is_distinguished, iso_class,
    structure_distance,
)
from .hermlin import ComplexError, PreconditionError, cone
from .serialize import Bundle, BundleError, BundleWriter, complex_to_json
from .suites import SUITES, run_suite, summarize
from .torsion import TAU_TOL, tau

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_PRECONDITION = 0, 1, 2, 3


class CLIError(Exception):
    def __init__(self, code: int, message: str, kind: str = "error"):
        super().__init__(message)
        self.code, self.kind = code, kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError(EXIT_INPUT, message, "usage")


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else str(x)


class Output:
    def __init__(self, path: str | None):
        self.fh = open(path, "w") if path else sys.stdout

    def line(self, text: str):
        self.fh.write(text + "\n")

    def json(self, obj):
        self.line(json.dumps(obj))

    def close(self):
        if self.fh is not sys.stdout:
            self.fh.close()


def _pick(bundle: Bundle, kind: str, name: str | None):
    if name is None:
        names = bundle.names(kind)
        if len(names) != 1:
            raise CLIError(EXIT_INPUT, f"bundle has {len(names)} {kind}; name one", "usage")
        name = names[0]
    return bundle.get(kind, name)


def _structure(bundle: Bundle, name: str | None, X):
    return HermStructure.native(X) if name is None else bundle.get("structures", name)


# -- commands ---------------------------------------------------------------------


def cmd_tau(args, out: Output):
    C = _pick(Bundle.load(args.file), "complexes", args.name)
    v = tau(C)
    if args.format == "json":
        out.json({"tau": v, "meager": abs(v) <= args.tol})
    else:
        out.line(f"{v:.12f}")
    return EXIT_OK


def cmd_verify(args, out: Output):
    if args.cases < 0:
        raise CLIError(EXIT_INPUT, "--cases must be non-negative", "usage")
    records = list(run_suite(args.suite, args.seed, args.cases, tol=args.tol, fault=args.inject_fault,
                             jobs=args.jobs))
    failed = [r for r in records if not r.passed]
    if args.format == "json":
        for r in records:
            d = r.to_json()
            d["residual"] = _num(d["residual"])
            out.json(d)
    else:
        for (suite, rule), s in summarize(records).items():
            mark = "ok  " if not s["failures"] else "FAIL"
            out.line(f"{mark} {suite:18s} {rule:22s} cases={s['cases']:4d} "
                     f"max_residual={s['max_residual']:.3e} failures={s['failures']}")
        for r in failed:
            out.line(json.dumps({"counterexample": r.to_json()}))
        out.line(f"{len(records) - len(failed)}/{len(records)} cases passed")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_cone(args, out: Output):
    b = Bundle.load(args.file)
    if args.roof is not None:
        r = b.get("roofs", args.roof)
    else:
        r = Roof.from_chain_map(_pick(b, "maps", args.map))
    if args.source is None and args.target is None and r.is_chain_map:
        out.json({"format": "hermcalc-bundle", "version": 1, "complexes": {"cone": complex_to_json(cone(r.g))}})
        return EXIT_OK
    H = herm_cone(r, _structure(b, args.source, r.source), _structure(b, args.target, r.target))
    w = BundleWriter()
    w.add(H, "cone")
    out.json(w.to_json())
    return EXIT_OK


def cmd_class_iso(args, out: Output):
    b = Bundle.load(args.file)
    r = b.get("roofs", args.roof) if args.roof else Roof.from_chain_map(_pick(b, "maps", args.map))
    if not r.is_isomorphism():
        raise CLIError(EXIT_PRECONDITION, "the morphism is not an isomorphism", "precondition")
    if args.source is None and args.target is None:
        v = class_of_iso(r)
    else:
        v = iso_class(r, _structure(b, args.source, r.source), _structure(b, args.target, r.target),
                      exact=args.exact)
    out.json({"class": v}) if args.format == "json" else out.line(f"{v:.12f}")
    return EXIT_OK


def cmd_class_triangle(args, out: Output):
    T = _pick(Bundle.load(args.file), "triangles", args.name)
    if not is_distinguished(T):
        raise CLIError(EXIT_PRECONDITION, "the triangle is not distinguished", "precondition")
    v = class_of_triangle(T, exact=args.exact)
    out.json({"class": v}) if args.format == "json" else out.line(f"{v:.12f}")
    return EXIT_OK


def cmd_distance(args, out: Output):
    b = Bundle.load(args.file)
    v = structure_distance(b.get("structures", args.first), b.get("structures", args.second), exact=args.exact)
    out.json({"distance": v}) if args.format == "json" else out.line(f"{v:.12f}")
    return EXIT_OK


def cmd_todd(args, out: Output):
    if args.order < 0:
        raise CLIError(EXIT_INPUT, "--order must be non-negative", "usage")
    coeffs = genera.todd_series(args.order).coeffs
    if args.format == "json":
        out.json({"order": args.order,
                  "coefficients": [{"fraction": str(c), "float": float(c)} for c in coeffs]})
    else:
        for k, c in enumerate(coeffs):
            out.line(f"x^{k}: {c}  ({float(c):.12g})")
    return EXIT_OK


_NAMED_SERIES = {
    "todd": (genera.MULTIPLICATIVE, genera.todd_series),
    "chern": (genera.ADDITIVE, genera.exp_x),
}


def _genus_spec(path: str) -> genera.GenusSpec:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise BundleError(f"{path}: {e}") from None
    if not isinstance(doc, dict) or "series" not in doc:
        raise BundleError(f"{path}: a genus spec needs a 'series'")
    order = int(doc.get("order", 8))
    series = doc["series"]
    if isinstance(series, str):
        if series not in _NAMED_SERIES:
            raise BundleError(f"{path}: unknown series {series!r}")
        kind, make = _NAMED_SERIES[series]
        s = make(order)
        kind = doc.get("kind", kind)
    elif isinstance(series, list):
        try:
            s = genera.TruncSeries([Fraction(str(c)) for c in series], max(order, len(series) - 1))
        except (ValueError, ZeroDivisionError) as e:
            raise BundleError(f"{path}: bad coefficient ({e})") from None
        kind = doc.get("kind", genera.ADDITIVE)
    else:
        raise BundleError(f"{path}: 'series' is a name or a list of coefficients")
    try:
        phi = genera.GenusSpec(kind, s, float(doc.get("point_scale", 1.0)))
    except genera.DomainError as e:
        raise BundleError(f"{path}: {e}") from None
    if doc.get("calibrate"):
        add = phi if phi.kind == genera.ADDITIVE else genera.additive_from_multiplicative(phi)
        phi = replace(phi, point_scale=genera.calibrated(add).point_scale)
    return phi


def cmd_genus_eval(args, out: Output):
    phi = _genus_spec(args.spec)
    C = _pick(Bundle.load(args.input), "complexes", args.name)
    add = phi if phi.kind == genera.ADDITIVE else genera.additive_from_multiplicative(phi)
    res = {"kind": phi.kind, "rank_part": genera.genus_of_complex(add, C)}
    if C.hodge.acyclic:
        if phi.kind == genera.ADDITIVE:
            res["secondary"] = genera.bott_chern_point(phi, C)
        else:
            res["secondary"] = genera.psi_m_tilde_point(phi, C)
    out.json(res)
    return EXIT_OK


def cmd_compose(args, out: Output):
    b = Bundle.load(args.chain)
    chain = _pick(b, "chains", args.name)
    result = osm.compose_chain(chain)
    w = BundleWriter()
    w.add(result, "composite")
    doc = w.to_json()
    if args.check_assoc:
        if len(chain) < 3:
            raise CLIError(EXIT_PRECONDITION, "associativity needs a chain of at least three morphisms",
                           "precondition")
        res = max(osm.verify_associativity(*chain[k:k + 3]) for k in range(len(chain) - 2))
        doc["associativity"] = {"residual": res, "pass": bool(res <= args.tol)}
        out.json(doc)
        return EXIT_OK if res <= args.tol else EXIT_FAIL
    out.json(doc)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hermcalc", description="Hermitian complexes, KA classes and their calculus at the point.")
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write output to this path instead of stdout")
    common.add_argument("--format", choices=("json", "text"), default=None)
    common.add_argument("--tol", type=float, default=None, help="override the tau tolerance")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("tau", parents=[common], help="determinant-norm invariant of an acyclic complex")
    s.add_argument("file")
    s.add_argument("name", nargs="?")
    s.set_defaults(func=cmd_tau, default_format="text")

    s = sub.add_parser("verify", parents=[common], help="run seeded verification suites")
    s.add_argument("--suite", choices=SUITES + ("all",), default="all")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--cases", type=int, default=50)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--inject-fault", default=None, help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_verify, default_format="json")

    s = sub.add_parser("cone", parents=[common], help="cone of a chain map, or hermitian cone of a roof")
    s.add_argument("file")
    s.add_argument("--map")
    s.add_argument("--roof")
    s.add_argument("--source", help="structure on the source (default: native)")
    s.add_argument("--target", help="structure on the target (default: native)")
    s.set_defaults(func=cmd_cone, default_format="json")

    s = sub.add_parser("class-iso", parents=[common], help="class of an isomorphism")
    s.add_argument("file")
    s.add_argument("--map")
    s.add_argument("--roof")
    s.add_argument("--source")
    s.add_argument("--target")
    s.add_argument("--exact", action="store_true", help="compute through composed roofs")
    s.set_defaults(func=cmd_class_iso, default_format="json")

    s = sub.add_parser("class-triangle", parents=[common], help="class of a distinguished triangle")
    s.add_argument("file")
    s.add_argument("name", nargs="?")
    s.add_argument("--exact", action="store_true")
    s.set_defaults(func=cmd_class_triangle, default_format="json")

    s = sub.add_parser("distance", parents=[common], help="distance between two structures on one object")
    s.add_argument("file")
    s.add_argument("first")
    s.add_argument("second")
    s.add_argument("--exact", action="store_true")
    s.set_defaults(func=cmd_distance, default_format="json")

    s = sub.add_parser("todd", parents=[common], help="Todd series coefficients")
    s.add_argument("--order", type=int, required=True)
    s.set_defaults(func=cmd_todd, default_format="json")

    g = sub.add_parser("genus", help="genus evaluation")
    gsub = g.add_subparsers(dest="genus_command", parser_class=_Parser)
    gsub.required = True
    s = gsub.add_parser("eval", parents=[common], help="evaluate a genus on a complex")
    s.add_argument("--spec", required=True)
    s.add_argument("--input", required=True)
    s.add_argument("--name")
    s.set_defaults(func=cmd_genus_eval, default_format="json")

    s = sub.add_parser("compose", parents=[common], help="compose a chain of morphisms in the point model")
    s.add_argument("--chain", required=True)
    s.add_argument("--name")
    s.add_argument("--check-assoc", action="store_true")
    s.set_defaults(func=cmd_compose, default_format="json")
    return p


def _error(code: int, kind: str, message: str):
    sys.stderr.write(json.dumps({"error": {"code": code, "type": kind, "message": message}}) + "\n")
    return code


def main(argv=None) -> int:
    out = None
    try:
        args = build_parser().parse_args(argv)
        args.format = args.format or args.default_format
        if args.tol is None and args.func is not cmd_verify:
            args.tol = TAU_TOL              # verify keeps its per-rule tolerances unless overridden
        out = Output(args.out)
        return args.func(args, out)
    except CLIError as e:
        return _error(e.code, e.kind, str(e))
    except PreconditionError as e:          # includes non-acyclic input
        return _error(EXIT_PRECONDITION, type(e).__name__, str(e))
    except (ComplexError, genera.DomainError) as e:
        return _error(EXIT_INPUT, type(e).__name__, str(e))
    except OSError as e:
        return _error(EXIT_INPUT, "OSError", str(e))
    finally:
        if out is not None:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
