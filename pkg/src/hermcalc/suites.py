"""Seeded verification suites behind ``hermcalc verify``.

Every case draws its randomness from ``rng_for(seed, suite_key, rule_index, case)``
(PCG64 streams spawned through numpy's SeedSequence), so any single record can
be replayed on its own.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from . import acyccalc, diagrams, genera, osm
from . import generators as gen
from .derived import (
    HermStructure, HermTriangle, Roof, _metric_phi, class_of_triangle, compare_triangle, compose_roofs, herm_cone,
    iso_class, parallel_transport, structure_distance, torsor_add,
)
from .hermlin import (
    cohomology_map, cone_of_squares, cone_square_residual, direct_sum, inclusion, projection, shift, zero_map,
)
from .serialize import safe_payload

SUITES = ("acyclic-calculus", "triangle-classes", "cone-welldef", "osm-assoc", "genera")
SUITE_KEYS = {name: k + 1 for k, name in enumerate(SUITES)}


@dataclass
class Record:
    suite: str
    rule: str
    case: int
    residual: float
    passed: bool
    inputs: dict | None = None

    def to_json(self, with_inputs: bool = True) -> dict:
        out = {"suite": self.suite, "rule": self.rule, "case": self.case,
               "residual": self.residual, "pass": self.passed}
        if with_inputs and self.inputs is not None:
            out["inputs"] = self.inputs
        return out


def _small(rng, **kw):
    return gen.random_complex(rng, max_degrees=3, max_total=8, **kw)


# -- triangle classes -----------------------------------------------------------


def rule_iso_composition(rng, case):
    """[h o f] = [h] + [f] for isomorphisms between hermitian objects."""
    X = _small(rng)
    Y, Z = gen.quasi_isomorphic_copy(rng, X), gen.quasi_isomorphic_copy(rng, X)
    HX, HY, HZ = (gen.random_structure(rng, C) for C in (X, Y, Z))
    f, h = gen.random_iso_roof(rng, X, Y), gen.random_iso_roof(rng, Y, Z)
    hf = compose_roofs(f, h)
    r = abs(iso_class(hf, HX, HZ, exact=True) - iso_class(f, HX, HY) - iso_class(h, HY, HZ))
    return r, lambda: {"f": f, "h": h, "HX": HX, "HY": HY, "HZ": HZ}


def rule_rotation(rng, case):
    """Rotating a distinguished triangle negates its class."""
    T = diagrams.random_triangle(rng)
    v = class_of_triangle(T)
    R = T.rotate()
    r = max(abs(class_of_triangle(R) + v), abs(class_of_triangle(R.rotate().rotate()) + v))
    return r, lambda: {"T": T}


def rule_triangle_routes(rng, case):
    """Cohomological and chain-level triangle classes agree, independently of the comparison map."""
    T = diagrams.random_triangle(rng)
    cmp = compare_triangle(T, rng=rng)
    r = abs(cmp.value - class_of_triangle(T, exact=True))
    if cmp.alternative is not None:
        r = max(r, abs(cmp.value - cmp.alternative))
    return r, lambda: {"T": T}


def rule_split_triangle(rng, case):
    """F -> F + G -> G with orthogonal metrics has class 0; moving the structure on G by a moves it by a."""
    F = _small(rng)
    G = _small(rng, lo=F.lo)
    S = direct_sum(F, G)
    T = HermTriangle(HermStructure.native(F), HermStructure.native(S), HermStructure.native(G),
                     Roof.from_chain_map(inclusion([F, G], 0, S)), Roof.from_chain_map(projection([F, G], 1, S)),
                     Roof.from_chain_map(zero_map(G, shift(F, 1))))
    a = float(rng.normal())
    T2 = HermTriangle(T.A, T.B, torsor_add(T.C, a), T.u, T.v, T.w)
    r = max(abs(class_of_triangle(T)), abs(class_of_triangle(T2) - a))
    return r, lambda: {"T": T}


def rule_ladder(rng, case):
    """[bottom] - [top] = [f] - [g] + [h] for a morphism of triangles by isomorphisms."""
    L = diagrams.random_ladder(rng)
    lhs = class_of_triangle(L.bottom) - class_of_triangle(L.top)
    rhs = (iso_class(L.f, L.top.A, L.bottom.A) - iso_class(L.g, L.top.B, L.bottom.B)
           + iso_class(L.h, L.top.C, L.bottom.C))
    return abs(lhs - rhs), lambda: {"top": L.top, "bottom": L.bottom, "f": L.f, "g": L.g, "h": L.h}


def rule_grid(rng, case):
    """Alternating sum of row classes equals that of column classes in a 3x3 diagram."""
    rows, cols = diagrams.split_grid(rng)
    r = [class_of_triangle(t) for t in rows]
    c = [class_of_triangle(t) for t in cols]
    res = abs((r[0] - r[1] + r[2]) - (c[0] - c[1] + c[2]))
    return res, lambda: {f"row{k}": t for k, t in enumerate(rows)} | {f"col{k}": t for k, t in enumerate(cols)}


# -- cone well-definedness, torsor ------------------------------------------------


def rule_cone_two_roofs(rng, case):
    """The hermitian cone does not depend on the roof of representatives used to build it."""
    X = _small(rng)
    Y = _small(rng, lo=X.lo)
    HX, HY = gen.random_structure(rng, X), gen.random_structure(rng, Y)
    f = Roof.from_chain_map(gen.random_chain_map(rng, X, Y))
    c1 = herm_cone(f, HX, HY)
    phi = _metric_phi(f, HX, HY)
    E1, E2 = HX.rep, HY.rep
    M = gen.quasi_isomorphic_copy(rng, E1)
    s = gen.random_quasi_iso(rng, M, E1)
    Hs = cohomology_map(s)
    g = gen.random_chain_map(rng, M, E2, phi={i: phi[i] @ Hs[i] for i in phi if i in Hs})
    c2 = herm_cone(f, HX, HY, via=Roof(M, s, g))
    return abs(structure_distance(c1, c2)), lambda: {"f": f, "HX": HX, "HY": HY, "via": Roof(M, s, g)}


def rule_cone_of_squares(rng, case):
    """cone(cone f' -> cone f) and cone(cone -g' -> cone g) agree after the block permutation."""
    sq = gen.homotopy_square(rng)
    return cone_square_residual(cone_of_squares(*sq)), lambda: dict(zip(("f1", "f", "g1", "g"), sq[:4]))


def rule_torsor(rng, case):
    """distance(H + a, H) = a."""
    X = _small(rng)
    H = gen.random_structure(rng, X)
    a = float(rng.normal() * 2)
    Ha = torsor_add(H, a)
    r = max(abs(structure_distance(Ha, H) - a), abs(structure_distance(Ha, H, exact=True) - a))
    return r, lambda: {"H": H}


def rule_transport(rng, case):
    """Transport along h o f equals transport along f then h."""
    X = _small(rng)
    Y, Z = gen.quasi_isomorphic_copy(rng, X), gen.quasi_isomorphic_copy(rng, X)
    H = gen.random_structure(rng, X)
    f, h = gen.random_iso_roof(rng, X, Y), gen.random_iso_roof(rng, Y, Z)
    t1 = parallel_transport(compose_roofs(f, h), H)
    t2 = parallel_transport(h, parallel_transport(f, H))
    return abs(structure_distance(t1, t2)), lambda: {"H": H, "f": f, "h": h}


# -- point model of smooth morphisms ------------------------------------------------


def rule_associativity(rng, case):
    chain = gen.random_chain(rng, 3)
    return osm.verify_associativity(*chain), lambda: {"chain": chain}


def rule_ambient(rng, case):
    """Ambient metrics on every tangent space compose to the ambient structure."""
    chain = gen.random_chain(rng, 2, structured=False)
    f, g = chain
    gf = osm.ToyMorphism.ambient(f.source, g.target, g.df @ f.df)
    return abs(osm.distance(osm.compose(g, f), gf)), lambda: {"chain": chain}


def rule_submersions(rng, case):
    """For submersions the composite differs from the direct structure by the class of the kernel sequence."""
    f, g, gf = gen.random_submersion_chain(rng)
    eps = osm.epsilon_sequence(f, g, gf)
    from .torsion import tau
    r = abs(osm.distance(osm.compose(g, f), gf) - tau(eps))
    return r, lambda: {"f": f, "g": g, "gf": gf}


def rule_solve_for_f(rng, case):
    """Recovering f from g and g o f, with and without a torsor offset on the composite."""
    f, g = gen.random_chain(rng, 2)
    gf = osm.compose(g, f)
    r = abs(structure_distance(osm.solve_for_f(g, gf, f.df), f.struct))
    a = float(rng.normal())
    S = osm.solve_for_f(g, gf.with_structure(torsor_add(gf.struct, a)), f.df)
    r = max(r, abs(structure_distance(S, f.struct) - a))
    back = osm.compose(g, f.with_structure(S))
    r = max(r, abs(structure_distance(back.struct, gf.struct) - a))
    return r, lambda: {"f": f, "g": g}


# -- genera -------------------------------------------------------------------------


def bernoulli_plus(n: int) -> list[Fraction]:
    """B_0..B_n with B_1 = +1/2, from sum_k C(m+1, k) B_k = 0."""
    B = [Fraction(1)]
    for m in range(1, n + 1):
        B.append(-sum(comb(m + 1, k) * B[k] for k in range(m)) / Fraction(m + 1))
    if n >= 1:
        B[1] = -B[1]
    return B


def todd_oracle(order: int) -> list[Fraction]:
    fact = 1
    out = []
    for k, b in enumerate(bernoulli_plus(order)):
        fact *= max(k, 1)
        out.append(b / fact)
    return out


def _random_series(rng, order, c0):
    coeffs = [Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 10))) for _ in range(order + 1)]
    coeffs[0] = Fraction(c0)
    return genera.TruncSeries(coeffs, order)


def rule_todd(rng, case):
    order = 1 + case % 16
    ok = list(genera.todd_series(order).coeffs) == todd_oracle(order)
    return (0.0 if ok else 1.0), lambda: {"order": order}


def rule_exp_log(rng, case):
    order = 1 + case % 12
    f = _random_series(rng, order, 0)
    g = _random_series(rng, order, 1)
    ok = f.exp().log() == f and g.log().exp() == g
    return (0.0 if ok else 1.0), lambda: {"f": [str(c) for c in f.coeffs], "g": [str(c) for c in g.coeffs]}


def rule_correction(rng, case):
    """((e^x - 1)/x) * x = e^x - 1, and log of the Todd series inverts back."""
    order = 1 + case % 12
    x = genera.TruncSeries.x(order)
    lhs = genera.correction_factor(order) * x
    ok = lhs == genera.exp_x(order) - 1
    td = genera.todd_series(order)
    ok = ok and td.log().exp() == td
    return (0.0 if ok else 1.0), lambda: {"order": order}


RULES = {
    "acyclic-calculus": {name: None for name in acyccalc.RULES},
    "triangle-classes": {
        "iso_composition": rule_iso_composition,
        "rotation": rule_rotation,
        "triangle_routes": rule_triangle_routes,
        "split_triangle": rule_split_triangle,
        "ladder": rule_ladder,
        "grid_3x3": rule_grid,
    },
    "cone-welldef": {
        "two_roofs": rule_cone_two_roofs,
        "cone_of_squares": rule_cone_of_squares,
        "torsor": rule_torsor,
        "transport": rule_transport,
    },
    "osm-assoc": {
        "associativity": rule_associativity,
        "ambient": rule_ambient,
        "submersions": rule_submersions,
        "solve_for_f": rule_solve_for_f,
    },
    "genera": {
        "todd_oracle": rule_todd,
        "exp_log": rule_exp_log,
        "correction_factor": rule_correction,
    },
}

TOLERANCES = {
    ("cone-welldef", "cone_of_squares"): 1e-10,
    ("cone-welldef", "torsor"): 1e-10,
    ("cone-welldef", "transport"): 1e-9,
    ("genera", "todd_oracle"): 0.0,
    ("genera", "exp_log"): 0.0,
    ("genera", "correction_factor"): 0.0,
}
DEFAULT_TOL = 1e-8


def _rule_fn(suite, rule):
    if suite == "acyclic-calculus":
        return acyccalc.RULES[rule]
    return RULES[suite][rule]


def run_case(suite: str, rule: str, seed: int, case: int, tol: float | None = None,
             fault: str | None = None) -> Record:
    """One seeded case.  ``fault`` names a rule to corrupt (a harness self-test)."""
    k = list(RULES[suite]).index(rule)
    rng = gen.rng_for(seed, SUITE_KEYS[suite], k, case)
    res, inputs = _rule_fn(suite, rule)(rng, case)
    res = float(res)
    if fault in (rule, f"{suite}:{rule}", suite, "all"):
        res += 1.0
    limit = TOLERANCES.get((suite, rule), DEFAULT_TOL) if tol is None else tol
    if (suite, rule) in TOLERANCES and TOLERANCES[(suite, rule)] == 0.0:
        limit = 0.0                      # exact checks stay exact
    ok = bool(res <= limit)
    payload = None
    if not ok:
        try:
            payload = safe_payload(inputs())
        except Exception as e:           # a dump must never hide the failure itself
            payload = {"error": f"could not serialize inputs: {e}"}
    return Record(suite, rule, case, res, ok, payload)


def _run_task(args):
    return run_case(*args)


def plan(suite: str, cases: int) -> list[tuple[str, str]]:
    suites = SUITES if suite == "all" else (suite,)
    return [(s, r) for s in suites for r in RULES[s]]


def run_suite(suite: str, seed: int, cases: int, tol: float | None = None, fault: str | None = None,
              jobs: int = 1):
    """Yield records in (suite, rule, case) order."""
    if suite != "all" and suite not in RULES:
        raise KeyError(suite)
    tasks = [(s, r, seed, c, tol, fault) for s, r in plan(suite, cases) for c in range(cases)]
    if jobs <= 1 or len(tasks) < 2:
        for t in tasks:
            yield run_case(*t)
        return
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        yield from ex.map(_run_task, tasks, chunksize=8)


def summarize(records) -> dict:
    out: dict = {}
    for r in records:
        s = out.setdefault((r.suite, r.rule), {"cases": 0, "failures": 0, "max_residual": 0.0})
        s["cases"] += 1
        s["failures"] += 0 if r.passed else 1
        s["max_residual"] = max(s["max_residual"], r.residual)
    return out


def tolerance_for(suite: str, rule: str) -> float:
    return TOLERANCES.get((suite, rule), DEFAULT_TOL)

