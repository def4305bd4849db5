"""KA-classes of acyclic complexes, the acyclic calculus rule engine and the universal-property harness."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import generators as gen
from .hermlin import (
    ChainMap, HermComplex, NotAcyclicError, cone, cone_of_squares, direct_sum, identity, shift, total,
    zero_map,
)
from .torsion import TAU_TOL, tau, tight_roof


@dataclass(frozen=True)
class KAClass:
    value: float

    def __add__(self, other: "KAClass") -> "KAClass":
        return KAClass(self.value + other.value)

    def __neg__(self) -> "KAClass":
        return KAClass(-self.value)

    def __sub__(self, other: "KAClass") -> "KAClass":
        return KAClass(self.value - other.value)

    def is_zero(self, tol: float = TAU_TOL) -> bool:
        return abs(self.value) <= tol


def ka_class(C: HermComplex) -> KAClass:
    """The class of an acyclic complex, as its coordinate tau in KA ≅ R."""
    if not C.hodge.acyclic:
        raise NotAcyclicError("only acyclic complexes have a class in KA")
    return KAClass(tau(C))


def class_residual(C: HermComplex, D: HermComplex) -> float:
    """How far C and D are from having the same class in the semigroup of complexes modulo meager ones.

    Acyclic pair: |tau(C) - tau(D)|.  Otherwise the largest |tau| over the
    cones of an explicit tight roof, or inf when no such roof exists.
    """
    hc, hd = C.hodge, D.hodge
    degs = range(min(C.lo, D.lo), max(C.hi, D.hi) + 1)
    if any(hc.betti(i) != hd.betti(i) for i in degs):
        return float("inf")
    if hc.acyclic:
        return abs(tau(C) - tau(D))
    roof = tight_roof(C, D, tol=float("inf"))
    return max(abs(tau(cone(roof.s))), abs(tau(cone(roof.g))))


# -- rule engine ----------------------------------------------------------------


@dataclass
class RuleResult:
    rule: str
    case: int
    residual: float
    passed: bool
    inputs: Callable[[], dict] | None = None   # lazily built counterexample payload


@dataclass
class CalculusReport:
    results: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def max_residual(self, rule: str | None = None) -> float:
        vals = [r.residual for r in self.results if rule is None or r.rule == rule]
        return max(vals) if vals else 0.0

    def rules(self) -> list[str]:
        return sorted({r.rule for r in self.results})


def _complex(rng, acyclic: bool, **kw) -> HermComplex:
    return gen.random_complex(rng, acyclic=acyclic, max_degrees=4, max_total=14, **kw)


def rule_inverse(rng, case):
    """[E[1]] = -[E]; E + E[1] is meager."""
    E = _complex(rng, True)
    r = max(abs(tau(shift(E, 1)) + tau(E)), abs(tau(direct_sum(E, shift(E, 1)))))
    return r, lambda: {"E": E}


def rule_cone_acyclic_source(rng, case):
    """E acyclic: [cone(f)] = [F] - [E]."""
    E = _complex(rng, True)
    F = _complex(rng, case % 2 == 0, lo=E.lo)
    f = gen.random_chain_map(rng, E, F)
    r = class_residual(cone(f), direct_sum(F, shift(E, 1)))
    if case % 2 == 0:
        r = max(r, abs(tau(cone(f)) - (tau(F) - tau(E))))
    return r, lambda: {"f": f}


def rule_cone_acyclic_target(rng, case):
    """F acyclic: [cone(f)] = [F] + [E[1]]."""
    F = _complex(rng, True)
    E = _complex(rng, case % 2 == 0, lo=F.lo)
    f = gen.random_chain_map(rng, E, F)
    r = class_residual(cone(f), direct_sum(F, shift(E, 1)))
    if case % 2 == 0:
        r = max(r, abs(tau(cone(f)) - (tau(F) + tau(shift(E, 1)))))
    return r, lambda: {"f": f}


def rule_cone_of_cones(rng, case):
    """[cone(cone(f'), cone(f))] = [cone(cone(-g'), cone(g))] for a homotopy-commutative square."""
    f1, f, g1, g, h = gen.homotopy_square(rng, acyclic=case % 2 == 0)
    sq = cone_of_squares(f1, f, g1, g, h)
    A, B = cone(sq.psi), cone(sq.phi)
    r = class_residual(A, B)
    return r, lambda: {"f1": f1, "f": f, "g1": g1, "g": g, "h": h}


def rule_composition(rng, case):
    """One of f, g a quasi-isomorphism: [cone(gf)] = [cone g] + [cone f], plus the two cone-of-cone identities."""
    acyclic = case % 3 == 0
    E = _complex(rng, acyclic)
    F = gen.quasi_isomorphic_copy(rng, E)
    f = gen.random_chain_map(rng, E, F, quasi_iso=True)
    G = _complex(rng, acyclic or case % 3 == 1, lo=E.lo)
    g = gen.random_chain_map(rng, F, G)
    if case % 2:
        # make g the quasi-isomorphism instead
        G = gen.quasi_isomorphic_copy(rng, F)
        g = gen.random_chain_map(rng, F, G, quasi_iso=True)
        f = gen.random_chain_map(rng, E, F)
    gf = g @ f
    r = class_residual(cone(gf), direct_sum(cone(g), cone(f)))
    Cgf, Cg, Cf = cone(gf), cone(g), cone(f)
    a = ChainMap(Cgf, Cg, {i: _blockdiag(f.at(i + 1), np.eye(G.dim(i))) for i in Cgf.degrees})
    b = ChainMap(Cf, Cgf, {i: _blockdiag(np.eye(E.dim(i + 1)), g.at(i)) for i in Cf.degrees})
    r = max(r, a.chain_residual(), b.chain_residual())
    r = max(r, class_residual(cone(a), shift(Cf, 1)))
    r = max(r, class_residual(cone(b), Cg))
    if acyclic:
        r = max(r, abs(tau(Cgf) - tau(Cg) - tau(Cf)))
    return r, lambda: {"f": f, "g": g}


def _blockdiag(a, b):
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]), dtype=complex)
    out[:a.shape[0], :a.shape[1]] = a
    out[a.shape[0]:, a.shape[1]:] = b
    return out


def rule_ses(rng, case):
    """0 -> E -> F -> G -> 0 orthogonally split, E or G acyclic: [F] = [E] + [G]."""
    both = case % 2 == 0
    if case % 4 < 2:
        E = _complex(rng, True)
        G = _complex(rng, both, lo=E.lo)
    else:
        G = _complex(rng, True)
        E = _complex(rng, both, lo=G.lo)
    theta = gen.random_chain_map(rng, shift(G, -1), E)
    F = cone(theta)                    # F^i = G^i + E^i, orthogonally
    r = class_residual(F, direct_sum(E, G))
    if both:
        r = max(r, abs(tau(F) - tau(E) - tau(G)))
    return r, lambda: {"theta": theta}


def rule_double_complex(rng, case):
    """Acyclic rows and columns: sum (-1)^k [column k] = [Tot] = sum (-1)^k [row k]."""
    D = gen.acyclic_double_complex(rng)
    t = tau(total(D))
    cols = sum((-1) ** (p % 2) * tau(D.column(p)) for p in D.prange)
    rows = sum((-1) ** (q % 2) * tau(D.row(q)) for q in D.qrange)
    r = max(abs(t - cols), abs(t - rows))
    return r, lambda: {"total": total(D)}


def rule_negative_control(rng, case):
    """Non-acyclic E: cone(0) and cone(Id) must NOT share a class.

    Residual 0 means the naive extension of the cone rule fails, as it must.
    """
    E = _complex(rng, False)
    while E.hodge.acyclic:
        E = _complex(rng, False)
    same = class_residual(cone(zero_map(E, E)), cone(identity(E))) <= TAU_TOL
    return (1.0 if same else 0.0), lambda: {"E": E}


RULES = {
    "inverse": rule_inverse,
    "cone_acyclic_source": rule_cone_acyclic_source,
    "cone_acyclic_target": rule_cone_acyclic_target,
    "cone_of_cones": rule_cone_of_cones,
    "composition": rule_composition,
    "ses_additivity": rule_ses,
    "double_complex": rule_double_complex,
    "negative_control": rule_negative_control,
}


def verify_calculus(seed: int, cases: int, tol: float = 1e-8, rules: list[str] | None = None,
                    suite_key: int = 1) -> CalculusReport:
    report = CalculusReport()
    for k, name in enumerate(RULES):
        if rules is not None and name not in rules:
            continue
        fn = RULES[name]
        for case in range(cases):
            rng = gen.rng_for(seed, suite_key, k, case)
            r, inputs = fn(rng, case)
            report.results.append(RuleResult(name, case, float(r), bool(r <= tol), inputs))
    return report


# -- universal property ---------------------------------------------------------


@dataclass
class FactorizationReport:
    axioms_ok: bool
    failed_axiom: str | None
    axiom_residual: float
    max_delta: float
    pairs: int
    passed: bool


def _normalization_instance(rng) -> HermComplex:
    deg = int(rng.integers(-2, 3))
    A = HermComplex({deg: gen.gram(rng, int(rng.integers(1, 4)))})
    return cone(identity(A))


def _split_ses_instance(rng):
    E = _complex(rng, True)
    G = _complex(rng, True, lo=E.lo)
    theta = gen.random_chain_map(rng, shift(G, -1), E)
    return E, cone(theta), G


def _equal_class_pair(rng, case):
    C = _complex(rng, True)
    t = tau(C)
    if case % 3 == 0:
        D = direct_sum(HermComplex.exp_generator(t), gen.meager_by_closure(rng, steps=2))
    elif case % 3 == 1:
        C2 = _complex(rng, True)
        D = direct_sum(C2, HermComplex.exp_generator(t - tau(C2)))
    else:
        D = shift(direct_sum(shift(C, -1), gen.m0_member(rng)), 1)
    return C, gen.recoordinatize(rng, D)


def universal_factorization(phi: Callable[[HermComplex], float], seed: int = 0, cases: int = 50,
                            tol: float = 1e-9) -> FactorizationReport:
    """Test the two axioms on generated instances, then factorization through KA on equal-class pairs."""
    worst = 0.0
    for case in range(cases):
        rng = gen.rng_for(seed, 7, 0, case)
        v = abs(phi(_normalization_instance(rng)))
        worst = max(worst, v)
        if v > tol:
            return FactorizationReport(False, "normalization", v, float("nan"), 0, False)
    for case in range(cases):
        rng = gen.rng_for(seed, 7, 1, case)
        E, F, G = _split_ses_instance(rng)
        v = abs(phi(F) - phi(E) - phi(G))
        worst = max(worst, v)
        if v > tol:
            return FactorizationReport(False, "additivity", v, float("nan"), 0, False)
    delta = 0.0
    for case in range(cases):
        rng = gen.rng_for(seed, 7, 2, case)
        C, D = _equal_class_pair(rng, case)
        delta = max(delta, abs(phi(C) - phi(D)))
    return FactorizationReport(True, None, worst, delta, cases, delta <= tol)
