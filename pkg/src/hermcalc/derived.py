"""Hermitian structures on derived objects at the point.

A derived morphism is a roof ``source <-s- middle -g-> target`` with ``s`` a
quasi-isomorphism.  Over a field every complex splits, so two roofs give the
same derived morphism exactly when they induce the same maps on cohomology;
that shortcut is specific to the point and is what ``morphisms_equal`` uses.

A hermitian structure on an object X is a hermitian complex E (the metric
representative) together with an isomorphism E -> X in the derived category,
stored as a roof.  Structures on X form a torsor under KA = R.

Classes of isomorphisms are computed two ways.  The default route works in
harmonic orthonormal bases: for an isomorphism E1 -> E2 of hermitian complexes
inducing Phi on cohomology,

    [f] = tau_acyc(E2) - tau_acyc(E1) - sum_j (-1)^j log|det Phi^j|,

where tau_acyc is the torsion of the acyclic part of the Hodge splitting.
``exact=True`` instead composes actual roofs and evaluates
tau(cone g) - tau(cone s).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hermlin import (
    ChainMap, ComplexError, HermComplex, PreconditionError, canonical_chain_map, cohomology_map, cone,
    direct_sum, direct_sum_maps, hom_maps, identity, null_homotopy, same_complex, shift, shift_map,
    tensor_maps, unit,
)
from .torsion import tau

CLASS_TOL = 1e-8
_SAME = 1e-12


def _require_same(C: HermComplex, D: HermComplex, what: str):
    if not same_complex(C, D, atol=_SAME):
        raise ComplexError(f"{what}: complexes do not match")


def _is_identity(f: ChainMap) -> bool:
    if f.source is not f.target:
        return False
    return all(np.array_equal(f.at(i), np.eye(f.source.dim(i))) for i in f.source.degrees)


# -- roofs ------------------------------------------------------------------------


@dataclass(frozen=True)
class Roof:
    """source <-s- middle -g-> target, representing g s^{-1}."""
    middle: HermComplex
    s: ChainMap
    g: ChainMap

    @classmethod
    def from_chain_map(cls, f: ChainMap) -> "Roof":
        return cls(f.source, identity(f.source), f)

    @classmethod
    def identity(cls, X: HermComplex) -> "Roof":
        return cls.from_chain_map(identity(X))

    @property
    def source(self) -> HermComplex:
        return self.s.target

    @property
    def target(self) -> HermComplex:
        return self.g.target

    @property
    def is_chain_map(self) -> bool:
        return _is_identity(self.s)

    def inverse(self) -> "Roof":
        return Roof(self.middle, self.g, self.s)

    def shifted(self, k: int) -> "Roof":
        s = shift_map(self.s, k)
        return Roof(s.source, s, ChainMap(s.source, shift(self.target, k),
                                          {i - k: m for i, m in self.g.maps.items()}))

    def negated(self) -> "Roof":
        return Roof(self.middle, self.s, -self.g)

    def check(self, tol: float = 1e-9) -> "Roof":
        self.s.check(tol)
        self.g.check(tol)
        if not self.s.is_quasi_isomorphism():
            raise PreconditionError("the left leg of the roof is not a quasi-isomorphism")
        return self

    def is_isomorphism(self) -> bool:
        return self.g.is_quasi_isomorphism()


def roof_cohomology(r: Roof) -> dict[int, np.ndarray]:
    """H(g) H(s)^{-1} in harmonic orthonormal bases, degree by degree."""
    cached = r.__dict__.get("_cohomology")
    if cached is None:
        cached = _roof_cohomology(r)
        r.__dict__["_cohomology"] = cached     # roofs are immutable, so this memo never goes stale
    return dict(cached)


def _roof_cohomology(r: Roof) -> dict[int, np.ndarray]:
    Hs, Hg = cohomology_map(r.s), cohomology_map(r.g)
    S, T = r.source, r.target
    out = {}
    for i in range(min(S.lo, T.lo), max(S.hi, T.hi) + 1):
        a, b = S.hodge.betti(i), T.hodge.betti(i)
        if not (a and b):
            out[i] = np.zeros((b, a), dtype=complex)
            continue
        hs = Hs[i]
        if hs.shape[0] != hs.shape[1] or np.linalg.matrix_rank(hs, tol=1e-8) < hs.shape[0]:
            raise PreconditionError(f"left leg of the roof is not invertible on H^{i}")
        out[i] = Hg[i] @ np.linalg.inv(hs)
    return out


def chain_rep(r: Roof) -> ChainMap:
    """A chain map source -> target representing the roof."""
    if r.is_chain_map:
        return r.g
    return canonical_chain_map(r.source, r.target, roof_cohomology(r))


def compose_roofs(r1: Roof, r2: Roof) -> Roof:
    """r2 o r1, through the homotopy pullback of the inner legs.

    The middle is P = cone((g1, -s2): M1 + M2 -> B)[-1] with its orthogonal
    metric; P projects onto M1 by a quasi-isomorphism because s2 is one.
    """
    _require_same(r1.target, r2.source, "compose_roofs endpoints")
    if r2.is_chain_map:
        return Roof(r1.middle, r1.s, ChainMap(r1.middle, r2.target,
                                              {i: r2.g.at(i) @ r1.g.at(i) for i in r1.g.degrees}))
    M1, M2, B = r1.middle, r2.middle, r2.source
    S = direct_sum(M1, M2)
    h = ChainMap(S, B, {i: np.hstack([r1.g.at(i), -r2.s.at(i)]) for i in range(S.lo, S.hi + 1)})
    P = shift(cone(h), -1)             # P^i = M1^i + M2^i + B^{i-1}
    pr1 = ChainMap(P, M1, {i: _select(P, i, 0, M1.dim(i)) for i in P.degrees})
    pr2 = ChainMap(P, M2, {i: _select(P, i, M1.dim(i), M2.dim(i)) for i in P.degrees})
    return Roof(P, r1.s @ pr1, r2.g @ pr2)


def _select(P: HermComplex, i: int, offset: int, n: int) -> np.ndarray:
    m = np.zeros((n, P.dim(i)), dtype=complex)
    m[:, offset:offset + n] = np.eye(n)
    return m


def morphisms_equal(r1: Roof, r2: Roof, tol: float = 1e-8) -> bool:
    """Equality in the derived category of the point, decided on cohomology."""
    _require_same(r1.source, r2.source, "morphisms_equal sources")
    _require_same(r1.target, r2.target, "morphisms_equal targets")
    h1, h2 = roof_cohomology(r1), roof_cohomology(r2)
    for i in set(h1) | set(h2):
        a, b = h1.get(i), h2.get(i)
        if a is None or b is None or a.shape != b.shape:
            return False
        if a.size and np.max(np.abs(a - b)) > tol * max(1.0, np.max(np.abs(a)), np.max(np.abs(b))):
            return False
    return True


def class_of_iso(r: Roof) -> float:
    """tau(cone g) - tau(cone s) for a roof of hermitian complexes whose legs are both quasi-isomorphisms."""
    if not r.g.is_quasi_isomorphism():
        raise PreconditionError("the right leg is not a quasi-isomorphism")
    return tau(cone(r.g)) - tau(cone(r.s))


def class_from_cohomology(E1: HermComplex, E2: HermComplex, phi: dict) -> float:
    """Class of an isomorphism E1 -> E2 inducing phi on harmonic orthonormal coordinates."""
    total = E2.hodge.torsion_sum() - E1.hodge.torsion_sum()
    for i in range(min(E1.lo, E2.lo), max(E1.hi, E2.hi) + 1):
        a, b = E1.hodge.betti(i), E2.hodge.betti(i)
        if a != b:
            raise PreconditionError(f"not an isomorphism on H^{i} ({a} vs {b})")
        if not a:
            continue
        sign, logdet = np.linalg.slogdet(phi[i])
        if sign == 0 or not np.isfinite(logdet):
            raise PreconditionError(f"map on H^{i} is singular")
        total -= (-1) ** (i % 2) * float(logdet)
    return float(total)


def class_of_iso_cohomology(r: Roof) -> float:
    return class_from_cohomology(r.source, r.target, roof_cohomology(r))


# -- hermitian structures ---------------------------------------------------------


@dataclass(frozen=True)
class HermStructure:
    """The metric representative ``rep`` with the isomorphism ``roof: rep -> underlying``."""
    underlying: HermComplex
    rep: HermComplex
    roof: Roof

    @classmethod
    def native(cls, E: HermComplex) -> "HermStructure":
        return cls(E, E, Roof.identity(E))

    @classmethod
    def via_map(cls, q: ChainMap) -> "HermStructure":
        """The structure on q.target carried by a quasi-isomorphism q: rep -> target."""
        return cls(q.target, q.source, Roof.from_chain_map(q))

    @classmethod
    def trivial(cls, X: HermComplex) -> "HermStructure":
        """The trivial structure on an acyclic complex: represented by the zero complex."""
        if not X.hodge.acyclic:
            raise PreconditionError("only acyclic complexes carry the trivial structure")
        Z = HermComplex.zero()
        return cls(X, Z, Roof(Z, identity(Z), ChainMap(Z, X, {})))

    def check(self) -> "HermStructure":
        _require_same(self.roof.source, self.rep, "structure roof source")
        _require_same(self.roof.target, self.underlying, "structure roof target")
        self.roof.check()
        if not self.roof.is_isomorphism():
            raise PreconditionError("structure roof is not an isomorphism")
        return self

    def cohomology(self) -> dict[int, np.ndarray]:
        return roof_cohomology(self.roof)


def iso_class(f: Roof, H1: HermStructure, H2: HermStructure, exact: bool = False) -> float:
    """[f] for an isomorphism f: H1 -> H2 of hermitian objects."""
    _require_same(f.source, H1.underlying, "iso_class source")
    _require_same(f.target, H2.underlying, "iso_class target")
    if exact:
        r = compose_roofs(compose_roofs(H1.roof, f), H2.roof.inverse())
        return class_of_iso(r)
    A, F, B = H1.cohomology(), roof_cohomology(f), H2.cohomology()
    phi = {}
    for i in set(A) | set(F) | set(B):
        b = B.get(i)
        if b is None or not b.size:
            continue
        phi[i] = np.linalg.solve(b, F[i] @ A[i])
    return class_from_cohomology(H1.rep, H2.rep, phi)


def structure_distance(H1: HermStructure, H2: HermStructure, exact: bool = False) -> float:
    """H1 - H2: the class of the identity of the underlying object, read as H2 -> H1."""
    _require_same(H1.underlying, H2.underlying, "structure_distance: mismatched underlying objects")
    return iso_class(Roof.identity(H2.underlying), H2, H1, exact=exact)


def torsor_add(H: HermStructure, a: float) -> HermStructure:
    """H + a: append the acyclic summand e^a to the representative."""
    A = HermComplex.exp_generator(a)
    r = H.roof
    M = direct_sum(r.middle, A)
    s = direct_sum_maps(r.s, identity(A))
    g = ChainMap(M, H.underlying, {i: np.hstack([r.g.at(i), np.zeros((H.underlying.dim(i), A.dim(i)))])
                                   for i in range(M.lo, M.hi + 1)})
    return HermStructure(H.underlying, s.target, Roof(M, s, g))


def parallel_transport(f: Roof, H: HermStructure) -> HermStructure:
    """The structure on f.target making f tight."""
    _require_same(f.source, H.underlying, "parallel_transport source")
    return HermStructure(f.target, H.rep, compose_roofs(H.roof, f))


def structure_class(H: HermStructure) -> float:
    """The KA coordinate of a structure on an acyclic object."""
    if not H.underlying.hodge.acyclic:
        raise PreconditionError("structure_class needs an acyclic underlying object")
    return tau(H.rep)


def shift_structure(H: HermStructure, k: int) -> HermStructure:
    return HermStructure(shift(H.underlying, k), shift(H.rep, k), H.roof.shifted(k))


def direct_sum_structures(*Hs: HermStructure) -> HermStructure:
    rs = [H.roof for H in Hs]
    s = direct_sum_maps(*(r.s for r in rs))
    g = direct_sum_maps(*(r.g for r in rs))
    return HermStructure(g.target, s.target, Roof(s.source, s, g))


# -- hermitian cone -----------------------------------------------------------------


def _metric_phi(f: Roof, H1: HermStructure, H2: HermStructure) -> dict:
    A, F, B = H1.cohomology(), roof_cohomology(f), H2.cohomology()
    E1, E2 = H1.rep, H2.rep
    out = {}
    for i in range(min(E1.lo, E2.lo), max(E1.hi, E2.hi) + 1):
        a, b = E1.hodge.betti(i), E2.hodge.betti(i)
        if a and b:
            out[i] = np.linalg.solve(B[i], F[i] @ A[i])
    return out


def _lift(E: HermComplex, r: Roof, pre: ChainMap | None = None) -> ChainMap:
    """A chain map representing r o pre (pre a chain map into r.source)."""
    if r.is_chain_map:
        return r.g if pre is None else r.g @ pre
    H = roof_cohomology(r)
    if pre is None:
        return canonical_chain_map(E, r.target, H)
    P = cohomology_map(pre)
    return canonical_chain_map(pre.source, r.target,
                               {i: H[i] @ P[i] for i in P if i in H and P[i].size and H[i].size})


def herm_cone(f: Roof, H1: HermStructure, H2: HermStructure, via: Roof | None = None) -> HermStructure:
    """The hermitian cone of f: H1 -> H2.

    With ``via = (M, s, g)`` a roof of representatives realizing f, the
    representative is cone(s)[1] + cone(g); its isomorphism onto cone(f_c),
    f_c a chain representative of f, is zero on the acyclic first summand and
    the map of cones induced by a homotopy-commutative square on the second.
    """
    _require_same(f.source, H1.underlying, "herm_cone source")
    _require_same(f.target, H2.underlying, "herm_cone target")
    X1 = H1.underlying
    fc = chain_rep(f)
    phi = _metric_phi(f, H1, H2)
    E1, E2 = H1.rep, H2.rep
    if via is None:
        via = Roof.from_chain_map(canonical_chain_map(E1, E2, phi))
    else:
        _require_same(via.source, E1, "herm_cone via source")
        _require_same(via.target, E2, "herm_cone via target")
        H = roof_cohomology(via)
        for i, m in phi.items():
            if np.max(np.abs(H[i] - m)) > 1e-8 * max(1.0, np.max(np.abs(m))):
                raise PreconditionError("the roof of representatives does not realize f")
    M, s, g = via.middle, via.s, via.g
    a = _lift(M, H1.roof, s)
    b = _lift(E2, H2.roof)
    h = null_homotopy(b @ g - fc @ a)
    Cg, Cf = cone(g), cone(fc)
    Cs1 = shift(cone(s), 1)
    Cbar = direct_sum(Cs1, Cg)
    alpha = {}
    for i in range(min(Cbar.lo, Cf.lo), max(Cbar.hi, Cf.hi) + 1):
        if not (Cbar.dim(i) and Cf.dim(i)):
            continue
        psi = np.block([[a.at(i + 1), np.zeros((X1.dim(i + 1), E2.dim(i)))],
                        [h.at(i + 1), b.at(i)]])
        alpha[i] = np.hstack([np.zeros((Cf.dim(i), Cs1.dim(i))), psi])
    return HermStructure(Cf, Cbar, Roof.from_chain_map(ChainMap(Cbar, Cf, alpha)))


# -- triangles ----------------------------------------------------------------------


@dataclass(frozen=True)
class HermTriangle:
    """A -u-> B -v-> C -w-> A[1] with hermitian structures on A, B, C."""
    A: HermStructure
    B: HermStructure
    C: HermStructure
    u: Roof
    v: Roof
    w: Roof

    def rotate(self) -> "HermTriangle":
        """B -v-> C -w-> A[1] -(-u[1])-> B[1]."""
        return HermTriangle(self.B, self.C, shift_structure(self.A, 1), self.v, self.w,
                            self.u.shifted(1).negated())


@dataclass
class TriangleComparison:
    cone: HermStructure          # hermitian cone of u
    alpha: dict                  # cohomology of the comparison cone(u) -> C
    residual: float
    exact_sequence: bool
    value: float
    alternative: float | None    # class computed from a second admissible alpha


def _solve_alpha(Hi, Hv, Hw, Hp):
    """Least squares for alpha with alpha Hi = Hv and Hw alpha = Hp."""
    nC, nY = Hv.shape[0], Hi.shape[0]
    rows, rhs = [], []
    if Hi.shape[1]:
        rows.append(np.kron(Hi.T, np.eye(nC)))
        rhs.append(Hv.reshape(-1, order="F"))
    if Hw.shape[0]:
        rows.append(np.kron(np.eye(nY), Hw))
        rhs.append(Hp.reshape(-1, order="F"))
    if not rows:
        return np.zeros((nC, nY), dtype=complex), 0.0, np.zeros((nC * nY, nC * nY), dtype=complex)
    K = np.vstack(rows)
    y = np.concatenate(rhs)
    x = np.linalg.lstsq(K, y, rcond=None)[0]
    res = float(np.linalg.norm(K @ x - y) / max(1.0, np.linalg.norm(y)))
    _, s, vh = np.linalg.svd(K)
    r = int(np.sum(s > 1e-10 * max(1.0, s[0] if s.size else 0.0)))
    null = vh[r:].conj().T
    return x.reshape((nC, nY), order="F"), res, null


def _les_exact(Hu, Hv, Hw, degs, tol=1e-8) -> bool:
    """Exactness of ... H(A) -> H(B) -> H(C) -> H(A[1]) -> ... at B, C and A[1]."""
    def rank(m):
        return 0 if not m.size else int(np.linalg.matrix_rank(m, tol=tol * max(1.0, np.max(np.abs(m)))))

    for i in degs:
        u, v, w = Hu.get(i), Hv.get(i), Hw.get(i)
        u_next = Hu.get(i + 1)
        for first, second in ((u, v), (v, w)):
            if first is None or second is None or not first.size or not second.size:
                continue
            if np.max(np.abs(second @ first)) > tol * max(1.0, np.max(np.abs(first)), np.max(np.abs(second))):
                return False
        # dim ker = rank of incoming
        if v is not None and u is not None and v.shape[1] - rank(v) != rank(u):
            return False
        if w is not None and v is not None and w.shape[1] - rank(w) != rank(v):
            return False
        if u_next is not None and w is not None and u_next.shape[1] - rank(u_next) != rank(w):
            return False
    return True


def compare_triangle(T: HermTriangle, tol: float = CLASS_TOL, rng=None,
                     alternative: bool = True) -> TriangleComparison:
    XA, XB, XC = T.A.underlying, T.B.underlying, T.C.underlying
    _require_same(T.u.source, XA, "u source")
    _require_same(T.u.target, XB, "u target")
    _require_same(T.v.source, XB, "v source")
    _require_same(T.v.target, XC, "v target")
    _require_same(T.w.source, XC, "w source")
    XA1 = T.w.target
    _require_same(XA1, shift(XA, 1), "w target")
    Hc = herm_cone(T.u, T.A, T.B)
    Y = Hc.underlying
    iota = ChainMap(XB, Y, {i: np.vstack([np.zeros((XA.dim(i + 1), XB.dim(i))), np.eye(XB.dim(i))])
                            for i in XB.degrees if Y.dim(i)})
    pi = ChainMap(Y, XA1, {i: np.hstack([np.eye(XA.dim(i + 1)), np.zeros((XA.dim(i + 1), XB.dim(i)))])
                           for i in Y.degrees if XA1.dim(i)})
    Hi, Hp = cohomology_map(iota), cohomology_map(pi)
    Hu, Hv, Hw = roof_cohomology(T.u), roof_cohomology(T.v), roof_cohomology(T.w)
    degs = range(min(XA1.lo, XB.lo, XC.lo, Y.lo), max(XA.hi, XB.hi, XC.hi, Y.hi) + 1)

    def get(H, i, rows, cols):
        m = H.get(i)
        return np.zeros((rows, cols), dtype=complex) if m is None else m

    alpha, alt, worst = {}, {}, 0.0
    for i in degs:
        bY, bC = Y.hodge.betti(i), XC.hodge.betti(i)
        bB, bA1 = XB.hodge.betti(i), XA1.hodge.betti(i)
        if not (bY or bC):
            continue
        if bY != bC:
            raise PreconditionError(f"not distinguished: H^{i} of the cone and of the third vertex differ")
        a, res, null = _solve_alpha(get(Hi, i, bY, bB), get(Hv, i, bC, bB), get(Hw, i, bA1, bC),
                                    get(Hp, i, bA1, bY))
        worst = max(worst, res)
        alpha[i] = a
        if alternative and null.shape[1]:
            gen = rng if rng is not None else np.random.default_rng(i + 1000)
            c = gen.standard_normal(null.shape[1]) + 1j * gen.standard_normal(null.shape[1])
            alt[i] = a + (null @ c).reshape(a.shape, order="F") * 0.5
        else:
            alt[i] = a
    if worst > tol:
        raise PreconditionError(f"not distinguished: no comparison map (residual {worst:.3e})")
    exact = _les_exact(Hu, Hv, Hw, degs)
    value = _comparison_class(Hc, T.C, alpha)
    other = None
    if alternative:
        try:
            other = _comparison_class(Hc, T.C, alt)
        except PreconditionError:
            pass
    return TriangleComparison(Hc, alpha, worst, exact, value, other)


def _comparison_class(Hc: HermStructure, C: HermStructure, alpha: dict) -> float:
    A, B = Hc.cohomology(), C.cohomology()
    phi = {}
    for i, m in alpha.items():
        if m.size:
            phi[i] = np.linalg.solve(B[i], m @ A[i])
    return class_from_cohomology(Hc.rep, C.rep, phi)


def is_distinguished(T: HermTriangle) -> bool:
    try:
        cmp = compare_triangle(T, alternative=False)
    except PreconditionError:
        return False
    return cmp.exact_sequence


def class_of_triangle(T: HermTriangle, exact: bool = False) -> float:
    """[T] = [alpha] for the comparison isomorphism alpha from the hermitian cone of u to C."""
    cmp = compare_triangle(T, alternative=False)
    if not cmp.exact_sequence:
        raise PreconditionError("not distinguished: long exact sequence fails")
    if not exact:
        return cmp.value
    Y, XC = cmp.cone.underlying, T.C.underlying
    a = canonical_chain_map(Y, XC, cmp.alpha)
    return iso_class(Roof.from_chain_map(a), cmp.cone, T.C, exact=True)


# -- tensor, hom, dual ---------------------------------------------------------------


def tensor_structures(H1: HermStructure, H2: HermStructure) -> HermStructure:
    q = tensor_maps(chain_rep(H1.roof), chain_rep(H2.roof))
    return HermStructure.via_map(q)


def _quasi_inverse(q: ChainMap) -> ChainMap:
    H = cohomology_map(q)
    return canonical_chain_map(q.target, q.source, {i: np.linalg.inv(m) for i, m in H.items() if m.size})


def hom_structures(H1: HermStructure, H2: HermStructure) -> HermStructure:
    """Hom(E1, E2) -> Hom(X1, X2), phi -> q2 phi q1^{-1}."""
    q1, q2 = chain_rep(H1.roof), chain_rep(H2.roof)
    return HermStructure.via_map(hom_maps(_quasi_inverse(q1), q2))


def dual_structure(H: HermStructure) -> HermStructure:
    return hom_structures(H, HermStructure.native(unit()))


# -- complexes of objects ----------------------------------------------------------


def _as_chain(m, X: HermComplex, Y: HermComplex) -> ChainMap:
    if isinstance(m, Roof):
        return chain_rep(m)
    if isinstance(m, ChainMap):
        return m
    return ChainMap(X, Y, {0: np.asarray(m, dtype=complex)})


def class_of_object_complex(objects: list[HermStructure], maps: list, lo: int = 0) -> HermStructure:
    """The object of a complex X^lo -> ... -> X^hi of hermitian objects placed in degree 0.

    Recursively the hermitian cone of X^lo[-lo-1] -> [rest], where the map is
    the first differential; the cone sits in degrees lo..hi.
    """
    if len(maps) != len(objects) - 1:
        raise ComplexError("need one connecting map between consecutive objects")
    for H in objects:
        if H.underlying.lo != 0 or H.underlying.hi != 0:
            raise ComplexError("objects must be concentrated in degree 0")
    chains = [_as_chain(m, objects[k].underlying, objects[k + 1].underlying) for k, m in enumerate(maps)]
    for k in range(len(chains) - 1):
        comp = chains[k + 1].at(0) @ chains[k].at(0)
        scale = max([1.0] + [float(np.max(np.abs(c.at(0)))) for c in chains[k:k + 2] if c.at(0).size])
        if comp.size and np.max(np.abs(comp)) > 1e-8 * scale:
            raise ComplexError(f"consecutive maps {k}, {k + 1} do not compose to zero")
    return _object_complex(objects, chains, lo)


def _object_complex(objects, chains, lo):
    if len(objects) == 1:
        return shift_structure(objects[0], -lo)
    rest = _object_complex(objects[1:], chains[1:], lo + 1)
    src = shift_structure(objects[0], -lo - 1)
    T = rest.underlying
    delta = ChainMap(src.underlying, T, {lo + 1: chains[0].at(0)} if T.dim(lo + 1) else {})
    return herm_cone(Roof.from_chain_map(delta), src, rest)


def object_complex_class(objects: list[HermStructure], maps: list, lo: int = 0) -> float:
    """KA coordinate of an exact complex of hermitian objects."""
    return structure_class(class_of_object_complex(objects, maps, lo))


def cohomology_induced_structure(C: HermComplex, metrics: dict, reps: dict | None = None) -> HermStructure:
    """The structure on C induced by hermitian metrics on its cohomology.

    ``metrics[i]`` is a gram on H^i in the basis given by ``reps[i]`` (cycle
    representatives, columns in C^i); by default the harmonic orthonormal
    basis.  The recursion truncates at the top cohomology degree m, takes the
    hermitian cone of 0: H^m[-m-1] -> F~ where F~ ends with im d^{m-1}, and
    transports along the quasi-isomorphism cone -> C.
    """
    hd = C.hodge
    reps = dict(reps) if reps is not None else {}
    for i in C.degrees:
        b = hd.betti(i)
        g = metrics.get(i)
        if b and (g is None or np.asarray(g).shape != (b, b)):
            raise ComplexError(f"cohomology metric in degree {i} must be {b}x{b}")
        if not b and g is not None and np.asarray(g).size:
            raise ComplexError(f"H^{i} vanishes but a metric was supplied")
        if b and i not in reps:
            reps[i] = hd.harmonic[i]
    return _induced(C, {i: np.asarray(g, dtype=complex) for i, g in metrics.items()}, reps)


def _induced(C: HermComplex, metrics: dict, reps: dict) -> HermStructure:
    hd = C.hodge
    tops = [i for i in C.degrees if hd.betti(i)]
    if not tops:
        return HermStructure.trivial(C)
    m = max(tops)
    B = hd.boundary[m]                      # gram-orthonormal basis of im d^{m-1}
    nb = B.shape[1]
    grams = {i: C.gram(i) for i in range(C.lo, m)}
    grams[m] = np.eye(nb)
    diffs = {i: C.d(i) for i in range(C.lo, m - 1)}
    if m - 1 >= C.lo:
        diffs[m - 1] = B.conj().T @ C.gram(m) @ C.d(m - 1)
    Ft = HermComplex(grams, diffs, C.lo, m)
    sub = _induced(Ft, metrics, reps)
    Hm = HermComplex({m + 1: metrics[m]})
    zero = Roof.from_chain_map(ChainMap(Hm, Ft, {}))
    hc = herm_cone(zero, HermStructure.native(Hm), sub)
    Y = hc.underlying                       # Y^m = H^m + im d^{m-1}, Y^i = C^i below
    beta = {}
    for i in range(Y.lo, Y.hi + 1):
        if not (Y.dim(i) and C.dim(i)):
            continue
        if i == m:
            beta[i] = np.hstack([reps[m], B])
        elif i < m:
            beta[i] = np.eye(C.dim(i))
    return parallel_transport(Roof.from_chain_map(ChainMap(Y, C, beta)), hc)
