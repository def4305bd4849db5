"""A point model of smooth varieties with hermitian structures on tangent complexes.

A space is a single tangent fiber; a morphism f: X -> Y is a linear map
df: T_X -> T_Y together with a hermitian structure on the tangent complex
T_f = [T_X -df-> T_Y] (degrees 0 and 1).  Pullback along f is the identity
on fiber data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .derived import (
    HermStructure, Roof, _solve_alpha, chain_rep, herm_cone, parallel_transport, roof_cohomology,
    shift_structure, structure_distance,
)
from .hermlin import (
    ChainMap, ComplexError, HermComplex, HermSpace, PreconditionError, _gram_orth_complement,
    canonical_chain_map, cohomology_map, cone, shift, shift_map,
)

OSM_TOL = 1e-8


@dataclass(frozen=True)
class ToySpace:
    label: str
    tangent: HermSpace

    @property
    def dim(self) -> int:
        return self.tangent.dim


def tangent_complex(df, X: ToySpace, Y: ToySpace) -> HermComplex:
    df = np.asarray(df, dtype=complex)
    if df.shape != (Y.dim, X.dim):
        raise ComplexError(f"df has shape {df.shape}, expected {(Y.dim, X.dim)}")
    return HermComplex({0: X.tangent, 1: Y.tangent}, {0: df}, 0, 1)


@dataclass(frozen=True)
class ToyMorphism:
    source: ToySpace
    target: ToySpace
    df: np.ndarray
    struct: HermStructure

    @property
    def tangent(self) -> HermComplex:
        return self.struct.underlying

    # -- models -------------------------------------------------------------
    @classmethod
    def ambient(cls, X: ToySpace, Y: ToySpace, df) -> "ToyMorphism":
        """Structure given by the metrics of T_X and T_Y themselves."""
        T = tangent_complex(df, X, Y)
        return cls(X, Y, T.d(0), HermStructure.native(T))

    @classmethod
    def identity(cls, X: ToySpace) -> "ToyMorphism":
        return cls.ambient(X, X, np.eye(X.dim))

    @classmethod
    def submersion(cls, X: ToySpace, Y: ToySpace, df, fiber_gram=None) -> "ToyMorphism":
        """df surjective; structure from a metric on ker df (by default the restriction of T_X's)."""
        T = tangent_complex(df, X, Y)
        if np.linalg.matrix_rank(T.d(0)) != Y.dim:
            raise PreconditionError("submersion model needs a surjective df")
        K = _kernel_basis(T.d(0), X.tangent.gram)
        G = K.conj().T @ X.tangent.gram @ K if fiber_gram is None else np.asarray(fiber_gram, dtype=complex)
        rel = HermComplex({0: G}, {}, 0, 0)
        iota = ChainMap(rel, T, {0: K})
        return cls(X, Y, T.d(0), HermStructure.via_map(iota))

    @classmethod
    def immersion(cls, X: ToySpace, Y: ToySpace, df, normal_gram=None) -> "ToyMorphism":
        """df injective; structure from a metric on the normal space placed in degree 1."""
        T = tangent_complex(df, X, Y)
        if np.linalg.matrix_rank(T.d(0)) != X.dim:
            raise PreconditionError("immersion model needs an injective df")
        GY = Y.tangent.gram
        W = _gram_orth_complement(GY, T.d(0))
        G = W.conj().T @ GY @ W if normal_gram is None else np.asarray(normal_gram, dtype=complex)
        N1 = HermComplex({1: G}, {}, 1, 1)
        p = ChainMap(T, N1, {1: np.linalg.solve(W.conj().T @ GY @ W, W.conj().T @ GY)})
        return cls(X, Y, T.d(0), HermStructure(T, N1, Roof(T, p, ChainMap(T, T, {0: np.eye(X.dim),
                                                                                 1: np.eye(Y.dim)}))))

    def with_structure(self, H: HermStructure) -> "ToyMorphism":
        return ToyMorphism(self.source, self.target, self.df, H)


def _kernel_basis(A: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Gram-orthonormal basis of ker A."""
    L = np.linalg.cholesky(G)
    Li = np.linalg.inv(L.conj().T)
    _, s, vh = np.linalg.svd(A @ Li)
    r = int(np.sum(s > 1e-12 * max(1.0, s[0] if s.size else 0.0)))
    return Li @ vh[r:].conj().T


# -- the tangent triangle T_f -> T_gf -> T_g -> T_f[1] -------------------------------


@dataclass
class TangentTriangle:
    Tf: HermComplex
    Tgf: HermComplex
    Tg: HermComplex
    a: ChainMap          # T_f -> T_gf, (Id, dg)
    b: ChainMap          # T_gf -> T_g, (df, Id)
    delta: Roof          # T_g[-1] <- cone(a)[-1] -> T_f


def tangent_triangle(f: ToyMorphism, g: ToyMorphism) -> TangentTriangle:
    if f.target.label != g.source.label or f.target.dim != g.source.dim:
        raise ComplexError("morphisms are not composable")
    Tf, Tg = f.tangent, g.tangent
    Tgf = tangent_complex(g.df @ f.df, f.source, g.target)
    a = ChainMap(Tf, Tgf, {0: np.eye(Tf.dim(0)), 1: g.df})
    b = ChainMap(Tgf, Tg, {0: f.df, 1: np.eye(Tg.dim(1))})
    Ca = cone(a)                         # Ca^i = Tf^{i+1} + Tgf^i
    # q: cone(a) -> T_g, q(x, y) = b y + k x with k^1 = Id: T_f^1 -> T_g^0
    q = {}
    for i in Ca.degrees:
        if not (Ca.dim(i) and Tg.dim(i)):
            continue
        k = np.eye(Tg.dim(0)) if i == 0 else np.zeros((Tg.dim(i), Tf.dim(i + 1)))
        q[i] = np.hstack([k, b.at(i)])
    q = ChainMap(Ca, Tg, q)
    P = shift(Ca, -1)                    # P^i = Tf^i + Tgf^{i-1}
    s = shift_map(q, -1)
    pr = ChainMap(P, Tf, {i: np.hstack([np.eye(Tf.dim(i)), np.zeros((Tf.dim(i), Tgf.dim(i - 1)))])
                          for i in Tf.degrees if P.dim(i)})
    delta = Roof(P, ChainMap(P, s.target, s.maps), pr)
    return TangentTriangle(Tf, Tgf, Tg, a, b, delta)


def _comparison(Y: HermComplex, X: HermComplex, Hi, Hv, Hw, Hp) -> ChainMap:
    """A chain map Y -> X whose cohomology solves beta Hi = Hv, Hw beta = Hp."""
    beta = {}
    for i in range(min(X.lo, Y.lo), max(X.hi, Y.hi) + 1):
        bY, bX = Y.hodge.betti(i), X.hodge.betti(i)
        if not (bY or bX):
            continue
        if bY != bX:
            raise PreconditionError(f"cohomology dimensions differ in degree {i}")

        def get(H, r, c):
            m = H.get(i)
            return np.zeros((r, c), dtype=complex) if m is None else m

        ni = Hi.get(i).shape[1] if Hi.get(i) is not None else 0
        nw = Hw.get(i).shape[0] if Hw.get(i) is not None else 0
        m, res, _ = _solve_alpha(get(Hi, bY, ni), get(Hv, bX, ni), get(Hw, nw, bX), get(Hp, nw, bY))
        if res > OSM_TOL:
            raise PreconditionError(f"no comparison map in degree {i} (residual {res:.3e})")
        beta[i] = m
    return canonical_chain_map(Y, X, beta)


def compose(g: ToyMorphism, f: ToyMorphism) -> ToyMorphism:
    """g o f carrying the hermitian cone of the connecting morphism T_g[-1] -> T_f."""
    tri = tangent_triangle(f, g)
    hc = herm_cone(tri.delta, shift_structure(g.struct, -1), f.struct)
    Y = hc.underlying                    # cone(delta_c)^i = T_g^i + T_f^i
    dc = chain_rep(tri.delta)
    Tf, Tg1 = tri.Tf, shift(tri.Tg, -1)
    iota = ChainMap(Tf, Y, {i: np.vstack([np.zeros((Tg1.dim(i + 1), Tf.dim(i))), np.eye(Tf.dim(i))])
                            for i in Tf.degrees if Y.dim(i)})
    pi = ChainMap(Y, tri.Tg, {i: np.hstack([np.eye(Tg1.dim(i + 1)), np.zeros((Tg1.dim(i + 1), Tf.dim(i)))])
                              for i in Y.degrees if tri.Tg.dim(i)})
    assert dc.source.dims == Tg1.dims
    beta = _comparison(Y, tri.Tgf, cohomology_map(iota), cohomology_map(tri.a),
                       cohomology_map(tri.b), cohomology_map(pi))
    H = parallel_transport(Roof.from_chain_map(beta), hc)
    return ToyMorphism(f.source, g.target, tri.Tgf.d(0), H)


def compose_chain(morphisms: list[ToyMorphism], right_first: bool = True) -> ToyMorphism:
    """Compose f1, f2, ..., fn (f1 applied first)."""
    out = morphisms[0]
    if right_first:
        for m in morphisms[1:]:
            out = compose(m, out)
        return out
    out = morphisms[-1]
    for m in reversed(morphisms[:-1]):
        out = compose(out, m)
    return out


def distance(f1: ToyMorphism, f2: ToyMorphism) -> float:
    """Structure distance between two morphisms with the same underlying map."""
    return structure_distance(f1.struct, f2.struct)


def verify_associativity(f: ToyMorphism, g: ToyMorphism, h: ToyMorphism) -> float:
    left = compose(h, compose(g, f))
    right = compose(compose(h, g), f)
    return abs(structure_distance(left.struct, right.struct))


def solve_for_f(g: ToyMorphism, gf: ToyMorphism, df) -> HermStructure:
    """The unique structure on f with g o f = gf: the shifted hermitian cone of T_gf -> T_g."""
    df = np.asarray(df, dtype=complex)
    if gf.source.dim != df.shape[1] or g.source.dim != df.shape[0]:
        raise ComplexError("df does not match the spaces")
    if np.max(np.abs(g.df @ df - gf.df)) > 1e-10 * max(1.0, np.max(np.abs(gf.df))):
        raise PreconditionError("gf is not g o f")
    f0 = ToyMorphism.ambient(gf.source, g.source, df)
    tri = tangent_triangle(f0, g)
    hb = herm_cone(Roof.from_chain_map(ChainMap(gf.tangent, g.tangent, tri.b.maps)), gf.struct, g.struct)
    H1 = shift_structure(hb, -1)        # on cone(b)[-1], pieces T_gf^i + T_g^{i-1}
    Y = H1.underlying
    Tgf, Tg1 = tri.Tgf, shift(tri.Tg, -1)
    pi1 = ChainMap(Y, Tgf, {i: np.hstack([np.eye(Tgf.dim(i)), np.zeros((Tgf.dim(i), Tg1.dim(i)))])
                            for i in Y.degrees if Tgf.dim(i)})
    io1 = ChainMap(Tg1, Y, {i: np.vstack([np.zeros((Tgf.dim(i), Tg1.dim(i))), np.eye(Tg1.dim(i))])
                            for i in Tg1.degrees if Y.dim(i)})
    Hd = roof_cohomology(tri.delta)
    Ha, Hp, Hi = cohomology_map(tri.a), cohomology_map(pi1), cohomology_map(io1)
    neg = lambda H: {i: -m for i, m in H.items()}
    # solve beta: Y -> T_f with beta iota = -delta and a beta = -pi
    beta = _comparison(Y, tri.Tf, Hi, neg(Hd), Ha, neg(Hp))
    return parallel_transport(Roof.from_chain_map(beta), H1)


@dataclass
class ToddForm:
    value: float
    euler: int


def todd_form(f: ToyMorphism) -> ToddForm:
    """At the point the degree-zero Todd form of any hermitian complex is 1."""
    return ToddForm(1.0, f.tangent.euler_characteristic())


def epsilon_sequence(f: ToyMorphism, g: ToyMorphism, gf: ToyMorphism) -> HermComplex:
    """For submersion models: 0 -> ker df -> ker d(gf) -> ker dg -> 0 in degrees -2, -1, 0."""
    jf, jg, jgf = (chain_rep(m.struct.roof).at(0) for m in (f, g, gf))
    A = np.linalg.lstsq(jgf, jf, rcond=None)[0]          # ker df inside ker d(gf)
    B = np.linalg.lstsq(jg, f.df @ jgf, rcond=None)[0]   # df: ker d(gf) -> ker dg
    grams = {-2: f.struct.rep.gram(0), -1: gf.struct.rep.gram(0), 0: g.struct.rep.gram(0)}
    return HermComplex(grams, {-2: A, -1: B}, -2, 0)
