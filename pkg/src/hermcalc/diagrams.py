"""Random diagrams of hermitian objects: triangles, ladders, 3x3 grids, complexes of objects."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import generators as gen
from .derived import HermStructure, HermTriangle, Roof, direct_sum_structures
from .hermlin import ChainMap, HermComplex, cone, direct_sum, null_homotopy, shift, zero_map


def cone_inclusion(f: ChainMap, Y: HermComplex | None = None) -> ChainMap:
    X, B = f.source, f.target
    Y = Y if Y is not None else cone(f)
    return ChainMap(B, Y, {i: np.vstack([np.zeros((X.dim(i + 1), B.dim(i))), np.eye(B.dim(i))])
                           for i in B.degrees if Y.dim(i)})


def cone_projection(f: ChainMap, Y: HermComplex | None = None, X1: HermComplex | None = None) -> ChainMap:
    X, B = f.source, f.target
    Y = Y if Y is not None else cone(f)
    X1 = X1 if X1 is not None else shift(X, 1)
    return ChainMap(Y, X1, {i: np.hstack([np.eye(X.dim(i + 1)), np.zeros((X.dim(i + 1), B.dim(i)))])
                            for i in Y.degrees if X1.dim(i)})


def _small(rng, lo=None):
    return gen.random_complex(rng, max_degrees=3, max_total=8, lo=lo)


def standard_triangle(u: ChainMap, A: HermStructure, B: HermStructure, C: HermStructure | None,
                      q: ChainMap | None = None) -> HermTriangle:
    """A -u-> B -> X_C -> A[1] with X_C = cone(u), or a copy of it through the quasi-isomorphism q."""
    Cu = cone(u)
    io, pi = cone_inclusion(u, Cu), cone_projection(u, Cu)
    if q is None:
        v, w = Roof.from_chain_map(io), Roof.from_chain_map(pi)
    else:
        v, w = Roof.from_chain_map(q @ io), Roof(Cu, q, pi)
    return HermTriangle(A, B, C, Roof.from_chain_map(u), v, w)


def random_triangle(rng) -> HermTriangle:
    XA = _small(rng)
    XB = _small(rng, XA.lo)
    u = gen.random_chain_map(rng, XA, XB)
    Cu = cone(u)
    if rng.random() < 0.5:
        XC, q = Cu, None
    else:
        XC = gen.quasi_isomorphic_copy(rng, Cu)
        q = gen.random_quasi_iso(rng, Cu, XC)
    return standard_triangle(u, gen.random_structure(rng, XA), gen.random_structure(rng, XB),
                             gen.random_structure(rng, XC), q)


@dataclass
class Ladder:
    top: HermTriangle
    bottom: HermTriangle
    f: Roof
    g: Roof
    h: Roof


def random_ladder(rng) -> Ladder:
    """Two triangles and isomorphisms f, g, h between them with every square commuting."""
    XA = _small(rng)
    XB = _small(rng, XA.lo)
    u = gen.random_chain_map(rng, XA, XB)
    XA2 = gen.quasi_isomorphic_copy(rng, XA)
    XB2 = gen.quasi_isomorphic_copy(rng, XB)
    f = gen.random_quasi_iso(rng, XA, XA2)
    g = gen.random_quasi_iso(rng, XB, XB2)
    from .hermlin import cohomology_map
    Hf, Hg, Hu = cohomology_map(f), cohomology_map(g), cohomology_map(u)
    phi = {}
    for i in Hu:
        if Hu[i].size and i in Hg and Hg[i].size and Hf.get(i) is not None and Hf[i].size:
            phi[i] = Hg[i] @ Hu[i] @ np.linalg.inv(Hf[i])
    u2 = gen.random_chain_map(rng, XA2, XB2, phi=phi)
    k = null_homotopy(g @ u - u2 @ f)
    C1, C2 = cone(u), cone(u2)
    h = ChainMap(C1, C2, {i: np.block([[f.at(i + 1), np.zeros((XA2.dim(i + 1), XB.dim(i)))],
                                       [k.at(i + 1), g.at(i)]])
                          for i in range(min(C1.lo, C2.lo), max(C1.hi, C2.hi) + 1)
                          if C1.dim(i) and C2.dim(i)})
    top = standard_triangle(u, gen.random_structure(rng, XA), gen.random_structure(rng, XB),
                            gen.random_structure(rng, C1))
    bottom = standard_triangle(u2, gen.random_structure(rng, XA2), gen.random_structure(rng, XB2),
                               gen.random_structure(rng, C2))
    return Ladder(top, bottom, Roof.from_chain_map(f), Roof.from_chain_map(g), Roof.from_chain_map(h))


def summand_map(src: list[HermComplex], tgt: list[HermComplex], pairs: dict[int, int]) -> ChainMap:
    """Identity blocks from summand k of direct_sum(src) to summand pairs[k] of direct_sum(tgt)."""
    S, T = direct_sum(*src), direct_sum(*tgt)
    maps = {}
    for i in range(min(S.lo, T.lo), max(S.hi, T.hi) + 1):
        if not (S.dim(i) and T.dim(i)):
            continue
        m = np.zeros((T.dim(i), S.dim(i)), dtype=complex)
        so = np.cumsum([0] + [C.dim(i) for C in src])
        to = np.cumsum([0] + [C.dim(i) for C in tgt])
        for a, b in pairs.items():
            n = src[a].dim(i)
            m[to[b]:to[b] + n, so[a]:so[a] + n] = np.eye(n)
        maps[i] = m
    return ChainMap(S, T, maps)


def split_grid(rng):
    """A 3x3 diagram of split triangles built from four complexes a1, a3, b1, b3.

    Returns (rows, columns), each a list of three triangles; the middle object
    is a1 + a3 + b1 + b3.
    """
    lo = int(rng.integers(-1, 2))
    while True:
        a1, a3, b1, b3 = (gen.random_complex(rng, max_degrees=3, max_total=5, lo=lo) for _ in range(4))
        mid = direct_sum(a1, a3, b1, b3)
        if max(mid.dims.values()) <= gen.MAX_DIM:
            break
    parts = {
        (1, 1): [a1], (1, 2): [a1, b1], (1, 3): [b1],
        (2, 1): [a1, a3], (2, 2): [a1, a3, b1, b3], (2, 3): [b1, b3],
        (3, 1): [a3], (3, 2): [a3, b3], (3, 3): [b3],
    }
    X = {k: direct_sum(*v) for k, v in parts.items()}
    S = {k: gen.random_structure(rng, X[k]) for k in X}

    def tri(k1, k2, k3, incl, proj):
        u = summand_map(parts[k1], parts[k2], incl)
        v = summand_map(parts[k2], parts[k3], proj)
        u = ChainMap(S[k1].underlying, S[k2].underlying, u.maps)
        v = ChainMap(S[k2].underlying, S[k3].underlying, v.maps)
        w = zero_map(S[k3].underlying, shift(S[k1].underlying, 1))
        return HermTriangle(S[k1], S[k2], S[k3], Roof.from_chain_map(u), Roof.from_chain_map(v),
                            Roof.from_chain_map(w))

    rows = [
        tri((1, 1), (1, 2), (1, 3), {0: 0}, {1: 0}),
        tri((2, 1), (2, 2), (2, 3), {0: 0, 1: 1}, {2: 0, 3: 1}),
        tri((3, 1), (3, 2), (3, 3), {0: 0}, {1: 0}),
    ]
    cols = [
        tri((1, 1), (2, 1), (3, 1), {0: 0}, {1: 0}),
        tri((1, 2), (2, 2), (3, 2), {0: 0, 1: 2}, {1: 0, 3: 1}),
        tri((1, 3), (2, 3), (3, 3), {0: 0}, {1: 0}),
    ]
    return rows, cols


# -- complexes of objects -------------------------------------------------------


@dataclass
class ObjectComplex:
    objects: list          # HermStructures on one-degree complexes in degree 0
    maps: list             # matrices between consecutive objects
    lo: int

    @property
    def total(self) -> HermComplex:
        grams = {self.lo + k: H.underlying.gram(0) for k, H in enumerate(self.objects)}
        diffs = {self.lo + k: m for k, m in enumerate(self.maps)}
        return HermComplex(grams, diffs, self.lo, self.lo + len(self.objects) - 1)


def _point(G) -> HermComplex:
    return HermComplex({0: G})


def random_object_complex(rng, exact: bool = True, lo: int | None = None) -> ObjectComplex:
    K = gen.random_complex(rng, acyclic=exact, max_degrees=4, max_total=12, lo=lo)
    objs = [gen.random_structure(rng, _point(K.gram(i))) for i in K.degrees]
    return ObjectComplex(objs, [K.d(i) for i in range(K.lo, K.hi)], K.lo)


def object_cone(eps: ObjectComplex, mu: ObjectComplex, phi: dict) -> ObjectComplex:
    """cone(eps, mu)^j = eps^{j+1} + mu^j, objects carrying the direct-sum structures."""
    lo = min(eps.lo - 1, mu.lo)
    hi = max(eps.lo + len(eps.objects) - 2, mu.lo + len(mu.objects) - 1)

    def obj(C: ObjectComplex, j):
        k = j - C.lo
        if 0 <= k < len(C.objects):
            return C.objects[k]
        return HermStructure.native(HermComplex({0: np.zeros((0, 0))}))

    def dmat(C: ObjectComplex, j):
        k = j - C.lo
        n_src = obj(C, j).underlying.dim(0)
        n_tgt = obj(C, j + 1).underlying.dim(0)
        if 0 <= k < len(C.maps):
            return C.maps[k]
        return np.zeros((n_tgt, n_src))

    objs, maps = [], []
    for j in range(lo, hi + 1):
        objs.append(direct_sum_structures(obj(eps, j + 1), obj(mu, j)))
    for j in range(lo, hi):
        e1, e2 = obj(eps, j + 1).underlying.dim(0), obj(eps, j + 2).underlying.dim(0)
        m1, m2 = obj(mu, j).underlying.dim(0), obj(mu, j + 1).underlying.dim(0)
        p = phi.get(j + 1, np.zeros((m2, e1)))
        maps.append(np.block([[-dmat(eps, j + 1), np.zeros((e2, m1))], [p, dmat(mu, j)]]))
    return ObjectComplex(objs, maps, lo)


def random_object_morphism(rng, exact: bool = True):
    """(eps, mu, phi) with phi: eps -> mu a chain map of complexes of objects."""
    eps = random_object_complex(rng, exact)
    mu = random_object_complex(rng, exact, lo=eps.lo)
    f = gen.random_chain_map(rng, eps.total, mu.total)
    return eps, mu, {i: m for i, m in f.maps.items()}
