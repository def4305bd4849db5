"""Seeded random instances: complexes, chain maps, homotopy squares, meager complexes.

Every generator takes a ``numpy.random.Generator`` (PCG64 bit generator).
Complexes stay at desk scale: at most 8 dimensions per degree.
"""

from __future__ import annotations

import numpy as np

from .hermlin import (
    ChainMap, DoubleComplex, HermComplex, Homotopy, canonical_chain_map, cone, direct_sum, identity,
    shift, tensor,
)

MAX_DIM = 8


def rng_for(seed: int, *keys: int) -> np.random.Generator:
    """Independent stream for (seed, keys), stable under reordering of cases."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed) & (2**64 - 1), *keys])))


def cgauss(rng, *shape) -> np.ndarray:
    return (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / np.sqrt(2)


def unitary(rng, n: int) -> np.ndarray:
    q, r = np.linalg.qr(cgauss(rng, n, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def gram(rng, n: int, spread: float = 1.0) -> np.ndarray:
    """U diag(exp(t)) U^H with t uniform in [-spread, spread]."""
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    U = unitary(rng, n)
    g = U @ np.diag(np.exp(rng.uniform(-spread, spread, n))) @ U.conj().T
    return (g + g.conj().T) / 2


def invertible(rng, n: int) -> np.ndarray:
    """A well-conditioned invertible matrix: unitary times positive diagonal."""
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    return unitary(rng, n) @ np.diag(np.exp(rng.uniform(-0.7, 0.7, n))) @ unitary(rng, n)


def complex_from_ranks(rng, lo: int, ranks: list[int], bettis: list[int], spread: float = 1.0) -> HermComplex:
    """A random complex with rank d^{lo+k} = ranks[k] and H^{lo+k} of dim bettis[k].

    Built in an adapted basis (B, H, K) and conjugated by random invertible maps,
    with an independent random metric in every degree.
    """
    n = len(bettis)
    ranks = list(ranks) + [0] * (n - len(ranks))
    dims = [(ranks[k - 1] if k else 0) + bettis[k] + ranks[k] for k in range(n)]
    T = [invertible(rng, m) for m in dims]
    diffs = {}
    for k in range(n - 1):
        m = np.zeros((dims[k + 1], dims[k]), dtype=complex)
        off = (ranks[k - 1] if k else 0) + bettis[k]
        for j in range(ranks[k]):
            m[j, off + j] = np.exp(rng.uniform(-1, 1))
        diffs[lo + k] = T[k + 1] @ m @ np.linalg.inv(T[k]) if m.size else m
    grams = {lo + k: gram(rng, dims[k], spread) for k in range(n)}
    return HermComplex(grams, diffs, lo, lo + n - 1)


def random_complex(rng, acyclic: bool = False, max_degrees: int = 5, lo: int | None = None,
                   max_total: int = 24, bettis: list[int] | None = None) -> HermComplex:
    if bettis is not None:
        n = len(bettis)
    else:
        n = int(rng.integers(2 if acyclic else 1, max_degrees + 1))
    if lo is None:
        lo = int(rng.integers(-2, 2))
    for _ in range(1000):
        b = list(bettis) if bettis is not None else \
            ([0] * n if acyclic else [int(x) for x in rng.integers(0, 3, n)])
        r = [int(x) for x in rng.integers(0 if not acyclic else 1, 4, n - 1)] if n > 1 else []
        if acyclic and not any(r):
            continue
        dims = [(r[k - 1] if k else 0) + b[k] + (r[k] if k < n - 1 else 0) for k in range(n)]
        if max(dims) <= MAX_DIM and sum(dims) <= max_total and (sum(dims) > 0 or bettis is not None):
            return complex_from_ranks(rng, lo, r, b)
    raise ValueError("no complex fits the requested shape")


def random_acyclic(rng, **kw) -> HermComplex:
    return random_complex(rng, acyclic=True, **kw)


def random_cohomology_map(rng, X: HermComplex, Y: HermComplex, invertible_map: bool = False) -> dict:
    hx, hy = X.hodge, Y.hodge
    out = {}
    for i in range(min(X.lo, Y.lo), max(X.hi, Y.hi) + 1):
        a, b = hx.betti(i), hy.betti(i)
        if a and b:
            out[i] = invertible(rng, a) if invertible_map else cgauss(rng, b, a)
    return out


def random_homotopy(rng, X: HermComplex, Y: HermComplex, scale: float = 1.0) -> Homotopy:
    return Homotopy(X, Y, {i: scale * cgauss(rng, Y.dim(i - 1), X.dim(i))
                           for i in range(min(X.lo, Y.lo), max(X.hi, Y.hi) + 2)})


def random_chain_map(rng, X: HermComplex, Y: HermComplex, quasi_iso: bool = False,
                     phi: dict | None = None) -> ChainMap:
    """iota phi pi + (dh + hd): every chain map has this shape over a field."""
    if phi is None:
        phi = random_cohomology_map(rng, X, Y, invertible_map=quasi_iso)
    base = canonical_chain_map(X, Y, phi)
    return base + random_homotopy(rng, X, Y, 0.5).boundary()


def random_quasi_iso_pair(rng, acyclic: bool = False, **kw) -> tuple[HermComplex, HermComplex]:
    """Two random complexes with the same cohomology dimensions."""
    X = random_complex(rng, acyclic=acyclic, **kw)
    b = [X.hodge.betti(i) for i in X.degrees]
    Y = random_complex(rng, bettis=b, lo=X.lo) if any(b) else random_acyclic(rng)
    return X, Y


def random_quasi_iso(rng, X: HermComplex, Y: HermComplex) -> ChainMap:
    return random_chain_map(rng, X, Y, quasi_iso=True)


def quasi_isomorphic_copy(rng, X: HermComplex, acyclic_extra: bool = True) -> HermComplex:
    """A random complex with the same cohomology as X, in the same degree range."""
    b = [X.hodge.betti(i) for i in X.degrees]
    if not any(b):
        return random_acyclic(rng)
    return random_complex(rng, bettis=b, lo=X.lo)


# -- homotopy-commutative squares ---------------------------------------------


def homotopy_square(rng, acyclic: bool = False):
    """(f1: E'->F', f: E->F, g1: E'->E, g: F'->F, h) with g f1 - f g1 = dh + hd.

    Cohomology maps are chosen compatibly (f1 injective on cohomology, g
    solved for), the chain maps are lifted with random null-homotopic parts,
    and h is the canonical null homotopy of g f1 - f g1 plus a random
    degree -1 cycle of the Hom complex.
    """
    from .hermlin import null_homotopy
    E1 = random_complex(rng, acyclic=acyclic, max_degrees=4, max_total=14)
    lo = E1.lo
    n = E1.hi - E1.lo + 1
    if acyclic:
        F1, E, F = (random_complex(rng, acyclic=True, lo=lo, max_degrees=n + 1, max_total=14) for _ in range(3))
    else:
        b1 = [E1.hodge.betti(i) for i in E1.degrees]
        F1 = random_complex(rng, bettis=[x + int(rng.integers(0, 2)) for x in b1], lo=lo, max_total=16)
        E = random_complex(rng, bettis=[int(x) for x in rng.integers(0, 3, n)], lo=lo, max_total=14)
        F = random_complex(rng, bettis=[int(x) for x in rng.integers(0, 3, n)], lo=lo, max_total=14)
    phi_f1 = {}
    for i in E1.degrees:
        a, b = E1.hodge.betti(i), F1.hodge.betti(i)
        if a and b:
            q, _ = np.linalg.qr(cgauss(rng, b, a))   # injective
            phi_f1[i] = q @ invertible(rng, a)
    phi_g1 = random_cohomology_map(rng, E1, E)
    phi_f = random_cohomology_map(rng, E, F)
    phi_g = {}
    for i in F1.degrees:
        a, b = F1.hodge.betti(i), F.hodge.betti(i)
        if not (a and b):
            continue
        target = np.zeros((b, E1.hodge.betti(i)), dtype=complex)
        if i in phi_f and i in phi_g1:
            target = phi_f[i] @ phi_g1[i]
        P = phi_f1.get(i)
        if P is None or not P.size:
            phi_g[i] = cgauss(rng, b, a)
        else:
            pinv = np.linalg.pinv(P)
            phi_g[i] = target @ pinv + cgauss(rng, b, a) @ (np.eye(a) - P @ pinv)
    f1 = random_chain_map(rng, E1, F1, phi=phi_f1)
    g1 = random_chain_map(rng, E1, E, phi=phi_g1)
    f = random_chain_map(rng, E, F, phi=phi_f)
    g = random_chain_map(rng, F1, F, phi=phi_g)
    h = null_homotopy(g @ f1 - f @ g1)
    # add d s - s d for a random degree -2 map s, and a random cycle through harmonics
    s = {i: cgauss(rng, F.dim(i - 2), E1.dim(i)) for i in range(lo - 1, lo + n + 3)}
    extra = {}
    for i in range(lo, lo + n + 2):
        m = F.d(i - 2) @ s[i] - s[i + 1] @ E1.d(i)
        a, b = E1.hodge.betti(i), F.hodge.betti(i - 1)
        if a and b:
            m = m + F.hodge.harmonic[i - 1] @ cgauss(rng, b, a) @ E1.hodge.harmonic_projector(i)
        extra[i] = m
    h = h + Homotopy(E1, F, extra)
    return f1, f, g1, g, h


# -- meager complexes ---------------------------------------------------------


def recoordinatize(rng, C: HermComplex) -> HermComplex:
    """Isometric copy of C in a random basis."""
    T = {i: invertible(rng, C.dim(i)) for i in C.degrees}
    Ti = {i: np.linalg.inv(T[i]) if C.dim(i) else T[i] for i in C.degrees}
    grams = {i: T[i].conj().T @ C.gram(i) @ T[i] for i in C.degrees}
    diffs = {i: Ti[i + 1] @ C.d(i) @ T[i] for i in range(C.lo, C.hi)}
    return HermComplex(grams, diffs, C.lo, C.hi)


def orthogonally_split(rng, max_pieces: int = 3) -> HermComplex:
    """A sum of cones of identities on random one-degree spaces, in a random basis."""
    parts = []
    for _ in range(int(rng.integers(1, max_pieces + 1))):
        n = int(rng.integers(1, 3))
        deg = int(rng.integers(-1, 3))
        A = HermComplex({deg: gram(rng, n)})
        parts.append(cone(identity(A)))
    return recoordinatize(rng, direct_sum(*parts))


def m0_member(rng) -> HermComplex:
    if rng.random() < 0.5:
        return orthogonally_split(rng)
    F = random_acyclic(rng, max_degrees=3, max_total=8)
    return recoordinatize(rng, direct_sum(F, shift(F, 1)))


def meager_by_closure(rng, steps: int = 3, max_total: int = 40) -> HermComplex:
    """Iterate cone / shift / sum / tensor starting from M0 members."""
    M = m0_member(rng)
    for _ in range(steps):
        op = rng.integers(0, 4)
        if op == 0:
            N = m0_member(rng)
            if M.total_dim + N.total_dim <= max_total:
                f = random_chain_map(rng, M, N)
                M = cone(f)
        elif op == 1:
            M = shift(M, int(rng.integers(-2, 3)))
        elif op == 2:
            N = m0_member(rng)
            if M.total_dim + N.total_dim <= max_total:
                M = direct_sum(M, N)
        else:
            X = random_complex(rng, max_degrees=2, max_total=3)
            if M.total_dim * X.total_dim <= max_total:
                M = tensor(M, X) if rng.random() < 0.5 else tensor(X, M)
        if rng.random() < 0.3:
            M = recoordinatize(rng, M)
    return M


def acyclic_double_complex(rng) -> DoubleComplex:
    """A double complex with acyclic rows and columns: A (x) B with random cell metrics and bases."""
    A = random_acyclic(rng, max_degrees=3, max_total=6)
    B = random_acyclic(rng, max_degrees=3, max_total=6)
    T = {(p, q): invertible(rng, A.dim(p) * B.dim(q)) for p in A.degrees for q in B.degrees}
    Ti = {k: np.linalg.inv(v) if v.size else v for k, v in T.items()}
    grams, dh, dv = {}, {}, {}
    for p in A.degrees:
        for q in B.degrees:
            n = A.dim(p) * B.dim(q)
            if not n:
                continue
            grams[(p, q)] = gram(rng, n)
            if (p + 1, q) in T and A.dim(p + 1) * B.dim(q):
                dh[(p, q)] = Ti[(p + 1, q)] @ np.kron(A.d(p), np.eye(B.dim(q))) @ T[(p, q)]
            if (p, q + 1) in T and A.dim(p) * B.dim(q + 1):
                dv[(p, q)] = Ti[(p, q + 1)] @ np.kron(np.eye(A.dim(p)), B.d(q)) @ T[(p, q)]
    return DoubleComplex(grams, dh, dv)


# -- hermitian structures -------------------------------------------------------


def random_structure(rng, X: HermComplex, two_legged: bool | None = None):
    """A random hermitian structure on X: a random representative joined to X by a random roof."""
    from .derived import HermStructure, Roof
    if two_legged is None:
        two_legged = bool(rng.random() < 0.5)
    E = quasi_isomorphic_copy(rng, X)
    if not two_legged:
        return HermStructure.via_map(random_quasi_iso(rng, E, X))
    M = quasi_isomorphic_copy(rng, X)
    return HermStructure(X, E, Roof(M, random_quasi_iso(rng, M, E), random_quasi_iso(rng, M, X)))


def random_iso_roof(rng, X: HermComplex, Y: HermComplex, two_legged: bool | None = None):
    from .derived import Roof
    if two_legged is None:
        two_legged = bool(rng.random() < 0.5)
    if not two_legged:
        return Roof.from_chain_map(random_quasi_iso(rng, X, Y))
    M = quasi_isomorphic_copy(rng, X)
    return Roof(M, random_quasi_iso(rng, M, X), random_quasi_iso(rng, M, Y))


# -- point-model morphisms ------------------------------------------------------


def random_space(rng, label: str, n: int | None = None):
    from .osm import ToySpace
    from .hermlin import HermSpace
    n = int(rng.integers(1, 4)) if n is None else n
    return ToySpace(label, HermSpace(gram(rng, n)))


def random_morphism(rng, X, Y, structured: bool = True, offset: bool = False):
    """A morphism X -> Y with a random df and (optionally) a random structure on T_f."""
    from .derived import torsor_add
    from .osm import ToyMorphism
    f = ToyMorphism.ambient(X, Y, cgauss(rng, Y.dim, X.dim))
    if structured:
        H = random_structure(rng, f.tangent)
        if offset:
            H = torsor_add(H, float(rng.normal()))
        f = f.with_structure(H)
    return f


def random_chain(rng, length: int = 3, structured: bool = True):
    spaces = [random_space(rng, f"X{k}") for k in range(length + 1)]
    return [random_morphism(rng, spaces[k], spaces[k + 1], structured, offset=bool(rng.random() < 0.5))
            for k in range(length)]


def random_submersion_chain(rng):
    """Submersions X -> Y -> Z (with the composite) carrying random fiber metrics."""
    from .osm import ToyMorphism
    dims = sorted((int(d) for d in rng.integers(1, 5, 3)), reverse=True)
    X, Y, Z = (random_space(rng, lab, n) for lab, n in zip("XYZ", dims))

    def sub(A, B, df):
        n = A.dim - B.dim
        return ToyMorphism.submersion(A, B, df, fiber_gram=gram(rng, n) if n else None)

    A = cgauss(rng, Y.dim, X.dim)
    B = cgauss(rng, Z.dim, Y.dim)
    return sub(X, Y, A), sub(Y, Z, B), sub(X, Z, B @ A)
