"""The determinant norm tau of an acyclic hermitian complex and the decisions built on it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hermlin import (
    PD_TOL, ChainMap, HermComplex, NotAcyclicError, PreconditionError, RankAmbiguityError,
    canonical_chain_map, cohomology_map, cone, identity,
)

TAU_TOL = 1e-8


def _require_acyclic(C: HermComplex):
    hd = C.hodge
    if hd.ambiguous:
        deg, s = hd.ambiguous[0]
        raise RankAmbiguityError(f"rank decision in degree {deg} is ambiguous (singular value {s:.3e})")
    if not hd.acyclic:
        bad = {i: b for i, b in hd.bettis.items() if b}
        raise NotAcyclicError(f"complex has cohomology {bad}")
    return hd


def tau(C: HermComplex) -> float:
    """sum_i (-1)^i log|det(d: K^i -> B^{i+1})| in gram-orthonormal bases.

    Normalized so that the two-term complex C -e^a-> C has tau = a.
    """
    hd = _require_acyclic(C)
    for i, s in hd.sigma.items():
        if s.size and float(s[-1]) < PD_TOL:
            raise PreconditionError(f"differential in degree {i} is numerically singular")
    return hd.torsion_sum()


def ray_singer_tau(C: HermComplex) -> float:
    """-1/2 sum_i (-1)^i i log det(Laplacian_i), built from gram adjoints only."""
    _require_acyclic(C)
    total = 0.0
    for i in C.degrees:
        n = C.dim(i)
        if not n:
            continue
        Gi_inv = np.linalg.inv(C.gram(i))
        lap = np.zeros((n, n), dtype=complex)
        d_out = C.d(i)
        if d_out.size:
            adj = Gi_inv @ d_out.conj().T @ C.gram(i + 1)
            lap += adj @ d_out
        d_in = C.d(i - 1)
        if d_in.size:
            adj = np.linalg.inv(C.gram(i - 1)) @ d_in.conj().T @ C.gram(i)
            lap += d_in @ adj
        sign, logdet = np.linalg.slogdet(lap)
        total += (-1) ** (i % 2) * i * float(logdet)
    return -0.5 * total


def is_meager(C: HermComplex, tol: float = TAU_TOL) -> bool:
    hd = C.hodge
    if not hd.acyclic or hd.ambiguous:
        return False
    return abs(hd.torsion_sum()) <= tol


def is_tight(f: ChainMap, tol: float = TAU_TOL) -> bool:
    return is_meager(cone(f), tol)


@dataclass
class TightRoof:
    """C <-s- middle -g-> D with both legs tight."""
    middle: HermComplex
    s: ChainMap
    g: ChainMap


def tight_roof(C: HermComplex, D: HermComplex, tol: float = TAU_TOL) -> TightRoof | None:
    """An explicit roof of tight quasi-isomorphisms, or None when none exists.

    The roof is C <-Id- C -g-> D where g goes through the harmonic spaces and
    rescales one harmonic vector to absorb the torsion mismatch of the two
    acyclic parts.
    """
    hc, hd = C.hodge, D.hodge
    degs = range(min(C.lo, D.lo), max(C.hi, D.hi) + 1)
    if any(hc.betti(i) != hd.betti(i) for i in degs):
        return None
    mismatch = hd.torsion_sum() - hc.torsion_sum()
    phi = {i: np.eye(hc.betti(i), dtype=complex) for i in degs if hc.betti(i)}
    if phi:
        j = min(phi)
        phi[j][0, 0] = np.exp((-1) ** (j % 2) * mismatch)
    elif abs(mismatch) > tol:
        return None
    g = canonical_chain_map(C, D, phi)
    s = identity(C)
    if not (is_tight(s, tol) and is_tight(g, tol)):
        return None
    return TightRoof(C, s, g)


def tightly_related(C: HermComplex, D: HermComplex, tol: float = TAU_TOL) -> bool:
    """Decided by graded cohomology dimensions plus tau, confirmed by an explicit tight roof."""
    return tight_roof(C, D, tol) is not None


@dataclass
class GeneratorDecomposition:
    pieces: list          # (degree, a)

    def alternating_sum(self) -> float:
        return float(sum((-1) ** (n % 2) * a for n, a in self.pieces))


def reduce_to_generators(C: HermComplex, tol: float = 1e-12) -> GeneratorDecomposition:
    """Peel off rank-one subcomplexes e^a placed in degree n, lowest degree first.

    In the lowest degree n with nonzero differential, take the basis vector v
    of largest norm, record log(|dv| / |v|), and pass to the quotient by
    span{v, dv}, identified with the orthogonal complement.
    """
    _require_acyclic(C)
    grams = {i: np.array(C.gram(i)) for i in C.degrees}
    diffs = {i: np.array(C.d(i)) for i in range(C.lo, C.hi)}
    pieces = []
    scale = max([1.0] + [float(np.linalg.norm(m)) for m in diffs.values() if m.size])
    while True:
        n = next((i for i in sorted(diffs) if diffs[i].size and np.linalg.norm(diffs[i]) > tol * scale), None)
        if n is None:
            break
        G0, G1, f = grams[n], grams[n + 1], diffs[n]
        k = int(np.argmax(np.real(np.diag(G0))))
        v = np.zeros(G0.shape[0], dtype=complex)
        v[k] = 1.0
        w = f @ v
        nv = np.sqrt(np.real(v.conj() @ G0 @ v))
        nw = np.sqrt(np.real(w.conj() @ G1 @ w))
        if nw <= tol * scale * nv:
            raise PreconditionError(f"rank collapse in degree {n}: |dv|/|v| = {nw / nv:.3e}")
        pieces.append((n, float(np.log(nw / nv))))
        W0 = _complement(G0, v)
        W1 = _complement(G1, w)
        # quotient differentials in the complement bases
        new_n = _coords(G1, W1, f @ W0)
        grams[n] = W0.conj().T @ G0 @ W0
        grams[n + 1] = W1.conj().T @ G1 @ W1
        diffs[n] = new_n
        if n + 1 in diffs:
            diffs[n + 1] = diffs[n + 1] @ W1
        if n - 1 in diffs:
            diffs[n - 1] = _coords(G0, W0, diffs[n - 1])
    return GeneratorDecomposition(pieces)


def _complement(G: np.ndarray, v: np.ndarray) -> np.ndarray:
    a = (v.conj() @ G)[None, :]
    _, _, vh = np.linalg.svd(a)
    return vh[1:].conj().T


def _coords(G: np.ndarray, W: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Coordinates in the basis W of the orthogonal projection of Y onto span(W)."""
    return np.linalg.solve(W.conj().T @ G @ W, W.conj().T @ G @ Y)


def torsion_of_map_cone(f: ChainMap) -> float:
    return tau(cone(f))


def cohomology_log_det(f: ChainMap) -> float:
    """sum_i (-1)^i log|det H^i(f)| in harmonic orthonormal bases."""
    total = 0.0
    for i, m in cohomology_map(f).items():
        if m.size:
            total += (-1) ** (i % 2) * float(np.linalg.slogdet(m)[1])
    return total
