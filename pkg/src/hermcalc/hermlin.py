"""Bounded complexes of finite-dimensional hermitian vector spaces.

A complex stores, for every degree ``i`` in ``lo..hi``, a positive-definite
Gram matrix and, for ``lo <= i < hi``, the differential ``d^i`` as a matrix of
shape ``dim(i+1) x dim(i)``.  Vectors are columns in the stored basis, so the
inner product of ``x`` and ``y`` in degree ``i`` is ``x^H G_i y``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np

PD_TOL = 1e-10
CHAIN_TOL = 1e-9
RANK_RTOL = 1e-8
RANK_BAND = (0.1, 10.0)
# singular values are measured against max(largest singular value, RANK_FLOOR)
RANK_FLOOR = 1e-6


class ComplexError(ValueError):
    """Malformed input: shapes, missing degrees, non-chain maps."""


class PreconditionError(ValueError):
    """A well-formed input that violates an operation's precondition."""


class NotAcyclicError(PreconditionError):
    pass


class RankAmbiguityError(PreconditionError):
    """A singular value fell inside the ambiguity band around the rank threshold."""


def _matrix(a, shape: tuple[int, int] | None = None) -> np.ndarray:
    m = np.array(a, dtype=complex)
    if shape is not None:
        if m.size == 0:
            m = m.reshape(shape)
        elif m.shape != shape:
            raise ComplexError(f"expected shape {shape}, got {m.shape}")
    elif m.ndim != 2:
        raise ComplexError(f"expected a matrix, got array of shape {m.shape}")
    m.setflags(write=False)
    return m


def _frozen(m: np.ndarray) -> np.ndarray:
    m = np.ascontiguousarray(m, dtype=complex)
    m.setflags(write=False)
    return m


def _rel(residual: np.ndarray, *scales: np.ndarray) -> float:
    r = float(np.linalg.norm(residual)) if residual.size else 0.0
    s = max([1.0] + [float(np.linalg.norm(x)) for x in scales if x.size])
    return r / s


@dataclass(frozen=True, eq=False)
class HermSpace:
    gram: np.ndarray

    def __post_init__(self):
        g = np.array(self.gram, dtype=complex)
        if g.size == 0:
            g = g.reshape(0, 0)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ComplexError(f"gram must be square, got shape {g.shape}")
        object.__setattr__(self, "gram", _frozen(g))

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    @classmethod
    def standard(cls, n: int) -> "HermSpace":
        return cls(np.eye(n))

    @classmethod
    def line(cls, norm: float = 1.0) -> "HermSpace":
        """A one-dimensional space whose basis vector has the given norm."""
        return cls(np.array([[norm * norm]]))


class HermComplex:
    """An immutable bounded cochain complex of hermitian spaces."""

    def __init__(self, grams: Mapping[int, object], diffs: Mapping[int, object] | None = None,
                 lo: int | None = None, hi: int | None = None):
        grams = {int(k): (v.gram if isinstance(v, HermSpace) else v) for k, v in grams.items()}
        diffs = {int(k): v for k, v in (diffs or {}).items()}
        keys = list(grams)
        if lo is None:
            lo = min(keys) if keys else 0
        if hi is None:
            hi = max(keys) if keys else lo
        if hi < lo:
            raise ComplexError(f"empty degree range {lo}..{hi}")
        self.lo, self.hi = int(lo), int(hi)
        g: dict[int, np.ndarray] = {}
        for i in range(self.lo, self.hi + 1):
            g[i] = HermSpace(grams.get(i, np.zeros((0, 0)))).gram
        for k, v in grams.items():
            if not self.lo <= k <= self.hi and np.asarray(v).size:
                raise ComplexError(f"space in degree {k} lies outside {self.lo}..{self.hi}")
        self.grams = g
        d: dict[int, np.ndarray] = {}
        for i in range(self.lo, self.hi):
            shape = (g[i + 1].shape[0], g[i].shape[0])
            d[i] = _matrix(diffs[i], shape) if i in diffs else _frozen(np.zeros(shape))
        for k, v in diffs.items():
            if not self.lo <= k < self.hi and np.asarray(v).size:
                raise ComplexError(f"differential in degree {k} lies outside {self.lo}..{self.hi - 1}")
        self.diffs = d

    # -- accessors -------------------------------------------------------
    def dim(self, i: int) -> int:
        g = self.grams.get(i)
        return 0 if g is None else g.shape[0]

    def gram(self, i: int) -> np.ndarray:
        g = self.grams.get(i)
        return np.zeros((0, 0), dtype=complex) if g is None else g

    def d(self, i: int) -> np.ndarray:
        m = self.diffs.get(i)
        if m is None:
            return np.zeros((self.dim(i + 1), self.dim(i)), dtype=complex)
        return m

    def space(self, i: int) -> HermSpace:
        return HermSpace(self.gram(i))

    @property
    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    @property
    def dims(self) -> dict[int, int]:
        return {i: self.dim(i) for i in self.degrees}

    @property
    def total_dim(self) -> int:
        return sum(self.dims.values())

    def euler_characteristic(self) -> int:
        return sum((-1) ** (i % 2) * n for i, n in self.dims.items())

    def __repr__(self) -> str:
        dims = ", ".join(f"{i}:{n}" for i, n in self.dims.items())
        return f"HermComplex({{{dims}}})"

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls) -> "HermComplex":
        return cls({})

    @classmethod
    def point(cls, space: HermSpace | np.ndarray, degree: int = 0) -> "HermComplex":
        return cls({degree: space})

    @classmethod
    def exp_generator(cls, a: float) -> "HermComplex":
        """The two-term complex C -> C (degrees 0, 1), multiplication by e^a, unit norms."""
        return cls({0: np.eye(1), 1: np.eye(1)}, {0: [[np.exp(a)]]})

    @cached_property
    def hodge(self) -> "HodgeDecomposition":
        return hodge_decompose(self)


def same_complex(C: HermComplex, D: HermComplex, atol: float = 0.0) -> bool:
    """Equal stored data over the union of both degree ranges."""
    if C is D:
        return True
    lo, hi = min(C.lo, D.lo), max(C.hi, D.hi)
    for i in range(lo, hi + 1):
        if C.dim(i) != D.dim(i):
            return False
        if C.dim(i) and not _close(C.gram(i), D.gram(i), atol):
            return False
        m = C.d(i)
        if m.size and not _close(m, D.d(i), atol):
            return False
    return True


def _close(a, b, atol):
    if atol == 0.0:
        return np.array_equal(a, b)
    return bool(np.max(np.abs(a - b)) <= atol)


class ChainMap:
    """Degreewise matrices ``maps[i]: source^i -> target^i``."""

    def __init__(self, source: HermComplex, target: HermComplex, maps: Mapping[int, object] | None = None):
        self.source, self.target = source, target
        m: dict[int, np.ndarray] = {}
        for i, v in (maps or {}).items():
            i = int(i)
            shape = (target.dim(i), source.dim(i))
            if shape == (0, 0) or 0 in shape:
                if np.asarray(v).size:
                    raise ComplexError(f"map in degree {i} has no room: shape {shape}")
                continue
            m[i] = _matrix(v, shape)
        self.maps = m

    def at(self, i: int) -> np.ndarray:
        v = self.maps.get(i)
        if v is None:
            return np.zeros((self.target.dim(i), self.source.dim(i)), dtype=complex)
        return v

    @property
    def degrees(self) -> range:
        return range(min(self.source.lo, self.target.lo), max(self.source.hi, self.target.hi) + 1)

    def chain_residual(self) -> float:
        worst = 0.0
        for i in self.degrees:
            r = self.target.d(i) @ self.at(i) - self.at(i + 1) @ self.source.d(i)
            worst = max(worst, _rel(r, self.at(i), self.at(i + 1)))
        return worst

    def check(self, tol: float = CHAIN_TOL) -> "ChainMap":
        r = self.chain_residual()
        if r > tol:
            raise ComplexError(f"not a chain map (relative residual {r:.3e})")
        return self

    def __matmul__(self, other: "ChainMap") -> "ChainMap":
        """Composition ``self o other``."""
        return ChainMap(other.source, self.target,
                        {i: self.at(i) @ other.at(i) for i in other.degrees})

    def _combine(self, other: "ChainMap", sign: float) -> "ChainMap":
        return ChainMap(self.source, self.target,
                        {i: self.at(i) + sign * other.at(i) for i in self.degrees})

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __neg__(self):
        return self.scaled(-1.0)

    def scaled(self, c: complex) -> "ChainMap":
        return ChainMap(self.source, self.target, {i: c * m for i, m in self.maps.items()})

    def is_quasi_isomorphism(self) -> bool:
        hs, ht = self.source.hodge, self.target.hodge
        maps = cohomology_map(self)
        for i in self.degrees:
            a, b = hs.betti(i), ht.betti(i)
            if a != b:
                return False
            if a and np.linalg.matrix_rank(maps[i], tol=1e-8) < a:
                return False
        return True

    def __repr__(self) -> str:
        return f"ChainMap({self.source!r} -> {self.target!r})"


def identity(C: HermComplex) -> ChainMap:
    return ChainMap(C, C, {i: np.eye(C.dim(i)) for i in C.degrees})


def zero_map(C: HermComplex, D: HermComplex) -> ChainMap:
    return ChainMap(C, D, {})


class Homotopy:
    """Degreewise matrices ``maps[i]: source^i -> target^{i-1}``."""

    def __init__(self, source: HermComplex, target: HermComplex, maps: Mapping[int, object] | None = None):
        self.source, self.target = source, target
        m: dict[int, np.ndarray] = {}
        for i, v in (maps or {}).items():
            i = int(i)
            shape = (target.dim(i - 1), source.dim(i))
            if 0 in shape:
                continue
            m[i] = _matrix(v, shape)
        self.maps = m

    def at(self, i: int) -> np.ndarray:
        v = self.maps.get(i)
        if v is None:
            return np.zeros((self.target.dim(i - 1), self.source.dim(i)), dtype=complex)
        return v

    @property
    def degrees(self) -> range:
        return range(min(self.source.lo, self.target.lo), max(self.source.hi, self.target.hi) + 2)

    def boundary(self) -> ChainMap:
        """The null-homotopic map ``dh + hd``."""
        S, T = self.source, self.target
        return ChainMap(S, T, {i: T.d(i - 1) @ self.at(i) + self.at(i + 1) @ S.d(i)
                               for i in self.degrees})

    def __add__(self, other: "Homotopy") -> "Homotopy":
        return Homotopy(self.source, self.target,
                        {i: self.at(i) + other.at(i) for i in self.degrees})


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    entries: list = field(default_factory=list)   # (degree, check, ok, residual)

    @property
    def ok(self) -> bool:
        return all(e[2] for e in self.entries)

    def failures(self):
        return [e for e in self.entries if not e[2]]


def validate(C: HermComplex, pd_tol: float = PD_TOL, chain_tol: float = CHAIN_TOL) -> ValidationReport:
    rep = ValidationReport()
    for i in C.degrees:
        G = C.gram(i)
        if not G.size:
            continue
        herm = float(np.max(np.abs(G - G.conj().T)))
        rep.entries.append((i, "hermitian", herm <= chain_tol * max(1.0, float(np.max(np.abs(G)))), herm))
        try:
            L = np.linalg.cholesky((G + G.conj().T) / 2)
            pivot = float(np.min(np.abs(np.diag(L))) ** 2)
        except np.linalg.LinAlgError:
            pivot = float(np.min(np.linalg.eigvalsh((G + G.conj().T) / 2)))
        rep.entries.append((i, "positive_definite", pivot > pd_tol, pivot))
        if not np.all(np.isfinite(G)):
            rep.entries.append((i, "finite", False, float("inf")))
    for i in range(C.lo, C.hi - 1):
        dd = C.d(i + 1) @ C.d(i)
        # relative to the product of the factor norms
        scale = max(1.0, float(np.linalg.norm(C.d(i + 1))) * float(np.linalg.norm(C.d(i))))
        r = float(np.linalg.norm(dd)) / scale if dd.size else 0.0
        rep.entries.append((i, "d_squared", r <= chain_tol, r))
    for i in range(C.lo, C.hi):
        if C.d(i).size and not np.all(np.isfinite(C.d(i))):
            rep.entries.append((i, "finite", False, float("inf")))
    return rep


def check_valid(C: HermComplex) -> HermComplex:
    rep = validate(C)
    if not rep.ok:
        deg, what, _, res = rep.failures()[0]
        raise ComplexError(f"invalid complex: {what} fails in degree {deg} (residual {res:.3e})")
    return C


# ---------------------------------------------------------------------------
# constructions


def _blockdiag(*blocks: np.ndarray) -> np.ndarray:
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols), dtype=complex)
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def _block(rows: list[list[np.ndarray]]) -> np.ndarray:
    return np.block(rows) if rows else np.zeros((0, 0))


def cone(f: ChainMap) -> HermComplex:
    """cone(f)^i = source^{i+1} + target^i with d(x, y) = (-dx, f x + dy)."""
    E, F = f.source, f.target
    lo, hi = min(E.lo - 1, F.lo), max(E.hi - 1, F.hi)
    grams = {i: _blockdiag(E.gram(i + 1), F.gram(i)) for i in range(lo, hi + 1)}
    diffs = {}
    for i in range(lo, hi):
        diffs[i] = _block([[-E.d(i + 1), np.zeros((E.dim(i + 2), F.dim(i)))],
                           [f.at(i + 1), F.d(i)]])
    return HermComplex(grams, diffs, lo, hi)


def shift(C: HermComplex, k: int) -> HermComplex:
    """C[k]^i = C^{i+k}, differential multiplied by (-1)^k."""
    sign = -1.0 if k % 2 else 1.0
    return HermComplex({i - k: C.gram(i) for i in C.degrees},
                       {i - k: sign * C.d(i) if sign < 0 else C.d(i) for i in range(C.lo, C.hi)},
                       C.lo - k, C.hi - k)


def shift_map(f: ChainMap, k: int) -> ChainMap:
    """f[k]^i = f^{i+k} (no sign), a chain map between the shifted complexes."""
    return ChainMap(shift(f.source, k), shift(f.target, k), {i - k: m for i, m in f.maps.items()})


def direct_sum(*Cs: HermComplex) -> HermComplex:
    if not Cs:
        return HermComplex.zero()
    lo, hi = min(C.lo for C in Cs), max(C.hi for C in Cs)
    grams = {i: _blockdiag(*(C.gram(i) for C in Cs)) for i in range(lo, hi + 1)}
    diffs = {i: _blockdiag(*(C.d(i) for C in Cs)) for i in range(lo, hi)}
    return HermComplex(grams, diffs, lo, hi)


def direct_sum_maps(*fs: ChainMap) -> ChainMap:
    S = direct_sum(*(f.source for f in fs))
    T = direct_sum(*(f.target for f in fs))
    degs = range(min(S.lo, T.lo), max(S.hi, T.hi) + 1)
    return ChainMap(S, T, {i: _blockdiag(*(f.at(i) for f in fs)) for i in degs})


def _offsets(Cs, i):
    out, o = [], 0
    for C in Cs:
        out.append(o)
        o += C.dim(i)
    return out


def inclusion(Cs: list[HermComplex], k: int, total: HermComplex | None = None) -> ChainMap:
    """Inclusion of the k-th summand into direct_sum(*Cs)."""
    S = total if total is not None else direct_sum(*Cs)
    maps = {}
    for i in S.degrees:
        m = np.zeros((S.dim(i), Cs[k].dim(i)), dtype=complex)
        o = _offsets(Cs, i)[k]
        m[o:o + Cs[k].dim(i), :] = np.eye(Cs[k].dim(i))
        maps[i] = m
    return ChainMap(Cs[k], S, maps)


def projection(Cs: list[HermComplex], k: int, total: HermComplex | None = None) -> ChainMap:
    S = total if total is not None else direct_sum(*Cs)
    incl = inclusion(Cs, k, S)
    return ChainMap(S, Cs[k], {i: m.T.copy() for i, m in incl.maps.items()})


def _tensor_index(C: HermComplex, D: HermComplex, n: int):
    """Summands (p, q, offset) of (C (x) D)^n, ordered by p."""
    out, o = [], 0
    for p in C.degrees:
        q = n - p
        if D.lo <= q <= D.hi:
            out.append((p, q, o))
            o += C.dim(p) * D.dim(q)
    return out, o


def tensor(C: HermComplex, D: HermComplex) -> HermComplex:
    """Tensor product with d(x (x) y) = dx (x) y + (-1)^|x| x (x) dy."""
    lo, hi = C.lo + D.lo, C.hi + D.hi
    idx = {n: _tensor_index(C, D, n) for n in range(lo, hi + 2)}
    grams = {}
    for n in range(lo, hi + 1):
        grams[n] = _blockdiag(*(np.kron(C.gram(p), D.gram(q)) for p, q, _ in idx[n][0]))
    diffs = {}
    for n in range(lo, hi):
        src, dn = idx[n]
        tgt, tn = idx[n + 1]
        m = np.zeros((tn, dn), dtype=complex)
        toff = {(p, q): o for p, q, o in tgt}
        for p, q, o in src:
            w = C.dim(p) * D.dim(q)
            if (p + 1, q) in toff:
                t = toff[(p + 1, q)]
                blk = np.kron(C.d(p), np.eye(D.dim(q)))
                m[t:t + blk.shape[0], o:o + w] += blk
            if (p, q + 1) in toff:
                t = toff[(p, q + 1)]
                blk = (-1) ** (p % 2) * np.kron(np.eye(C.dim(p)), D.d(q))
                m[t:t + blk.shape[0], o:o + w] += blk
        diffs[n] = m
    return HermComplex(grams, diffs, lo, hi)


def tensor_maps(f: ChainMap, g: ChainMap) -> ChainMap:
    """f (x) g for degree-0 chain maps (no Koszul sign needed)."""
    S, T = tensor(f.source, g.source), tensor(f.target, g.target)
    maps = {}
    for n in S.degrees:
        src, sn = _tensor_index(f.source, g.source, n)
        tgt, tn = _tensor_index(f.target, g.target, n)
        toff = {(p, q): o for p, q, o in tgt}
        m = np.zeros((tn, sn), dtype=complex)
        for p, q, o in src:
            if (p, q) in toff:
                t = toff[(p, q)]
                blk = np.kron(f.at(p), g.at(q))
                m[t:t + blk.shape[0], o:o + blk.shape[1]] = blk
        maps[n] = m
    return ChainMap(S, T, maps)


def _hom_index(C: HermComplex, D: HermComplex, n: int):
    """Summands (p, q, offset) of Hom(C, D)^n = sum over q - p = n of Hom(C^p, D^q)."""
    out, o = [], 0
    for p in C.degrees:
        q = p + n
        if D.lo <= q <= D.hi:
            out.append((p, q, o))
            o += C.dim(p) * D.dim(q)
    return out, o


def hom_complex(C: HermComplex, D: HermComplex) -> HermComplex:
    """Hom(C, D) with d(phi) = d o phi - (-1)^|phi| phi o d.

    A map phi: C^p -> D^q is stored as its column-major vectorization; the
    metric is the one induced on C^* (x) D, i.e. <phi, psi> = tr(phi^* psi).
    """
    lo, hi = D.lo - C.hi, D.hi - C.lo
    idx = {n: _hom_index(C, D, n) for n in range(lo, hi + 2)}
    ginv = {p: np.linalg.inv(C.gram(p)) if C.dim(p) else C.gram(p) for p in C.degrees}
    grams = {}
    for n in range(lo, hi + 1):
        grams[n] = _blockdiag(*(np.kron(ginv[p].T, D.gram(q)) for p, q, _ in idx[n][0]))
    diffs = {}
    for n in range(lo, hi):
        src, sn = idx[n]
        tgt, tn = idx[n + 1]
        toff = {(p, q): o for p, q, o in tgt}
        m = np.zeros((tn, sn), dtype=complex)
        sign = -((-1) ** (n % 2))
        for p, q, o in src:
            w = C.dim(p) * D.dim(q)
            if (p, q + 1) in toff:   # d_D o phi
                t = toff[(p, q + 1)]
                blk = np.kron(np.eye(C.dim(p)), D.d(q))
                m[t:t + blk.shape[0], o:o + w] += blk
            if (p - 1, q) in toff:   # phi o d_C, lands in Hom(C^{p-1}, D^q)
                t = toff[(p - 1, q)]
                blk = sign * np.kron(C.d(p - 1).T, np.eye(D.dim(q)))
                m[t:t + blk.shape[0], o:o + w] += blk
        diffs[n] = m
    return HermComplex(grams, diffs, lo, hi)


def hom_maps(c: ChainMap, e: ChainMap) -> ChainMap:
    """Hom(c, e): Hom(X, Y) -> Hom(U, V), phi -> e o phi o c, for c: U -> X and e: Y -> V."""
    S = hom_complex(c.target, e.source)
    T = hom_complex(c.source, e.target)
    maps = {}
    for n in S.degrees:
        src, sn = _hom_index(c.target, e.source, n)
        tgt, tn = _hom_index(c.source, e.target, n)
        toff = {(p, q): o for p, q, o in tgt}
        m = np.zeros((tn, sn), dtype=complex)
        for p, q, o in src:
            if (p, q) in toff:
                t = toff[(p, q)]
                blk = np.kron(c.at(p).T, e.at(q))
                m[t:t + blk.shape[0], o:o + blk.shape[1]] = blk
        maps[n] = m
    return ChainMap(S, T, maps)


def unit() -> HermComplex:
    return HermComplex({0: np.eye(1)})


def dual(C: HermComplex) -> HermComplex:
    return hom_complex(C, unit())


def alternating_sign(C: HermComplex) -> ChainMap:
    """The isometry x -> (-1)^i x, identifying C with the complex having differential -d."""
    neg = HermComplex(C.grams, {i: -m for i, m in C.diffs.items()}, C.lo, C.hi)
    return ChainMap(C, neg, {i: (-1) ** (i % 2) * np.eye(C.dim(i)) for i in C.degrees})


def negated_cone_isometry(f: ChainMap) -> ChainMap:
    """The isometry cone(f) -> cone(-f), (x, y) -> (-x, y)."""
    A, B = cone(f), cone(-f)
    E = f.source
    return ChainMap(A, B, {i: _blockdiag(-np.eye(E.dim(i + 1)), np.eye(f.target.dim(i)))
                           for i in A.degrees})


class DoubleComplex:
    """A bounded double complex with commuting squares.

    ``grams[(p, q)]``; ``dh[(p, q)]: (p, q) -> (p+1, q)``; ``dv[(p, q)]: (p, q) -> (p, q+1)``.
    The stored squares commute (dh dv = dv dh); totalization uses d = dh + (-1)^p dv.
    """

    def __init__(self, grams: Mapping, dh: Mapping | None = None, dv: Mapping | None = None):
        self.grams = {(int(p), int(q)): HermSpace(g).gram for (p, q), g in grams.items()}
        self.dh, self.dv = {}, {}
        for (p, q), m in (dh or {}).items():
            self.dh[(p, q)] = _matrix(m, (self.dim(p + 1, q), self.dim(p, q)))
        for (p, q), m in (dv or {}).items():
            self.dv[(p, q)] = _matrix(m, (self.dim(p, q + 1), self.dim(p, q)))

    def dim(self, p: int, q: int) -> int:
        g = self.grams.get((p, q))
        return 0 if g is None else g.shape[0]

    def gram(self, p, q):
        return self.grams.get((p, q), np.zeros((0, 0), dtype=complex))

    def h(self, p, q):
        m = self.dh.get((p, q))
        return np.zeros((self.dim(p + 1, q), self.dim(p, q)), dtype=complex) if m is None else m

    def v(self, p, q):
        m = self.dv.get((p, q))
        return np.zeros((self.dim(p, q + 1), self.dim(p, q)), dtype=complex) if m is None else m

    @property
    def prange(self):
        ps = [p for p, _ in self.grams] or [0]
        return range(min(ps), max(ps) + 1)

    @property
    def qrange(self):
        qs = [q for _, q in self.grams] or [0]
        return range(min(qs), max(qs) + 1)

    def transpose(self) -> "DoubleComplex":
        return DoubleComplex({(q, p): g for (p, q), g in self.grams.items()},
                             {(q, p): m for (p, q), m in self.dv.items()},
                             {(q, p): m for (p, q), m in self.dh.items()})

    def column(self, p: int) -> HermComplex:
        """The complex (p, *) with the vertical differential."""
        qs = self.qrange
        return HermComplex({q: self.gram(p, q) for q in qs},
                           {q: self.v(p, q) for q in qs[:-1]}, qs.start, qs.stop - 1)

    def row(self, q: int) -> HermComplex:
        """The complex (*, q) with the horizontal differential."""
        ps = self.prange
        return HermComplex({p: self.gram(p, q) for p in ps},
                           {p: self.h(p, q) for p in ps[:-1]}, ps.start, ps.stop - 1)

    def square_residual(self) -> float:
        worst = 0.0
        for p in self.prange:
            for q in self.qrange:
                r = self.v(p + 1, q) @ self.h(p, q) - self.h(p, q + 1) @ self.v(p, q)
                if r.size:
                    worst = max(worst, float(np.linalg.norm(r)))
        return worst


def _total_index(D: DoubleComplex, n: int):
    out, o = [], 0
    for p in D.prange:
        q = n - p
        if (p, q) in D.grams:
            out.append((p, q, o))
            o += D.dim(p, q)
    return out, o


def total(D: DoubleComplex) -> HermComplex:
    ps, qs = D.prange, D.qrange
    lo, hi = ps.start + qs.start, ps.stop + qs.stop - 2
    idx = {n: _total_index(D, n) for n in range(lo, hi + 2)}
    grams = {n: _blockdiag(*(D.gram(p, q) for p, q, _ in idx[n][0])) for n in range(lo, hi + 1)}
    diffs = {}
    for n in range(lo, hi):
        src, sn = idx[n]
        tgt, tn = idx[n + 1]
        toff = {(p, q): o for p, q, o in tgt}
        m = np.zeros((tn, sn), dtype=complex)
        for p, q, o in src:
            w = D.dim(p, q)
            if (p + 1, q) in toff:
                t = toff[(p + 1, q)]
                m[t:t + D.dim(p + 1, q), o:o + w] += D.h(p, q)
            if (p, q + 1) in toff:
                t = toff[(p, q + 1)]
                m[t:t + D.dim(p, q + 1), o:o + w] += (-1) ** (p % 2) * D.v(p, q)
        diffs[n] = m
    return HermComplex(grams, diffs, lo, hi)


def transpose_isometry(D: DoubleComplex) -> ChainMap:
    """total(D) -> total(D.transpose()), acting by (-1)^{pq} on the (p, q) summand."""
    A, T = total(D), total(D.transpose())
    maps = {}
    for n in A.degrees:
        src, sn = _total_index(D, n)
        tgt, tn = _total_index(D.transpose(), n)
        toff = {(p, q): o for p, q, o in tgt}
        m = np.zeros((tn, sn), dtype=complex)
        for p, q, o in src:
            t = toff[(q, p)]
            w = D.dim(p, q)
            m[t:t + w, o:o + w] = (-1) ** ((p * q) % 2) * np.eye(w)
        maps[n] = m
    return ChainMap(A, T, maps)


# ---------------------------------------------------------------------------
# Hodge theory


@dataclass
class HodgeDecomposition:
    """Gram-orthonormal bases of E^i = B^i + H^i + K^i.

    ``boundary[i]`` spans im d^{i-1}, ``harmonic[i]`` spans ker d ∩ ker d*,
    ``coexact[i]`` spans (ker d^i)^perp.  d maps ``coexact[i][:, k]`` to
    ``sigma[i][k] * boundary[i+1][:, k]``.
    """
    complex: HermComplex
    boundary: dict
    harmonic: dict
    coexact: dict
    sigma: dict
    threshold: float
    ambiguous: list

    def betti(self, i: int) -> int:
        h = self.harmonic.get(i)
        return 0 if h is None else h.shape[1]

    @property
    def bettis(self) -> dict[int, int]:
        return {i: self.betti(i) for i in self.complex.degrees}

    @property
    def acyclic(self) -> bool:
        return not any(self.bettis.values())

    def log_det(self, i: int) -> float:
        s = self.sigma.get(i)
        return float(np.sum(np.log(s))) if s is not None and s.size else 0.0

    def torsion_sum(self) -> float:
        """sum_i (-1)^i log|det(K^i -> B^{i+1})|, the torsion of the acyclic part."""
        return float(sum((-1) ** (i % 2) * self.log_det(i) for i in self.complex.degrees))

    def harmonic_projector(self, i: int) -> np.ndarray:
        """Coordinates of the harmonic component: x -> Hb^H G x."""
        C = self.complex
        return self.harmonic[i].conj().T @ C.gram(i)

    def green(self, i: int) -> np.ndarray:
        """The partial inverse of d: E^i -> E^{i-1}, inverting d on B^i and zero on H^i + K^i."""
        C = self.complex
        B, K = self.boundary.get(i), self.coexact.get(i - 1)
        if B is None or K is None or B.shape[1] == 0:
            return np.zeros((C.dim(i - 1), C.dim(i)), dtype=complex)
        return K @ np.diag(1.0 / self.sigma[i - 1]) @ B.conj().T @ C.gram(i)

    def reconstruct(self) -> tuple[dict, dict]:
        """Rebuild Gram and differentials from the three blocks."""
        C = self.complex
        P = {i: np.hstack([self.boundary[i], self.harmonic[i], self.coexact[i]]) for i in C.degrees}
        Pinv = {i: np.linalg.inv(P[i]) if C.dim(i) else P[i] for i in C.degrees}
        grams = {i: Pinv[i].conj().T @ Pinv[i] for i in C.degrees}
        diffs = {}
        for i in range(C.lo, C.hi):
            M = np.zeros((C.dim(i + 1), C.dim(i)), dtype=complex)
            r = len(self.sigma[i])
            nb, nh = self.boundary[i].shape[1], self.harmonic[i].shape[1]
            M[:r, nb + nh:nb + nh + r] = np.diag(self.sigma[i])
            diffs[i] = P[i + 1] @ M @ Pinv[i]
        return grams, diffs


def _chol(G: np.ndarray, degree: int) -> np.ndarray:
    try:
        L = np.linalg.cholesky((G + G.conj().T) / 2)
    except np.linalg.LinAlgError:
        raise ComplexError(f"gram in degree {degree} is not positive definite") from None
    if L.size and float(np.min(np.abs(np.diag(L)))) ** 2 <= PD_TOL:
        raise ComplexError(f"gram in degree {degree} has a Cholesky pivot below {PD_TOL}")
    return L


def _orth_complement(cols: np.ndarray, n: int) -> np.ndarray:
    if cols.shape[1] == 0:
        return np.eye(n, dtype=complex)
    if cols.shape[1] >= n:
        return np.zeros((n, 0), dtype=complex)
    u, _, _ = np.linalg.svd(cols, full_matrices=True)
    return u[:, cols.shape[1]:]


def hodge_decompose(C: HermComplex) -> HodgeDecomposition:
    Ls, Linv_h = {}, {}
    for i in C.degrees:
        n = C.dim(i)
        if n:
            L = _chol(C.gram(i), i)
            Ls[i] = L
            Linv_h[i] = np.linalg.inv(L.conj().T)   # orthonormal coords -> stored coords
        else:
            Ls[i] = Linv_h[i] = np.zeros((0, 0), dtype=complex)
    svds, smax = {}, 0.0
    for i in range(C.lo, C.hi):
        dt = Ls[i + 1].conj().T @ C.d(i) @ Linv_h[i]
        if dt.size:
            u, s, vh = np.linalg.svd(dt)
            svds[i] = (u, s, vh)
            if s.size:
                smax = max(smax, float(s[0]))
    thr = RANK_RTOL * max(smax, RANK_FLOOR)
    lo_b, hi_b = RANK_BAND[0] * thr, RANK_BAND[1] * thr
    ambiguous = []
    sigma, Bo, Ko = {}, {}, {}
    for i in C.degrees:
        sigma[i] = np.zeros(0)
        Ko[i] = np.zeros((C.dim(i), 0), dtype=complex)
        Bo[i] = np.zeros((C.dim(i), 0), dtype=complex)
    for i, (u, s, vh) in svds.items():
        for x in s:
            if lo_b <= x <= hi_b:
                ambiguous.append((i, float(x)))
        r = int(np.sum(s > thr))
        sigma[i] = s[:r].copy()
        Ko[i] = vh[:r].conj().T
        Bo[i + 1] = u[:, :r]
    boundary, harmonic, coexact = {}, {}, {}
    for i in C.degrees:
        n = C.dim(i)
        Ho = _orth_complement(np.hstack([Bo[i], Ko[i]]), n)
        boundary[i] = Linv_h[i] @ Bo[i] if n else Bo[i]
        harmonic[i] = Linv_h[i] @ Ho if n else Ho
        coexact[i] = Linv_h[i] @ Ko[i] if n else Ko[i]
    return HodgeDecomposition(C, boundary, harmonic, coexact, sigma, thr, ambiguous)


@dataclass
class Cohomology:
    dims: dict
    harmonic_basis: dict
    harmonic_gram: dict
    ambiguous: list


def cohomology(C: HermComplex) -> Cohomology:
    hd = C.hodge
    grams = {i: hd.harmonic[i].conj().T @ C.gram(i) @ hd.harmonic[i] for i in C.degrees}
    return Cohomology(hd.bettis, dict(hd.harmonic), grams, list(hd.ambiguous))


def cohomology_map(f: ChainMap) -> dict[int, np.ndarray]:
    """Matrices of H(f) in the harmonic orthonormal bases of source and target."""
    hs, ht = f.source.hodge, f.target.hodge
    out = {}
    for i in f.degrees:
        a = hs.harmonic.get(i, np.zeros((f.source.dim(i), 0)))
        b = ht.harmonic.get(i, np.zeros((f.target.dim(i), 0)))
        out[i] = b.conj().T @ f.target.gram(i) @ f.at(i) @ a if (a.size and b.size) \
            else np.zeros((b.shape[1], a.shape[1]), dtype=complex)
    return out


def canonical_chain_map(X: HermComplex, Y: HermComplex, phi: Mapping[int, np.ndarray]) -> ChainMap:
    """The chain map X -> harmonics -> Y realizing the cohomology map phi."""
    hx, hy = X.hodge, Y.hodge
    maps = {}
    for i, m in phi.items():
        if m.size:
            maps[i] = hy.harmonic[i] @ m @ hx.harmonic_projector(i)
    return ChainMap(X, Y, maps)


def harmonic_complex(C: HermComplex) -> HermComplex:
    """Cohomology of C as a zero-differential complex with the harmonic metric (identity Grams)."""
    return HermComplex({i: np.eye(C.hodge.betti(i)) for i in C.degrees}, {}, C.lo, C.hi)


def harmonic_inclusion(C: HermComplex) -> ChainMap:
    return ChainMap(harmonic_complex(C), C, {i: C.hodge.harmonic[i] for i in C.degrees})


def harmonic_projection(C: HermComplex) -> ChainMap:
    return ChainMap(C, harmonic_complex(C), {i: C.hodge.harmonic_projector(i) for i in C.degrees})


def null_homotopy(w: ChainMap, tol: float = 1e-8) -> Homotopy:
    """A homotopy h with w = dh + hd, for a chain map inducing zero on cohomology.

    h = K_Y w + P_Y w K_X, with K the Green operator and P the harmonic projection.
    """
    X, Y = w.source, w.target
    hx, hy = X.hodge, Y.hodge
    for i, m in cohomology_map(w).items():
        if m.size and float(np.max(np.abs(m))) > tol * max(1.0, _maxabs(w)):
            raise PreconditionError(f"map is not null on cohomology in degree {i}")
    maps = {}
    for i in range(min(X.lo, Y.lo), max(X.hi, Y.hi) + 2):
        if not (X.dim(i) and Y.dim(i - 1)):
            continue
        h = hy.green(i) @ w.at(i) if Y.dim(i) else np.zeros((Y.dim(i - 1), X.dim(i)), dtype=complex)
        if X.dim(i - 1) and hy.betti(i - 1):
            P = hy.harmonic[i - 1] @ hy.harmonic_projector(i - 1)
            h = h + P @ w.at(i - 1) @ hx.green(i)
        maps[i] = h
    return Homotopy(X, Y, maps)


def _maxabs(f: ChainMap) -> float:
    return max([0.0] + [float(np.max(np.abs(m))) for m in f.maps.values() if m.size])


# ---------------------------------------------------------------------------
# cone of a homotopy-commutative square


@dataclass
class ConeSquare:
    psi: ChainMap          # cone(f') -> cone(f)
    phi: ChainMap          # cone(-g') -> cone(g)
    perm: dict             # degree -> index array: cone(psi) coordinate k sits at cone(phi) index perm[k]
    residual: float

    def permuted_phi_cone(self) -> tuple[dict, dict]:
        A = cone(self.phi)
        grams = {i: A.gram(i)[np.ix_(p, p)] for i, p in self.perm.items()}
        diffs = {i: A.d(i)[np.ix_(self.perm[i + 1], self.perm[i])]
                 for i in self.perm if i + 1 in self.perm}
        return grams, diffs


def homotopy_residual(f1: ChainMap, f: ChainMap, g1: ChainMap, g: ChainMap, h: Homotopy) -> float:
    lhs = g @ f1 - f @ g1
    rhs = h.boundary()
    worst = 0.0
    for i in lhs.degrees:
        worst = max(worst, _rel(lhs.at(i) - rhs.at(i), g.at(i), f.at(i), rhs.at(i)))
    return worst


def cone_of_squares(f1: ChainMap, f: ChainMap, g1: ChainMap, g: ChainMap, h: Homotopy,
                    tol: float = CHAIN_TOL) -> ConeSquare:
    """Square E' -f1-> F', E -f-> F with g1: E' -> E, g: F' -> F and g f1 - f g1 = dh + hd."""
    E1, F1, E, F = f1.source, f1.target, f.source, f.target
    r = homotopy_residual(f1, f, g1, g, h)
    if r > tol:
        raise PreconditionError(f"homotopy witness fails (relative residual {r:.3e})")
    Cf1, Cf = cone(f1), cone(f)
    psi = ChainMap(Cf1, Cf, {i: _block([[g1.at(i + 1), np.zeros((E.dim(i + 1), F1.dim(i)))],
                                        [h.at(i + 1), g.at(i)]])
                             for i in range(min(Cf1.lo, Cf.lo), max(Cf1.hi, Cf.hi) + 1)})
    Cg1, Cg = cone(-g1), cone(g)
    phi = ChainMap(Cg1, Cg, {i: _block([[-f1.at(i + 1), np.zeros((F1.dim(i + 1), E.dim(i)))],
                                        [h.at(i + 1), f.at(i)]])
                             for i in range(min(Cg1.lo, Cg.lo), max(Cg1.hi, Cg.hi) + 1)})
    A, B = cone(psi), cone(phi)
    # cone(psi)^i = E'^{i+2} + F'^{i+1} + E^{i+1} + F^i
    # cone(phi)^i = E'^{i+2} + E^{i+1} + F'^{i+1} + F^i
    perm = {}
    for i in range(min(A.lo, B.lo), max(A.hi, B.hi) + 1):
        a, b, c, e = E1.dim(i + 2), F1.dim(i + 1), E.dim(i + 1), F.dim(i)
        idx = np.concatenate([np.arange(a), a + c + np.arange(b), a + np.arange(c), a + b + c + np.arange(e)])
        perm[i] = idx.astype(int)
    sq = ConeSquare(psi, phi, perm, 0.0)
    sq.residual = cone_square_residual(sq)
    return sq


def cone_square_residual(sq: ConeSquare) -> float:
    A = cone(sq.psi)
    grams, diffs = sq.permuted_phi_cone()
    worst = 0.0
    for i in A.degrees:
        if A.dim(i):
            worst = max(worst, float(np.max(np.abs(A.gram(i) - grams[i]))))
    for i in range(A.lo, A.hi):
        if A.d(i).size:
            worst = max(worst, float(np.max(np.abs(A.d(i) - diffs[i]))))
    return worst


# ---------------------------------------------------------------------------
# orthogonally split sequences


@dataclass
class SplitSequence:
    f_s: ChainMap          # E -> F where E = Q[-1]
    iso: ChainMap          # cone(f_s) -> G
    section: dict
    residual: float


def section_to_map(incl: ChainMap, proj: ChainMap, section: Mapping[int, np.ndarray] | None = None,
                   tol: float = 1e-8) -> SplitSequence:
    """From 0 -> F -> G -> Q -> 0 orthogonally split, build f_s = ds - sd: Q[-1] -> F.

    The sequence is given by the inclusion F -> G and the projection G -> Q.
    Without an explicit section the orthogonal one is used.
    """
    F, G, Q = incl.source, incl.target, proj.target
    if not same_complex(proj.source, G):
        raise ComplexError("projection does not start at the middle complex")
    sec = {}
    for i in G.degrees:
        n = G.dim(i)
        if not n:
            continue
        Gi, iota, pi = G.gram(i), incl.at(i), proj.at(i)
        err = _rel(iota.conj().T @ Gi @ iota - F.gram(i), F.gram(i))
        err = max(err, _rel(pi @ iota, pi))
        if section is not None and i in section:
            s = np.asarray(section[i], dtype=complex)
        elif Q.dim(i):
            W = _gram_orth_complement(Gi, iota)
            s = W @ np.linalg.inv(pi @ W)
        else:
            s = np.zeros((n, 0), dtype=complex)
        if Q.dim(i):
            err = max(err, _rel(pi @ s - np.eye(Q.dim(i))))
            err = max(err, _rel(s.conj().T @ Gi @ s - Q.gram(i), Q.gram(i)))
            if F.dim(i):
                err = max(err, _rel(s.conj().T @ Gi @ iota, Gi))
        if F.dim(i) + Q.dim(i) != n:
            err = max(err, 1.0)
        if err > tol:
            raise PreconditionError(f"sequence is not orthogonally split in degree {i} (residual {err:.3e})")
        sec[i] = s
    E = shift(Q, -1)
    maps = {}
    for j in E.degrees:
        i = j - 1                       # E^j = Q^{j-1}
        if not (Q.dim(i) and F.dim(j)):
            continue
        s_i = sec.get(i, np.zeros((G.dim(i), Q.dim(i))))
        s_j = sec.get(j, np.zeros((G.dim(j), Q.dim(j))))
        m = G.d(i) @ s_i - s_j @ Q.d(i)
        iota = incl.at(j)
        left = np.linalg.solve(iota.conj().T @ G.gram(j) @ iota, iota.conj().T @ G.gram(j))
        maps[j] = left @ m
    fs = ChainMap(E, F, maps)
    Cf = cone(fs)
    iso = ChainMap(Cf, G, {i: np.hstack([sec.get(i, np.zeros((G.dim(i), Q.dim(i)))), incl.at(i)])
                           for i in Cf.degrees if Cf.dim(i) and G.dim(i)})
    res = max(isometry_residual(iso), fs.chain_residual())
    return SplitSequence(fs, iso, sec, res)


def _gram_orth_complement(G: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Basis of the G-orthogonal complement of span(cols)."""
    n = G.shape[0]
    if cols.shape[1] == 0:
        return np.eye(n, dtype=complex)
    A = cols.conj().T @ G
    _, s, vh = np.linalg.svd(A)
    r = int(np.sum(s > 1e-12 * max(1.0, s[0])))
    return vh[r:].conj().T


def isometry_residual(f: ChainMap) -> float:
    """How far f is from a chain isometry with square invertible blocks."""
    worst = f.chain_residual()
    S, T = f.source, f.target
    for i in f.degrees:
        if S.dim(i) != T.dim(i):
            return float("inf")
        if S.dim(i):
            m = f.at(i)
            worst = max(worst, _rel(m.conj().T @ T.gram(i) @ m - S.gram(i), S.gram(i)))
    return worst


def is_orthogonally_split(C: HermComplex, tol: float = 1e-8) -> bool:
    hd = C.hodge
    if not hd.acyclic or hd.ambiguous:
        return False
    return all(np.all(np.abs(np.log(s)) <= tol) for s in hd.sigma.values() if s.size)


def generator_profile(C: HermComplex) -> list[tuple[int, float]]:
    """(degree, log sigma) for every rank-one piece of the Hodge splitting."""
    hd = C.hodge
    return [(i, float(np.log(x))) for i in C.degrees for x in hd.sigma[i]]


def in_M0(C: HermComplex, tol: float = 1e-8) -> bool:
    """Orthogonally split, or isometric to F + F[1] for an acyclic F.

    At the point an acyclic complex is determined up to isometry by the
    multiset of its rank-one pieces (degree, log sigma); F + F[1] means that
    for every value of log sigma the degree counts n_i can be written as
    m_i + m_{i+1} with m >= 0.
    """
    hd = C.hodge
    if not hd.acyclic or hd.ambiguous:
        return False
    if is_orthogonally_split(C, tol):
        return True
    prof = sorted(generator_profile(C), key=lambda t: t[1])
    groups, cur = [], []
    for deg, a in prof:
        if cur and a - cur[-1][1] > tol:
            groups.append(cur)
            cur = []
        cur.append((deg, a))
    if cur:
        groups.append(cur)
    for grp in groups:
        counts: dict[int, int] = {}
        for deg, _ in grp:
            counts[deg] = counts.get(deg, 0) + 1
        m_next = 0
        for i in range(max(counts), min(counts) - 1, -1):
            m = counts.get(i, 0) - m_next
            if m < 0:
                return False
            m_next = m
        if m_next != 0:
            return False
    return True
