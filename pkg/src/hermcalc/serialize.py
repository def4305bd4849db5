"""JSON bundles: named complexes, maps, roofs, structures, triangles, spaces, morphisms and chains.

Matrices are row-major lists of rows, every entry an ``[re, im]`` pair.  Floats
go through ``repr`` so a dump re-ingests to bit-identical arrays.  Inside a
bundle any reference may be a name (a string) or an inline document.
"""

from __future__ import annotations

import json

import numpy as np

from .derived import HermStructure, HermTriangle, Roof
from .hermlin import ChainMap, ComplexError, HermComplex, HermSpace, validate
from .osm import ToyMorphism, ToySpace

FORMAT = "hermcalc-bundle"
KINDS = ("complexes", "maps", "roofs", "structures", "triangles", "spaces", "morphisms", "chains")


class BundleError(ComplexError):
    """Malformed or inconsistent bundle input."""


# -- matrices -------------------------------------------------------------------


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _entry(z, where):
    if isinstance(z, (int, float)) and not isinstance(z, bool):
        return complex(z)
    if isinstance(z, (list, tuple)) and len(z) == 2 and all(isinstance(t, (int, float)) for t in z):
        return complex(float(z[0]), float(z[1]))
    raise BundleError(f"{where}: matrix entries must be [re, im] pairs")


def matrix_from_json(doc, where: str = "matrix", shape=None) -> np.ndarray:
    if not isinstance(doc, list) or any(not isinstance(r, list) for r in doc):
        raise BundleError(f"{where}: expected a list of rows")
    rows = [[_entry(z, where) for z in r] for r in doc]
    if len({len(r) for r in rows}) > 1:
        raise BundleError(f"{where}: ragged rows")
    m = np.array(rows, dtype=complex)
    if m.size == 0:
        m = m.reshape(shape if shape is not None else (len(rows), 0))
    elif shape is not None and m.shape != tuple(shape):
        raise BundleError(f"{where}: expected shape {tuple(shape)}, got {m.shape}")
    return m


# -- documents --------------------------------------------------------------------


def complex_to_json(C: HermComplex) -> dict:
    return {
        "lo": C.lo,
        "hi": C.hi,
        "spaces": {str(i): {"dim": C.dim(i), "gram": matrix_to_json(C.gram(i))} for i in C.degrees},
        "diffs": {str(i): matrix_to_json(C.d(i)) for i in range(C.lo, C.hi) if C.d(i).size},
    }


def _int(v, where):
    if isinstance(v, bool) or not isinstance(v, int):
        raise BundleError(f"{where}: expected an integer")
    return v


def _degree_keys(d, where):
    if not isinstance(d, dict):
        raise BundleError(f"{where}: expected an object keyed by degree")
    out = {}
    for k, v in d.items():
        try:
            out[int(k)] = v
        except ValueError:
            raise BundleError(f"{where}: bad degree key {k!r}") from None
    return out


def complex_from_json(doc, where: str = "complex") -> HermComplex:
    if not isinstance(doc, dict):
        raise BundleError(f"{where}: expected an object")
    spaces = _degree_keys(doc.get("spaces", {}), f"{where}.spaces")
    grams = {}
    for i, s in spaces.items():
        if not isinstance(s, dict) or "gram" not in s:
            raise BundleError(f"{where}.spaces.{i}: needs a gram")
        n = _int(s.get("dim", len(s["gram"])), f"{where}.spaces.{i}.dim")
        grams[i] = matrix_from_json(s["gram"], f"{where}.spaces.{i}.gram", (n, n))
    lo = _int(doc["lo"], f"{where}.lo") if "lo" in doc else None
    hi = _int(doc["hi"], f"{where}.hi") if "hi" in doc else None
    diffs = {}
    for i, m in _degree_keys(doc.get("diffs", {}), f"{where}.diffs").items():
        shape = (grams[i + 1].shape[0] if i + 1 in grams else 0, grams[i].shape[0] if i in grams else 0)
        diffs[i] = matrix_from_json(m, f"{where}.diffs.{i}", shape)
    C = HermComplex(grams, diffs, lo, hi)
    rep = validate(C)
    if not rep.ok:
        raise BundleError(f"{where}: " + _describe(rep))
    return C


def _describe(rep) -> str:
    return "; ".join(f"{what} fails in degree {i} (residual {r:.3e})" for i, what, _, r in rep.failures())


# -- bundles ------------------------------------------------------------------------


class Bundle:
    """Lazily resolved named objects from one JSON document."""

    def __init__(self, doc: dict):
        if not isinstance(doc, dict):
            raise BundleError("bundle must be a JSON object")
        unknown = set(doc) - set(KINDS) - {"format", "version", "notes"}
        if unknown:
            raise BundleError(f"unknown bundle sections: {sorted(unknown)}")
        self.doc = {k: doc.get(k, {}) for k in KINDS}
        for k in KINDS:
            if not isinstance(self.doc[k], dict):
                raise BundleError(f"section {k!r} must be an object")
        self._cache: dict = {}
        self._busy: set = set()

    @classmethod
    def load(cls, path) -> "Bundle":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise BundleError(f"{path}: invalid JSON ({e})") from None
        except OSError as e:
            raise BundleError(f"{path}: {e.strerror}") from None
        return cls(doc)

    @classmethod
    def loads(cls, text: str) -> "Bundle":
        try:
            return cls(json.loads(text))
        except json.JSONDecodeError as e:
            raise BundleError(f"invalid JSON ({e})") from None

    def names(self, kind: str) -> list[str]:
        return list(self.doc[kind])

    def get(self, kind: str, ref):
        if isinstance(ref, str):
            key = (kind, ref)
            if key in self._cache:
                return self._cache[key]
            if ref not in self.doc[kind]:
                raise BundleError(f"no {kind[:-1] if kind != 'complexes' else 'complex'} named {ref!r}")
            if key in self._busy:
                raise BundleError(f"reference cycle through {kind}/{ref}")
            self._busy.add(key)
            try:
                obj = self._build(kind, self.doc[kind][ref], f"{kind}.{ref}")
            finally:
                self._busy.discard(key)
            self._cache[key] = obj
            return obj
        return self._build(kind, ref, f"inline {kind}")

    def _need(self, doc, field, where):
        if not isinstance(doc, dict) or field not in doc:
            raise BundleError(f"{where}: missing field {field!r}")
        return doc[field]

    def _build(self, kind, doc, where):
        return getattr(self, "_build_" + kind)(doc, where)

    def _build_complexes(self, doc, where):
        return complex_from_json(doc, where)

    def _build_maps(self, doc, where):
        X = self.get("complexes", self._need(doc, "source", where))
        Y = self.get("complexes", self._need(doc, "target", where))
        maps = {}
        for i, m in _degree_keys(doc.get("maps", {}), f"{where}.maps").items():
            maps[i] = matrix_from_json(m, f"{where}.maps.{i}", (Y.dim(i), X.dim(i)))
        f = ChainMap(X, Y, maps)
        r = f.chain_residual()
        if r > 1e-9:
            raise BundleError(f"{where}: not a chain map (residual {r:.3e})")
        return f

    def _build_roofs(self, doc, where):
        if isinstance(doc, dict) and "map" in doc:
            return Roof.from_chain_map(self.get("maps", doc["map"]))
        M = self.get("complexes", self._need(doc, "middle", where))
        s = self.get("maps", self._need(doc, "s", where))
        g = self.get("maps", self._need(doc, "g", where))
        r = Roof(M, s, g)
        try:
            r.check()
        except ComplexError as e:
            raise BundleError(f"{where}: {e}") from None
        return r

    def _build_structures(self, doc, where):
        if isinstance(doc, dict) and "native" in doc:
            return HermStructure.native(self.get("complexes", doc["native"]))
        if isinstance(doc, dict) and "via" in doc:
            q = self.get("maps", doc["via"])
            if not q.is_quasi_isomorphism():
                raise BundleError(f"{where}: 'via' needs a quasi-isomorphism")
            return HermStructure.via_map(q)
        H = HermStructure(self.get("complexes", self._need(doc, "underlying", where)),
                          self.get("complexes", self._need(doc, "rep", where)),
                          self.get("roofs", self._need(doc, "roof", where)))
        try:
            from .derived import _require_same
            _require_same(H.roof.source, H.rep, "structure roof source")
            _require_same(H.roof.target, H.underlying, "structure roof target")
        except ComplexError as e:
            raise BundleError(f"{where}: {e}") from None
        if not H.roof.is_isomorphism():
            raise BundleError(f"{where}: the structure roof is not an isomorphism")
        return H

    def _build_triangles(self, doc, where):
        parts = {k: self.get("structures", self._need(doc, k, where)) for k in "ABC"}
        parts.update({k: self.get("roofs", self._need(doc, k, where)) for k in "uvw"})
        return HermTriangle(**parts)

    def _build_spaces(self, doc, where):
        G = self._need(doc, "gram", where)
        n = len(G) if isinstance(G, list) else -1
        sp = ToySpace(str(doc.get("label", where.split(".")[-1])),
                      HermSpace(matrix_from_json(G, f"{where}.gram", (n, n))))
        rep = validate(HermComplex({0: sp.tangent}))
        if not rep.ok:
            raise BundleError(f"{where}: " + _describe(rep))
        return sp

    def _build_morphisms(self, doc, where):
        X = self.get("spaces", self._need(doc, "source", where))
        Y = self.get("spaces", self._need(doc, "target", where))
        df = matrix_from_json(self._need(doc, "df", where), f"{where}.df", (Y.dim, X.dim))
        f = ToyMorphism.ambient(X, Y, df)
        if doc.get("structure") is not None:
            H = self.get("structures", doc["structure"])
            from .derived import _require_same
            try:
                _require_same(H.underlying, f.tangent, "morphism structure")
            except ComplexError as e:
                raise BundleError(f"{where}: {e}") from None
            f = f.with_structure(H)
        return f

    def _build_chains(self, doc, where):
        if not isinstance(doc, list) or not doc:
            raise BundleError(f"{where}: a chain is a non-empty list of morphisms")
        return [self.get("morphisms", m) for m in doc]


class BundleWriter:
    """Collects objects under names, sharing sub-objects by identity."""

    def __init__(self):
        self.doc = {k: {} for k in KINDS}
        self._ids: dict = {}

    def _intern(self, kind, obj, name, build):
        key = (kind, id(obj))
        if key in self._ids and name is None:
            return self._ids[key][0]
        if name is None:
            name = f"{kind[0]}{len(self.doc[kind])}"
            while name in self.doc[kind]:
                name += "_"
        self._ids[key] = (name, obj)      # keep obj alive so ids stay unique
        self.doc[kind][name] = build()
        return name

    def add(self, obj, name: str | None = None) -> str:
        if isinstance(obj, HermComplex):
            return self._intern("complexes", obj, name, lambda: complex_to_json(obj))
        if isinstance(obj, ChainMap):
            return self._intern("maps", obj, name, lambda: {
                "source": self.add(obj.source), "target": self.add(obj.target),
                "maps": {str(i): matrix_to_json(m) for i, m in sorted(obj.maps.items()) if m.size}})
        if isinstance(obj, Roof):
            return self._intern("roofs", obj, name, lambda: {
                "middle": self.add(obj.middle), "s": self.add(obj.s), "g": self.add(obj.g)})
        if isinstance(obj, HermStructure):
            return self._intern("structures", obj, name, lambda: {
                "underlying": self.add(obj.underlying), "rep": self.add(obj.rep), "roof": self.add(obj.roof)})
        if isinstance(obj, HermTriangle):
            return self._intern("triangles", obj, name, lambda: {
                k: self.add(getattr(obj, k)) for k in ("A", "B", "C", "u", "v", "w")})
        if isinstance(obj, ToySpace):
            return self._intern("spaces", obj, name, lambda: {
                "label": obj.label, "gram": matrix_to_json(obj.tangent.gram)})
        if isinstance(obj, ToyMorphism):
            return self._intern("morphisms", obj, name, lambda: {
                "source": self.add(obj.source), "target": self.add(obj.target),
                "df": matrix_to_json(obj.df), "structure": self.add(obj.struct)})
        if isinstance(obj, list):
            return self._intern("chains", obj, name, lambda: [self.add(m) for m in obj])
        raise TypeError(f"cannot serialize {type(obj).__name__}")

    def to_json(self) -> dict:
        out = {"format": FORMAT, "version": 1}
        out.update({k: v for k, v in self.doc.items() if v})
        return out

    def dumps(self, **kw) -> str:
        return json.dumps(self.to_json(), **kw)


def dump_objects(named: dict) -> dict:
    w = BundleWriter()
    for name, obj in named.items():
        w.add(obj, name)
    return w.to_json()


def safe_payload(named: dict) -> dict:
    """A bundle for counterexample dumps; unserializable values are stringified."""
    w = BundleWriter()
    extra = {}
    for name, obj in named.items():
        try:
            w.add(obj, name)
        except TypeError:
            extra[name] = repr(obj)
    out = w.to_json()
    if extra:
        out["notes"] = extra
    return out
