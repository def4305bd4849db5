import numpy as np
import pytest
from hypothesis import given, strategies as st

from hermcalc import diagrams
from hermcalc import generators as gen
from hermcalc.derived import (
    HermStructure, HermTriangle, Roof, class_of_iso, class_of_iso_cohomology, class_of_object_complex,
    class_of_triangle, cohomology_induced_structure, compare_triangle, compose_roofs, direct_sum_structures,
    dual_structure, herm_cone, hom_structures, is_distinguished, iso_class, morphisms_equal,
    object_complex_class, parallel_transport, roof_cohomology, shift_structure, structure_class,
    structure_distance, tensor_structures, torsor_add,
)
from hermcalc.hermlin import (
    ChainMap, ComplexError, HermComplex, PreconditionError, cohomology_map, cone, direct_sum, identity,
    inclusion, projection, shift, zero_map,
)
from hermcalc.torsion import tau

seed = st.integers(0, 2**32 - 1)


def small(rng, **kw):
    return gen.random_complex(rng, max_degrees=3, max_total=8, **kw)


def line(norm2=1.0, degree=0):
    return HermComplex({degree: [[norm2]]})


# -- roofs and classes of isomorphisms ---------------------------------------------


def test_identity_roof_has_class_zero(rng):
    X = small(rng)
    assert abs(class_of_iso(Roof.identity(X))) <= 1e-12


def test_scaling_a_line():
    # multiplying the standard line by e^a: the cone is e^a shifted once, so the class is -a
    L = line()
    for a in (-1.0, 0.5, 2.0):
        f = ChainMap(L, L, {0: [[np.exp(a)]]})
        assert abs(class_of_iso(Roof.from_chain_map(f)) + a) <= 1e-12


@given(seed)
def test_class_two_routes(s):
    rng = gen.rng_for(s)
    X = small(rng)
    Y = gen.quasi_isomorphic_copy(rng, X)
    r = gen.random_iso_roof(rng, X, Y)
    assert abs(class_of_iso(r) - class_of_iso_cohomology(r)) <= 1e-8


@given(seed)
def test_roof_inverse_negates(s):
    rng = gen.rng_for(s)
    X = small(rng)
    Y = gen.quasi_isomorphic_copy(rng, X)
    r = gen.random_iso_roof(rng, X, Y)
    assert abs(class_of_iso(r.inverse()) + class_of_iso(r)) <= 1e-8


@given(seed)
def test_shifted_iso_class(s):
    rng = gen.rng_for(s)
    X = small(rng)
    Y = gen.quasi_isomorphic_copy(rng, X)
    r = gen.random_iso_roof(rng, X, Y)
    assert abs(class_of_iso(r.shifted(1)) + class_of_iso(r)) <= 1e-8


@given(seed)
def test_composition_additive(s):
    rng = gen.rng_for(s)
    X = small(rng)
    Y, Z = gen.quasi_isomorphic_copy(rng, X), gen.quasi_isomorphic_copy(rng, X)
    HX, HY, HZ = (gen.random_structure(rng, C) for C in (X, Y, Z))
    f, h = gen.random_iso_roof(rng, X, Y), gen.random_iso_roof(rng, Y, Z)
    hf = compose_roofs(f, h)
    expect = iso_class(f, HX, HY) + iso_class(h, HY, HZ)
    assert abs(iso_class(hf, HX, HZ) - expect) <= 1e-8
    assert abs(iso_class(hf, HX, HZ, exact=True) - expect) <= 1e-8


@given(seed)
def test_composed_roof_is_the_composite_morphism(s):
    rng = gen.rng_for(s)
    X = small(rng)
    Y = gen.random_complex(rng, max_degrees=3, max_total=8, lo=X.lo)
    Z = gen.random_complex(rng, max_degrees=3, max_total=8, lo=X.lo)
    f, g = gen.random_chain_map(rng, X, Y), gen.random_chain_map(rng, Y, Z)
    r = compose_roofs(Roof.from_chain_map(f), Roof.from_chain_map(g))
    assert morphisms_equal(r, Roof.from_chain_map(g @ f))


def test_morphisms_equal_detects_difference(rng):
    X = small(rng)
    while X.hodge.acyclic:
        X = small(rng)
    assert morphisms_equal(Roof.identity(X), Roof.identity(X))
    assert not morphisms_equal(Roof.identity(X), Roof.from_chain_map(identity(X).scaled(2.0)))


# -- structures ---------------------------------------------------------------------


@given(seed, st.floats(-5, 5))
def test_torsor_distance(s, a):
    rng = gen.rng_for(s)
    H = gen.random_structure(rng, small(rng))
    Ha = torsor_add(H, a)
    assert abs(structure_distance(Ha, H) - a) <= 1e-10
    assert abs(structure_distance(Ha, H, exact=True) - a) <= 1e-10
    assert abs(structure_distance(H, Ha) + a) <= 1e-10


@given(seed)
def test_distance_is_a_cocycle(s):
    rng = gen.rng_for(s)
    X = small(rng)
    H1, H2, H3 = (gen.random_structure(rng, X) for _ in range(3))
    d = structure_distance(H1, H2) + structure_distance(H2, H3) - structure_distance(H1, H3)
    assert abs(d) <= 1e-8


@given(seed)
def test_transport_functorial(s):
    rng = gen.rng_for(s)
    X = small(rng)
    Y, Z = gen.quasi_isomorphic_copy(rng, X), gen.quasi_isomorphic_copy(rng, X)
    H = gen.random_structure(rng, X)
    f, h = gen.random_iso_roof(rng, X, Y), gen.random_iso_roof(rng, Y, Z)
    t1 = parallel_transport(compose_roofs(f, h), H)
    t2 = parallel_transport(h, parallel_transport(f, H))
    assert abs(structure_distance(t1, t2)) <= 1e-9


@given(seed)
def test_transport_makes_iso_tight(s):
    rng = gen.rng_for(s)
    X = small(rng)
    Y = gen.quasi_isomorphic_copy(rng, X)
    H = gen.random_structure(rng, X)
    f = gen.random_iso_roof(rng, X, Y)
    assert abs(iso_class(f, H, parallel_transport(f, H))) <= 1e-8


def test_native_structure_class(rng):
    C = gen.random_acyclic(rng)
    assert abs(structure_class(HermStructure.native(C)) - tau(C)) <= 1e-12
    assert abs(structure_distance(HermStructure.native(C), HermStructure.trivial(C)) - tau(C)) <= 1e-9


def test_structure_check_rejects_mismatch(rng):
    X = small(rng)
    H = gen.random_structure(rng, X)
    with pytest.raises(ComplexError):
        HermStructure(small(rng), H.rep, H.roof).check()


@given(seed)
def test_sum_tensor_hom_respect_offsets(s):
    rng = gen.rng_for(s)
    X, Y = small(rng), small(rng)
    H1, H2 = gen.random_structure(rng, X), gen.random_structure(rng, Y)
    a = float(rng.normal())
    d = structure_distance(direct_sum_structures(torsor_add(H1, a), H2), direct_sum_structures(H1, H2))
    assert abs(d - a) <= 1e-8
    chi = Y.euler_characteristic()
    d = structure_distance(tensor_structures(torsor_add(H1, a), H2), tensor_structures(H1, H2))
    assert abs(d - chi * a) <= 1e-8
    d = structure_distance(hom_structures(H1, torsor_add(H2, a)), hom_structures(H1, H2))
    assert abs(d - X.euler_characteristic() * a) <= 1e-8


def test_dual_of_scaled_line():
    D = dual_structure(HermStructure.native(line(4.0)))
    assert abs(D.rep.gram(0)[0, 0] - 0.25) <= 1e-12


@given(seed)
def test_shift_structure_negates_class(s):
    rng = gen.rng_for(s)
    H = gen.random_structure(rng, gen.random_acyclic(rng, max_total=8))
    assert abs(structure_class(shift_structure(H, 1)) + structure_class(H)) <= 1e-8


# -- hermitian cones ----------------------------------------------------------------


@given(seed)
def test_herm_cone_independent_of_representatives(s):
    from hermcalc.suites import rule_cone_two_roofs
    r, _ = rule_cone_two_roofs(gen.rng_for(s), 0)
    assert r <= 1e-8


@given(seed)
def test_herm_cone_of_native_chain_map_is_native(s):
    rng = gen.rng_for(s)
    X = small(rng)
    Y = small(rng, lo=X.lo)
    f = gen.random_chain_map(rng, X, Y)
    H = herm_cone(Roof.from_chain_map(f), HermStructure.native(X), HermStructure.native(Y))
    assert abs(structure_distance(H, HermStructure.native(cone(f)))) <= 1e-8


@given(seed)
def test_herm_cone_offsets(s):
    rng = gen.rng_for(s)
    X = small(rng)
    Y = small(rng, lo=X.lo)
    H1, H2 = gen.random_structure(rng, X), gen.random_structure(rng, Y)
    f = Roof.from_chain_map(gen.random_chain_map(rng, X, Y))
    a, b = rng.normal(size=2)
    base = herm_cone(f, H1, H2)
    moved = herm_cone(f, torsor_add(H1, a), torsor_add(H2, b))
    assert abs(structure_distance(moved, base) - (b - a)) <= 1e-8


# -- triangles ----------------------------------------------------------------------


def split_triangle(F, G):
    S = direct_sum(F, G)
    return HermTriangle(HermStructure.native(F), HermStructure.native(S), HermStructure.native(G),
                        Roof.from_chain_map(inclusion([F, G], 0, S)), Roof.from_chain_map(projection([F, G], 1, S)),
                        Roof.from_chain_map(zero_map(G, shift(F, 1))))


@given(seed)
def test_split_triangle_class(s):
    rng = gen.rng_for(s)
    F = small(rng)
    T = split_triangle(F, small(rng, lo=F.lo))
    assert is_distinguished(T)
    assert abs(class_of_triangle(T)) <= 1e-8
    T2 = HermTriangle(T.A, T.B, torsor_add(T.C, 0.7), T.u, T.v, T.w)
    assert abs(class_of_triangle(T2) - 0.7) <= 1e-8


@given(seed)
def test_triangle_two_routes(s):
    rng = gen.rng_for(s)
    T = diagrams.random_triangle(rng)
    cmp = compare_triangle(T, rng=rng)
    assert cmp.exact_sequence
    assert abs(cmp.value - class_of_triangle(T, exact=True)) <= 1e-8
    if cmp.alternative is not None:
        assert abs(cmp.value - cmp.alternative) <= 1e-8


@given(seed)
def test_rotation(s):
    T = diagrams.random_triangle(gen.rng_for(s))
    v = class_of_triangle(T)
    R = T.rotate()
    assert abs(class_of_triangle(R) + v) <= 1e-8
    assert abs(class_of_triangle(R.rotate().rotate()) + v) <= 1e-8


@given(seed)
def test_ladder(s):
    L = diagrams.random_ladder(gen.rng_for(s))
    lhs = class_of_triangle(L.bottom) - class_of_triangle(L.top)
    rhs = (iso_class(L.f, L.top.A, L.bottom.A) - iso_class(L.g, L.top.B, L.bottom.B)
           + iso_class(L.h, L.top.C, L.bottom.C))
    assert abs(lhs - rhs) <= 1e-8


@given(seed)
def test_three_by_three(s):
    rows, cols = diagrams.split_grid(gen.rng_for(s))
    r = [class_of_triangle(t) for t in rows]
    c = [class_of_triangle(t) for t in cols]
    assert abs((r[0] - r[1] + r[2]) - (c[0] - c[1] + c[2])) <= 1e-8


def test_non_distinguished_rejected(rng):
    F = small(rng)
    while F.hodge.acyclic:
        F = small(rng)
    T = split_triangle(F, F)
    bad = HermTriangle(T.A, T.B, T.C, Roof.from_chain_map(zero_map(F, T.B.underlying)), T.v, T.w)
    assert not is_distinguished(bad)
    with pytest.raises(PreconditionError):
        class_of_triangle(bad)


# -- complexes of objects and induced structures -----------------------------------


def test_single_object_and_identity_complex(rng):
    A = HermStructure.native(HermComplex({0: gen.gram(rng, 2)}))
    assert abs(structure_distance(class_of_object_complex([A], []), A)) <= 1e-12
    assert abs(object_complex_class([A, A], [np.eye(2)])) <= 1e-9


def test_object_complex_matches_total(rng):
    oc = diagrams.random_object_complex(rng, exact=True)
    native = [HermStructure.native(H.underlying) for H in oc.objects]
    assert abs(object_complex_class(native, oc.maps, oc.lo) - tau(oc.total)) <= 1e-8


def test_object_complex_rejects_non_complex(rng):
    A = HermStructure.native(HermComplex({0: np.eye(1)}))
    with pytest.raises(ComplexError):
        class_of_object_complex([A, A, A], [np.eye(1), np.eye(1)])


@given(seed)
def test_object_cone_class(s):
    rng = gen.rng_for(s)
    eps, mu, phi = diagrams.random_object_morphism(rng)
    ce = class_of_object_complex(eps.objects, eps.maps, eps.lo)
    cm = class_of_object_complex(mu.objects, mu.maps, mu.lo)
    cc = diagrams.object_cone(eps, mu, phi)
    Hc = class_of_object_complex(cc.objects, cc.maps, cc.lo)
    assert abs(structure_class(Hc) - (structure_class(cm) - structure_class(ce))) <= 1e-8


@given(seed)
def test_object_cone_is_hermitian_cone(s):
    rng = gen.rng_for(s)
    eps, mu, phi = diagrams.random_object_morphism(rng, exact=False)
    ce = class_of_object_complex(eps.objects, eps.maps, eps.lo)
    cm = class_of_object_complex(mu.objects, mu.maps, mu.lo)
    cc = diagrams.object_cone(eps, mu, phi)
    Hc = class_of_object_complex(cc.objects, cc.maps, cc.lo)
    hc = herm_cone(Roof.from_chain_map(ChainMap(ce.underlying, cm.underlying, phi)), ce, cm)
    assert abs(structure_distance(hc, Hc)) <= 1e-8


def test_induced_structure_zero_differential(rng):
    C = HermComplex({0: gen.gram(rng, 2), 1: gen.gram(rng, 3)})
    H = cohomology_induced_structure(C, {0: C.gram(0), 1: C.gram(1)}, reps={0: np.eye(2), 1: np.eye(3)})
    assert abs(structure_distance(H, HermStructure.native(C))) <= 1e-10


def test_induced_structure_acyclic_is_trivial(rng):
    C = gen.random_acyclic(rng)
    H = cohomology_induced_structure(C, {})
    assert H.rep.total_dim == 0


@given(seed)
def test_induced_structure_natural(s):
    rng = gen.rng_for(s)
    C = gen.random_complex(rng, max_degrees=3, max_total=10)
    metrics = {i: gen.gram(rng, C.hodge.betti(i)) for i in C.degrees if C.hodge.betti(i)}
    H1 = cohomology_induced_structure(C, metrics)
    D = gen.quasi_isomorphic_copy(rng, C)
    q = gen.random_quasi_iso(rng, C, D)
    P = cohomology_map(q)
    m2 = {i: np.linalg.inv(P[i]).conj().T @ g @ np.linalg.inv(P[i]) for i, g in metrics.items()}
    H2 = cohomology_induced_structure(D, m2)
    assert abs(iso_class(Roof.from_chain_map(q), H1, H2)) <= 1e-8


def test_induced_structure_validates_metric_shapes(rng):
    C = HermComplex({0: np.eye(2)})
    with pytest.raises(ComplexError):
        cohomology_induced_structure(C, {0: np.eye(1)})


def test_roof_cohomology_of_identity(rng):
    X = small(rng)
    for i, m in roof_cohomology(Roof.identity(X)).items():
        assert np.allclose(m, np.eye(m.shape[0]))
