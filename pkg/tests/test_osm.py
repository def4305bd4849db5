import numpy as np
import pytest
from hypothesis import given, strategies as st

from hermcalc import generators as gen
from hermcalc.derived import HermStructure, structure_class, structure_distance, torsor_add
from hermcalc.hermlin import ComplexError, HermSpace, PreconditionError
from hermcalc.osm import (
    ToyMorphism, ToySpace, compose, compose_chain, distance, epsilon_sequence, solve_for_f, tangent_complex,
    tangent_triangle, todd_form, verify_associativity,
)
from hermcalc.torsion import tau

seed = st.integers(0, 2**32 - 1)


def spaces(rng, dims, labels="XYZW"):
    return [gen.random_space(rng, lab, n) for lab, n in zip(labels, dims)]


def test_tangent_complex_shape(rng):
    X, Y = spaces(rng, (2, 3))
    T = tangent_complex(gen.cgauss(rng, 3, 2), X, Y)
    assert T.dims == {0: 2, 1: 3}
    with pytest.raises(ComplexError):
        tangent_complex(np.zeros((2, 2)), X, Y)


@given(seed)
def test_ambient_composition(s):
    # ambient structures compose to the ambient structure of the composite
    rng = gen.rng_for(s)
    X, Y, Z = spaces(rng, rng.integers(1, 4, 3))
    A, B = gen.cgauss(rng, Y.dim, X.dim), gen.cgauss(rng, Z.dim, Y.dim)
    gf = compose(ToyMorphism.ambient(Y, Z, B), ToyMorphism.ambient(X, Y, A))
    assert np.allclose(gf.df, B @ A)
    assert abs(distance(gf, ToyMorphism.ambient(X, Z, B @ A))) <= 1e-8


@given(seed)
def test_identity_is_neutral(s):
    rng = gen.rng_for(s)
    X, Y = spaces(rng, rng.integers(1, 4, 2))
    f = gen.random_morphism(rng, X, Y, offset=True)
    assert abs(distance(compose(ToyMorphism.identity(Y), f), f)) <= 1e-8
    assert abs(distance(compose(f, ToyMorphism.identity(X)), f)) <= 1e-8


@given(seed)
def test_associativity(s):
    f, g, h = gen.random_chain(gen.rng_for(s))
    assert verify_associativity(f, g, h) <= 1e-8
    a = compose_chain([f, g, h])
    b = compose_chain([f, g, h], right_first=False)
    assert abs(distance(a, b)) <= 1e-8


@given(seed)
def test_offsets_add_under_composition(s):
    rng = gen.rng_for(s)
    f, g = gen.random_chain(rng, length=2)
    a, b = rng.normal(size=2)
    moved = compose(g.with_structure(torsor_add(g.struct, b)), f.with_structure(torsor_add(f.struct, a)))
    assert abs(distance(moved, compose(g, f)) - (a + b)) <= 1e-8


@given(seed)
def test_solve_for_f(s):
    rng = gen.rng_for(s)
    f, g = gen.random_chain(rng, length=2)
    gf = compose(g, f)
    assert abs(structure_distance(solve_for_f(g, gf, f.df), f.struct)) <= 1e-8
    a = float(rng.normal())
    S = solve_for_f(g, gf.with_structure(torsor_add(gf.struct, a)), f.df)
    assert abs(structure_distance(S, f.struct) - a) <= 1e-8


def test_solve_for_f_checks_composite(rng):
    f, g = gen.random_chain(rng, length=2)
    gf = compose(g, f)
    with pytest.raises(PreconditionError):
        solve_for_f(g, gf, 2 * f.df + 1)
    with pytest.raises(ComplexError):
        solve_for_f(g, gf, np.zeros((f.target.dim + 1, f.source.dim)))


@given(seed)
def test_submersion_composition_defect(s):
    # fiber metrics chosen freely: the composite differs by the torsion of the fiber sequence
    f, g, gf = gen.random_submersion_chain(gen.rng_for(s))
    eps = epsilon_sequence(f, g, gf)
    assert eps.lo == -2 and eps.hi == 0
    assert eps.hodge.acyclic
    assert abs(distance(compose(g, f), gf) - tau(eps)) <= 1e-8


def test_submersion_restricted_metrics_are_consistent(rng):
    X, Y, Z = spaces(rng, (4, 2, 1))
    A, B = gen.cgauss(rng, 2, 4), gen.cgauss(rng, 1, 2)
    f, g = ToyMorphism.submersion(X, Y, A), ToyMorphism.submersion(Y, Z, B)
    gf = ToyMorphism.submersion(X, Z, B @ A)
    assert abs(distance(compose(g, f), gf) - tau(epsilon_sequence(f, g, gf))) <= 1e-8


def test_submersion_and_immersion_structures(rng):
    X, Y = spaces(rng, (3, 2))
    s = ToyMorphism.submersion(X, Y, gen.cgauss(rng, 2, 3))
    s.struct.check()
    assert s.struct.rep.dims == {0: 1}
    with pytest.raises(PreconditionError):
        ToyMorphism.submersion(X, Y, np.zeros((2, 3)))
    i = ToyMorphism.immersion(Y, X, gen.cgauss(rng, 3, 2))
    i.struct.check()
    assert i.struct.rep.dims == {1: 1}
    with pytest.raises(PreconditionError):
        ToyMorphism.immersion(Y, X, np.zeros((3, 2)))


def test_isomorphism_ambient_class(rng):
    # invertible df between unit spaces: T_f is acyclic with torsion of size log|det df|
    X, Y = (ToySpace(lab, HermSpace.standard(2)) for lab in "XY")
    A = gen.cgauss(rng, 2, 2)
    f = ToyMorphism.ambient(X, Y, A)
    assert f.tangent.hodge.acyclic
    assert abs(structure_class(f.struct) - tau(f.tangent)) <= 1e-12
    assert abs(abs(structure_class(f.struct)) - abs(np.log(abs(np.linalg.det(A))))) <= 1e-10


def test_tangent_triangle_maps(rng):
    f, g = gen.random_chain(rng, length=2)
    tri = tangent_triangle(f, g)
    assert tri.a.chain_residual() <= 1e-12 and tri.b.chain_residual() <= 1e-12
    assert np.allclose((tri.b @ tri.a).at(0), f.df)


def test_not_composable(rng):
    f, g = gen.random_chain(rng, length=2)
    with pytest.raises(ComplexError):
        compose(f, g)


def test_todd_form_at_point(rng):
    f = gen.random_chain(rng, length=1)[0]
    t = todd_form(f)
    assert t.value == 1.0
    assert t.euler == f.source.dim - f.target.dim


def test_native_structure_round_trip(rng):
    f = gen.random_chain(rng, length=1, structured=False)[0]
    assert abs(distance(f, f.with_structure(HermStructure.native(f.tangent)))) <= 1e-12
