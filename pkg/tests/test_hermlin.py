import numpy as np
import pytest
from hypothesis import given, strategies as st

from hermcalc import generators as gen
from hermcalc.hermlin import (
    ChainMap, ComplexError, HermComplex, HermSpace, check_valid, cohomology, cohomology_map, cone,
    cone_of_squares, cone_square_residual, direct_sum, dual, hom_complex, identity, in_M0, isometry_residual,
    negated_cone_isometry, null_homotopy, section_to_map, shift, shift_map, tensor, total, transpose_isometry,
    validate, zero_map, inclusion, projection,
)

from conftest import allclose

seed = st.integers(0, 2**32 - 1)


def test_exp_generator_layout():
    E = HermComplex.exp_generator(0.7)
    assert (E.lo, E.hi) == (0, 1)
    assert allclose(E.d(0), [[np.exp(0.7)]])
    assert E.hodge.acyclic


def test_validation_rejects_bad_gram_and_d_squared():
    with pytest.raises(ComplexError):
        HermSpace(np.ones((2, 3)))
    bad = HermComplex({0: -np.eye(1)})
    assert not validate(bad).ok
    with pytest.raises(ComplexError):
        check_valid(bad)
    C = HermComplex({0: np.eye(1), 1: np.eye(1), 2: np.eye(1)}, {0: [[1.0]], 1: [[1.0]]})
    assert any(what == "d_squared" for _, what, _, _ in validate(C).failures())


def test_shape_mismatch_rejected():
    with pytest.raises(ComplexError):
        HermComplex({0: np.eye(2), 1: np.eye(1)}, {0: np.ones((2, 2))})


def test_cone_layout_and_sign():
    A = HermComplex({0: np.eye(1), 1: np.eye(1)}, {0: [[2.0]]})
    B = HermComplex({0: np.eye(1), 1: np.eye(1)}, {0: [[3.0]]})
    f = ChainMap(A, B, {0: [[2.0]], 1: [[3.0]]}).check()
    C = cone(f)
    # cone^0 = A^1 + B^0, d(x, y) = (-dx, fx + dy)
    assert C.dims == {-1: 1, 0: 2, 1: 1}
    assert allclose(C.d(-1), [[-2.0], [2.0]])
    assert allclose(C.d(0), [[3.0, 3.0]])


def test_shift_sign_and_shift_map():
    C = HermComplex.exp_generator(1.0)
    S = shift(C, 1)
    assert (S.lo, S.hi) == (-1, 0)
    assert allclose(S.d(-1), -C.d(0))
    f = identity(C)
    g = shift_map(f, 3)
    assert allclose(g.at(-3), f.at(0))


def test_empty_complexes():
    Z = HermComplex.zero()
    assert Z.total_dim == 0
    assert cone(identity(Z)).total_dim == 0
    assert direct_sum(Z, Z).total_dim == 0


@given(seed)
def test_random_complexes_are_valid(s):
    C = gen.random_complex(gen.rng_for(s))
    assert validate(C).ok


@given(seed)
def test_hodge_reconstruction(s):
    C = gen.random_complex(gen.rng_for(s))
    grams, diffs = C.hodge.reconstruct()
    for i in C.degrees:
        assert allclose(grams[i], C.gram(i), 1e-10 * max(1.0, np.abs(C.gram(i)).max(initial=0)))
    for i in range(C.lo, C.hi):
        assert allclose(diffs[i], C.d(i), 1e-9 * max(1.0, np.abs(C.d(i)).max(initial=0)))


@given(seed)
def test_cohomology_dims_match_rank_nullity(s):
    C = gen.random_complex(gen.rng_for(s))
    for i in C.degrees:
        rk_out = np.linalg.matrix_rank(C.d(i)) if C.d(i).size else 0
        rk_in = np.linalg.matrix_rank(C.d(i - 1)) if C.d(i - 1).size else 0
        assert C.hodge.betti(i) == C.dim(i) - rk_out - rk_in
    H = cohomology(C)
    for i, g in H.harmonic_gram.items():
        assert allclose(g, np.eye(g.shape[0]))


@given(seed)
def test_cone_of_minus_f_isometric(s):
    rng = gen.rng_for(s)
    X = gen.random_complex(rng, max_degrees=3, max_total=10)
    Y = gen.random_complex(rng, max_degrees=3, max_total=10, lo=X.lo)
    f = gen.random_chain_map(rng, X, Y)
    assert isometry_residual(negated_cone_isometry(f)) <= 1e-10


@given(seed)
def test_cone_of_squares_permutation(s):
    sq = cone_of_squares(*gen.homotopy_square(gen.rng_for(s)))
    assert cone_square_residual(sq) <= 1e-10


@given(seed)
def test_total_transpose_isometry(s):
    D = gen.acyclic_double_complex(gen.rng_for(s))
    assert D.square_residual() <= 1e-9
    assert isometry_residual(transpose_isometry(D)) <= 1e-9
    assert validate(total(D)).ok


@given(seed)
def test_tensor_and_hom_are_complexes(s):
    rng = gen.rng_for(s)
    A = gen.random_complex(rng, max_degrees=2, max_total=4)
    B = gen.random_complex(rng, max_degrees=3, max_total=5)
    for C in (tensor(A, B), hom_complex(A, B), dual(A)):
        assert validate(C).ok
    # Kunneth over a field
    T = tensor(A, B)
    for n in T.degrees:
        expect = sum(A.hodge.betti(p) * B.hodge.betti(n - p) for p in A.degrees)
        assert T.hodge.betti(n) == expect


@given(seed)
def test_null_homotopy(s):
    rng = gen.rng_for(s)
    X = gen.random_complex(rng, max_degrees=3, max_total=10)
    Y = gen.random_complex(rng, max_degrees=3, max_total=10, lo=X.lo)
    w = gen.random_homotopy(rng, X, Y).boundary()
    h = null_homotopy(w)
    b = h.boundary()
    for i in w.degrees:
        assert allclose(b.at(i), w.at(i), 1e-9)


@given(seed)
def test_quasi_iso_induces_invertible_cohomology(s):
    rng = gen.rng_for(s)
    X = gen.random_complex(rng, max_degrees=3, max_total=10)
    Y = gen.quasi_isomorphic_copy(rng, X)
    q = gen.random_quasi_iso(rng, X, Y)
    assert q.is_quasi_isomorphism()
    for m in cohomology_map(q).values():
        if m.size:
            assert abs(np.linalg.det(m)) > 1e-8


def test_in_M0_examples(rng):
    F = gen.random_acyclic(rng, max_degrees=3, max_total=8)
    assert in_M0(gen.recoordinatize(rng, direct_sum(F, shift(F, 1))))
    A = HermComplex({0: gen.gram(rng, 2)})
    assert in_M0(cone(identity(A)))
    assert not in_M0(HermComplex.exp_generator(0.5))
    assert not in_M0(HermComplex({0: np.eye(1)}))


def test_section_to_map_recovers_split_sequence(rng):
    F = gen.random_complex(rng, max_degrees=3, max_total=8)
    Q = gen.random_complex(rng, max_degrees=3, max_total=8, lo=F.lo)
    G = direct_sum(F, Q)
    seq = section_to_map(inclusion([F, Q], 0, G), projection([F, Q], 1, G))
    assert seq.residual <= 1e-9
    for m in seq.f_s.maps.values():
        assert np.max(np.abs(m), initial=0) <= 1e-12


def test_zero_map_cone_is_sum():
    A = HermComplex({0: np.eye(2)})
    C = cone(zero_map(A, A))
    assert C.dims == {-1: 2, 0: 2}
