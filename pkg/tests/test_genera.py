from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hermcalc import generators as gen
from hermcalc.acyccalc import KAClass
from hermcalc.derived import Roof
from hermcalc.genera import (
    DomainError, GenusSpec, TruncSeries, additive_from_multiplicative, bott_chern_point, calibrated,
    chern_character, correction_factor, exp_x, genus_of_complex, ka_coordinate,
    multiplicative_from_additive, psi_m_tilde_point, todd_genus, todd_series,
)
from hermcalc.hermlin import ChainMap, HermComplex
from hermcalc.suites import bernoulli_plus, todd_oracle
from hermcalc.torsion import tau

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=30)


def series(draw_coeffs, c0):
    return TruncSeries([c0] + list(draw_coeffs))


def test_todd_low_order():
    assert todd_series(4).coeffs == (1, Fr(1, 2), Fr(1, 12), 0, Fr(-1, 720))


@pytest.mark.parametrize("order", [1, 5, 12, 20])
def test_todd_matches_bernoulli(order):
    assert list(todd_series(order).coeffs) == todd_oracle(order)


def test_bernoulli_values():
    assert bernoulli_plus(6) == [1, Fr(1, 2), Fr(1, 6), 0, Fr(-1, 30), 0, Fr(1, 42)]


def test_todd_times_denominator():
    # (x / (1 - e^-x)) * (1 - e^-x) = x
    n = 12
    x = TruncSeries.x(n + 1)
    q = todd_series(n + 1) * (1 - (-x).exp())
    assert q == x


def test_log_todd_coefficients():
    lt = todd_series(8).log()
    assert lt.coeffs[:7] == (0, Fr(1, 2), Fr(-1, 24), 0, Fr(1, 2880), 0, Fr(-1, 181440))


def test_exp_log_of_x():
    e = exp_x(6)
    assert e.coeffs == tuple(Fr(1, f) for f in (1, 1, 2, 6, 24, 120, 720))
    assert e.log() == TruncSeries.x(6)


@given(st.lists(fractions, min_size=1, max_size=10))
def test_exp_log_round_trip(cs):
    f = series(cs, 0)
    g = series(cs, 1)
    assert f.exp().log() == f
    assert g.log().exp() == g


@given(st.lists(fractions, min_size=1, max_size=8), st.lists(fractions, min_size=1, max_size=8))
def test_exp_morphism(a, b):
    n = max(len(a), len(b))
    f = TruncSeries([0] + a, n)
    g = TruncSeries([0] + b, n)
    assert (f + g).exp() == f.exp() * g.exp()
    assert ((1 + f) * (1 + g)).log() == (1 + f).log() + (1 + g).log()


@given(st.lists(fractions, min_size=1, max_size=8))
def test_reciprocal(cs):
    g = series(cs, 1)
    assert g * g.reciprocal() == TruncSeries.constant(1, g.order)
    assert (1 / g) == g.reciprocal()


@given(st.lists(fractions, min_size=1, max_size=6))
def test_compose_with_exp(cs):
    f = series(cs, 0)
    assert exp_x(f.order).compose(f) == f.exp()


def test_correction_factor():
    n = 10
    assert correction_factor(n) * TruncSeries.x(n) == exp_x(n) - 1
    assert correction_factor(3).coeffs == (1, Fr(1, 2), Fr(1, 6), Fr(1, 24))
    assert correction_factor(0)(0.0) == 1.0


def test_float_mode_agrees():
    t = todd_series(10)
    tf = t.to_float()
    assert not tf.exact
    assert np.allclose(tf.coeffs, [float(c) for c in t.coeffs])
    assert abs(tf(0.3) - 0.3 / (1 - np.exp(-0.3))) <= 1e-9


def test_domain_errors():
    with pytest.raises(DomainError):
        TruncSeries([1, 2]).exp()
    with pytest.raises(DomainError):
        TruncSeries([2, 1]).log()
    with pytest.raises(DomainError):
        TruncSeries([0, 1]).reciprocal()
    with pytest.raises(DomainError):
        TruncSeries([1], order=-1)
    with pytest.raises(DomainError):
        TruncSeries([1, 1], 1) + TruncSeries([1, 1, 1], 2)
    with pytest.raises(DomainError):
        TruncSeries([1, 1]).compose(TruncSeries([1, 1]))
    with pytest.raises(DomainError):
        TruncSeries([1]) / 0
    with pytest.raises(DomainError):
        GenusSpec("neither", exp_x(2))
    with pytest.raises(DomainError):
        GenusSpec("multiplicative", TruncSeries([2, 1]))
    with pytest.raises(DomainError):
        additive_from_multiplicative(chern_character(3))
    with pytest.raises(DomainError):
        multiplicative_from_additive(todd_genus(3))
    with pytest.raises(DomainError):
        genus_of_complex(todd_genus(3), HermComplex({0: np.eye(1)}))
    with pytest.raises(DomainError):
        bott_chern_point(todd_genus(3), 1.0)


def test_additive_multiplicative_round_trip():
    td = todd_genus(12)
    assert multiplicative_from_additive(additive_from_multiplicative(td)).series == td.series


def test_genus_of_complex_is_rank_weighted(rng):
    C = gen.random_complex(rng)
    assert genus_of_complex(chern_character(5), C) == C.euler_characteristic()
    assert genus_of_complex(additive_from_multiplicative(todd_genus(5)), C) == 0.0


def test_calibration_reads_linear_coefficient():
    assert calibrated(chern_character(4)).point_scale == 1.0
    assert calibrated(additive_from_multiplicative(todd_genus(4))).point_scale == 0.5
    assert calibrated(GenusSpec("additive", TruncSeries([1], 0))).point_scale == 0.0


def test_ka_coordinate_of_inputs(rng):
    C = gen.random_acyclic(rng)
    assert ka_coordinate(C) == tau(C)
    assert ka_coordinate(KAClass(0.25)) == 0.25
    L = HermComplex({0: [[1.0]]})
    r = Roof.from_chain_map(ChainMap(L, L, {0: [[np.exp(0.5)]]}))
    assert abs(ka_coordinate(r) + 0.5) <= 1e-12
    with pytest.raises(TypeError):
        ka_coordinate("x")


@given(st.floats(-5, 5))
def test_point_classes_on_exponential(a):
    e = HermComplex.exp_generator(a)
    assert abs(tau(e) - a) <= 1e-12
    ch = calibrated(chern_character(6))
    assert abs(bott_chern_point(ch, e) - a) <= 1e-12
    assert bott_chern_point(chern_character(6), e) == pytest.approx(a, abs=1e-12)
    td = calibrated(todd_genus(6))
    assert abs(psi_m_tilde_point(td, e) - a / 2) <= 1e-12
