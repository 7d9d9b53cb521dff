import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from courant_lift.scalar import FourierPoly, parse_rational
from courant_lift.torus import (
    TorusSection,
    first_slot_defect,
    integrate,
    is_local_witness,
    nonlocal_bracket,
    random_torus_section,
    torus_jacobiator,
)

from conftest import fourier_polys

ONE = FourierPoly.const(1)
ETA_X = TorusSection.build(fx=ONE)
ETA_Y = TorusSection.build(fy=ONE)
TOP = TorusSection.build(h=ONE)
BASIS = [ETA_X, ETA_Y, TOP]


@st.composite
def torus_sections(draw):
    return TorusSection.build(draw(fourier_polys()), draw(fourier_polys()), draw(fourier_polys()))


def test_bracket_examples():
    assert nonlocal_bracket(ETA_X, TOP) == TOP
    cos_x = TorusSection.build(fx=FourierPoly.cos(1))
    assert nonlocal_bracket(cos_x, TOP).is_zero()
    assert nonlocal_bracket(TOP, ETA_X) == -TOP


def test_first_component_always_zero():
    for a in BASIS:
        for b in BASIS:
            assert nonlocal_bracket(a, b).alpha1.is_zero()


def test_jacobiator_on_basis_and_zero():
    for a in BASIS:
        for b in BASIS:
            for c in BASIS:
                assert torus_jacobiator(a, b, c).is_zero()
    s = random_torus_section(0, 0, 0)
    assert torus_jacobiator(TorusSection.zero(), s, random_torus_section(0, 0, 1)).is_zero()


@pytest.mark.parametrize("trial", range(100))
def test_jacobiator_on_seeded_suite(trial):
    s1, s2, s3 = (random_torus_section(0, trial, k) for k in range(3))
    assert torus_jacobiator(s1, s2, s3).is_zero()


@given(torus_sections(), torus_sections(), torus_sections())
def test_jacobiator_property(s1, s2, s3):
    assert torus_jacobiator(s1, s2, s3).is_zero()


@given(torus_sections(), torus_sections(), fourier_polys())
def test_second_slot_is_function_linear(s1, s2, f):
    assert nonlocal_bracket(s1, s2.scale(f)) == nonlocal_bracket(s1, s2).scale(f)


def test_first_slot_is_not_function_linear():
    defect = first_slot_defect(FourierPoly.cos(1), ETA_X, TOP)
    assert not defect.is_zero()
    # ∫cos = 0 while cos * ∫1 = cos
    assert defect == TorusSection.build(h=-FourierPoly.cos(1))


@given(torus_sections())
def test_fiber_integrals_are_first_angle_invariant(s):
    for part in integrate(s):
        assert not part.depends_on_first()


def _mean_first(p: FourierPoly, t2: float, N: int = 64) -> float:
    return sum(p.evaluate(2 * math.pi * k / N, t2) for k in range(N)) / N


@given(torus_sections())
def test_fiber_integral_matches_quadrature(s):
    fx, _ = integrate(s)
    for t2 in (0.0, 1.3):
        assert math.isclose(fx.evaluate(0.0, t2), _mean_first(s.part("x"), t2), abs_tol=1e-9)


@pytest.mark.parametrize("F", [1, 2, 3])
def test_local_witness(F):
    rep = is_local_witness(F)
    assert rep["found"]
    assert rep["frequency"] == F and rep["jet_order"] == 2 * F - 1
    got, other = (parse_rational(v) for v in rep["bracket_at_origin"])
    # mean of (1 - cos t)^F is C(2F, F) / 2^F
    assert Fraction(int(got.numerator), int(got.denominator)) == Fraction(math.comb(2 * F, F), 2 ** F)
    assert other == 0
    f = FourierPoly.from_json(rep["first_argument"]["eta_x"])
    assert abs(f.evaluate(1e-3, 0.0)) < 1e-3 ** (2 * F - 1)


def test_local_witness_needs_nonconstant_functions():
    assert is_local_witness(0) == {"found": False, "max_frequency": 0}
