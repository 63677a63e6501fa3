from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cantorfg.core.algebra import (
    AlgebraicReal,
    approximate,
    cbrt_field,
    compare,
    field_norm,
    heptagonal_field,
    sqrt_field,
)
from cantorfg.core.exceptions import FieldMismatchError

Q5 = sqrt_field(5)
SQRT5 = Q5.generator()
PHI = Q5.element((Fraction(1, 2), Fraction(1, 2)))

small = st.fractions(min_value=-6, max_value=6, max_denominator=12)


def elements(nf):
    return st.lists(small, min_size=nf.degree, max_size=nf.degree).map(nf.element)


def test_golden_ratio_identities():
    assert PHI * PHI == PHI + 1
    assert PHI.inverse() == PHI - 1
    assert PHI.minimal_polynomial() == (Fraction(-1), Fraction(-1), Fraction(1))
    assert approximate(PHI, 12) == "1.618033988750"


def test_floor_and_frac():
    eta = 2 + SQRT5
    assert eta.floor() == 4
    assert eta.frac() == SQRT5 - 2
    assert (-eta).floor() == -5


def test_exact_comparisons():
    sqrt2 = sqrt_field(2).generator()
    assert Fraction(7, 5) < sqrt2 < Fraction(3, 2)
    assert compare(sqrt2 * sqrt2, 2) == 0
    assert compare(SQRT5, PHI) == 1
    assert sorted([PHI, SQRT5, Fraction(2)]) == [PHI, Fraction(2), SQRT5]


def test_cube_root_units_and_norms():
    c2 = cbrt_field(2)
    assert field_norm(c2.element((1, 1, 1))) == 1
    assert field_norm(c2.element((4, 3, 2))) == 6
    assert field_norm(cbrt_field(3).element((4, 3, 2))) == 1
    assert field_norm(c2.element((3,))) == 27


def test_heptagonal_generator():
    a = heptagonal_field().generator()
    assert a ** 3 + a ** 2 - 2 * a - 1 == 0
    assert approximate(a, 6) == "1.246980"
    # the other two roots are a^2 - 2 and -a^2 - a + 1
    assert (a ** 2 - 2) ** 3 + (a ** 2 - 2) ** 2 - 2 * (a ** 2 - 2) - 1 == 0


def test_mixed_fields_rejected():
    with pytest.raises(FieldMismatchError):
        SQRT5 + sqrt_field(2).generator()
    # rationals mix with everything
    assert (SQRT5 + Fraction(1, 3)).coords == (Fraction(1, 3), Fraction(1))


def test_rational_elements_compare_across_fields():
    assert Q5.element((3,)) == AlgebraicReal.rational(3)
    assert hash(Q5.element((3,))) == hash(AlgebraicReal.rational(3))


def test_to_dict():
    data = PHI.to_dict(12)
    print(data)
    assert data["minpoly"] == "x^2 - x - 1"
    assert data["decimal"] == "1.618033988750"
    assert data["coords"] == ["1/2", "1/2"]


@pytest.mark.property_based
@given(elements(Q5), elements(Q5), elements(Q5))
@settings(max_examples=60, deadline=None)
def test_field_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    if not a.is_zero():
        assert a * a.inverse() == 1


@pytest.mark.property_based
@given(elements(cbrt_field(2)), elements(cbrt_field(2)))
@settings(max_examples=40, deadline=None)
def test_norm_is_multiplicative(a, b):
    assert field_norm(a * b) == field_norm(a) * field_norm(b)


@pytest.mark.property_based
@given(elements(Q5))
@settings(max_examples=60, deadline=None)
def test_floor_brackets_value(a):
    n = a.floor()
    assert n <= a < n + 1
    assert a.frac() == a - n
