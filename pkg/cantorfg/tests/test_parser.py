from fractions import Fraction

import pytest

from cantorfg.core.algebra import AlgebraicReal, cbrt_field, heptagonal_field, sqrt_field
from cantorfg.core.exceptions import FieldMismatchError, SpecError
from cantorfg.core.lattice import Lattice, RationalRankOne
from cantorfg.core.odometer import OdometerSpec, OdometerSystem
from cantorfg.core.parser import (
    parse_base,
    parse_clopen,
    parse_lattice,
    parse_number,
    parse_numbers,
    parse_rationals,
    parse_subgroup,
    parse_supernatural,
    parse_system,
)

Q5 = sqrt_field(5)


@pytest.mark.parametrize("text, expected", [
    ("(-1+sqrt(5))/2", Q5.element((Fraction(-1, 2), Fraction(1, 2)))),
    ("sqrt(20) - 4", Q5.element((-4, 2))),
    ("1/sqrt(5)", Q5.element((0, Fraction(1, 5)))),
    ("cbrt(4)", cbrt_field(2).element((0, 0, 1))),
    ("cbrt(2)^2 + 1", cbrt_field(2).element((1, 0, 1))),
    ("4+3*cbrt(3)+2*cbrt(9)", cbrt_field(3).element((4, 3, 2))),
    ("2*cos(2*pi/7)", heptagonal_field().generator()),
])
def test_parse_number(text, expected):
    assert parse_number(text) == expected


def test_parse_rational():
    assert parse_number("3/4") == AlgebraicReal.rational(Fraction(3, 4))
    assert parse_number("3/4", field=Q5).field == Q5


@pytest.mark.parametrize("text", ["0.5", "", "x + 1", "__import__('os')", "sin(1)", "sqrt(-2)"])
def test_rejected_expressions(text):
    with pytest.raises(SpecError):
        parse_number(text)


def test_mixed_radicals():
    with pytest.raises(FieldMismatchError):
        parse_number("sqrt(2) + sqrt(3)")


def test_parse_numbers_share_a_field():
    values = parse_numbers(["1/2", "cbrt(2)", "cbrt(4)"])
    assert {v.field for v in values} == {cbrt_field(2)}


def test_parse_base():
    assert parse_base("2,3|5") == ((2, 3), (5,))
    assert parse_base("6") == ((), (6,))
    assert parse_base("2 | 3, 5") == ((2,), (3, 5))
    with pytest.raises(SpecError):
        parse_base("2,x")


def test_parse_supernatural():
    assert parse_supernatural("9^inf").infinite_primes == (3,)
    assert parse_supernatural("6^inf").infinite_primes == (2, 3)
    N = parse_supernatural("2^inf * 3^2")
    assert N.exponent(3) == 2
    with pytest.raises(SpecError):
        parse_supernatural("2^x")


def test_parse_lattice_round_trip():
    sqrt5 = Q5.generator()
    E = parse_lattice("x^2-5; 1, a")
    assert E == Lattice.from_generators(Q5, [1, sqrt5])
    golden = parse_lattice("lattice: field x^2-5; basis 1, (-1+a)/2")
    assert parse_lattice(golden.describe()) == golden
    print(golden.describe())


def test_parse_subgroup_dispatch():
    assert isinstance(parse_subgroup("supernatural: 2^inf"), RationalRankOne)
    assert isinstance(parse_subgroup("x^3-2; 1, a, a^2"), Lattice)


def test_parse_rationals():
    assert parse_rationals("2, 1/3") == [Fraction(2), Fraction(1, 3)]
    with pytest.raises(SpecError):
        parse_rationals("0")


def test_parse_system_and_clopen():
    system = parse_system("odometer:2,3|5")
    assert system.spec == OdometerSpec((2, 3), (5,))
    two = OdometerSystem(OdometerSpec.constant(2))
    U = parse_clopen(two, "[0] [1,1]")
    assert U == two.cylinders([(0,), (1, 1)])
    assert U.measure == Fraction(3, 4)
    assert parse_clopen(two, U.describe()) == U


def test_parse_denjoy_system():
    system = parse_system("denjoy2:cbrt(2);cbrt(4)")
    assert system.rank == 2
    A = parse_clopen(system, "[0 0, 1 0)")
    assert A.measure == cbrt_field(2).generator() - 1
    with pytest.raises(SpecError):
        parse_system("circle:2")
