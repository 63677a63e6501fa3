from fractions import Fraction

import pytest

from cantorfg.core.algebra import cbrt_field, field_norm, heptagonal_field, sqrt_field
from cantorfg.core.exceptions import InvariantViolation, NotADiscriminantError, NotInOrderError, UnitRankError
from cantorfg.core.lattice import Lattice, MultiplicativeGroup
from cantorfg.core.units import (
    discriminant,
    fundamental_unit_complex_cubic,
    normalize_unit,
    order_from_lattice,
    pell_brute_force,
    pell_min_solution,
    pell_suite,
    positive_unit_group,
    quadratic_fundamental_unit,
    squarefree_split,
    valid_discriminants,
    verify_unit_system,
)

Q5 = sqrt_field(5)
SQRT5 = Q5.generator()


def power_order(nf):
    a = nf.generator()
    return order_from_lattice(Lattice.from_generators(nf, [a ** k for k in range(nf.degree)]))


def test_squarefree_split():
    assert squarefree_split(20) == (2, 5)
    assert squarefree_split(72) == (6, 2)
    assert squarefree_split(13) == (1, 13)


@pytest.mark.parametrize("D, t, u, sign, coords", [
    (5, 1, 1, -4, (Fraction(1, 2), Fraction(1, 2))),
    (8, 2, 1, -4, (1, 1)),
    (12, 4, 1, 4, (2, 1)),
    (20, 4, 1, -4, (2, 1)),
])
def test_pell_min_solution(D, t, u, sign, coords):
    solution = pell_min_solution(D)
    assert (solution.t, solution.u, solution.sign) == (t, u, sign)
    assert solution.epsilon0 == solution.epsilon0.field.element(coords)
    assert solution.t ** 2 - D * solution.u ** 2 == solution.sign
    f, _ = squarefree_split(D)
    epsilon = solution.epsilon0
    omega = epsilon.field.element((Fraction(D, 2), Fraction(f, 2)))  # (D + sqrt(D)) / 2
    order = Lattice.from_generators(epsilon.field, [1, omega])
    for k in range(1, 7):
        power = epsilon ** k
        assert field_norm(power) == (solution.sign // 4) ** k
        assert order.contains(power)
        assert order.contains(1 / power)


def test_pell_long_period():
    # D = 244 = 4 * 61: the solution is far beyond any small search
    solution = pell_min_solution(244, cross_check=False)
    assert solution.t ** 2 - 244 * solution.u ** 2 == solution.sign
    assert solution.u > 100


@pytest.mark.parametrize("D", [1, 4, 7, 9, 15, 16])
def test_not_a_discriminant(D):
    with pytest.raises(NotADiscriminantError):
        pell_min_solution(D)


def test_pell_cross_check_detects_disagreement(mocker):
    mocker.patch("cantorfg.core.units.pell_brute_force", return_value=(3, 1, 4))
    with pytest.raises(InvariantViolation):
        pell_min_solution(5)


def test_pell_brute_force_prefers_minus_four():
    assert pell_brute_force(5) == (1, 1, -4)
    assert pell_brute_force(12) == (4, 1, 4)


@pytest.mark.slow
def test_pell_suite_agrees():
    frame = pell_suite(500)
    print(frame.head())
    assert len(frame) == len(valid_discriminants(5, 500))
    assert frame["agrees"].all()
    assert list(frame.columns) == ["D", "t", "u", "sign", "brute_t", "brute_u", "agrees", "epsilon0"]
    row = frame[frame["D"] == 5].iloc[0]
    assert (row["t"], row["u"], row["sign"]) == (1, 1, -4)


def test_discriminants():
    assert discriminant([1, SQRT5]) == 20
    assert discriminant([1, Q5.element((Fraction(1, 2), Fraction(1, 2)))]) == 5
    a = cbrt_field(2).generator()
    assert discriminant([1, a, a * a]) == -108
    assert power_order(heptagonal_field()).discriminant == 49


def test_quadratic_fundamental_unit():
    order = order_from_lattice(Lattice.from_generators(Q5, [1, SQRT5]))
    epsilon, pell = quadratic_fundamental_unit(order)
    assert epsilon == 2 + SQRT5
    assert pell.D == 20


def test_complex_cubic_unit_cbrt2():
    nf = cbrt_field(2)
    epsilon = fundamental_unit_complex_cubic(power_order(nf))
    assert epsilon == nf.element((1, 1, 1))


@pytest.mark.slow
def test_complex_cubic_unit_cbrt3():
    nf = cbrt_field(3)
    epsilon = fundamental_unit_complex_cubic(power_order(nf))
    assert epsilon == nf.element((4, 3, 2))


def test_complex_cubic_path_rejects_totally_real():
    with pytest.raises(UnitRankError):
        fundamental_unit_complex_cubic(power_order(heptagonal_field()))


def test_heptagonal_unit_system():
    nf = heptagonal_field()
    a = nf.generator()
    report = verify_unit_system(power_order(nf), [-1 + a + a ** 2, 2 - a ** 2])
    print(report.to_dict())
    assert report.each_is_unit
    assert report.independent
    assert float(report.regulator_lower_bound) > 0
    assert report.note == "verified unit system, fundamentality unchecked"


def test_dependent_units_are_flagged():
    nf = heptagonal_field()
    a = nf.generator()
    u = -1 + a + a ** 2
    report = verify_unit_system(power_order(nf), [u, u ** 2])
    assert report.each_is_unit
    assert not report.independent


def test_candidate_outside_order():
    nf = heptagonal_field()
    a = nf.generator()
    with pytest.raises(NotInOrderError):
        verify_unit_system(power_order(nf), [a / 2, a])


def test_totally_real_group_is_uncertified():
    nf = heptagonal_field()
    a = nf.generator()
    group = positive_unit_group(power_order(nf))
    assert group.kind == "rank_two"
    assert not group.certified
    expected = MultiplicativeGroup("rank_two", (normalize_unit(-1 + a + a ** 2), normalize_unit(2 - a ** 2)))
    assert group.same_group(expected)
