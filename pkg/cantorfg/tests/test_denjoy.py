from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cantorfg.core.algebra import cbrt_field, sqrt_field
from cantorfg.core.clopen import measure_invariance, minimal_cover
from cantorfg.core.denjoy import (
    ArcSet,
    DenjoySpec,
    DenjoySystem,
    arc,
    arc_measure,
    check_cut_points,
    fundamental_group,
    primitive_discriminant,
    rotate,
    value_group,
)
from cantorfg.core.exceptions import FieldMismatchError, SpecError
from cantorfg.core.lattice import Lattice, im_plus, multiplier_ring
from cantorfg.core.parser import parse_number
from cantorfg.core.units import order_from_lattice, pell_min_solution

Q5 = sqrt_field(5)
SQRT5 = Q5.generator()
PHI = Q5.element((Fraction(1, 2), Fraction(1, 2)))
GOLDEN = DenjoySpec((PHI - 1,))
SMALL = DenjoySpec((SQRT5 - 2,))


def test_spec_validation():
    with pytest.raises(SpecError):
        DenjoySpec((Fraction(1, 3),))
    with pytest.raises(SpecError):
        DenjoySpec((SQRT5, 2 * SQRT5))
    with pytest.raises(FieldMismatchError):
        DenjoySpec((SQRT5, sqrt_field(2).generator()))
    c = cbrt_field(2).generator()
    assert DenjoySpec((c, c * c)).rank == 2


def test_cut_positions():
    assert SMALL.position((1,)) == SQRT5 - 2
    assert SMALL.position((5,)) == 5 * SQRT5 - 11
    assert SMALL.position((-1,)) == 3 - SQRT5
    assert check_cut_points(SMALL, 6) == 13


def test_arc_measure():
    theta = SQRT5 - 2
    assert arc_measure(SMALL, [((0,), (1,))]) == theta
    assert arc_measure(SMALL, [((0,), (1,)), ((1,), (2,))]) == 2 * theta
    with pytest.raises(SpecError, match="overlapping arcs"):
        arc_measure(SMALL, [((0,), (2,)), ((1,), (3,))])


def test_wrapping_arc():
    # [1, 0) runs from theta through 1 back to 0
    A = arc(SMALL, (1,), (0,))
    assert A.measure == 3 - SQRT5
    assert (A | arc(SMALL, (0,), (1,))) == DenjoySystem(SMALL).full()


def test_set_operations():
    system = DenjoySystem(GOLDEN)
    A = system.arc_set([((0,), (2,))])
    B = system.arc_set([((1,), (3,))])
    assert (A & B).measure == A.measure + B.measure - (A | B).measure
    assert ((A - B) | (A & B)) == A
    assert (A - A).is_empty()
    assert A.complement().complement() == A
    assert (A | A.complement()) == system.full()


def test_describe_lists_arcs():
    A = DenjoySystem(SMALL).arc_set([((0,), (1,)), ((1,), (2,))])
    assert A.describe() == "[0, 2)"
    assert DenjoySystem(SMALL).empty().describe() == "{}"


def test_rotation_preserves_measure():
    A = arc(GOLDEN, (0,), (3,))
    for g in range(-6, 7):
        assert rotate(GOLDEN, A, (g,)).measure == A.measure
    assert rotate(GOLDEN, rotate(GOLDEN, A, (4,)), (-4,)) == A


def test_atoms_partition_the_circle():
    system = DenjoySystem(GOLDEN)
    atoms = system.atoms(5)
    assert len(atoms) == 6
    assert system.union(atoms) == system.full()
    assert sum((a.measure for a in atoms), Fraction(0)) == 1
    assert system.atoms(0) == [system.full()]


def test_rank_two_atoms():
    c = cbrt_field(2).generator()
    system = DenjoySystem(DenjoySpec((c, c * c)))
    atoms = system.atoms(2)
    assert len(atoms) == 9
    assert measure_invariance(system, 2, moves=9) == 81


def test_cover_of_golden_arc():
    system = DenjoySystem(GOLDEN)
    cover = minimal_cover(system, arc(GOLDEN, (0,), (1,)))
    assert cover.elements == [(0,), (1,)]


@pytest.mark.parametrize("text, generator", [
    ("(-1+sqrt(5))/2", PHI),
    ("sqrt(5)-2", 2 + SQRT5),
    ("1/sqrt(5)", 2 + SQRT5),
])
def test_quadratic_rotation_groups(text, generator):
    group = fundamental_group(DenjoySpec((parse_number(text),)))
    assert group.kind == "cyclic"
    assert group.generators[0] == generator


def test_primitive_discriminant():
    assert primitive_discriminant(PHI - 1) == 5
    assert primitive_discriminant(SQRT5 - 2) == 20
    assert primitive_discriminant(SQRT5 / 5) == 20


def test_cubic_rotation_is_trivial():
    c = cbrt_field(2).generator()
    assert fundamental_group(DenjoySpec((c - 1,))).kind == "trivial"


def test_cube_root_plane_rotation():
    c = cbrt_field(2).generator()
    spec = DenjoySpec((c, c * c))
    assert value_group(spec).is_full_rank
    group = fundamental_group(spec)
    assert group.kind == "cyclic"
    assert group.generators[0] == cbrt_field(2).element((1, 1, 1))


@pytest.mark.slow
def test_cube_root_three_note():
    c = cbrt_field(3).generator()
    group = fundamental_group(DenjoySpec((c, c * c)))
    assert group.generators[0] == cbrt_field(3).element((4, 3, 2))
    assert "norm 6" in group.note


def test_describe_round_trip():
    from cantorfg.core.parser import parse_system
    assert parse_system(GOLDEN.describe()).spec == GOLDEN
    c = cbrt_field(2).generator()
    spec = DenjoySpec((c, c * c))
    assert parse_system(spec.describe()).spec == spec


@pytest.mark.property_based
@given(st.lists(st.tuples(st.integers(-8, 8), st.integers(1, 4)), min_size=1, max_size=4), st.integers(-20, 20))
@settings(max_examples=40, deadline=None)
def test_rotation_invariance_of_unions(arcs, g):
    pieces = [arc(GOLDEN, (start,), (start + length,)) for start, length in arcs]
    union = ArcSet(GOLDEN)
    for piece in pieces:
        union = union | piece
    assert rotate(GOLDEN, union, (g,)).measure == union.measure


QUADRATIC_THETAS = ["(-1+sqrt(5))/2", "sqrt(5)-2", "1/sqrt(5)"]


@pytest.mark.parametrize("text", QUADRATIC_THETAS)
def test_reflected_rotation_has_same_group(text):
    theta = parse_number(text)
    group = fundamental_group(DenjoySpec((theta,)))
    assert fundamental_group(DenjoySpec((1 - theta,))).same_group(group)
    assert fundamental_group(DenjoySpec((theta + 1,))).same_group(group)


@pytest.mark.parametrize("text", QUADRATIC_THETAS)
def test_group_ignores_presentation(text):
    theta = parse_number(text)
    nf = theta.field
    E = value_group(DenjoySpec((theta,)))
    changed = Lattice.from_generators(nf, [2 + 3 * theta, 1 + theta])
    assert changed == E
    group = fundamental_group(DenjoySpec((theta,)))
    assert im_plus(changed).same_group(group)
    assert im_plus(E.scaled(theta)).same_group(group)
    assert im_plus(E.scaled(Fraction(3, 7))).same_group(group)


@pytest.mark.parametrize("text", QUADRATIC_THETAS)
def test_group_matches_multiplier_ring_unit(text):
    theta = parse_number(text)
    E = value_group(DenjoySpec((theta,)))
    D = order_from_lattice(multiplier_ring(E)).discriminant
    epsilon = pell_min_solution(D).epsilon0
    group = fundamental_group(DenjoySpec((theta,)))
    assert group.generators[0].minimal_polynomial() == epsilon.minimal_polynomial()
    assert group.same_group(im_plus(E))


@pytest.mark.slow
def test_rank_two_cut_points_are_distinct():
    c = cbrt_field(2).generator()
    assert check_cut_points(DenjoySpec((c, c * c)), 50) == 101 ** 2
