from fractions import Fraction

import pytest

from cantorfg.core.algebra import cbrt_field, sqrt_field
from cantorfg.core.exceptions import NotFullRankError
from cantorfg.core.lattice import (
    INF,
    Lattice,
    MultiplicativeGroup,
    RationalRankOne,
    SupernaturalNumber,
    im_plus,
    multiplier_ring,
    ring_realizable,
)

Q5 = sqrt_field(5)
SQRT5 = Q5.generator()
PHI = Q5.element((Fraction(1, 2), Fraction(1, 2)))


def test_supernatural_numbers():
    N = SupernaturalNumber.of({2: INF, 3: 2})
    assert N.exponent(2) == INF
    assert N.exponent(5) == 0
    assert N.infinite_primes == (2,)
    assert N.divides(2 ** 40 * 9)
    assert not N.divides(27)
    assert (N * SupernaturalNumber.of({3: INF})).infinite_primes == (2, 3)


def test_rational_rank_one_membership():
    E = RationalRankOne(SupernaturalNumber.of({2: INF, 3: 2}))
    assert E.contains(Fraction(5, 8))
    assert E.contains(Fraction(7, 9))
    assert not E.contains(Fraction(1, 27))
    assert not E.contains(Fraction(1, 5))


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_prime_odometer_groups(p):
    group = im_plus(RationalRankOne(SupernaturalNumber.of({p: INF})))
    assert group.kind == "prime_generated"
    assert group.primes == (p,)
    assert group.contains(Fraction(1, p ** 3))
    assert not group.contains(Fraction(p + 1))


def test_finite_exponents_do_not_scale():
    group = im_plus(RationalRankOne(SupernaturalNumber.of({2: 5, 3: INF})))
    assert group.primes == (3,)


def test_lattice_canonical_form():
    a = Lattice.from_generators(Q5, [1, SQRT5])
    b = Lattice.from_generators(Q5, [1 + SQRT5, SQRT5, 3])
    assert a == b
    assert a.rank == 2 and a.is_full_rank


def test_lattice_membership_and_arithmetic():
    order = Lattice.from_generators(Q5, [1, PHI])
    suborder = Lattice.from_generators(Q5, [1, SQRT5])
    assert order.contains(PHI ** 5)
    assert order.contains(SQRT5)
    assert not order.contains(SQRT5 / 2)
    assert order + suborder == order
    assert order.intersection(suborder) == suborder
    assert order.scaled(PHI) == order


def test_multiplier_ring_of_golden_order():
    E = Lattice.from_generators(Q5, [1, PHI])
    assert multiplier_ring(E) == E


def test_multiplier_ring_of_non_order():
    # Z + Z sqrt(5)/5 is not a ring; its multipliers are Z[sqrt(5)]
    E = Lattice.from_generators(Q5, [1, SQRT5 / 5])
    assert multiplier_ring(E) == Lattice.from_generators(Q5, [1, SQRT5])


def test_golden_im_plus():
    group = im_plus(Lattice.from_generators(Q5, [1, PHI - 1]))
    assert group.kind == "cyclic"
    assert group.generators[0] == PHI


def test_rank_deficient_cubic_lattice_is_trivial():
    a = cbrt_field(2).generator()
    E = Lattice.from_generators(cbrt_field(2), [1, a - 1])
    assert not E.is_full_rank
    assert im_plus(E).kind == "trivial"
    with pytest.raises(NotFullRankError):
        multiplier_ring(E)


def test_cyclic_group_membership():
    group = MultiplicativeGroup.cyclic(2 + SQRT5)
    assert group.contains((2 + SQRT5) ** -3)
    assert not group.contains(PHI)
    assert group.same_group(MultiplicativeGroup.cyclic(SQRT5 - 2))


@pytest.mark.parametrize("generators, expected, primes", [
    ([9], False, (3,)),
    ([3], True, (3,)),
    ([2, Fraction(1, 3)], True, (2, 3)),
    ([6], False, (2, 3)),
    ([2, 3, 6], True, (2, 3)),
    ([4, 6], False, (2, 3)),
])
def test_ring_realizable(generators, expected, primes):
    assert ring_realizable(generators) == (expected, primes)
