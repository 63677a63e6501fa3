from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from cantorfg.core.clopen import measure_invariance, minimal_cover
from cantorfg.core.exceptions import SpecError
from cantorfg.core.lattice import im_plus
from cantorfg.core.odometer import (
    OdClopenSet,
    OdometerSpec,
    OdometerSystem,
    PrependBlockMap,
    apply_phi,
    first_return_map,
    fundamental_group,
    induced_conjugacy,
    product_group,
    ring_realization,
    supernatural_of,
    value_group,
)

TWO = OdometerSpec.constant(2)
THREE = OdometerSpec.constant(3)

specs = st.builds(
    OdometerSpec,
    st.lists(st.integers(2, 6), max_size=2).map(tuple),
    st.lists(st.integers(2, 6), min_size=1, max_size=2).map(tuple),
)


def test_spec_validation():
    with pytest.raises(SpecError):
        OdometerSpec((), ())
    with pytest.raises(SpecError):
        OdometerSpec((1,), (2,))
    spec = OdometerSpec((2, 3), (5,))
    assert spec.bases(4) == (2, 3, 5, 5)
    assert spec.depth_for(30) == 3
    assert spec.describe() == "2,3|5"


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_constant_base_groups(p):
    group = fundamental_group(OdometerSpec.constant(p))
    assert group.kind == "prime_generated"
    assert group.primes == (p,)


@pytest.mark.parametrize("preperiod, period, primes", [
    ((), (6,), (2, 3)),
    ((2,), (3,), (3,)),
    ((4, 9), (2, 5), (2, 5)),
    ((), (4, 9), (2, 3)),
])
def test_base_sequences(preperiod, period, primes):
    spec = OdometerSpec(preperiod, period)
    assert fundamental_group(spec).primes == primes
    assert value_group(spec).denominators.infinite_primes == primes


def test_supernatural_keeps_finite_exponents():
    N = supernatural_of(OdometerSpec((4, 9), (5,)))
    assert N.exponent(2) == 2
    assert N.exponent(3) == 2
    assert N.infinite_primes == (5,)


def test_apply_phi_carries():
    S = OdClopenSet.cylinder(TWO, (1, 1))
    refined, image = apply_phi(TWO, S, 1)
    assert refined == S
    assert image == OdClopenSet.cylinder(TWO, (0, 0))
    _, back = apply_phi(TWO, image, -1)
    assert back == S


def test_apply_phi_refines_for_large_powers():
    S = OdClopenSet.cylinder(THREE, (0,))
    refined, image = apply_phi(THREE, S, 5)
    assert refined.depth == 2
    assert image.measure == S.measure
    assert image == OdClopenSet(THREE, 2, frozenset({(2, 0), (2, 1), (2, 2)}))
    assert image.describe() == "[2]"


def test_set_algebra_and_canonical_form():
    system = OdometerSystem(TWO)
    U = system.cylinders([(0,)])
    V = system.cylinders([(0, 1), (1, 0)])
    assert (U | V) == system.cylinders([(0,), (1, 0)])
    assert (U & V).describe() == "[0,1]"
    assert (U - V).describe() == "[0,0]"
    assert (U | U.complement()) == system.full()
    assert system.cylinders([(0, 0), (0, 1)]).canonical().depth == 1


def test_minimal_cover_three_odometer():
    system = OdometerSystem(THREE)
    cover = minimal_cover(system, system.cylinders([(0,)]))
    assert cover.elements == [(0,), (1,), (-1,)]
    assert [p.describe() for p in cover.pieces] == ["[0]", "[1]", "[2]"]


def test_first_return_kac():
    system = OdometerSystem(TWO)
    U = system.cylinders([(0, 0), (1, 1)])
    induced = first_return_map(TWO, U)
    mass = sum(r.source.measure * r.element[0] for r in induced.rules)
    assert mass == 1


def test_prepend_block_map():
    system = OdometerSystem(OdometerSpec((), (2, 3)))
    h = PrependBlockMap(system)
    assert h.scale == Fraction(1, 6)
    C = OdClopenSet.cylinder(system.spec, (1, 2))
    assert h.image(C).level(1) == OdClopenSet.cylinder(system.spec, (0, 0, 1, 2))
    assert h.preimage(h.image(C)) == C
    with pytest.raises(SpecError):
        PrependBlockMap(OdometerSystem(OdometerSpec((2,), (3,))))


@pytest.mark.parametrize("period, depth", [((2,), 6), ((3,), 4), ((2, 3), 3)])
def test_induced_conjugacy(period, depth):
    result = induced_conjugacy(OdometerSpec((), period), depth)
    print(result)
    assert result["cylinders_checked"] > 0


def test_product_group():
    E, group = product_group(TWO, THREE)
    assert group.primes == (2, 3)
    assert E.contains(Fraction(1, 6 ** 4))


def test_ring_realization():
    spec, group = ring_realization(12)
    assert spec == OdometerSpec((), (12,))
    assert group.primes == (2, 3)


@pytest.mark.property_based
@given(specs, st.integers(0, 3), st.integers(-40, 40))
@settings(max_examples=50, deadline=None)
def test_phi_preserves_measure(spec, depth, power):
    system = OdometerSystem(spec)
    for C in system.atoms(depth)[:6]:
        refined, image = apply_phi(spec, C, power)
        assert image.measure == C.measure
        assert refined == C
        assert apply_phi(spec, image, -power)[1] == C


@pytest.mark.property_based
@given(specs)
@settings(max_examples=20, deadline=None)
def test_measure_invariance_suite(spec):
    assert measure_invariance(OdometerSystem(spec), 2, moves=9) > 0


@pytest.mark.slow
@pytest.mark.parametrize("spec", [TWO, THREE, OdometerSpec((), (2, 3))], ids=["2", "3", "2,3"])
def test_phi_preserves_measure_on_every_cylinder(spec):
    system = OdometerSystem(spec)
    checked = 0
    for depth in range(1, 9):
        mass = Fraction(1, spec.product(depth))
        for C in system.atoms(depth):
            _, image = apply_phi(spec, C, 1)
            assert image.measure == C.measure == mass
            assert apply_phi(spec, image, -1)[1] == C
            checked += 1
    assert checked == sum(spec.product(depth) for depth in range(1, 9))


@pytest.mark.property_based
@given(specs)
@settings(max_examples=30, deadline=None)
def test_fundamental_group_matches_value_group_path(spec):
    group = fundamental_group(spec)
    primes = sorted({p for n in spec.period for p in sympy.factorint(n)})
    assert list(group.primes) == primes
    assert group.same_group(im_plus(value_group(spec)))
