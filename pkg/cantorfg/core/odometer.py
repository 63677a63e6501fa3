"""
Odometers: +1 with carry on prod_i {0, ..., n_i - 1} for an eventually periodic base (n_i).

Words are little endian: the first digit is the least significant one, so a
cylinder [w] of depth k is the set of sequences starting with w and the odometer
adds 1 to the first digit.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import sympy

from cantorfg.core.clopen import (
    AmplifiedSystem,
    ClopenSystem,
    LeveledClopen,
    OrbitEquivalence,
    ScalingAutomorphism,
    ScalingWitness,
    first_return,
    verify_orbit_equivalence,
)
from cantorfg.core.exceptions import InvariantViolation, SpecError
from cantorfg.core.lattice import INF, MultiplicativeGroup, RationalRankOne, SupernaturalNumber, im_plus
from cantorfg.core.utils import Settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OdometerSpec:
    """Base sequence given as a preperiod followed by a repeated period."""
    preperiod: Tuple[int, ...] = ()
    period: Tuple[int, ...] = (2,)

    def __post_init__(self):
        preperiod = tuple(int(n) for n in self.preperiod)
        period = tuple(int(n) for n in self.period)
        if not period:
            raise SpecError("odometer period must be nonempty")
        if any(n < 2 for n in preperiod + period):
            raise SpecError(f"odometer base entries must be >= 2, got {preperiod + period}")
        object.__setattr__(self, "preperiod", preperiod)
        object.__setattr__(self, "period", period)

    @classmethod
    def constant(cls, p: int) -> "OdometerSpec":
        return cls((), (p,))

    @property
    def purely_periodic(self) -> bool:
        return not self.preperiod

    def base(self, i: int) -> int:
        """n_{i+1}: the radix of digit position i (0-based)."""
        if i < len(self.preperiod):
            return self.preperiod[i]
        return self.period[(i - len(self.preperiod)) % len(self.period)]

    def bases(self, depth: int) -> Tuple[int, ...]:
        return tuple(self.base(i) for i in range(depth))

    def product(self, depth: int) -> int:
        return math.prod(self.bases(depth))

    def depth_for(self, size: int) -> int:
        """Least depth k with n_1 ... n_k >= size."""
        k, P = 0, 1
        while P < size:
            P *= self.base(k)
            k += 1
        return k

    def describe(self) -> str:
        period = ",".join(str(n) for n in self.period)
        if not self.preperiod:
            return period
        return ",".join(str(n) for n in self.preperiod) + "|" + period


def supernatural_of(spec: OdometerSpec) -> SupernaturalNumber:
    """
    sup over k of the prime exponents of n_1 ... n_k: infinite for primes
    dividing a period entry, the preperiod exponent otherwise.
    """
    exponents: Dict[int, float] = {}
    for n in spec.preperiod:
        for p, k in sympy.factorint(n).items():
            exponents[p] = exponents.get(p, 0) + k
    for n in spec.period:
        for p in sympy.factorint(n):
            exponents[p] = INF
    return SupernaturalNumber.of(exponents)


def _value(spec: OdometerSpec, word: Sequence[int]) -> int:
    value, weight = 0, 1
    for i, digit in enumerate(word):
        value += digit * weight
        weight *= spec.base(i)
    return value


def _digits(spec: OdometerSpec, value: int, depth: int) -> Tuple[int, ...]:
    out = []
    for i in range(depth):
        value, digit = divmod(value, spec.base(i))
        out.append(digit)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class OdClopenSet:
    """Finite union of cylinders, all of length ``depth``."""
    spec: OdometerSpec
    depth: int
    words: FrozenSet[Tuple[int, ...]] = frozenset()

    def __post_init__(self):
        words = frozenset(tuple(int(d) for d in w) for w in self.words)
        for w in words:
            if len(w) != self.depth:
                raise SpecError(f"word {w} does not have length {self.depth}")
            for i, d in enumerate(w):
                if not 0 <= d < self.spec.base(i):
                    raise SpecError(f"digit {d} at position {i + 1} exceeds base {self.spec.base(i)}")
        object.__setattr__(self, "words", words)

    @classmethod
    def cylinder(cls, spec: OdometerSpec, word: Sequence[int]) -> "OdClopenSet":
        return cls(spec, len(word), frozenset([tuple(word)]))

    def refine(self, depth: int) -> "OdClopenSet":
        if depth < self.depth:
            raise ValueError(f"cannot refine depth {self.depth} to {depth}")
        if depth == self.depth:
            return self
        tails = itertools.product(*(range(self.spec.base(i)) for i in range(self.depth, depth)))
        tails = list(tails)
        return OdClopenSet(self.spec, depth, frozenset(w + t for w in self.words for t in tails))

    def canonical(self) -> "OdClopenSet":
        """The same set at the least depth that represents it."""
        current = self
        while current.depth > 0:
            radix = self.spec.base(current.depth - 1)
            prefixes: Dict[Tuple[int, ...], int] = {}
            for w in current.words:
                prefixes[w[:-1]] = prefixes.get(w[:-1], 0) + 1
            if any(count != radix for count in prefixes.values()):
                break
            current = OdClopenSet(self.spec, current.depth - 1, frozenset(prefixes))
        return current

    def _aligned(self, other: "OdClopenSet") -> Tuple["OdClopenSet", "OdClopenSet"]:
        if self.spec != other.spec:
            raise SpecError("clopen sets of different odometers")
        depth = max(self.depth, other.depth)
        return self.refine(depth), other.refine(depth)

    def __or__(self, other: "OdClopenSet") -> "OdClopenSet":
        a, b = self._aligned(other)
        return OdClopenSet(self.spec, a.depth, a.words | b.words)

    def __and__(self, other: "OdClopenSet") -> "OdClopenSet":
        a, b = self._aligned(other)
        return OdClopenSet(self.spec, a.depth, a.words & b.words)

    def __sub__(self, other: "OdClopenSet") -> "OdClopenSet":
        a, b = self._aligned(other)
        return OdClopenSet(self.spec, a.depth, a.words - b.words)

    def complement(self) -> "OdClopenSet":
        full = OdClopenSet(self.spec, 0, frozenset([()]))
        return full - self

    def is_empty(self) -> bool:
        return not self.words

    def __eq__(self, other):
        if not isinstance(other, OdClopenSet):
            return NotImplemented
        if self.spec != other.spec:
            return False
        a, b = self._aligned(other)
        return a.words == b.words

    def __hash__(self):
        c = self.canonical()
        return hash((self.spec, c.depth, c.words))

    @property
    def measure(self) -> Fraction:
        return Fraction(len(self.words), self.spec.product(self.depth))

    def describe(self) -> str:
        c = self.canonical()
        if c.is_empty():
            return "{}"
        return " ".join("[" + ",".join(str(d) for d in w) + "]" for w in sorted(c.words))

    def __repr__(self):
        return f"OdClopenSet({self.spec.describe()}; {self.describe()})"


def apply_phi(spec: OdometerSpec, S: OdClopenSet, power: int) -> Tuple[OdClopenSet, OdClopenSet]:
    """
    Image of S under φ^power.

    S is first refined to the least depth k with n_1 ... n_k >= |power|. A
    cylinder [w] of depth k then maps onto the cylinder of the k digits of
    (value(w) + power) mod n_1 ... n_k: the carry into the tail is a constant
    shift of the tail odometer, which is onto. Returns (refined S, image).
    """
    if S.spec != spec:
        raise SpecError("clopen set belongs to another odometer")
    refined = S.refine(max(S.depth, spec.depth_for(abs(power))))
    P = spec.product(refined.depth)
    image = OdClopenSet(spec, refined.depth,
                        frozenset(_digits(spec, (_value(spec, w) + power) % P, refined.depth)
                                  for w in refined.words))
    return refined, image


def measure(spec: OdometerSpec, S: OdClopenSet) -> Fraction:
    return S.measure


def value_group(spec: OdometerSpec) -> RationalRankOne:
    return RationalRankOne(supernatural_of(spec))


def fundamental_group(spec: OdometerSpec, settings: Optional[Settings] = None) -> MultiplicativeGroup:
    """
    Generated by the primes of infinite exponent; cross-checked against
    IM+ of the value group.
    """
    group = MultiplicativeGroup.prime_generated(supernatural_of(spec).infinite_primes)
    other = im_plus(value_group(spec), settings)
    if not group.same_group(other):
        raise InvariantViolation(f"odometer {spec.describe()}: {group} differs from IM+ {other}")
    return group


class OdometerSystem(ClopenSystem):
    """The odometer as a ClopenSystem (rank 1)."""

    def __init__(self, spec: OdometerSpec):
        self.spec = spec
        self.rank = 1

    def full(self) -> OdClopenSet:
        return OdClopenSet(self.spec, 0, frozenset([()]))

    def empty(self) -> OdClopenSet:
        return OdClopenSet(self.spec, 0, frozenset())

    def cylinders(self, words: Iterable[Sequence[int]]) -> OdClopenSet:
        out = self.empty()
        for w in words:
            out = out | OdClopenSet.cylinder(self.spec, w)
        return out

    def act(self, S: OdClopenSet, g) -> OdClopenSet:
        return apply_phi(self.spec, S, g[0])[1]

    def measure(self, S: OdClopenSet) -> Fraction:
        return S.measure

    def atoms(self, depth: int) -> List[OdClopenSet]:
        return [OdClopenSet.cylinder(self.spec, w)
                for w in itertools.product(*(range(self.spec.base(i)) for i in range(depth)))]

    def value_group(self) -> RationalRankOne:
        return value_group(self.spec)

    def fundamental_group(self, settings: Optional[Settings] = None) -> MultiplicativeGroup:
        return fundamental_group(self.spec, settings)

    def describe(self) -> str:
        return f"odometer:{self.spec.describe()}"

    def scaling_witnesses(self, depth: int, settings: Optional[Settings] = None) -> List[ScalingWitness]:
        """The prepend-block witness of a purely periodic base, scale 1/prod(period)."""
        if not self.spec.purely_periodic:
            return []
        h = PrependBlockMap(self)
        verify_orbit_equivalence(h, depth, settings)
        F = ScalingAutomorphism(h, settings)
        return [ScalingWitness(str(F.scale), ((F, False),), self)]


class PrependBlockMap(OrbitEquivalence):
    """
    h(x) = 0^l x for a purely periodic base with period length l (times ``copies``).

    h maps X onto U = [0^l] inside X × {1} and conjugates φ to the first return map of U.
    """

    def __init__(self, system: OdometerSystem, copies: int = 1):
        if not system.spec.purely_periodic:
            raise SpecError("prepend-block maps need a purely periodic base")
        if copies < 1:
            raise SpecError(f"copies must be >= 1, got {copies}")
        self.source = system
        self.target = AmplifiedSystem(system, 1)
        self.block = (0,) * (len(system.spec.period) * copies)
        self.region = LeveledClopen((OdClopenSet.cylinder(system.spec, self.block),))

    def image(self, S: OdClopenSet) -> LeveledClopen:
        shifted = OdClopenSet(S.spec, S.depth + len(self.block), frozenset(self.block + w for w in S.words))
        return LeveledClopen((shifted,))

    def preimage(self, T: LeveledClopen) -> OdClopenSet:
        inside = T.level(1) & self.region.level(1)
        inside = inside.refine(max(inside.depth, len(self.block)))
        b = len(self.block)
        return OdClopenSet(inside.spec, inside.depth - b, frozenset(w[b:] for w in inside.words))


def first_return_map(spec: OdometerSpec, U: OdClopenSet, settings: Optional[Settings] = None):
    """First return of φ to U as a PiecewiseMap; return times weighted by measure sum to 1."""
    return first_return(OdometerSystem(spec), U, settings)


def induced_conjugacy(spec: OdometerSpec, depth: int, settings: Optional[Settings] = None) -> Dict[str, object]:
    """
    For a purely periodic base, check on the cylinders of ``depth`` that the
    prepend-block map conjugates φ to the first return map of [0^l] and scales
    measure by 1 / prod(period).
    """
    system = OdometerSystem(spec)
    h = PrependBlockMap(system)
    verify_orbit_equivalence(h, depth, settings)
    expected = Fraction(1, math.prod(spec.period))
    if h.scale != expected:
        raise InvariantViolation(f"prepend map scales by {h.scale}, expected {expected}")
    return {"base": spec.describe(), "region": h.region.describe(), "scale": str(h.scale),
            "depth": depth, "cylinders_checked": len(system.atoms(depth))}


def product_group(first: OdometerSpec, second: OdometerSpec,
                  settings: Optional[Settings] = None) -> Tuple[RationalRankOne, MultiplicativeGroup]:
    """Value group and fundamental group of the Z^2-odometer φ1 × φ2."""
    E = RationalRankOne(supernatural_of(first) * supernatural_of(second))
    group = MultiplicativeGroup.prime_generated(E.denominators.infinite_primes)
    if not group.same_group(im_plus(E, settings)):
        raise InvariantViolation("product odometer group differs from IM+")
    return E, group


def ring_realization(N: int, settings: Optional[Settings] = None) -> Tuple[OdometerSpec, MultiplicativeGroup]:
    """An odometer whose fundamental group is the positive unit group of Z[1/N]."""
    if N < 2:
        raise SpecError(f"N must be >= 2, got {N}")
    spec = OdometerSpec((), (N,))
    group = fundamental_group(spec, settings)
    expected = MultiplicativeGroup.prime_generated(sympy.factorint(N))
    if not group.same_group(expected):
        raise InvariantViolation(f"odometer {N} gives {group}, expected {expected}")
    return spec, group
