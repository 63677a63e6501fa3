"""
Additive subgroups E of R containing 1, their multiplier rings and IM+(E).

Two presentations cover every value group in scope:

* ``RationalRankOne``: E = {b/q : q | N} for a supernatural number N.
* ``Lattice``: a finitely generated Z-module inside a real number field,
  kept in a canonical form (common denominator, column Hermite normal form)
  so that lattice equality is plain data comparison.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import sympy
from sympy import ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import hermite_normal_form

from cantorfg.core.algebra import AlgebraicReal, NumberField, approximate
from cantorfg.core.exceptions import (
    FieldMismatchError,
    InvariantViolation,
    NotFullRankError,
    SpecError,
)

logger = logging.getLogger(__name__)

INF = math.inf


@dataclass(frozen=True)
class SupernaturalNumber:
    """Formal product of prime powers p^e with e a positive integer or infinity."""
    exponents: Tuple[Tuple[int, float], ...] = ()

    def __post_init__(self):
        cleaned = []
        seen = set()
        for p, e in self.exponents:
            p = int(p)
            if not sympy.isprime(p):
                raise SpecError(f"{p} is not prime")
            if p in seen:
                raise SpecError(f"prime {p} listed twice")
            seen.add(p)
            if e != INF:
                if int(e) != e or e < 1:
                    raise SpecError(f"exponent of {p} must be a positive integer or inf, got {e}")
                e = int(e)
            cleaned.append((p, e))
        object.__setattr__(self, "exponents", tuple(sorted(cleaned)))

    @classmethod
    def of(cls, mapping: Dict[int, float]) -> "SupernaturalNumber":
        """Build from a prime -> exponent map, dropping zero exponents."""
        return cls(tuple((p, e) for p, e in mapping.items() if e))

    def exponent(self, p: int) -> float:
        return dict(self.exponents).get(p, 0)

    @property
    def infinite_primes(self) -> Tuple[int, ...]:
        return tuple(p for p, e in self.exponents if e == INF)

    def divides(self, q: int) -> bool:
        """True when the positive integer q divides N."""
        if q < 1:
            raise ValueError(f"expected a positive integer, got {q}")
        return all(k <= self.exponent(p) for p, k in sympy.factorint(q).items())

    def __mul__(self, other: "SupernaturalNumber") -> "SupernaturalNumber":
        merged = dict(self.exponents)
        for p, e in other.exponents:
            merged[p] = merged.get(p, 0) + e
        return SupernaturalNumber.of(merged)

    def __str__(self):
        if not self.exponents:
            return "1"
        return " * ".join(f"{p}^{'inf' if e == INF else e}" for p, e in self.exponents)


@dataclass(frozen=True)
class RationalRankOne:
    """E = {b/q : b in Z, q a positive integer dividing N}."""
    denominators: SupernaturalNumber = field(default_factory=SupernaturalNumber)

    def contains(self, x) -> bool:
        x = AlgebraicReal.coerce(x)
        if not x.is_rational:
            raise FieldMismatchError(f"field mismatch: {x} is not rational")
        return self.denominators.divides(x.rational_value.denominator)

    def describe(self) -> str:
        return f"supernatural: {self.denominators}"

    def to_dict(self) -> dict:
        return {"kind": "rational_rank_one", "supernatural": str(self.denominators)}


def _coordinates(nf: Optional[NumberField], value) -> Tuple[Fraction, ...]:
    value = AlgebraicReal.coerce(value)
    if nf is None:
        if not value.is_rational:
            raise FieldMismatchError()
        return (value.rational_value,)
    return value.in_field(nf).coords


def _hnf_columns(columns: Sequence[Sequence[int]], rows: int) -> Tuple[Tuple[int, ...], ...]:
    """Column Hermite normal form; returns the pivot columns only."""
    columns = [c for c in columns if any(c)]
    if not columns:
        return ()
    matrix = DomainMatrix([[ZZ(int(col[i])) for col in columns] for i in range(rows)],
                          (rows, len(columns)), ZZ)
    hnf = hermite_normal_form(matrix).to_list()
    width = len(hnf[0]) if hnf else 0
    return tuple(tuple(int(hnf[i][j]) for i in range(rows)) for j in range(width))


@dataclass(frozen=True)
class Lattice:
    """
    Z-lattice {H n / denominator : n integral} in a real number field.

    ``columns`` are the columns of the integer HNF matrix H; the pair
    (denominator, columns) is reduced so that it is unique for the lattice.
    ``field`` is None for lattices of rationals.
    """
    field: Optional[NumberField]
    denominator: int
    columns: Tuple[Tuple[int, ...], ...]

    @classmethod
    def from_generators(cls, nf: Optional[NumberField], generators: Iterable,
                        require_independent: bool = False) -> "Lattice":
        generators = list(generators)
        coords = [_coordinates(nf, g) for g in generators]
        rows = nf.degree if nf is not None else 1
        den = 1
        for vector in coords:
            for c in vector:
                den = den * c.denominator // math.gcd(den, c.denominator)
        integer_columns = [[int(c * den) for c in vector] for vector in coords]
        hnf = _hnf_columns(integer_columns, rows)
        if require_independent and len(hnf) != len(generators):
            raise SpecError(f"basis of {len(generators)} elements is not Z-linearly independent")
        content = den
        for column in hnf:
            for entry in column:
                content = math.gcd(content, entry)
        content = content or 1
        return cls(nf, den // content, tuple(tuple(e // content for e in col) for col in hnf))

    @property
    def degree(self) -> int:
        return self.field.degree if self.field is not None else 1

    @property
    def rank(self) -> int:
        return len(self.columns)

    @property
    def is_full_rank(self) -> bool:
        return self.rank == self.degree

    @property
    def basis(self) -> Tuple[AlgebraicReal, ...]:
        out = []
        for column in self.columns:
            coords = [Fraction(e, self.denominator) for e in column]
            if self.field is None:
                out.append(AlgebraicReal.rational(coords[0]))
            else:
                out.append(self.field.element(coords))
        return tuple(out)

    def contains(self, x) -> bool:
        coords = _coordinates(self.field, x)
        scaled = [c * self.denominator for c in coords]
        if any(c.denominator != 1 for c in scaled):
            return False
        vector = [int(c) for c in scaled]
        if not any(vector):
            return True
        return _hnf_columns(list(self.columns) + [vector], self.degree) == self.columns

    def scaled(self, t) -> "Lattice":
        """The lattice t*E."""
        return Lattice.from_generators(self.field, [t * b for b in self.basis])

    def __add__(self, other: "Lattice") -> "Lattice":
        if self.field != other.field:
            raise FieldMismatchError()
        return Lattice.from_generators(self.field, self.basis + other.basis)

    def dual(self) -> "Lattice":
        """Dual lattice for the coordinate dot product; full rank only."""
        if not self.is_full_rank:
            raise NotFullRankError()
        matrix = sympy.Matrix(self.degree, self.degree,
                              lambda i, j: sympy.Rational(self.columns[j][i], self.denominator))
        dual = matrix.inv().T
        generators = []
        for j in range(self.degree):
            coords = [Fraction(int(dual[i, j].p), int(dual[i, j].q)) for i in range(self.degree)]
            generators.append(self.field.element(coords) if self.field is not None
                              else AlgebraicReal.rational(coords[0]))
        return Lattice.from_generators(self.field, generators)

    def intersection(self, other: "Lattice") -> "Lattice":
        """L1 ∩ L2 = (L1* + L2*)* for full-rank lattices."""
        return (self.dual() + other.dual()).dual()

    def describe(self) -> str:
        nf = self.field
        head = nf.minpoly_text.replace(" ", "") if nf is not None else "x-1"
        return f"lattice: field {head}; basis {', '.join(_in_generator(b) for b in self.basis)}"

    def to_dict(self, digits: int = 12) -> dict:
        return {
            "kind": "lattice",
            "field": self.field.minpoly_text if self.field is not None else None,
            "rank": self.rank,
            "basis": [b.to_dict(digits) for b in self.basis],
        }


def _in_generator(value: AlgebraicReal) -> str:
    """Render a field element as a polynomial in the generator symbol ``a``."""
    parts = []
    for power, c in enumerate(value.coords):
        if c == 0:
            continue
        monomial = "" if power == 0 else ("a" if power == 1 else f"a^{power}")
        if not monomial:
            parts.append(f"({c})")
        elif c == 1:
            parts.append(monomial)
        else:
            parts.append(f"({c})*{monomial}")
    return " + ".join(parts) if parts else "0"


AdditiveSubgroup = Union[RationalRankOne, Lattice]


@dataclass(frozen=True)
class MultiplicativeGroup:
    """
    Finitely generated subgroup of the positive reals under multiplication.

    ``kind`` is one of trivial, cyclic, rank_two or prime_generated. Generators
    are exact numbers greater than 1; prime_generated groups list their primes.
    """
    kind: str
    generators: Tuple[AlgebraicReal, ...] = ()
    primes: Tuple[int, ...] = ()
    certified: bool = True
    note: str = ""

    KINDS = ("trivial", "cyclic", "rank_two", "prime_generated")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise SpecError(f"unknown group kind {self.kind!r}")
        expected = {"trivial": 0, "cyclic": 1, "rank_two": 2, "prime_generated": 0}[self.kind]
        if len(self.generators) != expected:
            raise SpecError(f"{self.kind} group needs {expected} generators, got {len(self.generators)}")
        for g in self.generators:
            if not g > 1:
                raise SpecError(f"generator {g} must exceed 1")
        if self.kind == "prime_generated":
            primes = tuple(sorted(set(int(p) for p in self.primes)))
            if not all(sympy.isprime(p) for p in primes):
                raise SpecError(f"not all primes: {primes}")
            object.__setattr__(self, "primes", primes)

    @classmethod
    def trivial(cls) -> "MultiplicativeGroup":
        return cls("trivial")

    @classmethod
    def cyclic(cls, generator, note: str = "") -> "MultiplicativeGroup":
        g = AlgebraicReal.coerce(generator)
        if g < 1:
            g = g.inverse()
        return cls("cyclic", (g,), note=note)

    @classmethod
    def prime_generated(cls, primes: Iterable[int]) -> "MultiplicativeGroup":
        primes = tuple(primes)
        if not primes:
            return cls.trivial()
        return cls("prime_generated", primes=primes)

    def contains(self, value, bound: int = 20) -> bool:
        """Membership; rank_two groups search exponents up to ``bound``."""
        value = AlgebraicReal.coerce(value)
        if not value > 0:
            return False
        if self.kind == "trivial":
            return value == 1
        if self.kind == "prime_generated":
            if not value.is_rational:
                return False
            q = value.rational_value
            support = set(sympy.factorint(q.numerator)) | set(sympy.factorint(q.denominator))
            return support <= set(self.primes)
        from cantorfg.core.units import express_in_units
        return express_in_units(value, self.generators, bound) is not None

    def same_group(self, other: "MultiplicativeGroup", bound: int = 20) -> bool:
        if self.kind != other.kind:
            return False
        if self.kind == "prime_generated":
            return self.primes == other.primes
        return (all(other.contains(g, bound) for g in self.generators)
                and all(self.contains(g, bound) for g in other.generators))

    def to_dict(self, digits: int = 12) -> dict:
        data = {"kind": self.kind, "certified": self.certified}
        if self.kind == "prime_generated":
            data["primes"] = list(self.primes)
        else:
            data["generators"] = [g.to_dict(digits) for g in self.generators]
        if self.note:
            data["note"] = self.note
        return data

    def __str__(self):
        if self.kind == "trivial":
            return "{1}"
        if self.kind == "prime_generated":
            return "<" + ", ".join(str(p) for p in self.primes) + ">"
        return "<" + ", ".join(approximate(g, 6) for g in self.generators) + ">"


def contains(E: AdditiveSubgroup, x) -> bool:
    """Membership x ∈ E."""
    return E.contains(x)


def multiplier_ring(E: Lattice) -> Lattice:
    """
    O(E) = {t : tE ⊆ E}, computed as the intersection of the lattices e⁻¹E over the basis of E.
    """
    if not isinstance(E, Lattice):
        raise SpecError("multiplier_ring needs a lattice subgroup")
    if not E.is_full_rank:
        raise NotFullRankError()
    ring = None
    for e in E.basis:
        piece = E.scaled(e.inverse())
        ring = piece if ring is None else ring.intersection(piece)
    check_ring(ring)
    logger.debug(f"multiplier ring of {E.describe()} is {ring.describe()}")
    return ring


def check_ring(ring: Lattice):
    if not ring.contains(1):
        raise InvariantViolation(f"{ring.describe()} does not contain 1")
    basis = ring.basis
    for a in basis:
        for b in basis:
            if not ring.contains(a * b):
                raise InvariantViolation(f"{ring.describe()} is not closed under multiplication")


def im_plus(E: AdditiveSubgroup, settings=None) -> MultiplicativeGroup:
    """
    The positive inner multiplier group {t > 0 : tE = E}.

    Parameters
    ----------
    E : AdditiveSubgroup
        Value group containing 1.
    settings : Settings, optional
        Search bounds forwarded to the unit computation.

    Returns
    -------
    MultiplicativeGroup
        prime_generated for rational rank one groups, otherwise the positive
        unit group of the multiplier ring.
    """
    if isinstance(E, RationalRankOne):
        primes = E.denominators.infinite_primes
        for p in primes:
            if not (E.contains(p) and E.contains(Fraction(1, p))):
                raise InvariantViolation(f"{p}E != E for {E.describe()}")
        return MultiplicativeGroup.prime_generated(primes)

    if not E.contains(1):
        raise SpecError(f"{E.describe()} does not contain 1")
    if not E.is_full_rank:
        # prime degree: the only proper subfield is Q, so O(E) is Z
        logger.info(f"{E.describe()} has rank {E.rank} < {E.degree}; IM+ is trivial")
        return MultiplicativeGroup.trivial()

    from cantorfg.core.units import order_from_lattice, positive_unit_group

    order = order_from_lattice(multiplier_ring(E))
    group = positive_unit_group(order, settings=settings)
    for g in group.generators:
        if not (E.contains(g) and E.contains(g.inverse()) and E.scaled(g) == E):
            raise InvariantViolation(f"generator {g} does not satisfy tE = E")
    return group


def ring_realizable(generators: Iterable) -> Tuple[bool, Tuple[int, ...]]:
    """
    Whether <generators> is the positive unit group of Z[1/N] for some N.

    That holds exactly when the exponent vectors over the support primes span
    all of Z^k. Returns the verdict and the support primes.
    """
    values = [_fraction_of(g) for g in generators]
    for v in values:
        if v <= 0:
            raise SpecError(f"generator {v} must be positive")
    primes = sorted({p for v in values for p in sympy.factorint(v.numerator) | sympy.factorint(v.denominator)})
    if not primes:
        return True, ()
    columns = []
    for v in values:
        num, den = sympy.factorint(v.numerator), sympy.factorint(v.denominator)
        columns.append(tuple(num.get(p, 0) - den.get(p, 0) for p in primes))
    pivots = _hnf_columns(columns, len(primes))
    if len(pivots) < len(primes):
        return False, tuple(primes)
    det = sympy.Matrix(len(primes), len(primes), lambda i, j: pivots[j][i]).det()
    logger.debug(f"exponent lattice over {primes} has index {abs(det)}")
    return abs(det) == 1, tuple(primes)


def _fraction_of(value) -> Fraction:
    value = AlgebraicReal.coerce(value)
    if not value.is_rational:
        raise SpecError(f"{value} is not rational")
    return value.rational_value
