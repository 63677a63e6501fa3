"""
Denjoy Z- and Z^2-systems, modelled by cutting the circle R/Z along the rotation orbit of 0.

A cut point is a coefficient tuple c and sits at frac(c_1 θ_1 + ... + c_r θ_r).
Each cut point is doubled, so half-open arcs [p, q) between cut points are
clopen. An ``ArcSet`` records the cut points where membership changes,
sorted by position, together with whether the arc to the right of each one
is inside the set.
"""
import bisect
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple

from cantorfg.core.algebra import AlgebraicReal, cbrt_field, field_norm, poly_text
from cantorfg.core.clopen import ClopenSystem, add
from cantorfg.core.exceptions import FieldMismatchError, InvariantViolation, SpecError
from cantorfg.core.lattice import Lattice, MultiplicativeGroup, im_plus, multiplier_ring
from cantorfg.core.units import order_from_lattice, pell_min_solution
from cantorfg.core.utils import Settings

logger = logging.getLogger(__name__)

Coeff = Tuple[int, ...]


@dataclass(frozen=True)
class DenjoySpec:
    """Rotation numbers θ_1 (, θ_2) in one real field; the cut set is the orbit of 0."""
    thetas: Tuple[AlgebraicReal, ...]

    def __post_init__(self):
        thetas = tuple(AlgebraicReal.coerce(t) for t in self.thetas)
        if len(thetas) not in (1, 2):
            raise SpecError(f"a Denjoy system needs one or two rotation numbers, got {len(thetas)}")
        for t in thetas:
            if t.is_rational:
                raise SpecError(f"rotation number {t} is rational")
        nf = thetas[0].field
        try:
            thetas = tuple(t.in_field(nf) for t in thetas)
        except FieldMismatchError:
            raise FieldMismatchError("field mismatch: rotation numbers lie in different fields")
        if len(thetas) == 2:
            if Lattice.from_generators(nf, (1,) + thetas).rank != 3:
                raise SpecError("1, θ1, θ2 are linearly dependent over Q")
        object.__setattr__(self, "thetas", thetas)

    @property
    def rank(self) -> int:
        return len(self.thetas)

    @property
    def field(self):
        return self.thetas[0].field

    def position(self, coeff: Coeff) -> AlgebraicReal:
        return _position(self, tuple(coeff))

    def describe(self) -> str:
        if self.rank == 1:
            return f"denjoy:{self.thetas[0].to_expression()}"
        return f"denjoy2:{self.thetas[0].to_expression()};{self.thetas[1].to_expression()}"


@lru_cache(maxsize=65536)
def _position(spec: DenjoySpec, coeff: Coeff) -> AlgebraicReal:
    if len(coeff) != spec.rank:
        raise SpecError(f"cut point {coeff} needs {spec.rank} coefficients")
    total = AlgebraicReal.rational(0, spec.field)
    for c, t in zip(coeff, spec.thetas):
        total = total + c * t
    return total.frac()


def _format(coeff: Coeff) -> str:
    return " ".join(str(c) for c in coeff)


@dataclass(frozen=True, eq=False)
class ArcSet:
    """
    Finite union of arcs [p, q) between cut points.

    ``marks`` are (cut point, inside to the right) pairs sorted by position with
    alternating flags; with no marks the set is everything (``full``) or nothing.
    """
    spec: DenjoySpec
    marks: Tuple[Tuple[Coeff, bool], ...] = ()
    full: bool = False

    @classmethod
    def build(cls, spec: DenjoySpec, marks: Iterable[Tuple[Coeff, bool]], default: bool = False) -> "ArcSet":
        ordered = sorted(((tuple(c), bool(f)) for c, f in marks), key=lambda m: spec.position(m[0]))
        if not ordered:
            return cls(spec, (), default)
        kept = [m for i, m in enumerate(ordered) if m[1] != ordered[i - 1][1]]
        if not kept:
            return cls(spec, (), ordered[0][1])
        return cls(spec, tuple(kept), False)

    @property
    def positions(self) -> List[AlgebraicReal]:
        return [self.spec.position(c) for c, _ in self.marks]

    def covers_right_of(self, point: AlgebraicReal) -> bool:
        """Whether the points just to the right of ``point`` belong to the set."""
        if not self.marks:
            return self.full
        index = bisect.bisect_right(self.positions, point) - 1
        return self.marks[index][1]

    def _combine(self, other: "ArcSet", op) -> "ArcSet":
        if self.spec != other.spec:
            raise SpecError("arc sets of different Denjoy systems")
        coeffs = {c for c, _ in self.marks} | {c for c, _ in other.marks}
        if not coeffs:
            return ArcSet(self.spec, (), op(self.full, other.full))
        marks = []
        for c in coeffs:
            p = self.spec.position(c)
            marks.append((c, op(self.covers_right_of(p), other.covers_right_of(p))))
        return ArcSet.build(self.spec, marks)

    def __or__(self, other: "ArcSet") -> "ArcSet":
        return self._combine(other, lambda a, b: a or b)

    def __and__(self, other: "ArcSet") -> "ArcSet":
        return self._combine(other, lambda a, b: a and b)

    def __sub__(self, other: "ArcSet") -> "ArcSet":
        return self._combine(other, lambda a, b: a and not b)

    def complement(self) -> "ArcSet":
        return ArcSet(self.spec, tuple((c, not f) for c, f in self.marks), not self.full if not self.marks else False)

    def is_empty(self) -> bool:
        return not self.marks and not self.full

    def __eq__(self, other):
        if not isinstance(other, ArcSet):
            return NotImplemented
        return self.spec == other.spec and self.marks == other.marks and self.full == other.full

    def __hash__(self):
        return hash((self.spec, self.marks, self.full))

    def rotate(self, powers: Sequence[int]) -> "ArcSet":
        """Shift every cut point by ``powers``; rotation keeps the cyclic order."""
        if not self.marks:
            return self
        return ArcSet.build(self.spec, [(add(c, powers), f) for c, f in self.marks])

    def arcs(self) -> List[Tuple[Coeff, Coeff]]:
        """The maximal arcs [left, right) of the set."""
        out = []
        for i, (c, inside) in enumerate(self.marks):
            if inside:
                out.append((c, self.marks[(i + 1) % len(self.marks)][0]))
        return out

    @property
    def measure(self) -> AlgebraicReal:
        if not self.marks:
            return AlgebraicReal.rational(1 if self.full else 0)
        positions = self.positions
        total = AlgebraicReal.rational(0, self.spec.field)
        for i, (_, inside) in enumerate(self.marks):
            if not inside:
                continue
            if i + 1 < len(positions):
                total = total + (positions[i + 1] - positions[i])
            else:
                total = total + (positions[0] + 1 - positions[i])
        return total

    def describe(self) -> str:
        if not self.marks:
            zero = _format((0,) * self.spec.rank)
            return f"[{zero}, {zero})" if self.full else "{}"
        return " ".join(f"[{_format(a)}, {_format(b)})" for a, b in self.arcs())

    def __repr__(self):
        return f"ArcSet({self.spec.describe()}; {self.describe()})"


def arc(spec: DenjoySpec, left: Coeff, right: Coeff) -> ArcSet:
    """The arc [left, right); equal endpoints give the whole circle cut at that point."""
    left, right = tuple(left), tuple(right)
    if left == right:
        return ArcSet(spec, (), True)
    return ArcSet.build(spec, [(left, True), (right, False)])


def arc_union(spec: DenjoySpec, pairs: Iterable[Tuple[Coeff, Coeff]]) -> ArcSet:
    """
    Union of pairwise disjoint arcs.

    Raises
    ------
    SpecError
        When two arcs overlap.
    """
    pieces = [arc(spec, a, b) for a, b in pairs]
    union = ArcSet(spec, (), False)
    total = AlgebraicReal.rational(0)
    for piece in pieces:
        union = union | piece
        total = total + piece.measure
    if union.measure != total:
        raise SpecError("overlapping arcs")
    return union


def arc_measure(spec: DenjoySpec, A) -> AlgebraicReal:
    """Exact Haar measure of an ArcSet or of a list of disjoint (left, right) arcs."""
    if not isinstance(A, ArcSet):
        A = arc_union(spec, A)
    return A.measure


def rotate(spec: DenjoySpec, A: ArcSet, powers: Sequence[int]) -> ArcSet:
    if len(powers) != spec.rank:
        raise SpecError(f"rotation needs {spec.rank} powers, got {tuple(powers)}")
    return A.rotate(tuple(powers))


def cut_points(spec: DenjoySpec, depth: int) -> List[Coeff]:
    """Cut coefficients {n : 0 <= n <= depth} or {(n, m) : 0 <= n, m <= depth}."""
    return [tuple(c) for c in itertools.product(range(depth + 1), repeat=spec.rank)]


def check_cut_points(spec: DenjoySpec, bound: int) -> int:
    """Distinct coefficients with entries in [-bound, bound] give distinct positions; returns the count."""
    coeffs = list(itertools.product(range(-bound, bound + 1), repeat=spec.rank))
    positions = {spec.position(c) for c in coeffs}
    if len(positions) != len(coeffs):
        raise InvariantViolation(f"cut point collision among coefficients up to {bound}")
    return len(coeffs)


def value_group(spec: DenjoySpec) -> Lattice:
    return Lattice.from_generators(spec.field, (1,) + spec.thetas)


def primitive_discriminant(theta: AlgebraicReal) -> int:
    """b^2 - 4ac for the primitive integer polynomial a x^2 + b x + c of a quadratic θ."""
    coeffs = theta.minimal_polynomial()
    if len(coeffs) != 3:
        raise SpecError(f"{theta} is not quadratic")
    scale = math.lcm(*(c.denominator for c in coeffs))
    ints = [int(c * scale) for c in coeffs]
    g = math.gcd(*ints)
    c, b, a = (v // g for v in ints)
    return b * b - 4 * a * c


def _cube_root_note(spec: DenjoySpec) -> str:
    if spec.field != cbrt_field(3):
        return ""
    printed = cbrt_field(2).element((4, 3, 2))
    return (f"4+3*cbrt(2)+2*cbrt(4) has norm {field_norm(printed)} and lies in Q(cbrt(2)); "
            f"the unit of Z[cbrt(3)] is 4+3*cbrt(3)+2*cbrt(9)")


def fundamental_group(spec: DenjoySpec, settings: Optional[Settings] = None) -> MultiplicativeGroup:
    """
    IM+ of the value group Z + Z θ_1 (+ Z θ_2).

    For a quadratic θ the generator is rebuilt from the Pell equation for the
    discriminant of the multiplier ring, which must equal the discriminant of
    θ's primitive minimal polynomial.
    """
    E = value_group(spec)
    group = im_plus(E, settings)
    if spec.rank == 1 and spec.field.degree == 2:
        D = order_from_lattice(multiplier_ring(E)).discriminant
        if D != primitive_discriminant(spec.thetas[0]):
            raise InvariantViolation(f"multiplier ring discriminant {D} differs from "
                                     f"{primitive_discriminant(spec.thetas[0])}")
        epsilon0 = pell_min_solution(D).epsilon0
        if group.kind != "cyclic" or group.generators[0].minimal_polynomial() != epsilon0.minimal_polynomial():
            raise InvariantViolation(f"IM+ {group} differs from the Pell unit for D={D}")
        logger.info(f"{spec.describe()}: D = {D}, generator minpoly {poly_text(epsilon0.minimal_polynomial())}")
    note = _cube_root_note(spec)
    if note and group.kind == "cyclic":
        logger.warning(note)
        group = MultiplicativeGroup.cyclic(group.generators[0], note=note)
    return group


class DenjoySystem(ClopenSystem):
    """Rotations of the cut circle as a ClopenSystem of rank 1 or 2."""

    def __init__(self, spec: DenjoySpec):
        self.spec = spec
        self.rank = spec.rank

    def full(self) -> ArcSet:
        return ArcSet(self.spec, (), True)

    def empty(self) -> ArcSet:
        return ArcSet(self.spec, (), False)

    def arc_set(self, pairs: Iterable[Tuple[Coeff, Coeff]]) -> ArcSet:
        return arc_union(self.spec, pairs)

    def act(self, S: ArcSet, g) -> ArcSet:
        return S.rotate(tuple(g))

    def measure(self, S: ArcSet) -> AlgebraicReal:
        return S.measure

    def atoms(self, depth: int) -> List[ArcSet]:
        cuts = sorted(cut_points(self.spec, depth), key=self.spec.position)
        if len(cuts) == 1:
            return [self.full()]
        return [arc(self.spec, cuts[i], cuts[(i + 1) % len(cuts)]) for i in range(len(cuts))]

    def value_group(self) -> Lattice:
        return value_group(self.spec)

    def fundamental_group(self, settings: Optional[Settings] = None) -> MultiplicativeGroup:
        return fundamental_group(self.spec, settings)

    def describe(self) -> str:
        return self.spec.describe()
