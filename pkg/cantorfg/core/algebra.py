"""
Exact real algebraic numbers of degree at most three.

An element of a number field K = Q(a) is stored as rational coordinates in the
power basis (1, a, a^2). The generator a is a designated real root of a monic
irreducible integer polynomial, pinned down by a rational isolating interval.
Signs are decided by bisecting that interval with exact rational endpoint
evaluation, so no floating point ever enters a comparison.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Tuple, Union

import sympy
from sympy import Poly, QQ, ZZ

from cantorfg.core.exceptions import FieldMismatchError, SpecError

logger = logging.getLogger(__name__)

x = sympy.Symbol("x")

Rational = Union[int, Fraction]

# First refinement level (bits of interval width) used for sign decisions.
_START_BITS = 32
_MAX_BITS = 1 << 16


def _fraction(value) -> Fraction:
    """Convert ints, Fractions and sympy rationals to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    if hasattr(value, "numerator") and hasattr(value, "denominator"):
        return Fraction(int(value.numerator), int(value.denominator))
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def _sympy_rational(value: Fraction) -> sympy.Rational:
    return sympy.Rational(value.numerator, value.denominator)


def poly_text(coeffs: Sequence, var: str = "x") -> str:
    """
    Render a polynomial given by ascending coefficients, e.g. (-1, -1, 1) -> "x^2 - x - 1".
    """
    terms = []
    for power in range(len(coeffs) - 1, -1, -1):
        c = _fraction(coeffs[power])
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        magnitude = abs(c)
        if power == 0:
            body = str(magnitude)
        else:
            monomial = var if power == 1 else f"{var}^{power}"
            body = monomial if magnitude == 1 else f"{magnitude}*{monomial}"
        terms.append((sign, body))
    if not terms:
        return "0"
    first_sign, first_body = terms[0]
    text = first_body if first_sign == "+" else f"-{first_body}"
    for sign, body in terms[1:]:
        text += f" {sign} {body}"
    return text


def _evaluate(coeffs: Sequence[int], t: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


@dataclass(frozen=True)
class NumberField:
    """
    A real number field Q(a) of degree 2 or 3.

    Parameters
    ----------
    coeffs : tuple of int
        Ascending coefficients of the monic minimal polynomial of a.
    root_index : int
        Position of a among the real roots sorted ascending.
    seed : tuple of Fraction, optional
        Rational isolating interval for a; computed with sympy when omitted.
    expression : str, optional
        Text for a that the expression parser accepts, used when rendering elements.
    """
    coeffs: Tuple[int, ...]
    root_index: int
    seed: Optional[Tuple[Fraction, Fraction]] = field(default=None, compare=False, repr=False)
    expression: str = field(default="", compare=False)

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if len(coeffs) not in (3, 4) or coeffs[-1] != 1:
            raise SpecError(f"minimal polynomial must be monic of degree 2 or 3, got {poly_text(coeffs)}")
        poly = self.poly
        if not poly.is_irreducible:
            raise SpecError(f"{poly_text(coeffs)} is not irreducible over Q")
        real_roots = sorted(
            ((_fraction(a), _fraction(b)) for (a, b), _ in poly.intervals()),
            key=lambda iv: iv[0],
        )
        if not 0 <= self.root_index < len(real_roots):
            raise SpecError(f"{poly_text(coeffs)} has no real root with index {self.root_index}")
        if self.seed is None:
            object.__setattr__(self, "seed", real_roots[self.root_index])
        else:
            lo, hi = (_fraction(v) for v in self.seed)
            if lo >= hi or poly.count_roots(_sympy_rational(lo), _sympy_rational(hi)) != 1:
                raise SpecError(f"interval ({lo}, {hi}) does not isolate a root of {poly_text(coeffs)}")
            if poly.count_roots(None, _sympy_rational(lo)) != self.root_index:
                raise SpecError(f"interval ({lo}, {hi}) does not hold real root {self.root_index}")
            object.__setattr__(self, "seed", (lo, hi))
        if not self.expression:
            object.__setattr__(self, "expression", f"root({poly_text(coeffs)}, {self.root_index})")

    @classmethod
    def from_polynomial(cls, coeffs: Sequence[int], approx=None, expression: str = "") -> "NumberField":
        """
        Build the field of the real root of ``coeffs`` nearest ``approx`` (largest root when omitted).
        """
        poly = Poly(list(reversed([int(c) for c in coeffs])), x, domain=ZZ)
        intervals = sorted(
            ((_fraction(a), _fraction(b)) for (a, b), _ in poly.intervals()),
            key=lambda iv: iv[0],
        )
        if not intervals:
            raise SpecError(f"{poly_text(coeffs)} has no real root")
        if approx is None:
            return cls(tuple(coeffs), len(intervals) - 1, expression=expression)
        target = Fraction(str(approx)) if not isinstance(approx, Fraction) else approx
        best = min(range(len(intervals)),
                   key=lambda i: abs((intervals[i][0] + intervals[i][1]) / 2 - target))
        return cls(tuple(coeffs), best, expression=expression)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def poly(self) -> Poly:
        return Poly(list(reversed(self.coeffs)), x, domain=ZZ)

    @property
    def minpoly_text(self) -> str:
        return poly_text(self.coeffs)

    def interval(self, bits: int = 0) -> Tuple[Fraction, Fraction]:
        """Isolating interval of the generator with width at most 2**-bits."""
        if bits <= 0:
            return self.seed
        return _refined_interval(self, bits)

    def generator(self) -> "AlgebraicReal":
        coords = [Fraction(0)] * self.degree
        coords[1] = Fraction(1)
        return AlgebraicReal(self, tuple(coords))

    def element(self, coords: Sequence[Rational]) -> "AlgebraicReal":
        coords = [_fraction(c) for c in coords]
        if len(coords) > self.degree:
            raise SpecError(f"too many coordinates for a degree {self.degree} field")
        coords += [Fraction(0)] * (self.degree - len(coords))
        return AlgebraicReal(self, tuple(coords))

    def __str__(self):
        return f"Q({self.expression})"


@lru_cache(maxsize=None)
def _refined_interval(nf: NumberField, bits: int) -> Tuple[Fraction, Fraction]:
    if bits > _START_BITS:
        lo, hi = _refined_interval(nf, bits // 2)
    else:
        lo, hi = nf.seed
    width = Fraction(1, 1 << bits)
    f_lo = _evaluate(nf.coeffs, lo)
    while hi - lo > width:
        mid = (lo + hi) / 2
        f_mid = _evaluate(nf.coeffs, mid)
        # irreducible of degree >= 2: rational points are never roots
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return lo, hi


def sqrt_field(d: int) -> NumberField:
    """Q(sqrt(d)) for a squarefree integer d >= 2."""
    s = math.isqrt(d)
    return NumberField((-d, 0, 1), 1, seed=(Fraction(s), Fraction(s + 1)), expression=f"sqrt({d})")


def cbrt_field(m: int) -> NumberField:
    """Q(cbrt(m)) for a cube-free integer m >= 2."""
    r, _ = sympy.integer_nthroot(m, 3)
    return NumberField((-m, 0, 0, 1), 0, seed=(Fraction(int(r)), Fraction(int(r) + 1)),
                       expression=f"cbrt({m})")


def heptagonal_field() -> NumberField:
    """Q(2cos(2pi/7)), the root of x^3 + x^2 - 2x - 1 in (1.2, 1.3)."""
    return NumberField((-1, -2, 1, 1), 2, seed=(Fraction(6, 5), Fraction(13, 10)),
                       expression="2*cos(2*pi/7)")


def _interval_mul(a: Tuple[Fraction, Fraction], b: Tuple[Fraction, Fraction]):
    products = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return min(products), max(products)


class AlgebraicReal:
    """
    An exact real number, rational or in a NumberField.

    Rationals carry ``field=None`` and a single coordinate. Field elements
    carry exactly ``field.degree`` coordinates. A field element with zero
    irrational part equals the corresponding rational.
    """
    __slots__ = ("field", "coords")

    def __init__(self, field: Optional[NumberField], coords: Sequence[Rational]):
        coords = tuple(_fraction(c) for c in coords)
        if field is None:
            if len(coords) != 1:
                raise SpecError("a rational has exactly one coordinate")
        elif len(coords) != field.degree:
            raise SpecError(f"expected {field.degree} coordinates, got {len(coords)}")
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "coords", coords)

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraicReal is immutable")

    # construction ---------------------------------------------------------

    @classmethod
    def rational(cls, value: Rational, field: Optional[NumberField] = None) -> "AlgebraicReal":
        value = _fraction(value)
        if field is None:
            return cls(None, (value,))
        return field.element((value,))

    @classmethod
    def coerce(cls, value) -> "AlgebraicReal":
        if isinstance(value, AlgebraicReal):
            return value
        return cls.rational(value)

    # structure --------------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coords[1:])

    @property
    def rational_value(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self} is irrational")
        return self.coords[0]

    def in_field(self, nf: NumberField) -> "AlgebraicReal":
        """The same number expressed in ``nf``."""
        if self.field == nf:
            return self
        if self.is_rational:
            return nf.element((self.coords[0],))
        raise FieldMismatchError()

    def _pair(self, other) -> Tuple[Optional[NumberField], Tuple[Fraction, ...], Tuple[Fraction, ...]]:
        other = AlgebraicReal.coerce(other)
        if self.field == other.field:
            return self.field, self.coords, other.coords
        if self.field is not None and other.is_rational:
            return self.field, self.coords, other.in_field(self.field).coords
        if other.field is not None and self.is_rational:
            return other.field, self.in_field(other.field).coords, other.coords
        raise FieldMismatchError()

    # arithmetic -------------------------------------------------------------

    def __add__(self, other):
        try:
            nf, a, b = self._pair(other)
        except TypeError:
            return NotImplemented
        return AlgebraicReal(nf, tuple(p + q for p, q in zip(a, b)))

    __radd__ = __add__

    def __neg__(self):
        return AlgebraicReal(self.field, tuple(-c for c in self.coords))

    def __sub__(self, other):
        try:
            nf, a, b = self._pair(other)
        except TypeError:
            return NotImplemented
        return AlgebraicReal(nf, tuple(p - q for p, q in zip(a, b)))

    def __rsub__(self, other):
        return AlgebraicReal.coerce(other) - self

    def __mul__(self, other):
        try:
            nf, a, b = self._pair(other)
        except TypeError:
            return NotImplemented
        if nf is None:
            return AlgebraicReal(None, (a[0] * b[0],))
        return AlgebraicReal(nf, _reduce(nf, _convolve(a, b)))

    __rmul__ = __mul__

    def inverse(self) -> "AlgebraicReal":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        if self.field is None:
            return AlgebraicReal(None, (1 / self.coords[0],))
        element = Poly([_sympy_rational(c) for c in reversed(self.coords)], x, domain=QQ)
        inv = element.invert(Poly(self.field.poly, x, domain=QQ))
        coords = [_fraction(c) for c in reversed(inv.all_coeffs())]
        return self.field.element(coords)

    def __truediv__(self, other):
        other = AlgebraicReal.coerce(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return AlgebraicReal.coerce(other) * self.inverse()

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented
        base = self if exponent >= 0 else self.inverse()
        result = AlgebraicReal.rational(1, self.field)
        for _ in range(abs(exponent)):
            result = result * base
        return result

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # comparison -------------------------------------------------------------

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def enclosure(self, bits: int) -> Tuple[Fraction, Fraction]:
        """Rational interval containing the value, from the generator interval at ``bits``."""
        if self.field is None or self.is_rational:
            return self.coords[0], self.coords[0]
        lo, hi = self.field.interval(bits)
        acc = (self.coords[-1], self.coords[-1])
        for c in reversed(self.coords[:-1]):
            acc = _interval_mul(acc, (lo, hi))
            acc = (acc[0] + c, acc[1] + c)
        return acc

    def sign(self) -> int:
        if self.is_rational:
            c = self.coords[0]
            return (c > 0) - (c < 0)
        bits = _START_BITS
        while bits <= _MAX_BITS:
            lo, hi = self.enclosure(bits)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            bits *= 2
        raise ArithmeticError(f"sign of {self} undecided at {_MAX_BITS} bits")

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.is_rational and self.coords[0] == other
        if not isinstance(other, AlgebraicReal):
            return NotImplemented
        if self.is_rational or other.is_rational:
            return self.is_rational and other.is_rational and self.coords[0] == other.coords[0]
        return self.field == other.field and self.coords == other.coords

    def __hash__(self):
        if self.is_rational:
            return hash(self.coords[0])
        return hash((self.field, self.coords))

    def __lt__(self, other):
        return compare(self, other) < 0

    def __le__(self, other):
        return compare(self, other) <= 0

    def __gt__(self, other):
        return compare(self, other) > 0

    def __ge__(self, other):
        return compare(self, other) >= 0

    def floor(self) -> int:
        if self.is_rational:
            return math.floor(self.coords[0])
        bits = _START_BITS
        while True:
            lo, hi = self.enclosure(bits)
            if math.floor(lo) == math.floor(hi):
                return math.floor(lo)
            bits *= 2

    def frac(self) -> "AlgebraicReal":
        """The value reduced mod 1 into [0, 1)."""
        return self - self.floor()

    def __float__(self):
        lo, hi = self.enclosure(64)
        return float((lo + hi) / 2)

    # derived data -----------------------------------------------------------

    def multiplication_matrix(self) -> sympy.Matrix:
        """Matrix of y -> self*y in the power basis; column j holds self*a^j."""
        nf = self.field
        columns = []
        for j in range(nf.degree):
            basis = [Fraction(0)] * nf.degree
            basis[j] = Fraction(1)
            columns.append((self * nf.element(basis)).coords)
        return sympy.Matrix(nf.degree, nf.degree,
                            lambda i, j: _sympy_rational(columns[j][i]))

    def trace(self) -> Fraction:
        if self.field is None:
            return self.coords[0]
        return _fraction(self.multiplication_matrix().trace())

    def minimal_polynomial(self) -> Tuple[Fraction, ...]:
        """Ascending coefficients of the monic minimal polynomial over Q."""
        if self.is_rational:
            return (-self.coords[0], Fraction(1))
        # prime degree: an irrational element generates the whole field
        charpoly = self.multiplication_matrix().charpoly(x)
        return tuple(_fraction(c) for c in reversed(charpoly.all_coeffs()))

    def to_expression(self) -> str:
        """Text the expression parser reads back to the same number."""
        if self.field is None or self.is_rational:
            return str(self.coords[0])
        gen = self.field.expression
        if not gen.replace("(", "").replace(")", "").isalnum():
            gen = f"({gen})"
        parts = []
        for power, c in enumerate(self.coords):
            if c == 0:
                continue
            monomial = "" if power == 0 else (gen if power == 1 else f"{gen}^{power}")
            if not monomial:
                parts.append(f"({c})")
            elif c == 1:
                parts.append(monomial)
            else:
                parts.append(f"({c})*{monomial}")
        return " + ".join(parts) if parts else "0"

    def to_dict(self, digits: int = 12) -> dict:
        return {
            "minpoly": poly_text(self.minimal_polynomial()),
            "field": self.field.minpoly_text if self.field is not None else None,
            "coords": [str(c) for c in self.coords],
            "decimal": approximate(self, digits),
        }

    def __repr__(self):
        if self.field is None:
            return f"AlgebraicReal({self.coords[0]})"
        return f"AlgebraicReal({self.field.minpoly_text}; {', '.join(str(c) for c in self.coords)})"

    def __str__(self):
        return self.to_expression()


def _convolve(a: Sequence[Fraction], b: Sequence[Fraction]):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, p in enumerate(a):
        if p == 0:
            continue
        for j, q in enumerate(b):
            out[i + j] += p * q
    return out


def _reduce(nf: NumberField, coeffs):
    """Reduce a coefficient list modulo the monic minimal polynomial."""
    d = nf.degree
    coeffs = list(coeffs)
    for k in range(len(coeffs) - 1, d - 1, -1):
        c = coeffs[k]
        if c == 0:
            continue
        coeffs[k] = Fraction(0)
        for j in range(d):
            coeffs[k - d + j] -= c * nf.coeffs[j]
    coeffs = coeffs[:d] + [Fraction(0)] * max(0, d - len(coeffs))
    return tuple(coeffs)


def compare(a, b) -> int:
    """
    Exact comparison: -1, 0 or 1 as a < b, a == b, a > b.

    Raises FieldMismatchError when a and b are irrational elements of different fields.
    """
    a = AlgebraicReal.coerce(a)
    return (a - b).sign()


def field_norm(a: AlgebraicReal) -> Fraction:
    """
    Product of all conjugates of ``a`` over Q.

    Computed as the determinant of the multiplication matrix, which equals the
    resultant of the minimal polynomial with the coordinate polynomial, so a
    rational r in a degree d field has norm r**d.
    """
    if a.field is None:
        raise ValueError("field_norm needs an element of a quadratic or cubic field")
    return _fraction(a.multiplication_matrix().det())


def approximate(a, digits: int) -> str:
    """
    Decimal string of ``a`` rounded half-up to ``digits`` places.

    Irrational values are refined until both ends of the enclosure round to
    the same decimal.
    """
    if digits < 1:
        raise ValueError(f"digits must be positive, got {digits}")
    a = AlgebraicReal.coerce(a)
    scale = 10 ** digits

    def rounded(v: Fraction) -> int:
        return math.floor(v * scale + Fraction(1, 2))

    if a.is_rational:
        n = rounded(a.coords[0])
    else:
        bits = _START_BITS
        while True:
            lo, hi = a.enclosure(bits)
            if rounded(lo) == rounded(hi):
                n = rounded(lo)
                break
            bits *= 2
    sign = "-" if n < 0 else ""
    whole, part = divmod(abs(n), scale)
    return f"{sign}{whole}.{part:0{digits}d}"
