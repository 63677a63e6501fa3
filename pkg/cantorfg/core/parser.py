"""
Text formats read by the command line and the tests.

* numbers: integers, fractions, sqrt(n), cbrt(n), 2*cos(2*pi/7) and rational
  combinations of them, e.g. "(-1+sqrt(5))/2";
* subgroups: "supernatural: 2^inf * 3^2", "lattice: field x^2-5; basis 1, (-1+a)/2";
* odometer bases: "2,3|5" (preperiod | period);
* systems: "odometer:2", "odometer:2,3|5", "denjoy:<theta>", "denjoy2:<theta1>;<theta2>";
* clopen sets: "[0] [1,1]" for odometers, "[0,1)" and "[0 0, 1 0)" for Denjoy systems.
"""
import logging
import re
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import sympy
from sympy import to_number_field
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations
from sympy.polys.polyerrors import IsomorphismFailed

from cantorfg.core.algebra import (
    AlgebraicReal,
    NumberField,
    _fraction,
    cbrt_field,
    heptagonal_field,
    sqrt_field,
)
from cantorfg.core.exceptions import FieldMismatchError, SpecError
from cantorfg.core.lattice import INF, Lattice, RationalRankOne, SupernaturalNumber

logger = logging.getLogger(__name__)

_ALLOWED = re.compile(r"^[0-9a-z_+\-*/^()., ]*$")
_TRANSFORMATIONS = standard_transformations + (convert_xor,)
_LOCALS = {"sqrt": sympy.sqrt, "cbrt": sympy.cbrt, "cos": sympy.cos, "pi": sympy.pi}
_GENERATOR = sympy.Symbol("a")
HEPTAGONAL_COEFFS = (-1, -2, 1, 1)


def parse_expression(text: str, extra: Optional[dict] = None) -> sympy.Expr:
    """Parse ``text`` with sympy, admitting only arithmetic and the functions sqrt, cbrt and cos."""
    cleaned = text.strip().lower()
    if not cleaned:
        raise SpecError("empty expression")
    if not _ALLOWED.match(cleaned):
        raise SpecError(f"unexpected characters in {text!r}")
    names = dict(_LOCALS)
    names.update(extra or {})
    try:
        expr = parse_expr(cleaned, local_dict=names, transformations=_TRANSFORMATIONS, evaluate=True)
    except (SyntaxError, TypeError, ValueError, NameError, AttributeError, sympy.SympifyError) as e:
        raise SpecError(f"cannot parse {text!r}: {e}")
    unknown = expr.free_symbols - set(v for v in names.values() if isinstance(v, sympy.Symbol))
    if unknown:
        raise SpecError(f"unknown names in {text!r}: {', '.join(sorted(str(s) for s in unknown))}")
    functions = {type(f) for f in expr.atoms(sympy.Function)}
    if functions - {sympy.cos}:
        raise SpecError(f"unsupported functions in {text!r}")
    if expr.has(sympy.Float):
        raise SpecError(f"decimals are not exact, write {text!r} as a fraction")
    return expr


def _cubefree(n: int) -> int:
    out = 1
    for p, k in sympy.factorint(n).items():
        out *= p ** (k % 3)
    return out


def _squarefree(n: int) -> int:
    out = 1
    for p, k in sympy.factorint(n).items():
        out *= p ** (k % 2)
    return out


def _detect_field(expr: sympy.Expr) -> Optional[NumberField]:
    """The canonical field generated by the radicals or cosines in ``expr``; None for rationals."""
    cosines = expr.atoms(sympy.cos)
    radicals = [p for p in expr.atoms(sympy.Pow)
                if isinstance(p.exp, sympy.Rational) and not p.exp.is_integer]
    if cosines:
        for c in cosines:
            ratio = sympy.nsimplify(c.args[0] / sympy.pi)
            if not (ratio.is_Rational and ratio.q == 7):
                raise SpecError(f"only cosines of multiples of pi/7 are supported, got {c}")
        if radicals:
            raise FieldMismatchError()
        return heptagonal_field()
    if not radicals:
        return None
    roots = {int(p.exp.q) for p in radicals}
    bases = []
    for p in radicals:
        if not p.base.is_Integer:
            return _fallback_field(expr)
        if p.base <= 0:
            raise SpecError(f"{p} is not real")
        bases.append(int(p.base))
    if roots == {2}:
        parts = {_squarefree(b) for b in bases} - {1}
        if len(parts) != 1:
            raise FieldMismatchError()
        return sqrt_field(parts.pop())
    if roots == {3}:
        parts = {min(_cubefree(b), _cubefree(b * b)) for b in bases} - {1}
        if len(parts) != 1:
            raise FieldMismatchError()
        return cbrt_field(parts.pop())
    return _fallback_field(expr)


def _fallback_field(expr: sympy.Expr) -> NumberField:
    """Field generated by ``expr`` itself; it must be an algebraic integer of degree 2 or 3."""
    poly = sympy.Poly(sympy.minimal_polynomial(expr, sympy.Symbol("x")), sympy.Symbol("x"))
    coeffs = [sympy.Rational(c) for c in reversed(poly.all_coeffs())]
    if poly.degree() not in (2, 3) or coeffs[-1] != 1 or any(not c.is_integer for c in coeffs):
        raise SpecError(f"{expr} is not an algebraic integer of degree 2 or 3")
    return NumberField.from_polynomial([int(c) for c in coeffs], approx=sympy.N(expr, 30),
                                       expression=str(expr))


def generator_expression(nf: NumberField) -> sympy.Expr:
    return parse_expression(nf.expression.replace("**", "^"))


def _in_field(expr: sympy.Expr, nf: NumberField) -> AlgebraicReal:
    try:
        number = to_number_field(expr, generator_expression(nf))
    except IsomorphismFailed:
        raise FieldMismatchError()
    coords = [_fraction(sympy.Rational(c)) for c in reversed(number.coeffs())]
    return nf.element(coords)


def parse_number(text: str, field: Optional[NumberField] = None) -> AlgebraicReal:
    """
    Parse an exact real number.

    With ``field`` the number is expressed in that field (rationals always fit),
    otherwise its field is detected from the radicals it contains.
    """
    expr = parse_expression(text)
    if not expr.is_real:
        raise SpecError(f"{text!r} is not real")
    if expr.is_Rational:
        value = AlgebraicReal.rational(_fraction(expr))
        return value.in_field(field) if field is not None else value
    nf = field if field is not None else _detect_field(expr)
    if nf is None:
        raise SpecError(f"cannot place {text!r} in a number field")
    value = _in_field(expr, nf)
    logger.debug(f"parsed {text!r} as {value!r}")
    return value


def parse_numbers(texts: Sequence[str]) -> List[AlgebraicReal]:
    """Parse several numbers into the field of the first irrational one."""
    values = []
    nf = None
    for text in texts:
        value = parse_number(text, nf)
        if nf is None and value.field is not None and not value.is_rational:
            nf = value.field
            values = [v.in_field(nf) for v in values]
        values.append(value)
    return values


def field_from_polynomial(coeffs: Sequence[int]) -> NumberField:
    """Canonical field for x^2 - d, x^3 - m and the heptagonal cubic; largest real root otherwise."""
    coeffs = tuple(int(c) for c in coeffs)
    if coeffs == HEPTAGONAL_COEFFS:
        return heptagonal_field()
    if len(coeffs) == 3 and coeffs[1] == 0 and coeffs[2] == 1 and -coeffs[0] > 1 and _squarefree(-coeffs[0]) == -coeffs[0]:
        return sqrt_field(-coeffs[0])
    if len(coeffs) == 4 and coeffs[1] == coeffs[2] == 0 and coeffs[3] == 1 and -coeffs[0] > 1 \
            and _cubefree(-coeffs[0]) == -coeffs[0]:
        return cbrt_field(-coeffs[0])
    return NumberField.from_polynomial(coeffs)


def parse_lattice(text: str) -> Lattice:
    """
    "lattice: field x^2-5; basis 1, (-1+a)/2" where ``a`` is the field generator.

    The leading "lattice:", "field" and "basis" words are optional.
    """
    body = re.sub(r"^\s*lattice\s*:", "", text.strip(), flags=re.IGNORECASE)
    if ";" not in body:
        raise SpecError(f"lattice needs 'field ...; basis ...', got {text!r}")
    field_text, basis_text = body.split(";", 1)
    field_text = re.sub(r"^\s*field\s+", "", field_text.strip(), flags=re.IGNORECASE)
    basis_text = re.sub(r"^\s*basis\s+", "", basis_text.strip(), flags=re.IGNORECASE)
    xs = sympy.Symbol("x")
    try:
        poly = sympy.Poly(parse_expression(field_text, {"x": xs}), xs)
    except sympy.PolynomialError as e:
        raise SpecError(f"not a polynomial in x: {field_text!r} ({e})")
    coeffs = [sympy.Rational(c) for c in reversed(poly.all_coeffs())]
    if any(not c.is_integer for c in coeffs):
        raise SpecError(f"{field_text!r} must have integer coefficients")
    nf = field_from_polynomial([int(c) for c in coeffs])
    generators = []
    for item in basis_text.split(","):
        expr = parse_expression(item, {"a": _GENERATOR})
        try:
            coords = sympy.Poly(expr, _GENERATOR, domain=sympy.QQ).all_coeffs()
        except sympy.PolynomialError as e:
            raise SpecError(f"basis element {item!r} is not a polynomial in a ({e})")
        generator = nf.generator()
        value = AlgebraicReal.rational(0, nf)
        for c in coords:
            value = value * generator + _fraction(sympy.Rational(c))
        generators.append(value)
    if not generators:
        raise SpecError("empty lattice basis")
    return Lattice.from_generators(nf, generators)


def parse_supernatural(text: str) -> SupernaturalNumber:
    """'2^inf * 3^2' with composite bases factored ('6^inf' is 2^inf * 3^inf)."""
    body = re.sub(r"^\s*supernatural\s*:", "", text.strip(), flags=re.IGNORECASE).replace(" ", "")
    exponents = {}
    if body in ("", "1"):
        return SupernaturalNumber.of({})
    for factor in body.split("*"):
        match = re.fullmatch(r"(\d+)(?:\^(inf|\d+))?", factor)
        if not match:
            raise SpecError(f"bad supernatural factor {factor!r} in {text!r}")
        base = int(match.group(1))
        power = match.group(2) or "1"
        if base < 1:
            raise SpecError(f"bad supernatural base {base}")
        for p, k in sympy.factorint(base).items():
            step = INF if power == "inf" else k * int(power)
            exponents[p] = exponents.get(p, 0) + step
    return SupernaturalNumber.of(exponents)


def parse_subgroup(text: str):
    """Either a supernatural or a lattice subgroup, chosen by the leading keyword or the ';'."""
    stripped = text.strip()
    if stripped.lower().startswith("supernatural") or ";" not in stripped:
        return RationalRankOne(parse_supernatural(stripped))
    return parse_lattice(stripped)


def parse_base(text: str) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """'2,3|5' -> ((2, 3), (5,)); without '|' the whole list is the period."""
    text = text.strip()
    if "|" in text:
        pre_text, period_text = text.split("|", 1)
    else:
        pre_text, period_text = "", text

    def numbers(part: str) -> Tuple[int, ...]:
        items = [s for s in re.split(r"[,\s]+", part.strip()) if s]
        try:
            return tuple(int(s) for s in items)
        except ValueError:
            raise SpecError(f"odometer base must list integers, got {text!r}")

    return numbers(pre_text), numbers(period_text)


def parse_rationals(text: str) -> List[Fraction]:
    """Comma separated positive rationals such as '9' or '2, 1/3'."""
    out = []
    for item in text.split(","):
        try:
            value = Fraction(item.strip())
        except ValueError:
            raise SpecError(f"not a rational: {item!r}")
        if value <= 0:
            raise SpecError(f"group elements must be positive, got {value}")
        out.append(value)
    return out


def parse_system(text: str):
    """
    'odometer:<base>', 'denjoy:<theta>' or 'denjoy2:<theta1>;<theta2>' to a clopen system.
    """
    from cantorfg.core.denjoy import DenjoySpec, DenjoySystem
    from cantorfg.core.odometer import OdometerSpec, OdometerSystem

    kind, _, rest = text.strip().partition(":")
    kind = kind.strip().lower()
    if kind == "odometer":
        preperiod, period = parse_base(rest)
        return OdometerSystem(OdometerSpec(preperiod, period))
    if kind == "denjoy":
        return DenjoySystem(DenjoySpec((parse_number(rest),)))
    if kind == "denjoy2":
        parts = rest.split(";")
        if len(parts) != 2:
            raise SpecError(f"denjoy2 needs two thetas separated by ';', got {rest!r}")
        return DenjoySystem(DenjoySpec(tuple(parse_numbers(parts))))
    raise SpecError(f"unknown system {text!r}")


def _clopen_entries(items) -> Tuple[int, ...]:
    values = []
    for v in items:
        try:
            values.append(int(v))
        except ValueError:
            raise SpecError(f"bad clopen entry {v!r}")
    return tuple(values)


def parse_clopen(system, text: str):
    """Clopen set of ``system`` from its bracket notation."""
    from cantorfg.core.denjoy import DenjoySystem

    if isinstance(system, DenjoySystem):
        arcs = []
        for body in re.findall(r"\[([^\[\]\)]*)\)", text):
            ends = [e.strip() for e in body.split(",")]
            if len(ends) != 2:
                raise SpecError(f"arc needs two endpoints, got [{body})")
            left, right = (_clopen_entries(e.split()) for e in ends)
            arcs.append((left, right))
        if not arcs:
            raise SpecError(f"no arcs in {text!r}")
        return system.arc_set(arcs)
    words = []
    for body in re.findall(r"\[([^\[\]]*)\]", text):
        words.append(_clopen_entries([v for v in re.split(r"[,\s]+", body.strip()) if v]))
    if not words:
        raise SpecError(f"no cylinders in {text!r}")
    return system.cylinders(words)
