"""
Positive unit groups of quadratic and cubic orders.

* quadratic orders: the least solution of t^2 - D u^2 = ±4 from the continued
  fraction of the order's standard generator;
* complex cubic orders (one real embedding): exhaustive search of units with
  real embedding in (1, B], B doubling from the lower bound given by the
  inequality |disc| < a*eps^3 + b;
* totally real cubic orders: verification of a supplied or searched unit
  system by exact norms and an interval log-regulator.
"""
import itertools
import logging
import math
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import pandas as pd
import sympy
from mpmath import iv, mp

from cantorfg.core.algebra import AlgebraicReal, NumberField, approximate, field_norm, sqrt_field
from cantorfg.core.exceptions import (
    FieldMismatchError,
    InvariantViolation,
    NotADiscriminantError,
    NotFullRankError,
    NotInOrderError,
    UncertifiedError,
    UnitRankError,
)
from cantorfg.core.lattice import Lattice, MultiplicativeGroup, check_ring
from cantorfg.core.schema import OrderDescriptor, PellSolution, UnitSystemReport
from cantorfg.core.utils import Settings

logger = logging.getLogger(__name__)

# brute force cross-check of the continued fraction is run for D up to this value
PELL_CROSS_CHECK_MAX_D = 500
PELL_BRUTE_FORCE_BOUND = 10 ** 4


def squarefree_split(n: int) -> Tuple[int, int]:
    """Write n = f^2 * d with d squarefree; returns (f, d)."""
    f, d = 1, 1
    for p, k in sympy.factorint(n).items():
        f *= p ** (k // 2)
        d *= p ** (k % 2)
    return f, d


def _check_discriminant(D: int):
    if D < 5 or D % 4 not in (0, 1) or math.isqrt(D) ** 2 == D:
        raise NotADiscriminantError(D)


def _continued_fraction_solution(D: int) -> Tuple[int, int, int]:
    """
    Scan the convergents p/q of w = (b + sqrt(D))/2, b = D mod 2, for the first
    (t, u) = (2p - bq, q) with t^2 - D u^2 = ±4.
    """
    b = D % 2
    # w = (P + sqrt(N)) / Q with Q | N - P^2
    P, Q, N = (1, 2, D) if b else (0, 1, D // 4)
    s = math.isqrt(N)
    h1, h2 = 1, 0
    k1, k2 = 0, 1
    seen = {}
    stop = None
    index = 0
    while stop is None or index <= stop:
        a = (P + s) // Q if Q > 0 else -((P + s) // -Q) - 1
        h1, h2 = a * h1 + h2, h1
        k1, k2 = a * k1 + k2, k1
        t, u = 2 * h1 - b * k1, k1
        norm = t * t - D * u * u
        if t > 0 and norm in (4, -4):
            logger.debug(f"D={D}: solution at convergent {index}")
            return t, u, norm
        if index >= 1 and stop is None:
            if (P, Q) in seen:
                stop = index + (index - seen[(P, Q)]) + 1
            else:
                seen[(P, Q)] = index
        P = a * Q - P
        Q = (N - P * P) // Q
        index += 1
    raise InvariantViolation(f"no solution of t^2 - {D}u^2 = ±4 within two periods")


def pell_brute_force(D: int, bound: int = PELL_BRUTE_FORCE_BOUND) -> Optional[Tuple[int, int, int]]:
    """Least (t, u, sign) with u <= bound, trying -4 before +4 for each u."""
    for u in range(1, bound + 1):
        for sign in (-4, 4):
            t2 = D * u * u + sign
            t = math.isqrt(t2)
            if t > 0 and t * t == t2:
                return t, u, sign
    return None


def pell_min_solution(D: int, cross_check: bool = True) -> PellSolution:
    """
    Least solution of t^2 - D u^2 = ±4 and the unit eps0 = (t + u sqrt(D))/2.

    Parameters
    ----------
    D : int
        Discriminant: at least 5, not a square, congruent to 0 or 1 mod 4.
    cross_check : bool
        For D <= 500, confirm by exhaustive search that no solution with a
        smaller u exists (searching at most 10**4 values of u).

    Returns
    -------
    PellSolution
    """
    _check_discriminant(D)
    t, u, sign = _continued_fraction_solution(D)
    if cross_check and D <= PELL_CROSS_CHECK_MAX_D:
        brute = pell_brute_force(D, min(u, PELL_BRUTE_FORCE_BOUND))
        if u <= PELL_BRUTE_FORCE_BOUND and brute != (t, u, sign):
            raise InvariantViolation(f"D={D}: continued fraction gave {(t, u, sign)}, search gave {brute}")
        if u > PELL_BRUTE_FORCE_BOUND and brute is not None:
            raise InvariantViolation(f"D={D}: search found {brute} below the continued fraction solution")
    f, d = squarefree_split(D)
    epsilon0 = sqrt_field(d).element((Fraction(t, 2), Fraction(u * f, 2)))
    if not epsilon0 > 1:
        raise InvariantViolation(f"D={D}: eps0 = {epsilon0} is not > 1")
    return PellSolution(D=D, t=t, u=u, sign=sign, epsilon0=epsilon0)


def valid_discriminants(dmin: int, dmax: int) -> List[int]:
    return [D for D in range(max(dmin, 5), dmax + 1)
            if D % 4 in (0, 1) and math.isqrt(D) ** 2 != D]


def pell_suite(dmax: int = 500, dmin: int = 5, bound: int = PELL_BRUTE_FORCE_BOUND) -> pd.DataFrame:
    """
    Compare the continued fraction solver with exhaustive search for every valid D in [dmin, dmax].

    One row per discriminant; ``agrees`` is True when the search finds the same
    solution, or finds nothing because the solution lies beyond ``bound``.
    """
    rows = []
    for D in valid_discriminants(dmin, dmax):
        solution = pell_min_solution(D, cross_check=False)
        brute = pell_brute_force(D, bound)
        if brute is None:
            agrees = solution.u > bound
        else:
            agrees = brute == (solution.t, solution.u, solution.sign)
        rows.append({
            "D": D,
            "t": solution.t,
            "u": solution.u,
            "sign": solution.sign,
            "brute_t": brute[0] if brute else None,
            "brute_u": brute[1] if brute else None,
            "agrees": agrees,
            "epsilon0": approximate(solution.epsilon0, 12),
        })
        logger.debug(f"D={D}: t={solution.t} u={solution.u} agrees={agrees}")
    return pd.DataFrame(rows, columns=["D", "t", "u", "sign", "brute_t", "brute_u", "agrees", "epsilon0"])


def discriminant(basis: Sequence[AlgebraicReal]) -> int:
    """det(Tr(b_i b_j)) for a Z-basis of an order."""
    n = len(basis)
    matrix = sympy.Matrix(n, n, lambda i, j: sympy.Rational(str((basis[i] * basis[j]).trace())))
    value = matrix.det()
    if not value.is_integer:
        raise InvariantViolation(f"trace form determinant {value} is not an integer")
    return int(value)


def order_from_lattice(lattice: Lattice) -> OrderDescriptor:
    if lattice.field is None or not lattice.is_full_rank:
        raise NotFullRankError()
    check_ring(lattice)
    return OrderDescriptor(lattice.field, lattice.basis, discriminant(lattice.basis))


def order_lattice(order: OrderDescriptor) -> Lattice:
    return Lattice.from_generators(order.field, order.basis)


def _unit_rank(order: OrderDescriptor) -> int:
    return 2 if order.is_totally_real_cubic else 1


def _check_unit(order: OrderDescriptor, unit: AlgebraicReal):
    lattice = order_lattice(order)
    if abs(field_norm(unit)) != 1:
        raise InvariantViolation(f"{unit} has norm {field_norm(unit)}")
    if lattice.scaled(unit) != lattice:
        raise InvariantViolation(f"{unit} * O != O")


def _sqrt_in_field(nf: NumberField, d: int) -> AlgebraicReal:
    """The positive square root of d inside a quadratic field."""
    c0, c1 = nf.coeffs[0], nf.coeffs[1]
    g, d2 = squarefree_split(c1 * c1 - 4 * c0)
    if d2 != d:
        raise InvariantViolation(f"sqrt({d}) is not in {nf}")
    root = (2 * nf.generator() + c1) / g
    return root if root > 0 else -root


def quadratic_fundamental_unit(order: OrderDescriptor) -> Tuple[AlgebraicReal, PellSolution]:
    """Generator > 1 of the positive units of a quadratic order, via the Pell equation."""
    if order.degree != 2:
        raise UnitRankError(f"order of degree {order.degree} is not quadratic")
    pell = pell_min_solution(order.discriminant)
    f, d = squarefree_split(order.discriminant)
    epsilon = Fraction(pell.t, 2) + Fraction(pell.u * f, 2) * _sqrt_in_field(order.field, d)
    _check_unit(order, epsilon)
    return epsilon, pell


def _mp_value(element: AlgebraicReal, point):
    acc = mp.mpf(0)
    for c in reversed(element.coords):
        acc = acc * point + mp.mpf(c.numerator) / c.denominator
    return acc


def _mp_roots(nf: NumberField):
    """Real roots (ascending) and complex roots with positive imaginary part, at the current precision."""
    roots = mp.polyroots([int(c) for c in reversed(nf.coeffs)], maxsteps=200, extraprec=2 * mp.prec)
    tiny = mp.mpf(10) ** (-(mp.dps // 2))
    real = sorted(mp.re(r) for r in roots if abs(mp.im(r)) < tiny)
    complex_ = [mp.mpc(r) for r in roots if mp.im(r) > tiny]
    return real, complex_


def fundamental_unit_complex_cubic(order: OrderDescriptor, settings: Optional[Settings] = None) -> AlgebraicReal:
    """
    The unit eps > 1 generating the positive units of a cubic order with one real embedding.

    Every unit x > 1 has |tau(x)|^2 = 1/x < 1 at the complex embedding tau, so
    units with real embedding in (1, B] lie in a region whose lattice points
    are enumerated exhaustively. B starts at the lower bound from
    |disc| < a*eps^3 + b and doubles up to ``settings.search_bound``; the least
    unit found is the fundamental one.
    """
    settings = settings or Settings.from_env()
    if not order.is_complex_cubic:
        raise UnitRankError()
    if order.basis[0] != 1:
        raise InvariantViolation("order basis must start with 1")
    d = abs(order.discriminant)
    start = max(2, math.ceil(max(0.0, (d - settings.artin_b) / settings.artin_a) ** (1 / 3)))
    B = start
    while B <= settings.search_bound:
        units = _complex_cubic_units_up_to(order, B)
        if units:
            epsilon = min(units)
            _check_unit(order, epsilon)
            if not settings.artin_a * epsilon ** 3 + settings.artin_b > d:
                raise InvariantViolation(f"{epsilon} violates |disc| < a*eps^3 + b")
            logger.info(f"fundamental unit {approximate(epsilon, 6)} certified with bound {B}")
            return epsilon
        logger.debug(f"no unit with real embedding in (1, {B}]")
        B *= 2
    raise UncertifiedError(f"uncertified: no unit below search bound {settings.search_bound}")


def _complex_cubic_units_up_to(order: OrderDescriptor, B: int) -> List[AlgebraicReal]:
    _, b1, b2 = order.basis
    with mp.workdps(40):
        real, complex_ = _mp_roots(order.field)
        r, z = real[0], complex_[0]
        sig = [_mp_value(b, r) for b in (b1, b2)]
        tau = [_mp_value(b, z) for b in (b1, b2)]
        # w1 = sigma(x) - Re tau(x) in (0, B+1); w2 = Im tau(x) in (-1, 1); both free of c0
        a00, a01 = sig[0] - mp.re(tau[0]), sig[1] - mp.re(tau[1])
        a10, a11 = mp.im(tau[0]), mp.im(tau[1])
        det = a00 * a11 - a01 * a10
        corners = [((a11 * w1 - a01 * w2) / det, (-a10 * w1 + a00 * w2) / det)
                   for w1 in (0, B + 1) for w2 in (-1, 1)]
        c1_lo = int(mp.floor(min(c[0] for c in corners))) - 1
        c1_hi = int(mp.ceil(max(c[0] for c in corners))) + 1
        c2_lo = int(mp.floor(min(c[1] for c in corners))) - 1
        c2_hi = int(mp.ceil(max(c[1] for c in corners))) + 1
        candidates = []
        for c1 in range(c1_lo, c1_hi + 1):
            for c2 in range(c2_lo, c2_hi + 1):
                w1 = a00 * c1 + a01 * c2
                w2 = a10 * c1 + a11 * c2
                if w1 < -1 or w1 > B + 2 or abs(w2) > 2:
                    continue
                s = c1 * sig[0] + c2 * sig[1]
                rt = c1 * mp.re(tau[0]) + c2 * mp.re(tau[1])
                lo = int(mp.floor(max(1 - s, -1 - rt))) - 1
                hi = int(mp.ceil(min(B - s, 1 - rt))) + 1
                for c0 in range(lo, hi + 1):
                    value = c0 + s
                    modulus = abs(c0 + c1 * tau[0] + c2 * tau[1]) ** 2
                    if value <= 0.5 or abs(value * modulus - 1) > 1e-6:
                        continue
                    candidates.append((c0, c1, c2))
    units = []
    for c0, c1, c2 in candidates:
        x = c0 + c1 * b1 + c2 * b2
        if x > 1 and x <= B and abs(field_norm(x)) == 1:
            units.append(x)
    return units


def _iv_rational(value: Fraction):
    return iv.mpf(value.numerator) / value.denominator


def _iv_real_roots(nf: NumberField, dps: int):
    eps = sympy.Rational(1, 10 ** dps)
    intervals = sorted(nf.poly.intervals(eps=eps), key=lambda item: item[0][0])
    roots = []
    for (a, b), _ in intervals:
        lo = _iv_rational(Fraction(int(a.p), int(a.q)))
        hi = _iv_rational(Fraction(int(b.p), int(b.q)))
        roots.append(iv.mpf([lo, hi]))
    return roots


def _iv_value(element: AlgebraicReal, point):
    acc = iv.mpf(0)
    for c in reversed(element.coords):
        acc = acc * point + _iv_rational(c)
    return acc


def _log_regulator(nf: NumberField, units: Sequence[AlgebraicReal], width: float) -> Tuple[bool, float]:
    """
    Decide whether the log-embedding determinant of ``units`` is nonzero.

    Returns (independent, lower bound of |det|). Precision doubles until the
    determinant interval excludes 0 or is narrower than ``width``.
    """
    saved = iv.prec
    try:
        for dps in (20, 40, 80, 160, 320):
            iv.dps = dps + 10
            roots = _iv_real_roots(nf, dps)
            chosen = [roots[nf.root_index]] if len(units) == 1 else roots[:len(units)]
            logs = [[iv.ln(abs(_iv_value(u, r))) for r in chosen] for u in units]
            if len(units) == 1:
                det = logs[0][0]
            else:
                det = logs[0][0] * logs[1][1] - logs[0][1] * logs[1][0]
            if det.a > 0 or det.b < 0:
                return True, float(abs(det).a)
            if float(det.delta) < width:
                return False, 0.0
    finally:
        iv.prec = saved
    return False, 0.0


def verify_unit_system(order: OrderDescriptor, candidates: Sequence, settings: Optional[Settings] = None) -> UnitSystemReport:
    """
    Exact norm check and interval log-regulator independence test for candidate units.

    Fundamentality is never certified here.
    """
    settings = settings or Settings.from_env()
    lattice = order_lattice(order)
    candidates = [AlgebraicReal.coerce(c) for c in candidates]
    offenders = [c for c in candidates if not lattice.contains(c)]
    if offenders:
        raise NotInOrderError(offenders)
    candidates = [c.in_field(order.field) for c in candidates]
    norms = [field_norm(c) for c in candidates]
    each_is_unit = all(abs(n) == 1 for n in norms)
    independent, lower = False, 0.0
    if 0 < len(candidates) <= _unit_rank(order) and not any(c.is_zero() for c in candidates):
        independent, lower = _log_regulator(order.field, candidates, settings.independence_width)
    lower = math.floor(lower * 10 ** 12) / 10 ** 12
    return UnitSystemReport(
        each_is_unit=each_is_unit,
        independent=independent,
        regulator_lower_bound=f"{lower:.12f}",
        norms=[str(n) for n in norms],
    )


def normalize_unit(unit: AlgebraicReal) -> AlgebraicReal:
    """Representative > 1 of {±u, ±1/u}."""
    if unit < 0:
        unit = -unit
    if unit < 1:
        unit = unit.inverse()
    return unit


def _mp_logs(element: AlgebraicReal, points) -> List:
    return [mp.log(abs(_mp_value(element, p))) for p in points]


def search_unit_system(order: OrderDescriptor, settings: Optional[Settings] = None) -> Tuple[AlgebraicReal, AlgebraicReal]:
    """
    Units of a totally real cubic order with basis coordinates in [-box, box];
    returns the independent pair with the least |log-regulator|.
    """
    settings = settings or Settings.from_env()
    if not order.is_totally_real_cubic:
        raise UnitRankError("unit search is for totally real cubic orders")
    box = settings.unit_box
    found = []
    for coords in itertools.product(range(-box, box + 1), repeat=3):
        if not any(coords):
            continue
        x = sum((c * b for c, b in zip(coords, order.basis)), AlgebraicReal.rational(0, order.field))
        if x.is_rational or abs(field_norm(x)) != 1:
            continue
        u = normalize_unit(x)
        if u not in found:
            found.append(u)
    logger.debug(f"unit search with box {box} found {len(found)} units")
    with mp.workdps(30):
        real, _ = _mp_roots(order.field)
        logs = [_mp_logs(u, real[:2]) for u in found]
        best = None
        for i, j in itertools.combinations(range(len(found)), 2):
            det = abs(logs[i][0] * logs[j][1] - logs[i][1] * logs[j][0])
            if det < 1e-8:
                continue
            if best is None or det < best[0] - 1e-12:
                best = (det, i, j)
    if best is None:
        raise UncertifiedError(f"uncertified: no independent unit pair with coefficients up to {box}")
    return found[best[1]], found[best[2]]


def express_in_units(value: AlgebraicReal, generators: Sequence[AlgebraicReal], bound: int = 20) -> Optional[Tuple[int, ...]]:
    """
    Exponents e with value = prod g_i^e_i, found numerically and confirmed exactly.

    Exponents are limited to ``bound`` in absolute value for two generators.
    """
    nf = generators[0].field
    value = AlgebraicReal.coerce(value)
    try:
        value = value.in_field(nf) if nf is not None else value
    except FieldMismatchError:
        return None
    if not value > 0:
        return None
    with mp.workdps(40):
        if nf is None:
            points = [mp.mpf(1)]
            logs_g = [[mp.log(float(g.rational_value))] for g in generators]
            log_v = [mp.log(float(value.rational_value))]
        elif len(generators) == 1:
            lo, hi = nf.interval(128)
            points = [mp.mpf(lo.numerator) / lo.denominator]
            logs_g = [_mp_logs(generators[0], points)]
            log_v = _mp_logs(value, points)
        else:
            real, _ = _mp_roots(nf)
            points = real[:2]
            logs_g = [_mp_logs(g, points) for g in generators]
            log_v = _mp_logs(value, points)
        if len(generators) == 1:
            exponents = (int(mp.nint(log_v[0] / logs_g[0][0])),)
        else:
            (a, b), (c, d) = logs_g
            det = a * d - b * c
            e1 = (log_v[0] * d - log_v[1] * c) / det
            e2 = (a * log_v[1] - b * log_v[0]) / det
            exponents = (int(mp.nint(e1)), int(mp.nint(e2)))
            if any(abs(e) > bound for e in exponents):
                return None
    product = AlgebraicReal.rational(1, nf)
    for g, e in zip(generators, exponents):
        product = product * g ** e
    return exponents if product == value else None


def positive_unit_group(order: OrderDescriptor, settings: Optional[Settings] = None,
                        candidates: Optional[Sequence[AlgebraicReal]] = None) -> MultiplicativeGroup:
    """The positive unit group of a quadratic or cubic order."""
    settings = settings or Settings.from_env()
    if order.degree == 2:
        epsilon, _ = quadratic_fundamental_unit(order)
        return MultiplicativeGroup.cyclic(epsilon)
    if order.is_complex_cubic:
        return MultiplicativeGroup.cyclic(fundamental_unit_complex_cubic(order, settings))
    pair = list(candidates) if candidates else list(search_unit_system(order, settings))
    checked = verify_unit_system(order, pair, settings)
    if not (checked.each_is_unit and checked.independent):
        raise UncertifiedError(f"uncertified: {', '.join(str(u) for u in pair)} is not an independent unit system")
    logger.warning(f"totally real cubic order: {checked.note}")
    generators = tuple(normalize_unit(u.in_field(order.field)) for u in pair)
    return MultiplicativeGroup("rank_two", generators, certified=False, note=checked.note)
