"""
Constructions on uniquely ergodic Cantor minimal systems, carried out in the clopen algebra.

A system is anything implementing ``ClopenSystem``: the clopen sets it hands
out support ``|``, ``&``, ``-``, ``is_empty()`` and exact equality, and the
group acts on them exactly. On top of that this module builds

* finite covers X = U_1 ∪ ... ∪ U_n by translates of a clopen U,
* the restriction R|_U with its measure transport checks,
* the amplified system on X × {1..n},
* the embedding F of X × N into U × N and the stagewise homeomorphism
  Φ : U × N × N -> X × N × N, materialized level by level,
* scaling automorphisms of X × N and their witnesses.

Points never appear: every map is a ``PiecewiseMap`` whose rules translate a
clopen piece by a group element and move it between levels.
"""
import itertools
import logging
import math
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from cantorfg.core.algebra import AlgebraicReal
from cantorfg.core.exceptions import (
    CoverBoundExceeded,
    InvariantViolation,
    NotOrbitEquivalenceError,
    SpecError,
)
from cantorfg.core.lattice import Lattice, im_plus
from cantorfg.core.schema import AmplifiedInvariant, CoverResult, RestrictionReport, ScalingCheck
from cantorfg.core.utils import Settings

logger = logging.getLogger(__name__)

Element = Tuple[int, ...]
Level = Union[int, Tuple[int, int]]


def exact_equal(a, b) -> bool:
    """Equality of exact measures (Fractions or AlgebraicReals)."""
    return (AlgebraicReal.coerce(a) - b).is_zero()


def negate(g: Element) -> Element:
    return tuple(-c for c in g)


def add(g: Element, h: Element) -> Element:
    return tuple(a + b for a, b in zip(g, h))


def enumerate_elements(rank: int) -> Iterator[Element]:
    """
    Z: 0, 1, -1, 2, -2, ...; Z^r: max-norm shells, lexicographic inside a shell.
    """
    if rank == 1:
        yield (0,)
        for k in itertools.count(1):
            yield (k,)
            yield (-k,)
    for r in itertools.count(0):
        for g in itertools.product(range(-r, r + 1), repeat=rank):
            if max(abs(c) for c in g) == r:
                yield g


def psi(k: int, i: int, n: int) -> int:
    """Bijection {1..n} × N -> N, (k, i) -> (i - 1) n + k."""
    return (i - 1) * n + k


def psi_inverse(j: int, n: int) -> Tuple[int, int]:
    return (j - 1) % n + 1, (j - 1) // n + 1


def cantor_pair(i: int, s: int) -> int:
    """Bijection N × N -> N listing anti-diagonals: (1,1)->1, (1,2)->2, (2,1)->3, ..."""
    return (i + s - 2) * (i + s - 1) // 2 + i


def cantor_unpair(j: int) -> Tuple[int, int]:
    t = (math.isqrt(8 * j + 1) - 1) // 2
    if t * (t + 1) // 2 >= j:
        t -= 1
    i = j - t * (t + 1) // 2
    return i, t + 2 - i


class ClopenSystem(ABC):
    """A uniquely ergodic Cantor minimal Z^rank-system presented through its clopen algebra."""

    rank: int = 1

    @abstractmethod
    def full(self):
        """The whole space."""

    @abstractmethod
    def empty(self):
        pass

    @abstractmethod
    def act(self, S, g: Element):
        """Exact image of S under the group element g."""

    @abstractmethod
    def measure(self, S):
        """Exact invariant measure of S."""

    @abstractmethod
    def atoms(self, depth: int) -> List[Any]:
        """The partition of the space at a refinement depth."""

    @abstractmethod
    def value_group(self):
        pass

    @abstractmethod
    def describe(self) -> str:
        pass

    def fundamental_group(self, settings: Optional[Settings] = None):
        return im_plus(self.value_group(), settings)

    def elements(self) -> Iterator[Element]:
        return enumerate_elements(self.rank)

    @property
    def identity(self) -> Element:
        return (0,) * self.rank

    def total_measure(self):
        return self.measure(self.full())

    def union(self, sets):
        out = self.empty()
        for S in sets:
            out = out | S
        return out


@dataclass(frozen=True)
class Rule:
    """(x, source_level) -> (g·x, target_level) for x in ``source``."""
    source: Any
    source_level: Level
    element: Element
    target_level: Level

    def to_dict(self) -> Dict[str, Any]:
        return {"source": self.source.describe(), "source_level": _level_json(self.source_level),
                "element": list(self.element), "target_level": _level_json(self.target_level)}


def _level_json(level: Level):
    return list(level) if isinstance(level, tuple) else level


@dataclass
class PiecewiseMap:
    """Finite list of translation rules between levelled copies of a system."""
    system: ClopenSystem
    rules: List[Rule]
    targets: List[Any] = field(init=False, repr=False)

    def __post_init__(self):
        self.targets = [self.system.act(r.source, r.element) for r in self.rules]

    def image(self, pieces: Dict[Level, Any]) -> Dict[Level, Any]:
        out: Dict[Level, Any] = {}
        for rule in self.rules:
            S = pieces.get(rule.source_level)
            if S is None:
                continue
            part = S & rule.source
            if part.is_empty():
                continue
            moved = self.system.act(part, rule.element)
            out[rule.target_level] = out[rule.target_level] | moved if rule.target_level in out else moved
        return out

    def domain(self) -> Dict[Level, Any]:
        out: Dict[Level, Any] = {}
        for rule in self.rules:
            out[rule.source_level] = out.get(rule.source_level, self.system.empty()) | rule.source
        return out

    def range(self) -> Dict[Level, Any]:
        out: Dict[Level, Any] = {}
        for rule, target in zip(self.rules, self.targets):
            out[rule.target_level] = out.get(rule.target_level, self.system.empty()) | target
        return out

    def inverse(self) -> "PiecewiseMap":
        return PiecewiseMap(self.system, [Rule(t, r.target_level, negate(r.element), r.source_level)
                                          for r, t in zip(self.rules, self.targets)])

    def compose(self, first: "PiecewiseMap") -> "PiecewiseMap":
        """self ∘ first."""
        by_level: Dict[Level, List[Rule]] = {}
        for rule in self.rules:
            by_level.setdefault(rule.source_level, []).append(rule)
        rules = []
        for a, target in zip(first.rules, first.targets):
            for b in by_level.get(a.target_level, []):
                piece = target & b.source
                if piece.is_empty():
                    continue
                rules.append(Rule(self.system.act(piece, negate(a.element)), a.source_level,
                                  add(a.element, b.element), b.target_level))
        return PiecewiseMap(self.system, rules)

    def verify(self) -> "PiecewiseMap":
        """Sources disjoint, targets disjoint and rule-wise measure balance; raises InvariantViolation."""
        for rule, target in zip(self.rules, self.targets):
            if len(rule.element) != self.system.rank or not all(isinstance(c, int) for c in rule.element):
                raise InvariantViolation(f"rule element {rule.element} is not a group element")
            if not exact_equal(self.system.measure(rule.source), self.system.measure(target)):
                raise InvariantViolation(f"rule {rule.to_dict()} does not preserve measure")
        _check_disjoint([(r.source_level, r.source) for r in self.rules], "sources")
        _check_disjoint([(r.target_level, t) for r, t in zip(self.rules, self.targets)], "targets")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {"rules": [r.to_dict() for r in self.rules]}


def _check_disjoint(pieces: Sequence[Tuple[Level, Any]], what: str):
    by_level: Dict[Level, List[Any]] = {}
    for level, S in pieces:
        by_level.setdefault(level, []).append(S)
    for level, sets in by_level.items():
        for a, b in itertools.combinations(sets, 2):
            if not (a & b).is_empty():
                raise InvariantViolation(f"{what} overlap at level {level}")


def minimal_cover(system: ClopenSystem, U, settings: Optional[Settings] = None) -> CoverResult:
    """
    First prefix g_1, ..., g_n of the system's element order with X = ∪ g_k U,
    together with the partition U_k = g_k U minus the earlier translates.

    Raises
    ------
    CoverBoundExceeded
        When more than ``settings.search_bound`` elements are needed.
    """
    settings = settings or Settings.from_env()
    if U.is_empty():
        raise SpecError("cannot cover with an empty clopen set")
    full = system.full()
    covered = system.empty()
    elements, pieces = [], []
    for count, g in enumerate(system.elements()):
        if count >= settings.search_bound:
            raise CoverBoundExceeded(settings.search_bound)
        moved = system.act(U, g)
        elements.append(g)
        pieces.append(moved - covered)
        covered = covered | moved
        if covered == full:
            break
    _check_disjoint([(1, p) for p in pieces], "cover pieces")
    if system.union(pieces) != full:
        raise InvariantViolation("cover pieces do not exhaust the space")
    logger.info(f"{system.describe()}: {U.describe()} covers with {len(elements)} translates")
    return CoverResult(elements, pieces)


def first_return(system: ClopenSystem, U, settings: Optional[Settings] = None) -> PiecewiseMap:
    """
    First-return map of a Z-system to U: pieces of U with their return times.

    The return times satisfy sum mu(piece) * time = mu(X).
    """
    settings = settings or Settings.from_env()
    if system.rank != 1:
        raise SpecError("first return is defined for Z-systems")
    if U.is_empty():
        raise SpecError("first return to an empty set")
    remaining = U
    rules = []
    m = 0
    while not remaining.is_empty():
        m += 1
        if m > settings.search_bound:
            raise CoverBoundExceeded(settings.search_bound)
        returning = remaining & system.act(U, (-m,))
        if not returning.is_empty():
            rules.append(Rule(returning, 1, (m,), 1))
            remaining = remaining - returning
    mass = sum((system.measure(r.source) * r.element[0] for r in rules), Fraction(0))
    if not exact_equal(mass, system.total_measure()):
        raise InvariantViolation(f"return times give mass {mass}, expected {system.total_measure()}")
    induced = PiecewiseMap(system, rules).verify()
    if system.union(induced.targets) != U:
        raise InvariantViolation("first return map is not onto U")
    logger.debug(f"first return to {U.describe()}: times {[r.element[0] for r in rules]}")
    return induced


def measure_invariance(system: ClopenSystem, depth: int, moves: int = 25) -> int:
    """mu(gV) = mu(V) for the atoms V of ``depth`` and the first ``moves`` group elements; returns the count."""
    checks = 0
    elements = list(itertools.islice(system.elements(), moves))
    atoms = system.atoms(depth)
    total = sum((system.measure(V) for V in atoms), Fraction(0))
    if not exact_equal(total, system.total_measure()):
        raise InvariantViolation(f"atoms of depth {depth} have total measure {total}")
    for V in atoms:
        mass = system.measure(V)
        for g in elements:
            if not exact_equal(system.measure(system.act(V, g)), mass):
                raise InvariantViolation(f"mu changes under {g} on {V.describe()}")
            checks += 1
    logger.info(f"{system.describe()}: {checks} measure invariance checks at depth {depth}")
    return checks


def _span(system: ClopenSystem, values) -> Lattice:
    nf = getattr(system.value_group(), "field", None)
    return Lattice.from_generators(nf, [AlgebraicReal.coerce(v) for v in values])


def restrict(system: ClopenSystem, U, depth: int, settings: Optional[Settings] = None,
             chain_samples: int = 20, seed: int = 0) -> RestrictionReport:
    """
    The restriction R|_U with exact transport checks on the atoms of ``depth``.

    * every atom V satisfies mu(V) = sum_k mu(g_k^-1 (V ∩ U_k)) with g_k^-1 (V ∩ U_k) ⊆ U;
    * for sampled g with |g| <= 5, mu(gV) is rebuilt from the pieces
      V ∩ U_k ∩ g^-1 U_j, each carried inside U by g_j^-1 g g_k;
    * atoms inside U generate the same group as all atoms of the depth.

    Any failing check raises InvariantViolation.
    """
    cover = minimal_cover(system, U, settings)
    tests = system.atoms(depth)
    for V in tests:
        if not ((V & U).is_empty() or (V - U).is_empty()):
            raise SpecError(f"depth {depth} does not resolve {U.describe()}")
    transport = 0
    for V in tests:
        total = Fraction(0)
        for g, piece in zip(cover.elements, cover.pieces):
            pulled = system.act(V & piece, negate(g))
            if not (pulled - U).is_empty():
                raise InvariantViolation(f"g^-1 (V ∩ U_k) leaves U for g = {g}")
            total = total + system.measure(pulled)
        if not exact_equal(total, system.measure(V)):
            raise InvariantViolation(f"transport of {V.describe()} gives {total}")
        transport += 1

    rng = random.Random(seed)
    for V in rng.sample(tests, min(chain_samples, len(tests))):
        g = tuple(rng.randint(-5, 5) for _ in range(system.rank))
        expected = system.measure(system.act(V, g))
        total = Fraction(0)
        for gk, Uk in zip(cover.elements, cover.pieces):
            for gj, Uj in zip(cover.elements, cover.pieces):
                piece = V & Uk & system.act(Uj, negate(g))
                if piece.is_empty():
                    continue
                start = system.act(piece, negate(gk))
                end = system.act(start, add(add(gk, g), negate(gj)))
                if not ((start - U).is_empty() and (end - U).is_empty()):
                    raise InvariantViolation("h pieces leave U")
                if not exact_equal(system.measure(start), system.measure(end)):
                    raise InvariantViolation("h pieces change measure")
                total = total + system.measure(end)
        if not (exact_equal(total, expected) and exact_equal(expected, system.measure(V))):
            raise InvariantViolation(f"measure chain fails for {V.describe()} and g = {g}")
        transport += 1

    inside = _span(system, [system.measure(W) for W in tests if (W - U).is_empty()])
    everything = _span(system, [system.measure(W) for W in tests])
    if inside != everything:
        raise InvariantViolation(f"atoms inside U span {inside.describe()}, all atoms {everything.describe()}")
    returned = first_return(system, U, settings) if system.rank == 1 else None
    logger.info(f"restriction to {U.describe()} passed {transport} transport checks at depth {depth}")
    return RestrictionReport(cover=cover, test_sets=len(tests), transport_checks=transport,
                             value_group_depth=depth, value_group=everything, first_return=returned)


def amplify_invariant(system: ClopenSystem, n: int) -> AmplifiedInvariant:
    """Value group of R^n with its distinguished class n·1."""
    if n < 1:
        raise SpecError(f"amplification needs n >= 1, got {n}")
    return AmplifiedInvariant(system.value_group(), n)


@dataclass(frozen=True)
class LeveledClopen:
    """A clopen set of X × {1..n}: ``parts[r - 1]`` is its slice at level r."""
    parts: Tuple[Any, ...]

    def level(self, r: int):
        return self.parts[r - 1]

    def __or__(self, other):
        return LeveledClopen(tuple(a | b for a, b in zip(self.parts, other.parts)))

    def __and__(self, other):
        return LeveledClopen(tuple(a & b for a, b in zip(self.parts, other.parts)))

    def __sub__(self, other):
        return LeveledClopen(tuple(a - b for a, b in zip(self.parts, other.parts)))

    def is_empty(self) -> bool:
        return all(p.is_empty() for p in self.parts)

    def describe(self) -> str:
        return " ".join(f"{r}:{p.describe()}" for r, p in enumerate(self.parts, 1) if not p.is_empty()) or "{}"


class AmplifiedSystem(ClopenSystem):
    """
    X × {1..n} with the tower map (x, r) -> (x, r + 1), (x, n) -> (φx, 1).

    Its orbits are those of R^n. The measure is mu × counting measure, so the
    whole space has measure n.
    """

    def __init__(self, base: ClopenSystem, n: int):
        if base.rank != 1:
            raise SpecError("amplification is implemented for Z-systems")
        if n < 1:
            raise SpecError(f"amplification needs n >= 1, got {n}")
        self.base = base
        self.n = n
        self.rank = 1

    def full(self):
        return LeveledClopen((self.base.full(),) * self.n)

    def empty(self):
        return LeveledClopen((self.base.empty(),) * self.n)

    def at(self, r: int, S) -> LeveledClopen:
        parts = [self.base.empty()] * self.n
        parts[r - 1] = S
        return LeveledClopen(tuple(parts))

    def act(self, S: LeveledClopen, g: Element) -> LeveledClopen:
        parts = [self.base.empty()] * self.n
        for r, part in enumerate(S.parts):
            if part.is_empty():
                continue
            q, target = divmod(r + g[0], self.n)
            parts[target] = parts[target] | self.base.act(part, (q,))
        return LeveledClopen(tuple(parts))

    def measure(self, S: LeveledClopen):
        return sum((self.base.measure(p) for p in S.parts), Fraction(0))

    def atoms(self, depth: int) -> List[LeveledClopen]:
        return [self.at(r, a) for r in range(1, self.n + 1) for a in self.base.atoms(depth)]

    def value_group(self):
        return self.base.value_group()

    def fundamental_group(self, settings: Optional[Settings] = None):
        return self.base.fundamental_group(settings)

    def describe(self) -> str:
        return f"{self.base.describe()} x {self.n}"


def cover_embedding(system: ClopenSystem, U, levels: int, settings: Optional[Settings] = None,
                      cover: Optional[CoverResult] = None) -> PiecewiseMap:
    """
    The embedding F : X × N -> U × N, (x, i) -> (g_k^-1 x, psi(k, i)) for x in U_k,
    materialized on source levels 1..levels.
    """
    if levels < 1:
        raise SpecError(f"level bound must be >= 1, got {levels}")
    cover = cover or minimal_cover(system, U, settings)
    n = len(cover.elements)
    rules = [Rule(piece, i, negate(g), psi(k, i, n))
             for i in range(1, levels + 1)
             for k, (g, piece) in enumerate(zip(cover.elements, cover.pieces), 1)
             if not piece.is_empty()]
    embedding = PiecewiseMap(system, rules).verify()
    for target in embedding.targets:
        if not (target - U).is_empty():
            raise InvariantViolation("F leaves U × N")
    for i in range(1, levels + 1):
        sources = system.union(r.source for r in rules if r.source_level == i)
        if sources != system.full():
            raise InvariantViolation(f"F is not defined on all of X × {{{i}}}")
    return embedding


class BrownConstruction:
    """
    Stagewise homeomorphism Φ : U × N × N -> X × N × N.

    With F from ``cover_embedding`` and E_0 empty,
    E_s = F(((X - U) × N) ∪ E_{s-1}), and on stage s + 1 the points of E_s are
    pulled back through F^-1 to stage s while the rest of U stays put. Levels
    are pairs (i, s); ``E(s, j)`` is the slice of E_s at level j, computed on
    demand, so only finitely many slices are ever built for a bounded level.
    """

    def __init__(self, system: ClopenSystem, U, settings: Optional[Settings] = None,
                 cover: Optional[CoverResult] = None):
        self.system = system
        self.U = U
        self.cover = cover or minimal_cover(system, U, settings)
        self.n = len(self.cover.elements)
        self.outside = system.full() - U
        self._E: Dict[Tuple[int, int], Any] = {}

    def E(self, s: int, j: int):
        if s <= 0:
            return self.system.empty()
        key = (s, j)
        if key not in self._E:
            k, i = psi_inverse(j, self.n)
            g, piece = self.cover.elements[k - 1], self.cover.pieces[k - 1]
            self._E[key] = self.system.act(piece & (self.outside | self.E(s - 1, i)), negate(g))
        return self._E[key]

    def rules_from(self, i: int, s: int) -> List[Rule]:
        """Rules whose sources partition U at level (i, s)."""
        previous = self.E(s - 1, i)
        rules = []
        stay = self.U - previous
        if not stay.is_empty():
            rules.append(Rule(stay, (i, s), self.system.identity, (i, s)))
        if s >= 2 and not previous.is_empty():
            k, i_prev = psi_inverse(i, self.n)
            rules.append(Rule(previous, (i, s), self.cover.elements[k - 1], (i_prev, s - 1)))
        return rules

    def rules_into(self, i: int, m: int) -> List[Rule]:
        """Rules whose targets partition X at level (i, m)."""
        rules = []
        stay = self.U - self.E(m - 1, i)
        if not stay.is_empty():
            rules.append(Rule(stay, (i, m), self.system.identity, (i, m)))
        for k, g in enumerate(self.cover.elements, 1):
            j = psi(k, i, self.n)
            piece = self.E(m, j)
            if not piece.is_empty():
                rules.append(Rule(piece, (j, m + 1), g, (i, m)))
        return rules

    def materialize(self, levels: int) -> PiecewiseMap:
        """Φ on every target level (i, m) with i, m <= levels, verified."""
        if levels < 1:
            raise SpecError(f"level bound must be >= 1, got {levels}")
        rules = [rule for i in range(1, levels + 1) for m in range(1, levels + 1)
                 for rule in self.rules_into(i, m)]
        phi = PiecewiseMap(self.system, rules).verify()
        full = self.system.full()
        total = self.system.total_measure()
        for level, covered in phi.range().items():
            if covered != full:
                raise InvariantViolation(f"Φ misses part of X at level {level}")
            mass = sum((self.system.measure(r.source) for r in rules if r.target_level == level), Fraction(0))
            if not exact_equal(mass, total):
                raise InvariantViolation(f"measure imbalance at level {level}")
        for rule in rules:
            if not (rule.source - self.U).is_empty():
                raise InvariantViolation("Φ is defined outside U × N")
        first = [r for r in rules if r.target_level == (1, 1)]
        if len(first) != 1 or first[0].element != self.system.identity or first[0].source != self.U:
            raise InvariantViolation("Φ does not fix U × {1}")
        round_trip = phi.compose(phi.inverse())
        for rule, target in zip(round_trip.rules, round_trip.targets):
            if rule.element != self.system.identity or rule.source_level != rule.target_level:
                raise InvariantViolation("Φ ∘ Φ^-1 is not the identity")
        if round_trip.domain() != phi.range():
            raise InvariantViolation("Φ ∘ Φ^-1 does not cover the range of Φ")
        logger.info(f"Φ verified on {len(rules)} rules up to level {levels}")
        return phi

    def stages(self, levels: int) -> Dict[Tuple[int, int], Any]:
        """E_s|_j for s, j <= levels."""
        return {(s, j): self.E(s, j) for s in range(1, levels + 1) for j in range(1, levels + 1)}


def brown_homeomorphism(system: ClopenSystem, U, levels: int,
                        settings: Optional[Settings] = None) -> Tuple[PiecewiseMap, Dict[Tuple[int, int], Any]]:
    """Φ materialized on levels <= ``levels`` and the slices of E_1, ..., E_levels."""
    construction = BrownConstruction(system, U, settings)
    return construction.materialize(levels), construction.stages(levels)


class OrbitEquivalence(ABC):
    """
    A homeomorphism h of X onto a clopen set U of X × {1..n} carrying R onto R^n|_U.

    ``image`` and ``preimage`` act on clopen sets.
    """
    source: ClopenSystem
    target: AmplifiedSystem
    region: LeveledClopen

    @abstractmethod
    def image(self, S) -> LeveledClopen:
        pass

    @abstractmethod
    def preimage(self, T: LeveledClopen):
        pass

    @property
    def scale(self):
        return self.target.measure(self.region)

    def describe(self) -> str:
        return f"{type(self).__name__} onto {self.region.describe()}"


def verify_orbit_equivalence(h: OrbitEquivalence, depth: int, settings: Optional[Settings] = None) -> OrbitEquivalence:
    """
    Check h on the atoms of ``depth``: onto U, injective, scaling measure by mu(U),
    inverted by ``preimage``, and conjugating φ to the first return map of U.

    Raises
    ------
    NotOrbitEquivalenceError
    """
    X = h.source
    if h.image(X.full()) != h.region:
        raise NotOrbitEquivalenceError("h(X) differs from U")
    scale = h.scale
    atoms = X.atoms(depth)
    images = [h.image(C) for C in atoms]
    # nonempty clopen sets have positive measure, so additivity means disjointness
    spread = sum((h.target.measure(image) for image in images), Fraction(0))
    if not exact_equal(h.target.measure(h.target.union(images)), spread):
        raise NotOrbitEquivalenceError(f"h is not injective on the atoms of depth {depth}")
    for C, image in zip(atoms, images):
        if not exact_equal(h.target.measure(image), scale * X.measure(C)):
            raise NotOrbitEquivalenceError(f"h does not scale the measure of {C.describe()}")
        if h.preimage(image) != C:
            raise NotOrbitEquivalenceError(f"preimage does not invert h on {C.describe()}")
    if X.rank == 1:
        induced = first_return(h.target, h.region, settings)
        for C, image in zip(atoms, images):
            moved = induced.image({1: image}).get(1, h.target.empty())
            if h.image(X.act(C, (1,))) != moved:
                raise NotOrbitEquivalenceError(f"h φ differs from φ_U h on {C.describe()}")
    return h


class ScalingAutomorphism:
    """
    F = (id × psi) ∘ Φ ∘ (h × id) on X × N, scaling mu × counting measure by mu(U).

    ``image`` and ``preimage`` take and return dicts level -> clopen set of X.
    Levels of U × N and X × {1..n} × N are flattened with ``cantor_pair``.
    """

    def __init__(self, h: OrbitEquivalence, settings: Optional[Settings] = None):
        self.h = h
        self.system = h.source
        self.amplified = h.target
        self.n = h.target.n
        self.brown = BrownConstruction(self.amplified, h.region, settings)
        self.scale = h.scale

    def _deposit(self, out: Dict[int, Any], level: int, T: LeveledClopen):
        for r in range(1, self.n + 1):
            piece = T.level(r)
            if piece.is_empty():
                continue
            flat = psi(r, level, self.n)
            out[flat] = out[flat] | piece if flat in out else piece

    def image(self, pieces: Dict[int, Any]) -> Dict[int, Any]:
        out: Dict[int, Any] = {}
        for level, S in pieces.items():
            if S.is_empty():
                continue
            lifted = self.h.image(S)
            i, s = cantor_unpair(level)
            for rule in self.brown.rules_from(i, s):
                part = lifted & rule.source
                if part.is_empty():
                    continue
                self._deposit(out, cantor_pair(*rule.target_level), self.amplified.act(part, rule.element))
        return out

    def preimage(self, pieces: Dict[int, Any]) -> Dict[int, Any]:
        gathered: Dict[int, LeveledClopen] = {}
        for level, S in pieces.items():
            if S.is_empty():
                continue
            r, j = psi_inverse(level, self.n)
            slot = self.amplified.at(r, S)
            gathered[j] = gathered[j] | slot if j in gathered else slot
        out: Dict[int, Any] = {}
        for j, T in gathered.items():
            i, m = cantor_unpair(j)
            for rule in self.brown.rules_into(i, m):
                part = T & self.amplified.act(rule.source, rule.element)
                if part.is_empty():
                    continue
                back = self.h.preimage(self.amplified.act(part, negate(rule.element)))
                src = cantor_pair(*rule.source_level)
                out[src] = out[src] | back if src in out else back
        return out


def scaling_automorphism(h: OrbitEquivalence, depth: int, settings: Optional[Settings] = None) -> ScalingAutomorphism:
    """
    Build F from a verified orbit equivalence and check mu × δ(F(V × {1})) = λ mu(V)
    on the atoms V of ``depth``, with λ = mu × δ(U).
    """
    verify_orbit_equivalence(h, depth, settings)
    F = ScalingAutomorphism(h, settings)
    witness = ScalingWitness(f"{F.scale}", ((F, False),))
    witness.verify(depth)
    return F


@dataclass(frozen=True)
class ScalingWitness:
    """A chain of scaling automorphisms (each possibly inverted); its scale is the product."""
    label: str
    steps: Tuple[Tuple[ScalingAutomorphism, bool], ...] = ()
    system: Optional[ClopenSystem] = None

    @property
    def base_system(self) -> ClopenSystem:
        return self.system if self.system is not None else self.steps[0][0].system

    @property
    def scale(self):
        value = AlgebraicReal.rational(1)
        for F, inverted in self.steps:
            value = value / F.scale if inverted else value * F.scale
        return value

    def image(self, pieces: Dict[int, Any]) -> Dict[int, Any]:
        for F, inverted in self.steps:
            pieces = F.preimage(pieces) if inverted else F.image(pieces)
        return pieces

    def preimage(self, pieces: Dict[int, Any]) -> Dict[int, Any]:
        for F, inverted in reversed(self.steps):
            pieces = F.image(pieces) if inverted else F.preimage(pieces)
        return pieces

    def inverse(self) -> "ScalingWitness":
        return ScalingWitness(f"({self.label})^-1", tuple((F, not inv) for F, inv in reversed(self.steps)),
                              self.base_system)

    def then(self, other: "ScalingWitness") -> "ScalingWitness":
        """other ∘ self, scale multiplied."""
        return ScalingWitness(f"{self.label} * {other.label}", self.steps + other.steps, self.base_system)

    def verify(self, depth: int) -> bool:
        """mu × δ(W(V × {1})) = scale · mu(V) and W^-1 W = id on the atoms of ``depth``."""
        system = self.base_system
        for V in system.atoms(depth):
            image = self.image({1: V})
            mass = sum((system.measure(S) for S in image.values()), Fraction(0))
            if not exact_equal(mass, self.scale * system.measure(V)):
                raise InvariantViolation(f"witness {self.label} scales {V.describe()} by {mass}")
            back = {level: S for level, S in self.preimage(image).items() if not S.is_empty()}
            if set(back) != {1} or back[1] != V:
                raise InvariantViolation(f"witness {self.label} is not inverted on {V.describe()}")
        return True


def power_witness(base: ScalingWitness, target, bound: int) -> Optional[ScalingWitness]:
    """A chain of copies of ``base`` (or its inverse) with scale ``target``, if |exponent| <= bound."""
    target = AlgebraicReal.coerce(target)
    scale = base.scale
    for e in range(0, bound + 1):
        for sign in ((1,) if e == 0 else (1, -1)):
            if scale ** (sign * e) == target:
                unit = base if sign > 0 else base.inverse()
                steps = unit.steps * e
                return ScalingWitness(f"{target}", steps, base.base_system)
    return None


def scaling_group_check(system: ClopenSystem, candidates: Sequence, witnesses: Sequence[ScalingWitness],
                        depth: int, settings: Optional[Settings] = None) -> List[ScalingCheck]:
    """
    Report which candidate scales are witnessed by chains of the given witnesses,
    then re-verify inverses and pairwise products of the witnessed ones.

    Unwitnessed candidates are reported, never raised.
    """
    settings = settings or Settings.from_env()
    group = system.fundamental_group(settings)
    checks: List[ScalingCheck] = []
    found: List[ScalingWitness] = []
    for value in candidates:
        value = AlgebraicReal.coerce(value)
        in_group = group.contains(value, settings.relation_bound)
        witness = None
        for base in witnesses:
            witness = power_witness(base, value, settings.relation_bound)
            if witness is not None:
                break
        if witness is None:
            logger.warning(f"no witness for scale {value} on {system.describe()}")
            checks.append(ScalingCheck(str(value), value, False, in_group, "no witness from the built-in maps"))
            continue
        witness.verify(depth)
        if not in_group:
            raise InvariantViolation(f"witnessed scale {value} lies outside IM+")
        found.append(witness)
        checks.append(ScalingCheck(witness.label, value, True, in_group))
    for witness in list(found):
        inverse = witness.inverse()
        inverse.verify(depth)
        checks.append(ScalingCheck(inverse.label, inverse.scale, True, group.contains(inverse.scale)))
    for a, b in itertools.combinations_with_replacement(found, 2):
        product = a.then(b)
        product.verify(depth)
        if not group.contains(product.scale, settings.relation_bound):
            raise InvariantViolation(f"product {product.label} lies outside IM+")
        checks.append(ScalingCheck(product.label, product.scale, True, True))
    return checks
