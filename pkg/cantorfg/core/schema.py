from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from cantorfg.core.algebra import AlgebraicReal, NumberField, approximate


@dataclass(frozen=True)
class PellSolution:
    D: int
    t: int
    u: int
    sign: int  # +4 or -4
    epsilon0: AlgebraicReal

    def to_dict(self, digits: int = 12) -> Dict[str, Any]:
        return {"D": self.D, "t": self.t, "u": self.u, "sign": self.sign,
                "epsilon0": self.epsilon0.to_dict(digits)}


@dataclass(frozen=True)
class OrderDescriptor:
    field: NumberField
    basis: Tuple[AlgebraicReal, ...]
    discriminant: int

    @property
    def degree(self) -> int:
        return self.field.degree

    @property
    def is_complex_cubic(self) -> bool:
        return self.degree == 3 and self.discriminant < 0

    @property
    def is_totally_real_cubic(self) -> bool:
        return self.degree == 3 and self.discriminant > 0


@dataclass
class UnitSystemReport:
    each_is_unit: bool
    independent: bool
    regulator_lower_bound: str
    norms: List[str] = field(default_factory=list)
    note: str = "verified unit system, fundamentality unchecked"

    def to_dict(self) -> Dict[str, Any]:
        return {"each_is_unit": self.each_is_unit, "independent": self.independent,
                "regulator_lower_bound": self.regulator_lower_bound,
                "norms": self.norms, "note": self.note}


@dataclass
class CoverResult:
    elements: List[Tuple[int, ...]]
    pieces: List[Any]  # U_k, same order as elements


@dataclass
class RestrictionReport:
    cover: CoverResult
    test_sets: int
    transport_checks: int
    value_group_depth: int
    value_group: Any
    first_return: Optional[Any] = None


@dataclass(frozen=True)
class AmplifiedInvariant:
    value_group: Any
    unit_class: int

    def to_dict(self) -> Dict[str, Any]:
        return {"value_group": self.value_group.to_dict(), "unit_class": self.unit_class}


@dataclass
class ScalingCheck:
    label: str
    scale: Any
    witnessed: bool
    in_im_plus: bool
    reason: str = ""

    def to_dict(self, digits: int = 12) -> Dict[str, Any]:
        return {"label": self.label, "scale": approximate(self.scale, digits) if self.scale is not None else None,
                "exact": str(self.scale), "witnessed": self.witnessed,
                "in_im_plus": self.in_im_plus, "reason": self.reason}
