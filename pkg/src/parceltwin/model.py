"""Measured quantities, units, and constraint compliance.

Values are held as :class:`decimal.Decimal` so that constraint comparisons
are exact (no epsilons) and `difference(a, b) + b == a` holds for any pair
of finite decimal inputs. Unit compatibility is identity of unit ids; no
conversion is attempted.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation, localcontext
from typing import Iterable, Optional, Union

Number = Union[int, float, str, Decimal]


class UnitMismatchError(ValueError):
    """Arithmetic between measures whose units differ."""


class UndefinedRatioError(ZeroDivisionError):
    """Ratio with a zero denominator; callers decide whether to skip."""


def to_decimal(value: Number) -> Decimal:
    """Coerce to a finite Decimal; floats go through str() to keep the
    human-visible digits rather than binary expansion noise."""
    if isinstance(value, Decimal):
        dec = value
    elif isinstance(value, float):
        dec = Decimal(str(value))
    else:
        try:
            dec = Decimal(value)
        except InvalidOperation as exc:
            raise ValueError(f"not a number: {value!r}") from exc
    if not dec.is_finite():
        raise ValueError(f"measure values must be finite, got {value!r}")
    return dec


@dataclass(frozen=True)
class Unit:
    id: str
    label: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValueError("unit id must be non-empty")


# Unit ids preloaded in every registry. Capacity units first, then the
# geometric and population units the parcel queries rely on.
_BASE_UNITS = [
    ("kilovolt_ampere", "kilovolt-amperes"),
    ("square_foot", "square feet"),
    ("storeys", "storeys"),
    ("avg_inpatients_daily_per_bed", "average daily inpatients per bed"),
    ("cubic_metre_per_year", "cubic metres per year"),
    ("kilometers_per_hour", "kilometres per hour"),
    ("person_per_day", "persons per day"),
    ("sites_per_person", "sites per person"),
    ("square_metre_per_person", "square metres per person"),
    ("tonnes_per_year", "tonnes per year"),
    ("vehicles_per_hour", "vehicles per hour"),
    ("metre", "metres"),
    ("square_metre", "square metres"),
    ("population_cardinality_unit", "count"),
    ("population_ratio_unit", "ratio"),
    ("firefighter_per_person", "firefighters per person"),
]


class UnitRegistry:
    """Registry of measure units, keyed by unique id."""

    def __init__(self, preload: bool = True):
        self._units: dict[str, Unit] = {}
        if preload:
            for uid, label in _BASE_UNITS:
                self.register(Unit(uid, label))

    def register(self, unit: Unit) -> Unit:
        existing = self._units.get(unit.id)
        if existing is not None and existing != unit:
            raise ValueError(f"unit id already registered: {unit.id}")
        self._units[unit.id] = unit
        return unit

    def get(self, uid: str) -> Optional[Unit]:
        return self._units.get(uid)

    def require(self, uid: str) -> Unit:
        unit = self._units.get(uid)
        if unit is None:
            raise KeyError(f"unknown unit: {uid}")
        return unit

    def __contains__(self, uid: str) -> bool:
        return uid in self._units

    def __iter__(self):
        return iter(self._units.values())

    def __len__(self) -> int:
        return len(self._units)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["id", "label"])
        for unit in sorted(self._units.values(), key=lambda u: u.id):
            writer.writerow([unit.id, unit.label])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "UnitRegistry":
        registry = cls(preload=False)
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header != ["id", "label"]:
            raise ValueError("unit table must have header id,label")
        for row in reader:
            if not row:
                continue
            registry.register(Unit(row[0], row[1] if len(row) > 1 else ""))
        return registry


@dataclass(frozen=True)
class Measure:
    value: Decimal
    unit: Optional[Unit] = None

    def __init__(self, value: Number, unit: Optional[Unit] = None):
        object.__setattr__(self, "value", to_decimal(value))
        object.__setattr__(self, "unit", unit)

    def unit_id(self) -> Optional[str]:
        return self.unit.id if self.unit else None


@dataclass(frozen=True)
class Quantity:
    """A measured thing (area, frontage, capacity rate, ...). Ratio and
    difference quantities are kind-tagged here; their operand links live as
    graph edges, not on this value type."""

    kind: str
    measures: tuple[Measure, ...] = field(default_factory=tuple)

    def __init__(self, kind: str, measures: Iterable[Measure] = ()):
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "measures", tuple(measures))


class ConstraintKind(enum.Enum):
    ALLOWANCE = "Allowance"      # maximum
    REQUIREMENT = "Requirement"  # minimum
    EQUIVALENCE = "Equivalence"  # exact


class ComplianceStatus(enum.Enum):
    COMPLIANT = "compliant"
    NONCOMPLIANT = "noncompliant"
    INCOMPATIBLE_UNITS = "incompatible units"
    UNKNOWN = "unknown"
    NOT_APPLICABLE = "not-applicable"

    @classmethod
    def from_label(cls, label: str) -> "ComplianceStatus":
        for status in cls:
            if status.value == label:
                return status
        raise ValueError(f"unknown compliance status: {label!r}")


@dataclass(frozen=True)
class QuantityConstraint:
    kind: ConstraintKind
    limit: Measure
    constrained_property: str
    source_regulation: Optional[str] = None
    label: Optional[str] = None


def evaluate_constraint(
    constraint: QuantityConstraint,
    actual: Optional[Measure],
    strict_sentinel: bool = False,
) -> ComplianceStatus:
    """Compliance of an actual measure against a constraint. Total: every
    input combination maps to exactly one status.

    The municipal data uses negative limits as a "no limit" sentinel. In the
    default mode a negative Allowance/Equivalence limit yields NOT_APPLICABLE
    (raw comparison would flag every positive actual); a negative Requirement
    is trivially satisfied. ``strict_sentinel`` disables the sentinel and
    replicates the raw arithmetic for fidelity testing.
    """
    if actual is None:
        return ComplianceStatus.UNKNOWN

    limit = constraint.limit
    if (
        actual.unit is not None
        and limit.unit is not None
        and actual.unit.id != limit.unit.id
    ):
        return ComplianceStatus.INCOMPATIBLE_UNITS

    if limit.value < 0 and not strict_sentinel:
        if constraint.kind is ConstraintKind.REQUIREMENT:
            return ComplianceStatus.COMPLIANT
        return ComplianceStatus.NOT_APPLICABLE

    if constraint.kind is ConstraintKind.ALLOWANCE:
        bad = actual.value > limit.value
    elif constraint.kind is ConstraintKind.REQUIREMENT:
        bad = actual.value < limit.value
    else:
        bad = actual.value != limit.value
    return ComplianceStatus.NONCOMPLIANT if bad else ComplianceStatus.COMPLIANT


def ratio(numerator: Measure, denominator: Measure, out_unit: Optional[Unit]) -> Measure:
    if denominator.value == 0:
        raise UndefinedRatioError("ratio denominator is zero")
    return Measure(numerator.value / denominator.value, out_unit)


def exact_digits(*values: Decimal) -> int:
    """Digits needed to add/subtract the operands without rounding."""
    high = max(v.adjusted() for v in values)
    low = min(v.as_tuple().exponent for v in values)
    return max(28, high - low + 2)


def difference(term_1: Measure, term_2: Measure) -> Measure:
    """term_1 minus term_2; units must match (or both be absent).

    Computed at whatever precision the operands require, so the subtraction
    is exact: difference(a, b) + b recovers a.
    """
    if term_1.unit_id() != term_2.unit_id():
        raise UnitMismatchError(
            f"difference over mismatched units: {term_1.unit_id()} vs {term_2.unit_id()}"
        )
    with localcontext() as ctx:
        ctx.prec = exact_digits(term_1.value, term_2.value)
        return Measure(term_1.value - term_2.value, term_1.unit)
