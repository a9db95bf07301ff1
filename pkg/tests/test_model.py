from decimal import Decimal, localcontext

import pytest
from hypothesis import given
from hypothesis import strategies as st

from parceltwin.model import (
    ComplianceStatus,
    ConstraintKind,
    Measure,
    Quantity,
    QuantityConstraint,
    UndefinedRatioError,
    Unit,
    UnitMismatchError,
    UnitRegistry,
    difference,
    evaluate_constraint,
    exact_digits,
    ratio,
)

SQM = Unit("square_metre", "square metres")
M = Unit("metre", "metres")
SQM_PP = Unit("square_metre_per_person", "square metres per person")
RATIO_U = Unit("population_ratio_unit", "ratio")
PPD = Unit("person_per_day", "persons per day")


def req(limit, unit=None):
    return QuantityConstraint(ConstraintKind.REQUIREMENT, Measure(limit, unit), "x")


def allow(limit, unit=None):
    return QuantityConstraint(ConstraintKind.ALLOWANCE, Measure(limit, unit), "x")


def equiv(limit, unit=None):
    return QuantityConstraint(ConstraintKind.EQUIVALENCE, Measure(limit, unit), "x")


class TestEvaluateConstraint:
    def test_negative_minimum_is_compliant(self):
        # dashboard row: Minimum -1 against 272.6297607 reads compliant
        status = evaluate_constraint(req(-1), Measure("272.6297607"))
        assert status is ComplianceStatus.COMPLIANT

    def test_minimum_185_against_291(self):
        status = evaluate_constraint(req(185), Measure("291.166626"))
        assert status is ComplianceStatus.COMPLIANT

    def test_allowance_boundary_equal_is_compliant(self):
        assert evaluate_constraint(allow("2.0"), Measure("2.0")) is ComplianceStatus.COMPLIANT

    def test_requirement_strictly_below(self):
        assert evaluate_constraint(req(370), Measure("369.9")) is ComplianceStatus.NONCOMPLIANT

    def test_unit_mismatch(self):
        status = evaluate_constraint(allow(10, M), Measure(5, SQM))
        assert status is ComplianceStatus.INCOMPATIBLE_UNITS

    def test_one_sided_unit_is_comparable(self):
        # limit with no unit vs unit-ed actual compares normally
        assert evaluate_constraint(req(185), Measure(291, SQM)) is ComplianceStatus.COMPLIANT

    def test_absent_actual_is_unknown(self):
        assert evaluate_constraint(req(185), None) is ComplianceStatus.UNKNOWN

    def test_negative_allowance_default_not_applicable(self):
        assert evaluate_constraint(allow(-1), Measure(3)) is ComplianceStatus.NOT_APPLICABLE

    def test_negative_allowance_strict_mode(self):
        status = evaluate_constraint(allow(-1), Measure(3), strict_sentinel=True)
        assert status is ComplianceStatus.NONCOMPLIANT

    def test_negative_requirement_strict_mode_still_compliant(self):
        status = evaluate_constraint(req(-1), Measure(3), strict_sentinel=True)
        assert status is ComplianceStatus.COMPLIANT

    def test_equivalence(self):
        assert evaluate_constraint(equiv(5), Measure(5)) is ComplianceStatus.COMPLIANT
        assert evaluate_constraint(equiv(5), Measure("5.1")) is ComplianceStatus.NONCOMPLIANT

    @given(
        kind=st.sampled_from(list(ConstraintKind)),
        limit=st.decimals(allow_nan=False, allow_infinity=False, places=6),
        actual=st.one_of(
            st.none(),
            st.decimals(allow_nan=False, allow_infinity=False, places=6),
        ),
        strict=st.booleans(),
    )
    def test_total_and_deterministic(self, kind, limit, actual, strict):
        c = QuantityConstraint(kind, Measure(limit), "x")
        a = None if actual is None else Measure(actual)
        first = evaluate_constraint(c, a, strict)
        assert first is evaluate_constraint(c, a, strict)
        assert isinstance(first, ComplianceStatus)

    @given(
        limit=st.decimals(min_value=0, allow_nan=False, allow_infinity=False, places=6),
        actual=st.decimals(allow_nan=False, allow_infinity=False, places=6),
    )
    def test_requirement_compliant_iff_at_least_limit(self, limit, actual):
        status = evaluate_constraint(req(limit), Measure(actual))
        assert (status is ComplianceStatus.COMPLIANT) == (actual >= limit)


class TestStatusLabels:
    def test_round_trip(self):
        labels = ["compliant", "noncompliant", "incompatible units", "unknown", "not-applicable"]
        assert [s.value for s in ComplianceStatus] == labels
        for label in labels:
            assert ComplianceStatus.from_label(label).value == label


class TestRatio:
    def test_library_floor_area_per_person(self):
        # 1080 m2 over a 55,613-person catchment
        out = ratio(Measure(1080, SQM), Measure(55613), SQM_PP)
        assert out.unit is SQM_PP
        assert abs(out.value - Decimal("0.019420")) < Decimal("0.000001")

    def test_zero_numerator(self):
        assert ratio(Measure(0), Measure(10), None).value == 0

    def test_identity(self):
        assert ratio(Measure(22139), Measure(22139), RATIO_U).value == 1

    def test_zero_denominator(self):
        with pytest.raises(UndefinedRatioError):
            ratio(Measure(1), Measure(0), None)

    @given(
        a=st.decimals(allow_nan=False, allow_infinity=False, places=6),
        b=st.decimals(allow_nan=False, allow_infinity=False, places=6).filter(lambda d: d != 0),
    )
    def test_ratio_inverts(self, a, b):
        out = ratio(Measure(a), Measure(b), None)
        back = out.value * b
        if a == 0:
            assert back == 0
        else:
            assert abs(back - a) <= abs(a) * Decimal("1e-12")


class TestDifference:
    def test_total_minus_use(self):
        tpy = Unit("tonnes_per_year", "tonnes per year")
        avail = difference(Measure("8350", tpy), Measure("7261.63", tpy))
        assert avail.value == Decimal("8350") - Decimal("7261.63")
        assert avail.unit is tpy

    def test_self_difference(self):
        x = Measure("123.456")
        assert difference(x, x).value == 0

    def test_subtraction(self):
        out = difference(Measure(601000, PPD), Measure(540900, PPD))
        assert out.value == Decimal(60100)

    def test_mismatched_units(self):
        with pytest.raises(UnitMismatchError):
            difference(Measure(1, M), Measure(1, SQM))
        with pytest.raises(UnitMismatchError):
            difference(Measure(1, M), Measure(1))

    @given(
        a=st.decimals(allow_nan=False, allow_infinity=False, places=8),
        b=st.decimals(allow_nan=False, allow_infinity=False, places=8),
    )
    def test_difference_plus_term2_is_exact(self, a, b):
        out = difference(Measure(a), Measure(b))
        with localcontext() as ctx:
            ctx.prec = exact_digits(out.value, b)
            assert out.value + b == a


class TestValueTypes:
    def test_measure_rejects_nan(self):
        with pytest.raises(ValueError):
            Measure(float("nan"))
        with pytest.raises(ValueError):
            Measure(float("inf"))

    def test_quantity_holds_measures(self):
        q = Quantity("area", [Measure(1), Measure(2)])
        assert q.kind == "area"
        assert len(q.measures) == 2
        assert Quantity("empty").measures == ()


class TestUnitRegistry:
    def test_preloaded_units(self):
        reg = UnitRegistry()
        for uid in [
            "kilovolt_ampere", "square_foot", "storeys",
            "avg_inpatients_daily_per_bed", "cubic_metre_per_year",
            "kilometers_per_hour", "person_per_day", "sites_per_person",
            "square_metre_per_person", "tonnes_per_year", "vehicles_per_hour",
            "metre", "square_metre", "population_cardinality_unit",
            "population_ratio_unit", "firefighter_per_person",
        ]:
            assert uid in reg

    def test_duplicate_id_rejected(self):
        reg = UnitRegistry()
        with pytest.raises(ValueError):
            reg.register(Unit("metre", "meters (US)"))
        # re-registering the identical unit is a no-op
        reg.register(reg.require("metre"))

    def test_csv_round_trip(self):
        reg = UnitRegistry()
        text = reg.to_csv()
        back = UnitRegistry.from_csv(text)
        assert sorted(u.id for u in back) == sorted(u.id for u in reg)
        assert back.require("tonnes_per_year").label == "tonnes per year"
