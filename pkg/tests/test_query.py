from decimal import Decimal

import pytest

from parceltwin import vocab
from parceltwin.geo import box, point
from parceltwin.model import ComplianceStatus
from parceltwin.query import ParcelFilters, QueryEngine, rows_to_csv
from parceltwin.rules import run_all
from parceltwin.store import iri

from worlds import add, add_parcel, ex, fresh_store

TOR = vocab.TOR
FIXTURE_POINT = point(-79.35832, 43.67898)


def local(term_value):
    return term_value.rsplit("#", 1)[-1]


class TestFindParcelAt:
    def test_point_inside_single_parcel(self, engine):
        ref = engine.find_parcel_at(FIXTURE_POINT)
        assert ref is not None
        assert ref.iri.value == TOR + "Property5314508"
        assert ref.geometry is not None

    def test_point_in_no_parcel(self, engine):
        assert engine.find_parcel_at(point(-79.34, 43.66)) is None

    def test_shared_boundary_tie_breaks_by_least_iri(self):
        store = fresh_store()
        # two parcels sharing the edge x=-79.40
        add_parcel(store, "pB", box(-79.401, 43.64, -79.400, 43.641))
        add_parcel(store, "pA", box(-79.400, 43.64, -79.399, 43.641))
        engine = QueryEngine(store)
        ref = engine.find_parcel_at(point(-79.400, 43.6405))
        assert ref.iri == ex("pA")  # pA < pB lexicographically


class TestParcelAttributes:
    def test_fixture_parcel_rows(self, engine):
        rows = engine.parcel_attributes(iri(TOR + "Property5314508"))
        cells = [r.cells() for r in rows]
        assert ("area", "943.29", "square metres") in cells
        assert ("perimeter", "131.12", "metres") in cells
        assert len(cells) == 2

    def test_no_measures_empty(self, engine):
        rows = engine.parcel_attributes(iri(TOR + "provincialproperty9000001"))
        assert rows == []

    def test_subproperty_shadows_super(self):
        store = fresh_store()
        parcel = add_parcel(store, "p", box(0, 0, 1, 1))
        generic = ex("hasLength")
        frontage = ex("hasSiteFrontage")
        quantity, measure = ex("q1"), ex("m1")
        from parceltwin.store import Triple, literal

        add(store, frontage, vocab.RDFS_SUBPROPERTYOF, generic, graph="urn:test/schema")
        add(store, generic, vocab.RDFS_LABEL, literal("length"), graph="urn:test/schema")
        add(store, frontage, vocab.RDFS_LABEL, literal("frontage"), graph="urn:test/schema")
        # the same quantity is reachable via both the generic and the
        # specific property
        store.insert("urn:test/world", Triple(parcel, generic, quantity))
        store.insert("urn:test/world", Triple(parcel, frontage, quantity))
        add(store, quantity, vocab.I72_HASVALUE, measure)
        add(store, measure, vocab.I72_HASNUMERICALVALUE, literal("7.5"))
        engine = QueryEngine(store)
        rows = engine.parcel_attributes(parcel)
        # brute-force shadow oracle: only the most specific property remains
        assert [r.attribute for r in rows] == ["frontage"]


class TestLandUse:
    def test_allowed_contains_apartment_building(self, engine):
        lu = engine.land_use(iri(TOR + "Property5314508"))
        assert "Apartment building" in lu.allowed
        assert len(lu.allowed) == 11
        assert lu.current == ()  # Figure shows no current use for this parcel

    def test_no_zoning_no_uses(self, engine):
        lu = engine.land_use(iri(TOR + "Property5301111"))
        assert lu.allowed == () and lu.current == ()

    def test_building_use_code_feeds_current(self, engine):
        lu = engine.land_use(iri(TOR + "Property5302222"))
        assert "Detached house" in lu.current


class TestApplicableZoning:
    def test_figure_rows(self, engine):
        rows = engine.applicable_zoning(iri(TOR + "Property5314508"))
        cells = [r.cells() for r in rows]
        assert ("Zone String ra_d2_0", "Maximum", "floor space index (FSI)", "2.0", "") in cells
        assert ("Zone String ra_d2_0", "Minimum", "frontage", "1.0", "metres") in cells
        assert ("Zone String ra_d2_0", "Minimum", "area", "-1", "square metres") in cells
        assert ("Zone String ra_d2_0", "Maximum", "number of dwelling units", "-1", "count") in cells
        assert len(rows) == 4
        assert all(r.geometry is not None for r in rows)

    def test_parcel_outside_every_zone(self, engine):
        assert engine.applicable_zoning(iri(TOR + "Property5301111")) == []

    def test_plan_defined_regulation_excluded(self):
        store = fresh_store()
        parcel = add_parcel(store, "p", box(0, 0, 1, 1))
        from parceltwin.store import Triple, literal

        reg, c, area, plan = ex("reg"), ex("c"), ex("area"), ex("plan")
        add(store, reg, vocab.RDF_TYPE, iri(vocab.HP_REGULATION))
        add(store, reg, vocab.HP_SPECIFIES_CONSTRAINT, c)
        add(store, reg, vocab.HP_DEFINED_IN, plan)  # a Plan, not a ZoningBylaw
        add(store, reg, vocab.HP_DEFINED_FOR, area)
        add(store, area, vocab.RDF_TYPE, iri(vocab.HP_ADMINISTRATIVE_AREA))
        from worlds import add_located

        add_located(store, area, box(0, 0, 1, 1))
        run_all(store)
        engine = QueryEngine(store)
        assert engine.applicable_zoning(parcel) == []


class TestListConstrainedAttributes:
    def test_fixture_set(self, engine):
        pairs = dict(engine.list_constrained_attributes())
        assert pairs[vocab.HP_HAS_FRONTAGE] == "frontage"
        assert pairs[vocab.HP_HAS_AREA] == "area"
        assert pairs[vocab.HP_HAS_FSI] == "floor space index (FSI)"
        assert pairs[TOR + "hasNumDwellings"] == "number of dwelling units"
        assert pairs[vocab.HP + "hasBuildingHeight"] == "building height"

    def test_empty_store(self):
        assert QueryEngine(fresh_store()).list_constrained_attributes() == []


class TestZoningCompliance:
    def test_figure_rows_exact(self, engine):
        rows = engine.zoning_compliance(iri(TOR + "Property5314508"), vocab.HP_HAS_AREA)
        indexed = {(r.nearby_parcel, str(r.limit), str(r.actual_value)): r.status for r in rows}
        assert indexed[("Property5321920", "-1", "272.6297607")] is ComplianceStatus.COMPLIANT
        assert indexed[("Property5315545", "370", "2267.6453857")] is ComplianceStatus.COMPLIANT
        assert indexed[("Property5309824", "185", "445.1328125")] is ComplianceStatus.COMPLIANT
        assert indexed[("Property5308368", "185", "291.166626")] is ComplianceStatus.COMPLIANT

    def test_every_status_matches_value_algebra(self, engine):
        from parceltwin.model import (
            ConstraintKind,
            Measure,
            QuantityConstraint,
            evaluate_constraint,
        )

        kind_by_label = {
            "Maximum": ConstraintKind.ALLOWANCE,
            "Minimum": ConstraintKind.REQUIREMENT,
            "Exact": ConstraintKind.EQUIVALENCE,
        }
        rows = engine.zoning_compliance(iri(TOR + "Property5314508"), vocab.HP_HAS_AREA)
        assert rows
        for row in rows:
            constraint = QuantityConstraint(
                kind_by_label[row.constraint_type], Measure(row.limit), "x"
            )
            actual = None if row.actual_value is None else Measure(row.actual_value)
            assert evaluate_constraint(constraint, actual) is row.status

    def test_radius_cutoff(self, engine):
        # distant parcels are excluded at the default 200 m radius but appear
        # at a much larger radius
        near = {r.nearby_parcel for r in engine.zoning_compliance(iri(TOR + "Property5314508"), vocab.HP_HAS_AREA)}
        assert "Property5301111" not in near
        wide = {
            r.nearby_parcel
            for r in engine.zoning_compliance(iri(TOR + "Property5314508"), vocab.HP_HAS_AREA, radius_m=5000)
        }
        assert near <= wide

    def test_radius_zero_degenerate(self, engine):
        rows = engine.zoning_compliance(iri(TOR + "Property5314508"), vocab.HP_HAS_AREA, radius_m=0)
        assert {r.nearby_parcel for r in rows} == {"Property5314508"}

    def test_unknown_when_no_actual(self, engine):
        rows = engine.zoning_compliance(iri(TOR + "Property5314508"), vocab.HP_HAS_FRONTAGE)
        assert rows
        assert all(r.status is ComplianceStatus.UNKNOWN for r in rows)
        assert all(r.actual_value is None for r in rows)

    def test_not_applicable_for_negative_allowance(self, engine):
        # dwelling-unit maximums are the -1 sentinel; no parcel carries the
        # attribute, so rows are unknown; FSI maximum 2.0 with no actual is
        # unknown as well. Force an actual through a small synthetic world:
        store = fresh_store()
        from parceltwin.store import Triple, literal
        from worlds import add_constraint_regulation, add_located

        parcel = add_parcel(store, "p", box(0, 0, 1, 1))
        reg, area, c = add_constraint_regulation(store, "z", box(0, 0, 1, 1))
        bylaw = ex("bylaw")
        add(store, bylaw, vocab.RDF_TYPE, iri(vocab.HP_ZONING_BYLAW))
        add(store, reg, vocab.HP_DEFINED_IN, bylaw)
        add(store, c, vocab.RDF_TYPE, iri(vocab.HP_QUANTITY_ALLOWANCE))
        spec_node, param, var = ex("spec"), ex("param"), ex("var")
        add(store, c, vocab.I72_HASVALUE, spec_node)
        add(store, spec_node, vocab.I72_HASNUMERICALVALUE, literal("-1"))
        add(store, c, vocab.HP_CONSTRAINS, param)
        add(store, param, vocab.I72_PARAMETER_OF_VAR, var)
        add(store, param, vocab.I72_DESCRIPTION_OF, ex("pop"))
        add(store, var, vocab.I72_HASNAME, iri(vocab.HP_HAS_AREA))
        # actual area on the parcel
        q, m = ex("q"), ex("m")
        add(store, parcel, vocab.HP_HAS_AREA, q)
        add(store, q, vocab.I72_HASVALUE, m)
        add(store, m, vocab.I72_HASNUMERICALVALUE, literal("500"))
        run_all(store)
        rows = QueryEngine(store).zoning_compliance(parcel, vocab.HP_HAS_AREA)
        assert rows and rows[0].status is ComplianceStatus.NOT_APPLICABLE


class TestDemographics:
    def test_income_row(self, engine):
        rows = engine.neighbourhood_demographics(iri(TOR + "Property5314508"))
        hits = [r for r in rows if r.value == Decimal("34436")]
        assert len(hits) == 1
        row = hits[0]
        assert row.unit == "CAD"
        assert row.census_tract == "ct-5350185-01"
        assert row.geometry is not None

    def test_two_tracts_for_density(self, engine):
        rows = engine.neighbourhood_demographics(
            iri(TOR + "Property5314508"),
            [vocab.CACENSUS + "PopulationDensity2016"],
        )
        assert {r.census_tract for r in rows} == {"ct-5350185-01", "ct-5350185-02"}
        assert len(rows) == 2

    def test_empty_characteristic_list(self, engine):
        assert engine.neighbourhood_demographics(iri(TOR + "Property5314508"), []) == []

    def test_parcel_outside_neighbourhood(self):
        store = fresh_store()
        parcel = add_parcel(store, "p", box(0, 0, 1, 1))
        assert QueryEngine(store).neighbourhood_demographics(parcel) == []


class TestAvailableServices:
    def test_figure_rows(self, engine):
        rows = engine.available_services(iri(TOR + "Property5314508"))
        cells = [r.cells() for r in rows]
        assert ("Solid waste", "", "Unused waste processing capacity", "7261.63", "tonnes per year") in cells
        assert ("School", "Chester Elementary School", "Available enrollment spaces", "48", "count") in cells
        assert ("School", "Frankland Community School Junior", "Available enrollment spaces", "39", "count") in cells

    def test_leaf_capacity_type_only(self, engine):
        # the solid-waste available node is typed both generically and
        # specifically; only the specific row appears
        rows = engine.available_services(iri(TOR + "Property5314508"))
        waste = [r for r in rows if r.service == "Solid waste"]
        assert {r.capacity_type for r in waste} == {"Unused waste processing capacity"}

    def test_leaf_type_sets_are_antichains(self, fixture_store, engine):
        closure = fixture_store.subclass_closure()
        for leaf in engine.leaf_service_types():
            for other in engine.leaf_service_types():
                if leaf != other:
                    assert leaf not in closure.get(other, set())

    def test_unserviced_parcel_empty(self):
        store = fresh_store()
        parcel = add_parcel(store, "p", box(0, 0, 1, 1))
        assert QueryEngine(store).available_services(parcel) == []


class TestCityAverages:
    def test_zoning_excludes_negative_limits(self, engine):
        rows = {r.label: r for r in engine.city_averages("zoning")}
        # area limits in the fixture are {185, 370} after the -1 exclusions
        assert rows["area"].average == Decimal("277.5")

    def test_single_value_group(self, engine):
        rows = {r.label: r for r in engine.city_averages("zoning")}
        assert rows["building height"].average == Decimal("10.5")

    def test_service_unit_concat(self, engine):
        rows = engine.city_averages("services")
        school = [r for r in rows if r.label == "School"]
        assert school and school[0].unit == "Available enrollment spaces(count)"
        assert school[0].average == Decimal("43.5")  # (48 + 39) / 2

    def test_demographics_means(self, engine):
        rows = {r.label: r for r in engine.city_averages("demographics")}
        assert rows["Average after-tax income"].average == Decimal("34495")  # 3-instance mean
        assert rows["Total private dwellings"].average == Decimal("2531.5")

    def test_unknown_kind(self, engine):
        with pytest.raises(ValueError):
            engine.city_averages("everything")


class TestAdvancedSearch:
    def test_no_filters_returns_all(self, engine):
        assert len(engine.advanced_parcel_search(ParcelFilters())) == 8

    def test_vacancy(self, engine):
        refs = engine.advanced_parcel_search(ParcelFilters(vacant=True))
        names = {local(r.iri.value) for r in refs}
        # brute force: buildings occupy 5302222 and 5309824
        assert "Property5302222" not in names
        assert "Property5309824" not in names
        assert "Property5314508" in names
        occupied = engine.advanced_parcel_search(ParcelFilters(vacant=False))
        assert {local(r.iri.value) for r in occupied} == {"Property5302222", "Property5309824"}

    def test_government_owned(self, engine):
        refs = engine.advanced_parcel_search(ParcelFilters(government_owned=True))
        assert [local(r.iri.value) for r in refs] == ["provincialproperty9000001"]

    def test_area_range_catches_fixture_parcel(self, engine):
        refs = engine.advanced_parcel_search(ParcelFilters(area_range=(900, 1000)))
        assert [local(r.iri.value) for r in refs] == ["Property5314508"]

    def test_conjunction(self, engine):
        refs = engine.advanced_parcel_search(
            ParcelFilters(vacant=True, zoned_for_use="Apartment building", area_range=(900, 1000))
        )
        assert [local(r.iri.value) for r in refs] == ["Property5314508"]

    def test_neighbourhood_filter(self, engine):
        refs = engine.advanced_parcel_search(ParcelFilters(neighbourhood="Broadview North"))
        assert len(refs) == 8  # every fixture parcel sits in the one neighbourhood


class TestDeterminism:
    def test_repeated_calls_identical(self, engine):
        p = iri(TOR + "Property5314508")
        assert engine.available_services(p) == engine.available_services(p)
        assert engine.applicable_zoning(p) == engine.applicable_zoning(p)
        assert engine.zoning_compliance(p, vocab.HP_HAS_AREA) == engine.zoning_compliance(p, vocab.HP_HAS_AREA)

    def test_csv_export_headers(self, engine):
        rows = engine.parcel_attributes(iri(TOR + "Property5314508"))
        text = rows_to_csv(rows)
        lines = text.splitlines()
        assert lines[0] == "Attribute,Value,Unit of Measure"
        assert "area,943.29,square metres" in lines


class TestBruteForceEquivalence:
    def test_attributes_against_full_scan(self, fixture_store, engine):
        """Scan every triple without indexes and rebuild the attribute rows."""
        from parceltwin.store import Pattern

        parcel = iri(TOR + "Property5314508")
        all_triples = [t for _, t in fixture_store.match(Pattern())]
        by_subject = {}
        for t in all_triples:
            by_subject.setdefault(t.subject, []).append(t)

        def label(node):
            for t in by_subject.get(node, []):
                if t.predicate.value == vocab.RDFS_LABEL:
                    return t.object.value
            return None

        expected = set()
        for t in by_subject.get(parcel, []):
            att_label = label(t.predicate if not t.predicate.is_literal() else None)
            att_label = label(type(t.predicate)("iri", t.predicate.value)) if att_label is None else att_label
            if att_label is None:
                continue
            for tv in by_subject.get(t.object, []):
                if tv.predicate.value != vocab.I72_HASVALUE:
                    continue
                num = unit = None
                for tm in by_subject.get(tv.object, []):
                    if tm.predicate.value == vocab.I72_HASNUMERICALVALUE:
                        num = tm.object.value
                    elif tm.predicate.value == vocab.I72_HASUNIT:
                        unit = label(tm.object) or ""
                if num is not None:
                    expected.add((att_label, Decimal(num), unit or ""))
        got = {(r.attribute, r.value, r.unit) for r in engine.parcel_attributes(parcel)}
        assert got <= expected  # engine may suppress shadowed superproperties
        assert {("area", Decimal("943.29"), "square metres"),
                ("perimeter", Decimal("131.12"), "metres")} <= got


class ScanOnlyStore:
    """Store facade that answers every lookup by linear scan, bypassing the
    permutation indexes; used to prove query results are index-independent."""

    def __init__(self, inner):
        self._inner = inner
        self._all = [t for _, t in inner.match()]

    def __getattr__(self, name):
        return getattr(self._inner, name)

    def match(self, pattern=None, via=None):
        from parceltwin.store import Pattern

        return self._inner.match(pattern or Pattern(), via="scan")

    def objects(self, subject, predicate):
        return [t.object for t in self._all
                if t.subject == subject and t.predicate.value == predicate]

    def object(self, subject, predicate):
        hits = self.objects(subject, predicate)
        return min(hits, key=lambda t: (t.kind, t.value)) if hits else None

    def subjects(self, predicate, obj):
        return [t.subject for t in self._all
                if t.predicate.value == predicate and t.object == obj]

    def subject_object_pairs(self, predicate):
        return [(t.subject, t.object) for t in self._all if t.predicate.value == predicate]

    def has(self, subject, predicate, obj):
        return any(
            t.subject == subject and t.predicate.value == predicate and t.object == obj
            for t in self._all
        )


class TestIndexIndependence:
    def test_catalogue_matches_scan_only_evaluation(self, fixture_store, engine):
        scan_engine = QueryEngine(ScanOnlyStore(fixture_store))
        parcel = iri(TOR + "Property5314508")
        assert scan_engine.parcel_attributes(parcel) == engine.parcel_attributes(parcel)
        assert scan_engine.applicable_zoning(parcel) == engine.applicable_zoning(parcel)
        assert scan_engine.available_services(parcel) == engine.available_services(parcel)
        assert scan_engine.zoning_compliance(parcel, vocab.HP_HAS_AREA) == engine.zoning_compliance(parcel, vocab.HP_HAS_AREA)
        assert scan_engine.neighbourhood_demographics(parcel) == engine.neighbourhood_demographics(parcel)
        assert scan_engine.land_use(parcel) == engine.land_use(parcel)
        assert scan_engine.city_averages("zoning") == engine.city_averages("zoning")
        assert scan_engine.list_constrained_attributes() == engine.list_constrained_attributes()
        assert scan_engine.advanced_parcel_search(ParcelFilters(vacant=True)) == engine.advanced_parcel_search(ParcelFilters(vacant=True))


class TestComplianceRadiusOracle:
    def test_150m_included_250m_excluded(self):
        """Two nearby parcels at measured distances straddling the radius."""
        from decimal import Decimal as D

        from parceltwin.geo import box, distance_m
        from parceltwin.store import Triple, literal
        from worlds import add, add_constraint_regulation, add_parcel, ex, fresh_store

        store = fresh_store()
        home = add_parcel(store, "home", box(-79.3700, 43.6700, -79.3696, 43.6703))
        # offsets chosen so the mid parcel sits ~150 m and the far one ~250 m out
        near_box = box(-79.37226, 43.6700, -79.37186, 43.6703)
        far_box = box(-79.37351, 43.6700, -79.37311, 43.6703)
        near = add_parcel(store, "near", near_box)
        far = add_parcel(store, "far", far_box)
        home_box = box(-79.3700, 43.6700, -79.3696, 43.6703)
        assert 140 < distance_m(home_box, near_box) < 160
        assert 240 < distance_m(home_box, far_box) < 260

        # one bylaw constraint over everything
        reg, area, c = add_constraint_regulation(store, "all", box(-79.3740, 43.6690, -79.3690, 43.6710))
        bylaw = ex("bylaw")
        add(store, bylaw, vocab.RDF_TYPE, iri(vocab.HP_ZONING_BYLAW))
        add(store, reg, vocab.HP_DEFINED_IN, bylaw)
        add(store, c, vocab.RDF_TYPE, iri(vocab.HP_QUANTITY_REQUIREMENT))
        spec_node, param, var = ex("spec"), ex("param"), ex("var")
        add(store, c, vocab.I72_HASVALUE, spec_node)
        add(store, spec_node, vocab.I72_HASNUMERICALVALUE, literal("100"))
        add(store, c, vocab.HP_CONSTRAINS, param)
        add(store, param, vocab.I72_PARAMETER_OF_VAR, var)
        add(store, param, vocab.I72_DESCRIPTION_OF, ex("pop"))
        add(store, var, vocab.I72_HASNAME, iri(vocab.HP_HAS_AREA))
        run_all(store)

        engine = QueryEngine(store)
        rows = engine.zoning_compliance(home, vocab.HP_HAS_AREA, radius_m=200)
        names = {r.nearby_parcel for r in rows}
        assert "near" in names and "home" in names
        assert "far" not in names
