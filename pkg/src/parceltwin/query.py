"""The parcel-centric query catalogue over a materialized store.

Every operation is a pure read: results are deterministic functions of the
store state, sorted by (primary label, IRI) so fixtures and API pagination
are stable. Compliance rows never re-implement the comparison logic; they
call the value algebra's evaluate_constraint.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Optional, Sequence

from . import vocab
from .geo import Geometry, distance_m, intersects, within
from .model import (
    ComplianceStatus,
    ConstraintKind,
    Measure,
    QuantityConstraint,
    Unit,
    evaluate_constraint,
)
from .rules import GeometryIndex
from .store import Term, TripleStore, iri

log = logging.getLogger(__name__)

_KIND_BY_CLASS = {
    vocab.HP_QUANTITY_ALLOWANCE: ConstraintKind.ALLOWANCE,
    vocab.HP_QUANTITY_REQUIREMENT: ConstraintKind.REQUIREMENT,
    vocab.HP_QUANTITY_EQUIVALENCE: ConstraintKind.EQUIVALENCE,
}

DEFAULT_DEMOGRAPHIC_CLASSES = (
    vocab.CACENSUS + "PopulationDensity2016",
    vocab.CACENSUS + "AverageAfterTaxIncome25Sample2016",
    vocab.CACENSUS + "TotalPrivateDwellings2016",
)


@dataclass
class QueryConfig:
    compliance_radius_m: float = 200.0
    # walking-distance threshold used on the service radius path when a
    # service declares no radius of its own
    amenity_radius_m: float = 400.0
    neighbourhood_class: str = vocab.TOR_NEIGHBORHOOD
    demographic_classes: Sequence[str] = DEFAULT_DEMOGRAPHIC_CLASSES


@dataclass(frozen=True)
class ParcelRef:
    iri: Term
    geometry: Optional[Geometry] = None


@dataclass(frozen=True)
class AttributeRow:
    attribute: str
    value: Decimal
    unit: str

    HEADERS = ("Attribute", "Value", "Unit of Measure")

    def cells(self):
        return (self.attribute, _plain(self.value), self.unit)


@dataclass(frozen=True)
class ZoningRow:
    zone_label: str
    constraint: str
    constrained_property: str
    limit: Decimal
    unit: str
    geometry: Optional[Geometry] = None

    HEADERS = ("Zone Label", "Constraint", "Constrained Property", "Limit", "Limit Unit")

    def cells(self):
        return (self.zone_label, self.constraint, self.constrained_property, _plain(self.limit), self.unit)


@dataclass(frozen=True)
class ComplianceRow:
    nearby_parcel: str
    regulation: str
    constraint_type: str
    limit: Decimal
    unit: str
    actual_value: Optional[Decimal]
    status: ComplianceStatus
    geometry: Optional[Geometry] = None

    HEADERS = ("Nearby Parcel", "Regulation", "Constraint Type", "Limit", "Unit",
               "Actual Value", "Regulation Compliant?")

    def cells(self):
        return (
            self.nearby_parcel,
            self.regulation,
            self.constraint_type,
            _plain(self.limit),
            self.unit,
            "" if self.actual_value is None else _plain(self.actual_value),
            self.status.value,
        )


@dataclass(frozen=True)
class ServiceRow:
    service: str
    site_name: str
    capacity_type: str
    capacity: Decimal
    capacity_unit: str

    HEADERS = ("Service", "Name (if applicable)", "Capacity Type", "Capacity", "Capacity Unit")

    def cells(self):
        return (self.service, self.site_name, self.capacity_type, _plain(self.capacity), self.capacity_unit)


@dataclass(frozen=True)
class DemographicsRow:
    characteristic: str
    value: Decimal
    unit: str
    census_tract: str
    geometry: Optional[Geometry] = None

    HEADERS = ("Census Characteristic", "Value", "Unit", "Census Tract")

    def cells(self):
        return (self.characteristic, _plain(self.value), self.unit, self.census_tract)


@dataclass(frozen=True)
class AverageRow:
    label: str
    average: Decimal
    unit: str

    HEADERS = ("Label", "Average", "Unit")

    def cells(self):
        return (self.label, _plain(self.average), self.unit)


@dataclass(frozen=True)
class LandUseResult:
    allowed: tuple[str, ...]
    current: tuple[str, ...]


@dataclass
class ParcelFilters:
    vacant: Optional[bool] = None
    government_owned: Optional[bool] = None
    zoned_for_use: Optional[str] = None
    neighbourhood: Optional[str] = None
    area_range: Optional[tuple[Optional[float], Optional[float]]] = None
    perimeter_range: Optional[tuple[Optional[float], Optional[float]]] = None


def _plain(value: Decimal) -> str:
    text = format(value, "f")
    return text


def rows_to_csv(rows, headers=None) -> str:
    import csv as _csv
    import io as _io

    buf = _io.StringIO()
    writer = _csv.writer(buf, lineterminator="\n")
    if rows:
        writer.writerow(headers or rows[0].HEADERS)
        for row in rows:
            writer.writerow(row.cells())
    elif headers:
        writer.writerow(headers)
    return buf.getvalue()


class QueryEngine:
    def __init__(self, store: TripleStore, config: Optional[QueryConfig] = None):
        self.store = store
        self.config = config or QueryConfig()
        self._geoms = GeometryIndex(store)

    # -- plumbing ----------------------------------------------------------

    def _label(self, node: Term) -> Optional[str]:
        hit = self.store.object(node, vocab.RDFS_LABEL)
        return hit.value if hit is not None and hit.is_literal() else None

    def _comment(self, node: Term) -> Optional[str]:
        hit = self.store.object(node, vocab.RDFS_COMMENT)
        return hit.value if hit is not None and hit.is_literal() else None

    def _name(self, node: Term) -> Optional[str]:
        hit = self.store.object(node, vocab.GENPROP_HASNAME)
        return hit.value if hit is not None and hit.is_literal() else None

    def _geometry(self, node: Term) -> Optional[Geometry]:
        return self._geoms.get(node)

    def _measures(self, quantity: Term) -> list[tuple[Decimal, Optional[Term]]]:
        """(numeric value, unit node) for every measure under the quantity."""
        out = []
        for value_node in sorted(self.store.objects(quantity, vocab.I72_HASVALUE)):
            num = self.store.object(value_node, vocab.I72_HASNUMERICALVALUE)
            if num is None or not num.is_literal():
                continue
            try:
                value = Decimal(num.value)
            except InvalidOperation:
                continue
            unit = self.store.object(value_node, vocab.I72_HASUNIT)
            out.append((value, unit))
        return out

    def _unit_label(self, unit: Optional[Term]) -> str:
        if unit is None:
            return ""
        return self._label(unit) or ""

    def resolve_parcel(self, ref) -> Term:
        if isinstance(ref, ParcelRef):
            return ref.iri
        if isinstance(ref, Term):
            return ref
        return iri(ref)

    def parcel_ref(self, node: Term) -> ParcelRef:
        return ParcelRef(node, self._geometry(node))

    def parcels(self) -> list[Term]:
        return sorted(self.store.nodes_of_type(vocab.HP_PARCEL), key=lambda t: t.value)

    # -- parcel search -----------------------------------------------------

    def find_parcel_at(self, point: Geometry) -> Optional[ParcelRef]:
        """Parcel whose geometry intersects the point; ties broken by least
        IRI so the result is deterministic."""
        hits = []
        for parcel in self.parcels():
            geom = self._geometry(parcel)
            if geom is not None and intersects(geom, point):
                hits.append(parcel)
        if not hits:
            return None
        best = min(hits, key=lambda t: t.value)
        return ParcelRef(best, self._geometry(best))

    # -- parcel attributes ---------------------------------------------------

    def parcel_attributes(self, ref) -> list[AttributeRow]:
        parcel = self.resolve_parcel(ref)
        subprops = self.store.subproperty_closure()
        rows = set()
        for att_term, quantity in self._subject_edges(parcel):
            att_label = self._label(att_term)
            if att_label is None:
                continue
            measures = self._measures(quantity)
            if not measures:
                continue
            # suppress a super-property when a more specific sub-property
            # carries the same quantity for this parcel
            shadowed = False
            for sub, supers in subprops.items():
                if att_term in supers and sub != att_term and self.store.has(parcel, sub.value, quantity):
                    shadowed = True
                    break
            if shadowed:
                continue
            for value, unit in measures:
                rows.add(AttributeRow(att_label, value, self._unit_label(unit)))
        return sorted(rows, key=lambda r: (r.attribute, r.value))

    def _subject_edges(self, subject: Term) -> list[tuple[Term, Term]]:
        from .store import Pattern

        out = []
        for _, t in self.store.match(Pattern(subject=subject)):
            out.append((t.predicate, t.object))
        return sorted(set(out))

    # -- land use ------------------------------------------------------------

    def land_use(self, ref) -> LandUseResult:
        parcel = self.resolve_parcel(ref)
        allowed = set()
        for zone in self.store.objects(parcel, vocab.HP_ZONED_AS_TYPE):
            for use in self.store.objects(zone, vocab.OZ_ALLOWS_USE):
                name = self._name(use)
                if name:
                    allowed.add(name)
        current = set()
        for building in self.store.subjects(vocab.HP_OCCUPIES, parcel):
            for use in self.store.objects(building, vocab.BDG_USE):
                for code in self.store.objects(use, vocab.CODE_HASCODE):
                    name = self._name(code)
                    if name:
                        current.add(name)
        return LandUseResult(tuple(sorted(allowed)), tuple(sorted(current)))

    # -- zoning --------------------------------------------------------------

    def _constraint_kind_types(self, constraint: Term) -> list[tuple[Term, str]]:
        """Asserted constraint subtypes (direct subclasses of the base
        QuantityConstraint, base itself excluded) with labels."""
        base = iri(vocab.HP_QUANTITY_CONSTRAINT)
        out = []
        for ct in sorted(self.store.types_of(constraint)):
            if ct == base or not ct.is_iri():
                continue
            if not self.store.has(ct, vocab.RDFS_SUBCLASSOF, base):
                continue
            label = self._label(ct)
            if label:
                out.append((ct, label))
        return out

    def _constrained_property(self, constraint: Term) -> list[Term]:
        """The variable IRIs named by the constraint's parameter (which must
        also describe some population)."""
        out = []
        for param in sorted(self.store.objects(constraint, vocab.HP_CONSTRAINS)):
            if not self.store.objects(param, vocab.I72_DESCRIPTION_OF):
                continue
            for var in sorted(self.store.objects(param, vocab.I72_PARAMETER_OF_VAR)):
                for named in sorted(self.store.objects(var, vocab.I72_HASNAME)):
                    if named.is_iri():
                        out.append(named)
        return out

    def _bylaw_regulations_for(self, constraint: Term) -> list[Term]:
        regs = []
        for reg in sorted(self.store.subjects(vocab.HP_SPECIFIES_CONSTRAINT, constraint)):
            if not self.store.instance_of(reg, vocab.HP_REGULATION):
                continue
            in_bylaw = any(
                self.store.instance_of(src, vocab.HP_ZONING_BYLAW)
                for src in self.store.objects(reg, vocab.HP_DEFINED_IN)
            )
            if in_bylaw:
                regs.append(reg)
        return regs

    def applicable_zoning(self, ref) -> list[ZoningRow]:
        parcel = self.resolve_parcel(ref)
        parcel_geom = self._geometry(parcel)
        if parcel_geom is None:
            return []
        rows = {}
        for constraint in sorted(self.store.objects(parcel, vocab.HP_ZONED_FOR_CONSTRAINT)):
            kinds = self._constraint_kind_types(constraint)
            props = self._constrained_property(constraint)
            for reg in self._bylaw_regulations_for(constraint):
                zone_label = self._name(reg) or ""
                areas = []
                for area in sorted(self.store.objects(reg, vocab.HP_APPLIES_TO)):
                    geom = self._geometry(area)
                    if geom is not None and intersects(parcel_geom, geom):
                        areas.append(geom)
                if not areas:
                    continue
                for value, unit in self._measures(constraint):
                    for _, kind_label in kinds:
                        for prop in props:
                            prop_label = self._label(prop) or ""
                            key = (zone_label, kind_label, prop_label, value, self._unit_label(unit))
                            rows.setdefault(key, areas[0])
        return sorted(
            (ZoningRow(z, c, p, v, u, geom) for (z, c, p, v, u), geom in rows.items()),
            key=lambda r: (r.zone_label, r.constrained_property, r.constraint, r.limit),
        )

    def list_constrained_attributes(self) -> list[tuple[str, str]]:
        """(property IRI, label) across bylaw regulations; feeds the
        compliance attribute dropdown."""
        out = set()
        for reg, constraint in self.store.subject_object_pairs(vocab.HP_SPECIFIES_CONSTRAINT):
            if not self.store.instance_of(reg, vocab.HP_REGULATION):
                continue
            if not any(
                self.store.instance_of(src, vocab.HP_ZONING_BYLAW)
                for src in self.store.objects(reg, vocab.HP_DEFINED_IN)
            ):
                continue
            if not any(
                self.store.objects(area, vocab.LOC_HASLOCATION)
                or self.store.objects(area, vocab.LOC_OLD_HASLOCATION)
                for area in self.store.objects(reg, vocab.HP_APPLIES_TO)
            ):
                continue
            if not self._measures(constraint):
                continue
            for prop in self._constrained_property(constraint):
                label = self._label(prop)
                if label:
                    out.add((prop.value, label))
        return sorted(out, key=lambda pair: (pair[1], pair[0]))

    def zoning_compliance(
        self, ref, attribute: str, radius_m: Optional[float] = None
    ) -> list[ComplianceRow]:
        parcel = self.resolve_parcel(ref)
        radius = self.config.compliance_radius_m if radius_m is None else radius_m
        parcel_geom = self._geometry(parcel)
        if parcel_geom is None:
            return []
        attribute_term = iri(attribute)
        rows = {}
        for nearby in self.parcels():
            geom = self._geometry(nearby)
            if geom is None or distance_m(parcel_geom, geom) > radius:
                continue
            actuals = self._actual_values(nearby, attribute)
            for constraint in sorted(self.store.objects(nearby, vocab.HP_ZONED_FOR_CONSTRAINT)):
                if attribute_term not in self._constrained_property(constraint):
                    continue
                regs = [
                    reg
                    for reg in self._bylaw_regulations_for(constraint)
                    if any(
                        self.store.objects(area, vocab.LOC_HASLOCATION)
                        or self.store.objects(area, vocab.LOC_OLD_HASLOCATION)
                        for area in self.store.objects(reg, vocab.HP_APPLIES_TO)
                    )
                ]
                if not regs:
                    continue
                kinds = self._constraint_kind_types(constraint)
                for reg in regs:
                    regulation_label = self._name(reg) or ""
                    for limit, limit_unit in self._measures(constraint):
                        for kind_class, kind_label in kinds:
                            kind = _KIND_BY_CLASS.get(kind_class.value)
                            for actual_value, actual_unit in actuals or [(None, None)]:
                                status = self._status(
                                    kind, limit, limit_unit, actual_value, actual_unit, attribute
                                )
                                row = ComplianceRow(
                                    nearby_parcel=_local_name(nearby),
                                    regulation=regulation_label,
                                    constraint_type=kind_label,
                                    limit=limit,
                                    unit=self._unit_label(limit_unit),
                                    actual_value=actual_value,
                                    status=status,
                                    geometry=geom,
                                )
                                rows[(row.nearby_parcel, row.regulation, row.constraint_type,
                                      row.limit, row.unit, row.actual_value, row.status)] = row
        return sorted(
            rows.values(),
            key=lambda r: (r.nearby_parcel, r.regulation, r.constraint_type, r.limit,
                           r.actual_value if r.actual_value is not None else Decimal(0)),
        )

    def _actual_values(self, parcel: Term, attribute: str) -> list[tuple[Decimal, Optional[Term]]]:
        """Actual measures for the attribute: from the parcel itself, else
        from a building occupying it."""
        own = []
        for quantity in sorted(self.store.objects(parcel, attribute)):
            own.extend(self._measures(quantity))
        if own:
            return own
        via_building = []
        for building in sorted(self.store.subjects(vocab.HP_OCCUPIES, parcel)):
            for quantity in sorted(self.store.objects(building, attribute)):
                via_building.extend(self._measures(quantity))
        return via_building

    def _status(self, kind, limit, limit_unit, actual_value, actual_unit, attribute) -> ComplianceStatus:
        if kind is None:
            return ComplianceStatus.UNKNOWN
        constraint = QuantityConstraint(
            kind,
            Measure(limit, _unit_from_node(limit_unit)),
            attribute,
        )
        actual = None
        if actual_value is not None:
            actual = Measure(actual_value, _unit_from_node(actual_unit))
        return evaluate_constraint(constraint, actual)

    # -- demographics ----------------------------------------------------------

    def _neighbourhoods_of(self, parcel_geom: Geometry) -> list[Term]:
        out = []
        for node in sorted(self.store.nodes_of_type(self.config.neighbourhood_class)):
            geom = self._geometry(node)
            if geom is not None and within(parcel_geom, geom):
                out.append(node)
        return out

    def neighbourhood_demographics(
        self, ref, characteristics: Optional[Sequence[str]] = None
    ) -> list[DemographicsRow]:
        parcel = self.resolve_parcel(ref)
        classes = list(characteristics if characteristics is not None else self.config.demographic_classes)
        parcel_geom = self._geometry(parcel)
        if parcel_geom is None:
            return []
        neighbourhoods = self._neighbourhoods_of(parcel_geom)
        if not neighbourhoods:
            log.info("parcel %s lies in no neighbourhood", parcel.value)
            return []
        rows = set()
        for cls in classes:
            cls_term = iri(cls)
            for x in sorted(self.store.subjects(vocab.RDF_TYPE, cls_term)):
                label = self._comment(x)
                if label is None:
                    continue
                tract_hits = []
                for area in sorted(self.store.objects(x, vocab.CACENSUS_HASLOCATION)):
                    in_hood = any(
                        self.store.has(area, vocab.TOR_IN_NEIGHBOURHOOD, n)
                        for n in neighbourhoods
                    )
                    if not in_hood:
                        continue
                    tract_label = self._label(area)
                    if tract_label is None:
                        continue
                    tract_hits.append((tract_label, self._geometry(area)))
                if not tract_hits:
                    continue
                for value, unit in self._measures(x):
                    for tract_label, tract_geom in tract_hits:
                        rows.add(
                            DemographicsRow(label, value, self._unit_label(unit), tract_label, tract_geom)
                        )
        return sorted(rows, key=lambda r: (r.characteristic, r.census_tract, r.value))

    # -- services ------------------------------------------------------------

    def leaf_service_types(self) -> list[Term]:
        """Service classes with no declared subclass (stage 1 of the
        available-services query)."""
        closure = self.store.subclass_closure()
        service = iri(vocab.HP_SERVICE)
        candidates = {service} | {
            cls for cls, supers in closure.items() if service in supers
        }
        nothing = vocab.OWL_NOTHING
        leaves = []
        for cand in candidates:
            has_sub = any(
                cand in supers and cls != cand and cls.value != nothing
                for cls, supers in closure.items()
            )
            if not has_sub:
                leaves.append(cand)
        return sorted(leaves, key=lambda t: t.value)

    def _service_site_name(self, service: Term) -> str:
        for site in sorted(self.store.objects(service, vocab.HP_PROVIDED_FROM_SITE)):
            name = self._name(site)
            if name:
                return name
        return ""

    def _capacity_rows(self, service: Term, type_label: str) -> list[ServiceRow]:
        rows = []
        site_name = self._service_site_name(service)
        for cap in sorted(self.store.objects(service, vocab.RES_HAS_AVAILABLE_CAPACITY)):
            leaf_types = [
                (t, self._label(t))
                for t in sorted(self.store.most_specific_types(cap))
            ]
            leaf_types = [(t, lbl) for t, lbl in leaf_types if lbl]
            for value, unit in self._measures(cap):
                for _, cap_label in leaf_types:
                    rows.append(
                        ServiceRow(type_label, site_name, cap_label, value, self._unit_label(unit))
                    )
        return rows

    def available_services(self, ref) -> list[ServiceRow]:
        parcel = self.resolve_parcel(ref)
        if not self.store.instance_of(parcel, vocab.HP_ADMINISTRATIVE_AREA):
            return []
        parcel_geom = self._geometry(parcel)
        rows = set()
        for leaf in self.leaf_service_types():
            type_label = self._label(leaf)
            if not type_label:
                continue
            # catchment path: materialized servicedBy edges
            for service in sorted(self.store.objects(parcel, vocab.HP_SERVICED_BY)):
                if leaf in self.store.types_of(service) and self.store.instance_of(service, vocab.HP_SERVICE):
                    rows.update(self._capacity_rows(service, type_label))
            # radius path: site proximity against the service-declared radius
            if parcel_geom is None:
                continue
            for service in sorted(self.store.subjects(vocab.RDF_TYPE, leaf)):
                if not self.store.instance_of(service, vocab.HP_SERVICE):
                    continue
                radius = self._declared_radius(service)
                if radius is None:
                    radius = self.config.amenity_radius_m
                if radius is None:
                    continue
                hit = False
                for site in sorted(self.store.objects(service, vocab.HP_PROVIDED_FROM_SITE)):
                    geom = self._geometry(site)
                    if geom is not None and distance_m(parcel_geom, geom) <= radius:
                        hit = True
                        break
                if hit:
                    rows.update(self._capacity_rows(service, type_label))
        return sorted(rows, key=lambda r: (r.service, r.site_name, r.capacity_type, r.capacity))

    def _declared_radius(self, service: Term) -> Optional[float]:
        for radius_node in sorted(self.store.objects(service, vocab.HP_HAS_SERVICE_RADIUS)):
            for value, _unit in self._measures(radius_node):
                return float(value)
        return None

    # -- averages --------------------------------------------------------------

    def city_averages(self, kind: str) -> list[AverageRow]:
        if kind == "demographics":
            return self._demographic_averages()
        if kind == "services":
            return self._service_averages()
        if kind == "zoning":
            return self._zoning_averages()
        raise ValueError(f"unknown averages kind: {kind!r}")

    def _demographic_averages(self) -> list[AverageRow]:
        rows = []
        for cls in self.config.demographic_classes:
            cls_term = iri(cls)
            label = self._label(cls_term) or _local_name(cls_term)
            values = []
            unit_labels = set()
            for x in sorted(self.store.subjects(vocab.RDF_TYPE, cls_term)):
                for value, unit in self._measures(x):
                    values.append(value)
                    unit_label = self._unit_label(unit)
                    if unit_label:
                        unit_labels.add(unit_label)
            if values:
                avg = sum(values) / Decimal(len(values))
                rows.append(AverageRow(label, avg, min(unit_labels) if unit_labels else ""))
        return sorted(rows, key=lambda r: r.label)

    def _service_averages(self) -> list[AverageRow]:
        groups: dict[tuple[str, str], list[Decimal]] = {}
        for leaf in self.leaf_service_types():
            type_label = self._label(leaf)
            if not type_label:
                continue
            for service in sorted(self.store.subjects(vocab.RDF_TYPE, leaf)):
                for cap in sorted(self.store.objects(service, vocab.RES_HAS_AVAILABLE_CAPACITY)):
                    leaf_caps = [
                        self._label(t) for t in sorted(self.store.most_specific_types(cap))
                    ]
                    leaf_caps = [l for l in leaf_caps if l]
                    for value, unit in self._measures(cap):
                        for cap_label in leaf_caps:
                            unit_name = f"{cap_label}({self._unit_label(unit)})"
                            groups.setdefault((type_label, unit_name), []).append(value)
        rows = [
            AverageRow(label, sum(vals) / Decimal(len(vals)), unit)
            for (label, unit), vals in groups.items()
        ]
        return sorted(rows, key=lambda r: (r.label, r.unit))

    def _zoning_averages(self) -> list[AverageRow]:
        groups: dict[tuple[str, str], list[Decimal]] = {}
        for reg, constraint in self.store.subject_object_pairs(vocab.HP_SPECIFIES_CONSTRAINT):
            if not self.store.instance_of(reg, vocab.HP_REGULATION):
                continue
            if not any(
                self.store.instance_of(src, vocab.HP_ZONING_BYLAW)
                for src in self.store.objects(reg, vocab.HP_DEFINED_IN)
            ):
                continue
            props = self._constrained_property(constraint)
            for limit, unit in self._measures(constraint):
                if limit < 0:
                    continue  # negative limits mean "no limit"
                for prop in props:
                    label = self._label(prop) or _local_name(prop)
                    groups.setdefault((label, self._unit_label(unit)), []).append(limit)
        rows = [
            AverageRow(label, sum(vals) / Decimal(len(vals)), unit)
            for (label, unit), vals in groups.items()
        ]
        return sorted(rows, key=lambda r: (r.label, r.unit))

    # -- advanced search ---------------------------------------------------------

    def advanced_parcel_search(self, filters: ParcelFilters) -> list[ParcelRef]:
        out = []
        for parcel in self.parcels():
            if filters.vacant is not None:
                occupied = bool(self.store.subjects(vocab.HP_OCCUPIES, parcel))
                if filters.vacant == occupied:
                    continue
            if filters.government_owned is not None:
                owned = any(
                    self.store.instance_of(owner, vocab.ORG_GOVERNMENT_ORGANIZATION)
                    for owner in self.store.objects(parcel, vocab.HP_OWNERSHIP)
                )
                if owned != filters.government_owned:
                    continue
            if filters.zoned_for_use is not None:
                wanted = filters.zoned_for_use
                uses = set()
                for zone in self.store.objects(parcel, vocab.HP_ZONED_AS_TYPE):
                    for use in self.store.objects(zone, vocab.OZ_ALLOWS_USE):
                        uses.add(use.value)
                        name = self._name(use)
                        if name:
                            uses.add(name)
                if wanted not in uses:
                    continue
            if filters.neighbourhood is not None:
                geom = self._geometry(parcel)
                if geom is None:
                    continue
                hit = False
                for hood in self._neighbourhoods_of(geom):
                    names = {hood.value, self._comment(hood) or "", self._name(hood) or ""}
                    if filters.neighbourhood in names:
                        hit = True
                        break
                if not hit:
                    continue
            if filters.area_range is not None and not self._measure_in_range(
                parcel, vocab.HP_HAS_AREA, filters.area_range
            ):
                continue
            if filters.perimeter_range is not None and not self._measure_in_range(
                parcel, vocab.HP_HAS_PERIMETER, filters.perimeter_range
            ):
                continue
            out.append(self.parcel_ref(parcel))
        return out

    def _measure_in_range(self, parcel: Term, predicate: str, bounds) -> bool:
        lo, hi = bounds
        for quantity in self.store.objects(parcel, predicate):
            for value, _unit in self._measures(quantity):
                if (lo is None or value >= Decimal(str(lo))) and (
                    hi is None or value <= Decimal(str(hi))
                ):
                    return True
        return False


def _unit_from_node(node: Optional[Term]) -> Optional[Unit]:
    if node is None:
        return None
    return Unit(node.value)


def _local_name(term: Term) -> str:
    value = term.value
    for sep in ("#", "/"):
        if sep in value:
            return value.rsplit(sep, 1)[1]
    return value
