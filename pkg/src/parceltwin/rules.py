"""Forward-chaining materialization.

Two rule families run to a joint fixpoint and write their conclusions into
the reserved `urn:inferred` graph, keeping asserted data pristine:

- property chains over the zoning vocabulary (hasZone, the three-step
  appliesTo chain, definesRegulation through bylaw parts, definedIn through
  part-of, and part-of transitivity), plus generic subPropertyOf and
  inverseOf propagation driven by schema edges;
- the three geospatial updates: zonedAsType, zonedForConstraint, and
  servicedBy (catchment overlap or site-radius proximity).

A bounding-box grid prefilters candidate pairs before the exact predicates
run; results are identical to the all-pairs evaluation.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable, Optional

from . import vocab
from .geo import Geometry, WktParseError, distance_m, intersects, parse_wkt
from .store import Pattern, Term, Triple, TripleStore, iri

log = logging.getLogger(__name__)

FORWARD = "forward"
INVERSE = "inverse"


@dataclass(frozen=True)
class ChainRule:
    """premise: ordered property steps, each (predicate IRI, direction);
    conclusion: derived predicate."""

    steps: tuple[tuple[str, str], ...]
    conclusion: str
    name: str = ""

    def __post_init__(self):
        if not self.steps:
            raise ValueError("chain premise needs at least one step")


def built_in_chains() -> list[ChainRule]:
    return [
        ChainRule(
            ((vocab.HP_DEFINED_FOR, INVERSE), (vocab.HP_DESIGNATES_ZONING_TYPE, FORWARD)),
            vocab.HP_HAS_ZONE,
            name="hasZone",
        ),
        ChainRule(
            (
                (vocab.OPR_FOR_ZONING_TYPE, FORWARD),
                (vocab.HP_ZONING_TYPE_DESIGNATED_BY, FORWARD),
                (vocab.HP_DEFINED_FOR, FORWARD),
            ),
            vocab.HP_APPLIES_TO,
            name="appliesToViaZoningType",
        ),
        ChainRule(
            ((vocab.MER_HAS_PROPER_PART, FORWARD), (vocab.HP_DEFINES_REGULATION, FORWARD)),
            vocab.HP_DEFINES_REGULATION,
            name="definesRegulationViaPart",
        ),
        ChainRule(
            ((vocab.HP_DEFINED_IN, FORWARD), (vocab.MER_PROPER_PART_OF, FORWARD)),
            vocab.HP_DEFINED_IN,
            name="definedInViaPartOf",
        ),
        # part-of is transitive; expressed as an explicit chain
        ChainRule(
            ((vocab.MER_HAS_PROPER_PART, FORWARD), (vocab.MER_HAS_PROPER_PART, FORWARD)),
            vocab.MER_HAS_PROPER_PART,
            name="hasProperPartTransitive",
        ),
    ]


@dataclass
class RuleConfig:
    """Tunables for the geospatial rules. Radii are metres; per-class radii
    apply when a service carries no hasServiceRadius of its own."""

    class_radii: dict[str, float] = field(
        default_factory=lambda: {
            vocab.HP + "LibraryService": 2000.0,
            vocab.HP + "CommunityCentreService": 2000.0,
            vocab.HP + "ParkService": 800.0,
        }
    )
    default_service_radius_m: Optional[float] = None
    service_classes: Optional[set[str]] = None  # None = all service classes

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> "RuleConfig":
        """Build from flat config keys: service_radius.<ClassLocalNameOrIri>,
        default_service_radius, service_classes (comma separated)."""
        config = cls()
        for key, raw in values.items():
            if key.startswith("service_radius."):
                name = key[len("service_radius."):]
                iri_key = name if "://" in name else vocab.HP + name
                config.class_radii[iri_key] = float(raw)
            elif key == "default_service_radius":
                config.default_service_radius_m = float(raw)
            elif key == "service_classes":
                config.service_classes = {
                    n if "://" in n else vocab.HP + n
                    for n in (part.strip() for part in raw.split(","))
                    if n
                }
        return config


@dataclass
class RuleReport:
    counts: dict[str, dict[str, int]] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)
    wall_time_s: float = 0.0
    new_triples: int = 0

    def bump(self, rule: str, key: str, amount: int = 1) -> None:
        bucket = self.counts.setdefault(
            rule, {"pairs_tested": 0, "edges_added": 0, "skipped": 0}
        )
        bucket[key] = bucket.get(key, 0) + amount

    def diagnostic(self, rule: str, message: str) -> None:
        self.bump(rule, "skipped")
        self.diagnostics.append(f"rule={rule} reason={message}")

    def log_lines(self) -> list[str]:
        lines = []
        for rule in sorted(self.counts):
            c = self.counts[rule]
            lines.append(
                f"rule={rule} pairs_tested={c.get('pairs_tested', 0)} "
                f"edges_added={c.get('edges_added', 0)} skipped={c.get('skipped', 0)}"
            )
        lines.append(f"new_triples={self.new_triples} wall_time_s={self.wall_time_s:.3f}")
        return lines

    def to_dict(self) -> dict:
        return {
            "rules": self.counts,
            "diagnostics": self.diagnostics,
            "new_triples": self.new_triples,
            "wall_time_s": self.wall_time_s,
        }


# --- geometry access ------------------------------------------------------


class GeometryIndex:
    """Resolves and caches node geometries. A node's geometry is its own
    geo:asWKT literal, or the one reached through (old or new namespace)
    hasLocation."""

    def __init__(self, store: TripleStore, report: Optional[RuleReport] = None, rule: str = "geometry"):
        self.store = store
        self.report = report
        self.rule = rule
        self._cache: dict[Term, Optional[Geometry]] = {}

    def get(self, node: Term) -> Optional[Geometry]:
        if node in self._cache:
            return self._cache[node]
        geom = self._resolve(node)
        self._cache[node] = geom
        return geom

    def _wkt_literals(self, node: Term) -> list[Term]:
        hits = self.store.objects(node, vocab.GEO_ASWKT)
        if hits:
            return sorted(hits)
        for pred in (vocab.LOC_HASLOCATION, vocab.LOC_OLD_HASLOCATION):
            for loc_node in sorted(self.store.objects(node, pred)):
                nested = self.store.objects(loc_node, vocab.GEO_ASWKT)
                if nested:
                    return sorted(nested)
        return []

    def _resolve(self, node: Term) -> Optional[Geometry]:
        for lit in self._wkt_literals(node):
            if not lit.is_literal():
                continue
            try:
                return parse_wkt(lit.value)
            except WktParseError as exc:
                if self.report is not None:
                    self.report.diagnostic(
                        self.rule, f"invalid geometry on {node.value}: {exc}"
                    )
                return None
        return None


class _BBoxGrid:
    """Uniform grid over bounding boxes for candidate prefiltering."""

    def __init__(self, items: list[tuple[int, tuple[float, float, float, float]]]):
        self.items = items
        if items:
            spans = [max(b[2] - b[0], b[3] - b[1], 1e-6) for _, b in items]
            self.cell = max(sorted(spans)[len(spans) // 2] * 2.0, 1e-5)
        else:
            self.cell = 1.0
        self.cells: dict[tuple[int, int], list[int]] = {}
        for key, bbox in items:
            for cell in self._cover(bbox):
                self.cells.setdefault(cell, []).append(key)

    def _cover(self, bbox, pad: float = 0.0):
        x0, y0, x1, y1 = bbox
        cx0 = math.floor((x0 - pad) / self.cell)
        cx1 = math.floor((x1 + pad) / self.cell)
        cy0 = math.floor((y0 - pad) / self.cell)
        cy1 = math.floor((y1 + pad) / self.cell)
        for cx in range(cx0, cx1 + 1):
            for cy in range(cy0, cy1 + 1):
                yield (cx, cy)

    def candidates(self, bbox, pad_deg: float = 0.0) -> set[int]:
        out: set[int] = set()
        for cell in self._cover(bbox, pad_deg):
            out.update(self.cells.get(cell, ()))
        return out


def _radius_pad_deg(radius_m: float, areas: list[tuple[Term, Geometry]]) -> float:
    """Degrees that safely cover radius_m at the latitudes the areas span."""
    max_lat = 0.0
    for _, geom in areas:
        _, y0, _, y1 = geom.bbox()
        max_lat = max(max_lat, abs(y0), abs(y1))
    cos_lat = max(math.cos(math.radians(min(max_lat, 89.0))), 0.02)
    return radius_m / (110_000.0 * cos_lat)


def _located_admin_areas(store: TripleStore, geoms: GeometryIndex) -> list[tuple[Term, Geometry]]:
    areas = []
    for node in store.nodes_of_type(vocab.HP_ADMINISTRATIVE_AREA):
        geom = geoms.get(node)
        if geom is not None:
            areas.append((node, geom))
    return sorted(areas, key=lambda pair: pair[0].value)


def _area_grid(areas: list[tuple[Term, Geometry]]) -> _BBoxGrid:
    return _BBoxGrid([(idx, geom.bbox()) for idx, (_, geom) in enumerate(areas)])


# --- chain application ----------------------------------------------------


def _edges(store: TripleStore, predicate: str, direction: str) -> list[tuple[Term, Term]]:
    pairs = store.subject_object_pairs(predicate)
    if direction == INVERSE:
        return [(o, s) for s, o in pairs]
    return pairs


def _chain_conclusions(store: TripleStore, rule: ChainRule) -> set[tuple[Term, Term]]:
    pred, direction = rule.steps[0]
    pairs = _edges(store, pred, direction)
    for pred, direction in rule.steps[1:]:
        if not pairs:
            return set()
        nexts: dict[Term, list[Term]] = {}
        for x, y in _edges(store, pred, direction):
            nexts.setdefault(x, []).append(y)
        pairs = [(x, z) for x, y in pairs for z in nexts.get(y, ())]
    return {(x, y) for x, y in pairs if not x.is_literal()}


def apply_chains(
    store: TripleStore,
    rules: Optional[Iterable[ChainRule]] = None,
    report: Optional[RuleReport] = None,
) -> int:
    """Run chain rules plus schema-driven subPropertyOf and inverseOf
    propagation to fixpoint. Returns the number of triples added this call."""
    chain_rules = list(built_in_chains() if rules is None else rules)
    report = report or RuleReport()
    added_total = 0
    while True:
        added = 0
        for rule in chain_rules:
            name = rule.name or rule.conclusion
            conclusion = iri(rule.conclusion)
            for x, y in _chain_conclusions(store, rule):
                report.bump(name, "pairs_tested")
                if store.insert(vocab.GRAPH_INFERRED, Triple(x, conclusion, y)):
                    report.bump(name, "edges_added")
                    added += 1

        for sub, sup in store.subject_object_pairs(vocab.RDFS_SUBPROPERTYOF):
            if not (sub.is_iri() and sup.is_iri()):
                continue
            for s, o in store.subject_object_pairs(sub.value):
                if store.insert(vocab.GRAPH_INFERRED, Triple(s, iri(sup.value), o)):
                    report.bump("subPropertyOf", "edges_added")
                    added += 1

        inverse_pairs = store.subject_object_pairs(vocab.OWL_INVERSEOF)
        for p, q in inverse_pairs:
            if not (p.is_iri() and q.is_iri()):
                continue
            for direction in ((p, q), (q, p)):
                src, dst = direction
                for s, o in store.subject_object_pairs(src.value):
                    if o.is_literal():
                        continue
                    if store.insert(vocab.GRAPH_INFERRED, Triple(o, iri(dst.value), s)):
                        report.bump("inverseOf", "edges_added")
                        added += 1

        added_total += added
        if added == 0:
            return added_total


# --- geospatial rules -----------------------------------------------------


def _regulation_targets(
    store: TripleStore, link_predicate: str, area_predicate: str, geoms: GeometryIndex,
    report: RuleReport, rule: str,
) -> list[tuple[Term, Geometry]]:
    """(conclusion object, regulated-area geometry) pairs: for each
    (regulation, link_predicate, obj), every located area the regulation is
    tied to through area_predicate."""
    out = []
    for reg, obj in sorted(store.subject_object_pairs(link_predicate)):
        located = []
        for area in store.objects(reg, area_predicate):
            geom = geoms.get(area)
            if geom is not None:
                located.append(geom)
        if not located:
            report.diagnostic(rule, f"regulation {reg.value} has no located area")
            continue
        for geom in located:
            out.append((obj, geom))
    return out


def _materialize_overlap_rule(
    store: TripleStore,
    rule_name: str,
    link_predicate: str,
    area_predicate: str,
    conclusion_predicate: str,
    report: RuleReport,
) -> int:
    geoms = GeometryIndex(store, report, rule_name)
    areas = _located_admin_areas(store, geoms)
    grid = _area_grid(areas)
    targets = _regulation_targets(store, link_predicate, area_predicate, geoms, report, rule_name)
    conclusion = iri(conclusion_predicate)
    added = 0
    for obj, target_geom in targets:
        for idx in grid.candidates(target_geom.bbox()):
            node, area_geom = areas[idx]
            report.bump(rule_name, "pairs_tested")
            if intersects(area_geom, target_geom):
                if store.insert(vocab.GRAPH_INFERRED, Triple(node, conclusion, obj)):
                    report.bump(rule_name, "edges_added")
                    added += 1
    return added


def materialize_zoned_as_type(store: TripleStore, report: Optional[RuleReport] = None) -> int:
    """Area overlaps the area a regulation designates a zoning type for
    => (area, zonedAsType, zoningType)."""
    return _materialize_overlap_rule(
        store,
        "zonedAsType",
        vocab.HP_DESIGNATES_ZONING_TYPE,
        vocab.HP_DEFINED_FOR,
        vocab.HP_ZONED_AS_TYPE,
        report or RuleReport(),
    )


def materialize_zoned_for_constraint(store: TripleStore, report: Optional[RuleReport] = None) -> int:
    """Area overlaps an area a regulation's constraint applies to
    => (area, zonedForConstraint, constraint). Uses appliesTo so that
    constraints tied to zoning types (via the chain) reach the designated
    areas as well as directly defined ones."""
    return _materialize_overlap_rule(
        store,
        "zonedForConstraint",
        vocab.HP_SPECIFIES_CONSTRAINT,
        vocab.HP_APPLIES_TO,
        vocab.HP_ZONED_FOR_CONSTRAINT,
        report or RuleReport(),
    )


def _numeric(term: Optional[Term]) -> Optional[float]:
    if term is None or not term.is_literal():
        return None
    try:
        return float(Decimal(term.value))
    except Exception:
        return None


def service_radius_m(store: TripleStore, service: Term, config: RuleConfig) -> Optional[float]:
    """A service's own hasServiceRadius measure, else its class default."""
    for radius_node in store.objects(service, vocab.HP_HAS_SERVICE_RADIUS):
        for value_node in store.objects(radius_node, vocab.I72_HASVALUE):
            value = _numeric(store.object(value_node, vocab.I72_HASNUMERICALVALUE))
            if value is not None:
                return value
        # tolerate a measure attached directly
        value = _numeric(store.object(radius_node, vocab.I72_HASNUMERICALVALUE))
        if value is not None:
            return value
    closure = store.subclass_closure()
    candidates: list[Term] = []
    for t in sorted(store.types_of(service)):
        candidates.append(t)
        candidates.extend(sorted(closure.get(t, ())))
    for cls in candidates:
        if cls.is_iri() and cls.value in config.class_radii:
            return config.class_radii[cls.value]
    return config.default_service_radius_m


def materialize_serviced_by(
    store: TripleStore,
    config: Optional[RuleConfig] = None,
    report: Optional[RuleReport] = None,
) -> int:
    """Area overlaps a service catchment, or lies within the service radius
    of one of its sites => (area, servicedBy, service)."""
    config = config or RuleConfig()
    report = report if report is not None else RuleReport()
    rule = "servicedBy"
    geoms = GeometryIndex(store, report, rule)
    areas = _located_admin_areas(store, geoms)
    grid = _area_grid(areas)
    conclusion = iri(vocab.HP_SERVICED_BY)
    added = 0

    services = sorted(store.nodes_of_type(vocab.HP_SERVICE), key=lambda t: t.value)
    for service in services:
        if config.service_classes is not None:
            if not any(
                store.is_subclass(t, iri(cls))
                for t in store.types_of(service)
                for cls in config.service_classes
            ):
                continue

        catchments = []
        for catchment in store.objects(service, vocab.SERVICE_HAS_CATCHMENT_AREA):
            geom = geoms.get(catchment)
            if geom is None:
                report.diagnostic(rule, f"catchment of {service.value} has no usable geometry")
            else:
                catchments.append(geom)

        radius = service_radius_m(store, service, config)
        sites = []
        for site in store.objects(service, vocab.HP_PROVIDED_FROM_SITE):
            geom = geoms.get(site)
            if geom is None:
                report.diagnostic(rule, f"site of {service.value} has no usable geometry")
            else:
                sites.append(geom)

        if not catchments and not (sites and radius is not None):
            continue

        matched: set[int] = set()
        for geom in catchments:
            for idx in grid.candidates(geom.bbox()):
                if idx in matched:
                    continue
                report.bump(rule, "pairs_tested")
                if intersects(areas[idx][1], geom):
                    matched.add(idx)
        if radius is not None:
            # conservative degree padding (longitude shrinks by cos(lat));
            # the exact distance check still decides every candidate
            pad = _radius_pad_deg(radius, areas)
            for geom in sites:
                for idx in grid.candidates(geom.bbox(), pad_deg=pad):
                    if idx in matched:
                        continue
                    report.bump(rule, "pairs_tested")
                    if distance_m(areas[idx][1], geom) <= radius:
                        matched.add(idx)

        for idx in sorted(matched):
            if store.insert(vocab.GRAPH_INFERRED, Triple(areas[idx][0], conclusion, service)):
                report.bump(rule, "edges_added")
                added += 1
    return added


def run_all(
    store: TripleStore,
    config: Optional[RuleConfig] = None,
    chain_rules: Optional[Iterable[ChainRule]] = None,
) -> RuleReport:
    """Clear and rebuild the inferred graph: chains then geospatial rules,
    repeated until no rule adds a triple. `new_triples` counts conclusions
    that were not present before this run, so a second run reports 0."""
    config = config or RuleConfig()
    report = RuleReport()
    start = time.monotonic()

    before = {t for _, t in store.match(Pattern(graph=vocab.GRAPH_INFERRED))}
    store.drop_graph(vocab.GRAPH_INFERRED)

    while True:
        added = apply_chains(store, chain_rules, report)
        added += materialize_zoned_as_type(store, report)
        added += materialize_zoned_for_constraint(store, report)
        added += materialize_serviced_by(store, config, report)
        if added == 0:
            break

    after = {t for _, t in store.match(Pattern(graph=vocab.GRAPH_INFERRED))}
    report.new_triples = len(after - before)
    report.wall_time_s = time.monotonic() - start
    for line in report.log_lines():
        log.info("%s", line)
    return report
