"""Declarative row-to-triples mapping pipeline.

A mapping document is a flat text file with three sections:

    [source]
    name = toronto-parcels
    kind = geojson            # csv | geojson
    graph = urn:dataset/toronto-parcels
    columns = PARCELID, STATEDAREA, Perimeter
    filter = ZN_HOLDING == "N"    # optional row filter

    [derived]                      # optional per-file constants
    data_source = provincial

    [prefixes]
    tor = http://ontology.eil.utoronto.ca/Toronto/Toronto#

    [templates]
    tor:Property{PARCELID} rdf:type hp:Parcel
    tor:PropertyLoc{PARCELID} geo:asWKT @geometry
    tor:zone_{GEN_ZONE} hp:subZoningType tor:zone_{ZN_ZONE} if ZN_ZONE

Each template line is subject / predicate / object, where a position is an
absolute `<iri>`, a prefixed name (curly-bracket placeholders draw from row
fields), a quoted literal with optional `^^datatype`, or `@geometry` (the
row geometry re-emitted as canonical WKT). Conditions are `if FIELD`,
`if FIELD == "v"`, or `if FIELD != "v"`.

Row-level problems (empty placeholder fields, invalid geometry, ragged CSV
rows) never abort a run; they are collected as diagnostics with row numbers.
"""

from __future__ import annotations

import csv
import io
import json
import re
import urllib.parse
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

from . import vocab
from .geo import Geometry, WktParseError, linestring, multipolygon, point, polygon, serialize_wkt
from .store import Term, Triple, TripleStore, iri, literal, triple

WKT_DT = vocab.GEO_WKT_LITERAL


class MappingError(ValueError):
    pass


@dataclass
class SourceRow:
    columns: dict[str, str]
    geometry: Optional[Geometry] = None
    number: int = 0

    def get(self, name: str) -> Optional[str]:
        return self.columns.get(name)


@dataclass(frozen=True)
class Condition:
    field: str
    op: str  # nonempty | eq | ne
    value: str = ""

    def holds(self, row: SourceRow, derived: dict[str, str]) -> bool:
        raw = row.columns.get(self.field, derived.get(self.field, ""))
        raw = "" if raw is None else str(raw)
        if self.op == "nonempty":
            return raw != ""
        if self.op == "eq":
            return raw == self.value
        return raw != self.value


_PLACEHOLDER = re.compile(r"\{([^{}]+)\}")


@dataclass(frozen=True)
class Slot:
    """One compiled triple position."""

    kind: str  # iri | literal | geometry
    template: str = ""
    datatype: Optional[str] = None

    def placeholders(self) -> list[str]:
        return _PLACEHOLDER.findall(self.template)


@dataclass(frozen=True)
class TripleTemplate:
    id: str
    subject: Slot
    predicate: Slot
    object: Slot
    condition: Optional[Condition] = None
    line: str = ""


@dataclass
class MappingSpec:
    name: str
    kind: str
    target_graph: str
    required_columns: list[str]
    prefixes: dict[str, str]
    templates: list[TripleTemplate]
    row_filter: Optional[Condition] = None
    derived: dict[str, str] = field(default_factory=dict)


def _sanitize_iri_value(value: str) -> str:
    """Field values substituted into IRI slots: spaces become underscores,
    anything URL-unsafe is percent-encoded."""
    return urllib.parse.quote(value.replace(" ", "_"), safe="._~-")


def _parse_condition(text: str) -> Condition:
    m = re.fullmatch(r'(\S+)\s*(==|!=)\s*"([^"]*)"', text.strip())
    if m:
        return Condition(m.group(1), "eq" if m.group(2) == "==" else "ne", m.group(3))
    name = text.strip()
    if not name or " " in name:
        raise MappingError(f"cannot parse condition: {text!r}")
    return Condition(name, "nonempty")


def _split_template_line(line: str) -> tuple[list[str], Optional[str]]:
    """Split into three position tokens plus an optional `if ...` tail,
    honouring quoted strings."""
    tokens: list[str] = []
    pos = 0
    n = len(line)
    while pos < n and len(tokens) < 3:
        while pos < n and line[pos].isspace():
            pos += 1
        if pos >= n:
            break
        if line[pos] == '"':
            end = pos + 1
            while end < n:
                if line[end] == "\\":
                    end += 2
                    continue
                if line[end] == '"':
                    break
                end += 1
            if end >= n:
                raise MappingError(f"unterminated literal in template: {line!r}")
            end += 1
            # optional ^^datatype suffix
            if line[end : end + 2] == "^^":
                end += 2
                while end < n and not line[end].isspace():
                    end += 1
            tokens.append(line[pos:end])
            pos = end
        else:
            end = pos
            while end < n and not line[end].isspace():
                end += 1
            tokens.append(line[pos:end])
            pos = end
    rest = line[pos:].strip()
    condition = None
    if rest:
        if not rest.startswith("if "):
            raise MappingError(f"unexpected trailing text in template: {rest!r}")
        condition = rest[3:].strip()
    if len(tokens) != 3:
        raise MappingError(f"template needs subject, predicate, object: {line!r}")
    return tokens, condition


def _compile_slot(token: str, prefixes: dict[str, str], position: str) -> Slot:
    if token == "@geometry":
        if position != "object":
            raise MappingError("@geometry is only valid in the object position")
        return Slot("geometry")
    if token.startswith("<") and token.endswith(">"):
        return Slot("iri", token[1:-1])
    if token.startswith('"'):
        m = re.fullmatch(r'"((?:[^"\\]|\\.)*)"(?:\^\^(\S+))?', token)
        if not m:
            raise MappingError(f"malformed literal token: {token!r}")
        datatype = None
        if m.group(2):
            datatype = _expand_datatype(m.group(2), prefixes)
        text = m.group(1).replace('\\"', '"').replace("\\\\", "\\")
        return Slot("literal", text, datatype)
    m = re.match(r"([A-Za-z][\w\-]*):(.*)", token)
    if not m:
        raise MappingError(f"cannot parse term token: {token!r}")
    prefix, local = m.group(1), m.group(2)
    if prefix not in prefixes:
        raise MappingError(f"unknown prefix {prefix!r} in {token!r}")
    return Slot("iri", prefixes[prefix] + local)


def _expand_datatype(token: str, prefixes: dict[str, str]) -> str:
    if token.startswith("<") and token.endswith(">"):
        return token[1:-1]
    m = re.fullmatch(r"([A-Za-z][\w\-]*):([\w.\-]+)", token)
    if not m or m.group(1) not in prefixes:
        raise MappingError(f"unknown datatype {token!r}")
    return prefixes[m.group(1)] + m.group(2)


def parse_mapping(document: str) -> MappingSpec:
    sections: dict[str, list[str]] = {}
    current: Optional[str] = None
    for raw in document.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = re.fullmatch(r"\[([a-z]+)\]", line)
        if m:
            current = m.group(1)
            sections.setdefault(current, [])
            continue
        if current is None:
            raise MappingError(f"content before first section: {line!r}")
        sections[current].append(line)

    if "source" not in sections or "templates" not in sections:
        raise MappingError("mapping needs [source] and [templates] sections")

    meta: dict[str, str] = {}
    for line in sections["source"]:
        key, sep, value = line.partition("=")
        if not sep:
            raise MappingError(f"bad source line: {line!r}")
        meta[key.strip()] = value.strip()

    kind = meta.get("kind", "csv")
    if kind not in ("csv", "geojson"):
        raise MappingError(f"unsupported source kind: {kind}")
    name = meta.get("name")
    graph = meta.get("graph")
    if not name or not graph:
        raise MappingError("source section needs name and graph")
    columns = [c.strip() for c in meta.get("columns", "").split(",") if c.strip()]
    row_filter = _parse_condition(meta["filter"]) if "filter" in meta else None

    derived: dict[str, str] = {}
    for line in sections.get("derived", ()):
        key, sep, value = line.partition("=")
        if not sep:
            raise MappingError(f"bad derived line: {line!r}")
        derived[key.strip()] = value.strip()

    prefixes: dict[str, str] = {}
    for line in sections.get("prefixes", ()):
        key, sep, value = line.partition("=")
        if not sep:
            raise MappingError(f"bad prefix line: {line!r}")
        prefixes[key.strip()] = value.strip()

    templates: list[TripleTemplate] = []
    seen_lines: set[str] = set()
    known_fields = set(columns) | set(derived)
    for index, line in enumerate(sections["templates"], start=1):
        if line in seen_lines:
            raise MappingError(f"duplicate template: {line!r}")
        seen_lines.add(line)
        tokens, condition_text = _split_template_line(line)
        subject = _compile_slot(tokens[0], prefixes, "subject")
        predicate = _compile_slot(tokens[1], prefixes, "predicate")
        obj = _compile_slot(tokens[2], prefixes, "object")
        if predicate.kind != "iri" or predicate.placeholders():
            raise MappingError(f"predicate must be a constant IRI: {line!r}")
        condition = _parse_condition(condition_text) if condition_text else None
        template = TripleTemplate(f"t{index}", subject, predicate, obj, condition, line)
        for slot in (subject, predicate, obj):
            for placeholder in slot.placeholders():
                if placeholder not in known_fields:
                    raise MappingError(
                        f"placeholder {{{placeholder}}} not in declared columns ({template.id})"
                    )
        if condition and condition.field not in known_fields:
            raise MappingError(
                f"condition field {condition.field!r} not in declared columns ({template.id})"
            )
        templates.append(template)

    if row_filter and row_filter.field not in known_fields:
        raise MappingError(f"filter field {row_filter.field!r} not in declared columns")

    return MappingSpec(
        name=name,
        kind=kind,
        target_graph=graph,
        required_columns=columns,
        prefixes=prefixes,
        templates=templates,
        row_filter=row_filter,
        derived=derived,
    )


def load_mapping(path: Union[str, Path]) -> MappingSpec:
    return parse_mapping(Path(path).read_text(encoding="utf-8"))


# --- template application -------------------------------------------------


class _SkipTemplate(Exception):
    def __init__(self, reason: str):
        self.reason = reason


def _fill(slot: Slot, row: SourceRow, spec: MappingSpec) -> str:
    def replace(match: re.Match) -> str:
        name = match.group(1)
        value = row.columns.get(name, spec.derived.get(name))
        if value is None or str(value) == "":
            raise _SkipTemplate(f"empty field {name}")
        value = str(value)
        return _sanitize_iri_value(value) if slot.kind == "iri" else value

    return _PLACEHOLDER.sub(replace, slot.template)


def _render(slot: Slot, row: SourceRow, spec: MappingSpec) -> Term:
    if slot.kind == "geometry":
        if row.geometry is None:
            raise _SkipTemplate("row has no geometry")
        return literal(serialize_wkt(row.geometry), WKT_DT)
    text = _fill(slot, row, spec)
    if slot.kind == "iri":
        return iri(text)
    return literal(text, slot.datatype)


def apply_mapping(
    spec: MappingSpec,
    rows: Iterable[SourceRow],
    diagnostics: Optional[list[str]] = None,
) -> Iterator[Triple]:
    """Yield one triple per (row, satisfied template). Row-level problems are
    recorded as `row=<n> template=<id> reason=<text>` diagnostics and never
    abort the stream."""
    diags = diagnostics if diagnostics is not None else []
    for row in rows:
        if spec.row_filter and not spec.row_filter.holds(row, spec.derived):
            continue
        for template in spec.templates:
            if template.condition and not template.condition.holds(row, spec.derived):
                continue
            try:
                s = _render(template.subject, row, spec)
                p = _render(template.predicate, row, spec)
                o = _render(template.object, row, spec)
                yield triple(s, p, o)
            except _SkipTemplate as skip:
                diags.append(
                    f"row={row.number} template={template.id} reason={skip.reason}"
                )
            except Exception as exc:  # malformed value; keep streaming
                diags.append(
                    f"row={row.number} template={template.id} reason={exc}"
                )


# --- tabular / geo readers -------------------------------------------------


def read_table(
    source: Union[str, Path, io.TextIOBase],
    dialect: str = "excel",
    diagnostics: Optional[list[str]] = None,
) -> Iterator[SourceRow]:
    """CSV with a header row, RFC-4180 quoting. Ragged rows are skipped with
    a diagnostic."""
    diags = diagnostics if diagnostics is not None else []
    if isinstance(source, (str, Path)):
        handle = open(source, "r", encoding="utf-8", newline="")
        own = True
    else:
        handle = source
        own = False
    try:
        reader = csv.reader(handle, dialect=dialect)
        header = next(reader, None)
        if header is None:
            return
        width = len(header)
        for number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                diags.append(f"row={number} template=- reason=ragged row ({len(row)} of {width} fields)")
                continue
            yield SourceRow(dict(zip(header, row)), None, number)
    finally:
        if own:
            handle.close()


def _geojson_geometry(obj: Optional[dict]) -> Optional[Geometry]:
    if obj is None:
        return None
    kind = obj.get("type")
    coords = obj.get("coordinates")
    if kind == "Point":
        return point(*coords)
    if kind == "LineString":
        return linestring([tuple(c) for c in coords])
    if kind == "Polygon":
        return polygon([[tuple(c) for c in ring] for ring in coords])
    if kind == "MultiPolygon":
        return multipolygon([[[tuple(c) for c in ring] for ring in poly] for poly in coords])
    raise WktParseError(f"unsupported GeoJSON geometry type {kind}")


def _looks_axis_swapped(geom: Geometry, bbox: tuple[float, float, float, float]) -> bool:
    x0, y0, x1, y1 = bbox

    def inside(lon, lat):
        return x0 <= lon <= x1 and y0 <= lat <= y1

    vs = geom.vertices()
    if all(inside(lon, lat) for lon, lat in vs):
        return False
    return all(inside(lat, lon) for lon, lat in vs)


def read_geo(
    source: Union[str, Path, io.TextIOBase],
    diagnostics: Optional[list[str]] = None,
    expect_bbox: Optional[tuple[float, float, float, float]] = None,
) -> Iterator[SourceRow]:
    """GeoJSON FeatureCollection -> rows. Properties become columns and the
    geometry is validated; coordinates must already be CRS84 lon-lat. With
    `expect_bbox` set, features whose coordinates only make sense lat-lon
    swapped are rejected with guidance."""
    diags = diagnostics if diagnostics is not None else []
    if isinstance(source, (str, Path)):
        payload = json.loads(Path(source).read_text(encoding="utf-8"))
    else:
        payload = json.load(source)
    if payload.get("type") != "FeatureCollection":
        raise MappingError("expected a GeoJSON FeatureCollection")
    for number, feature in enumerate(payload.get("features", []), start=1):
        columns = {
            k: ("" if v is None else str(v))
            for k, v in (feature.get("properties") or {}).items()
        }
        try:
            geom = _geojson_geometry(feature.get("geometry"))
        except (WktParseError, TypeError, ValueError) as exc:
            diags.append(f"row={number} template=- reason=invalid geometry: {exc}")
            continue
        if geom is not None and expect_bbox and _looks_axis_swapped(geom, expect_bbox):
            diags.append(
                f"row={number} template=- reason=coordinates appear lat-lon swapped; "
                "supply lon-lat (CRS84) order"
            )
            continue
        yield SourceRow(columns, geom, number)


# --- dataset ingestion ------------------------------------------------------


@dataclass
class IngestReport:
    spec: str
    graph: str
    rows: int = 0
    emitted: int = 0
    inserted: int = 0
    duplicates: int = 0
    diagnostics: list[str] = field(default_factory=list)

    def summary(self) -> str:
        return (
            f"spec={self.spec} graph={self.graph} rows={self.rows} "
            f"emitted={self.emitted} inserted={self.inserted} "
            f"duplicates={self.duplicates} skipped={len(self.diagnostics)}"
        )


def ingest_dataset(
    store: TripleStore,
    spec: MappingSpec,
    source: Union[str, Path, io.TextIOBase],
    expect_bbox: Optional[tuple[float, float, float, float]] = None,
) -> IngestReport:
    """Run one mapping against one source file. The source is read fully
    before any insertion, so an I/O failure leaves the store unchanged."""
    report = IngestReport(spec=spec.name, graph=spec.target_graph)
    if spec.kind == "csv":
        rows = list(read_table(source, diagnostics=report.diagnostics))
    else:
        rows = list(read_geo(source, diagnostics=report.diagnostics, expect_bbox=expect_bbox))
    report.rows = len(rows)
    triples = list(apply_mapping(spec, rows, report.diagnostics))
    report.emitted = len(triples)
    report.inserted = store.insert_all(spec.target_graph, triples)
    report.duplicates = report.emitted - report.inserted
    return report
