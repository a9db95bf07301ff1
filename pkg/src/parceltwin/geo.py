"""WKT geometry parsing and the spatial predicates the rule and query
layers depend on.

Coordinates are CRS84 lon-lat degrees. Topological predicates (intersects,
within) run in planar degree space, which is adequate at municipal extents;
distances alone are metric. Point-to-point distance is haversine with an
earth radius of 6,371,000 m; distance between extended geometries is the
minimum vertex-to-segment distance in a local equirectangular projection
centred on the pair's bounding box (documented tolerance 0.5% at extents
up to ~50 km).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

EARTH_RADIUS_M = 6_371_000.0

Coord = tuple[float, float]
Ring = tuple[Coord, ...]


class WktParseError(ValueError):
    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnsupportedGeometryError(WktParseError):
    pass


@dataclass(frozen=True)
class Geometry:
    """Parsed geometry. shape is one of POINT, LINESTRING, POLYGON,
    MULTIPOLYGON. Polygons are stored as a tuple of polygons, each polygon a
    tuple of rings (exterior first); points/linestrings keep their natural
    coordinate shapes."""

    shape: str
    point: Optional[Coord] = None
    line: Optional[tuple[Coord, ...]] = None
    polygons: Optional[tuple[tuple[Ring, ...], ...]] = None

    def rings(self) -> list[Ring]:
        if self.polygons is None:
            return []
        return [ring for poly in self.polygons for ring in poly]

    def vertices(self) -> list[Coord]:
        if self.shape == "POINT":
            return [self.point]
        if self.shape == "LINESTRING":
            return list(self.line)
        return [c for ring in self.rings() for c in ring[:-1]]

    def segments(self) -> list[tuple[Coord, Coord]]:
        segs: list[tuple[Coord, Coord]] = []
        if self.shape == "LINESTRING":
            coords = self.line
            segs.extend((coords[i], coords[i + 1]) for i in range(len(coords) - 1))
        elif self.shape in ("POLYGON", "MULTIPOLYGON"):
            for ring in self.rings():
                segs.extend((ring[i], ring[i + 1]) for i in range(len(ring) - 1))
        return segs

    def bbox(self) -> tuple[float, float, float, float]:
        vs = self.vertices()
        xs = [v[0] for v in vs]
        ys = [v[1] for v in vs]
        return min(xs), min(ys), max(xs), max(ys)


def point(lon: float, lat: float) -> Geometry:
    _check_coord((lon, lat), 0)
    return Geometry("POINT", point=(lon, lat))


def linestring(coords: Sequence[Coord]) -> Geometry:
    if len(coords) < 2:
        raise WktParseError("linestring needs at least 2 points")
    return Geometry("LINESTRING", line=tuple(coords))


def polygon(rings: Sequence[Sequence[Coord]]) -> Geometry:
    return Geometry("POLYGON", polygons=(_validate_poly(rings, 0),))


def multipolygon(polys: Sequence[Sequence[Sequence[Coord]]]) -> Geometry:
    return Geometry("MULTIPOLYGON", polygons=tuple(_validate_poly(p, 0) for p in polys))


def box(lon0: float, lat0: float, lon1: float, lat1: float) -> Geometry:
    return polygon([[(lon0, lat0), (lon1, lat0), (lon1, lat1), (lon0, lat1), (lon0, lat0)]])


def _check_coord(coord: Coord, offset: int) -> None:
    lon, lat = coord
    if not (-180.0 <= lon <= 180.0) or not (-90.0 <= lat <= 90.0):
        raise WktParseError(f"coordinate out of CRS84 range: ({lon}, {lat})", offset)


def _validate_poly(rings: Sequence[Sequence[Coord]], offset: int) -> tuple[Ring, ...]:
    if not rings:
        raise WktParseError("polygon needs at least one ring", offset)
    out = []
    for ring in rings:
        ring = tuple(ring)
        if len(ring) < 4:
            raise WktParseError("ring needs at least 4 points", offset)
        if ring[0] != ring[-1]:
            raise WktParseError("ring is not closed (first point != last point)", offset)
        for c in ring:
            _check_coord(c, offset)
        out.append(ring)
    return tuple(out)


# --- WKT reading / writing ---------------------------------------------

_NUM = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, ch: str):
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            raise WktParseError(f"expected {ch!r}", self.pos)
        self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def number(self) -> float:
        self.skip_ws()
        m = _NUM.match(self.text, self.pos)
        if not m:
            raise WktParseError("expected a number", self.pos)
        self.pos = m.end()
        return float(m.group())

    def coord(self) -> Coord:
        start = self.pos
        lon = self.number()
        lat = self.number()
        c = (lon, lat)
        _check_coord(c, start)
        return c

    def coord_list(self) -> list[Coord]:
        self.expect("(")
        coords = [self.coord()]
        while self.peek() == ",":
            self.expect(",")
            coords.append(self.coord())
        self.expect(")")
        return coords

    def ring_list(self) -> list[list[Coord]]:
        self.expect("(")
        rings = [self.coord_list()]
        while self.peek() == ",":
            self.expect(",")
            rings.append(self.coord_list())
        self.expect(")")
        return rings

    def end(self):
        self.skip_ws()
        if self.pos != len(self.text):
            raise WktParseError("trailing content after geometry", self.pos)


def parse_wkt(text: str) -> Geometry:
    """Parse the POINT/LINESTRING/POLYGON/MULTIPOLYGON subset of WKT.

    Keywords are case-insensitive and whitespace between tokens is ignored.
    Unclosed rings are rejected, not repaired.
    """
    if not text or not text.strip():
        raise WktParseError("empty WKT text")
    s = _Scanner(text)
    s.skip_ws()
    m = re.match(r"[A-Za-z]+", text[s.pos:])
    if not m:
        raise WktParseError("expected a geometry keyword", s.pos)
    keyword = m.group().upper()
    s.pos += m.end()

    if keyword == "POINT":
        s.expect("(")
        c = s.coord()
        s.expect(")")
        s.end()
        return Geometry("POINT", point=c)
    if keyword == "LINESTRING":
        coords = s.coord_list()
        s.end()
        if len(coords) < 2:
            raise WktParseError("linestring needs at least 2 points", 0)
        return Geometry("LINESTRING", line=tuple(coords))
    if keyword == "POLYGON":
        start = s.pos
        rings = s.ring_list()
        s.end()
        return Geometry("POLYGON", polygons=(_validate_poly(rings, start),))
    if keyword == "MULTIPOLYGON":
        s.expect("(")
        start = s.pos
        polys = [_validate_poly(s.ring_list(), start)]
        while s.peek() == ",":
            s.expect(",")
            polys.append(_validate_poly(s.ring_list(), s.pos))
        s.expect(")")
        s.end()
        return Geometry("MULTIPOLYGON", polygons=tuple(polys))
    raise UnsupportedGeometryError(f"unsupported WKT type {keyword}", 0)


def _fmt(value: float) -> str:
    out = repr(float(value))
    return out[:-2] if out.endswith(".0") else out


def serialize_wkt(geom: Geometry) -> str:
    if geom.shape == "POINT":
        lon, lat = geom.point
        return f"POINT({_fmt(lon)} {_fmt(lat)})"
    if geom.shape == "LINESTRING":
        return "LINESTRING(" + ",".join(f"{_fmt(x)} {_fmt(y)}" for x, y in geom.line) + ")"

    def ring_text(ring: Ring) -> str:
        return "(" + ",".join(f"{_fmt(x)} {_fmt(y)}" for x, y in ring) + ")"

    def poly_text(poly: tuple[Ring, ...]) -> str:
        return "(" + ",".join(ring_text(r) for r in poly) + ")"

    if geom.shape == "POLYGON":
        return "POLYGON" + poly_text(geom.polygons[0])
    return "MULTIPOLYGON(" + ",".join(poly_text(p) for p in geom.polygons) + ")"


# --- planar primitives --------------------------------------------------

def _orient(a: Coord, b: Coord, c: Coord) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment(p: Coord, a: Coord, b: Coord) -> bool:
    if _orient(a, b, p) != 0.0:
        return False
    return (
        min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
        and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    )


def _segments_intersect(p1: Coord, p2: Coord, q1: Coord, q2: Coord) -> bool:
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and d1 != 0 and d2 != 0 and ((d3 > 0) != (d4 > 0)) and d3 != 0 and d4 != 0:
        return True
    return (
        _on_segment(p1, q1, q2)
        or _on_segment(p2, q1, q2)
        or _on_segment(q1, p1, p2)
        or _on_segment(q2, p1, p2)
    )


def _segments_cross_properly(p1: Coord, p2: Coord, q1: Coord, q2: Coord) -> bool:
    """Interiors cross at a single point (no endpoint touching, no overlap)."""
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    return ((d1 > 0) != (d2 > 0)) and d1 != 0 and d2 != 0 and ((d3 > 0) != (d4 > 0)) and d3 != 0 and d4 != 0


def _point_in_ring(p: Coord, ring: Ring) -> int:
    """2 = strictly inside, 1 = on the boundary, 0 = outside."""
    x, y = p
    inside = False
    for i in range(len(ring) - 1):
        a, b = ring[i], ring[i + 1]
        if _on_segment(p, a, b):
            return 1
        ay, by = a[1], b[1]
        if (ay > y) != (by > y):
            x_cross = a[0] + (y - ay) * (b[0] - a[0]) / (by - ay)
            if x < x_cross:
                inside = not inside
    return 2 if inside else 0


def _point_in_polygon(p: Coord, poly: tuple[Ring, ...]) -> int:
    """Location of p within a polygon with holes: 2 interior, 1 boundary, 0 outside."""
    outer = _point_in_ring(p, poly[0])
    if outer != 2:
        return outer
    for hole in poly[1:]:
        loc = _point_in_ring(p, hole)
        if loc == 2:
            return 0
        if loc == 1:
            return 1
    return 2


def _point_in_geom(p: Coord, geom: Geometry) -> bool:
    """Point-set membership (boundary counts as in)."""
    if geom.shape == "POINT":
        return p == geom.point
    if geom.shape == "LINESTRING":
        return any(_on_segment(p, a, b) for a, b in geom.segments())
    return any(_point_in_polygon(p, poly) > 0 for poly in geom.polygons)


def _midpoints(segs: Iterable[tuple[Coord, Coord]]) -> list[Coord]:
    return [((a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0) for a, b in segs]


def _bbox_disjoint(a: Geometry, b: Geometry) -> bool:
    ax0, ay0, ax1, ay1 = a.bbox()
    bx0, by0, bx1, by1 = b.bbox()
    return ax1 < bx0 or bx1 < ax0 or ay1 < by0 or by1 < ay0


def intersects(a: Geometry, b: Geometry) -> bool:
    """True iff the two point sets share at least one point (planar test)."""
    if _bbox_disjoint(a, b):
        return False
    if a.shape == "POINT":
        return _point_in_geom(a.point, b)
    if b.shape == "POINT":
        return _point_in_geom(b.point, a)
    # any vertex of one inside the other covers containment cases
    if any(_point_in_geom(v, b) for v in a.vertices()):
        return True
    if any(_point_in_geom(v, a) for v in b.vertices()):
        return True
    segs_a = a.segments()
    segs_b = b.segments()
    return any(
        _segments_intersect(p1, p2, q1, q2) for p1, p2 in segs_a for q1, q2 in segs_b
    )


def within(a: Geometry, b: Geometry) -> bool:
    """True iff every point of a lies inside or on the boundary of b.

    For extended geometries the test checks all vertices and segment
    midpoints of a, plus the absence of proper crossings with b's boundary;
    exact for the polygon fixtures this engine works with.
    """
    if a.shape == "POINT":
        return _point_in_geom(a.point, b)
    if b.shape == "POINT":
        return all(v == b.point for v in a.vertices())
    if b.shape == "LINESTRING":
        return all(_point_in_geom(v, b) for v in a.vertices()) and all(
            _point_in_geom(m, b) for m in _midpoints(a.segments())
        )
    if not all(_point_in_geom(v, b) for v in a.vertices()):
        return False
    if not all(_point_in_geom(m, b) for m in _midpoints(a.segments())):
        return False
    segs_b = b.segments()
    for p1, p2 in a.segments():
        if any(_segments_cross_properly(p1, p2, q1, q2) for q1, q2 in segs_b):
            return False
    return True


# --- metric operations ---------------------------------------------------

def haversine_m(a: Coord, b: Coord) -> float:
    lon1, lat1 = a
    lon2, lat2 = b
    phi1 = math.radians(lat1)
    phi2 = math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlam = math.radians(lon2 - lon1)
    h = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def _project(c: Coord, lon0: float, lat0: float, coslat: float) -> Coord:
    x = math.radians(c[0] - lon0) * coslat * EARTH_RADIUS_M
    y = math.radians(c[1] - lat0) * EARTH_RADIUS_M
    return (x, y)


def _point_segment_dist(p: Coord, a: Coord, b: Coord) -> float:
    px, py = p
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    seg_len2 = dx * dx + dy * dy
    if seg_len2 == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / seg_len2
    t = max(0.0, min(1.0, t))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def distance_m(a: Geometry, b: Geometry) -> float:
    """Minimum distance in metres between the two point sets; 0 when they
    intersect."""
    if a.shape == "POINT" and b.shape == "POINT":
        return haversine_m(a.point, b.point)
    if intersects(a, b):
        return 0.0
    ax0, ay0, ax1, ay1 = a.bbox()
    bx0, by0, bx1, by1 = b.bbox()
    lon0 = (min(ax0, bx0) + max(ax1, bx1)) / 2.0
    lat0 = (min(ay0, by0) + max(ay1, by1)) / 2.0
    coslat = math.cos(math.radians(lat0))

    pa = [_project(v, lon0, lat0, coslat) for v in a.vertices()]
    pb = [_project(v, lon0, lat0, coslat) for v in b.vertices()]
    segs_a = [
        (_project(s, lon0, lat0, coslat), _project(e, lon0, lat0, coslat))
        for s, e in a.segments()
    ]
    segs_b = [
        (_project(s, lon0, lat0, coslat), _project(e, lon0, lat0, coslat))
        for s, e in b.segments()
    ]

    # vertex-to-vertex minima are covered because segment endpoints are vertices
    best = math.inf
    for p in pa:
        for s, e in segs_b:
            best = min(best, _point_segment_dist(p, s, e))
    for p in pb:
        for s, e in segs_a:
            best = min(best, _point_segment_dist(p, s, e))
    return best


def to_geojson(geom: Geometry) -> dict:
    """Geometry as a GeoJSON geometry object (for map layers)."""
    if geom.shape == "POINT":
        return {"type": "Point", "coordinates": list(geom.point)}
    if geom.shape == "LINESTRING":
        return {"type": "LineString", "coordinates": [list(c) for c in geom.line]}
    if geom.shape == "POLYGON":
        return {
            "type": "Polygon",
            "coordinates": [[list(c) for c in ring] for ring in geom.polygons[0]],
        }
    return {
        "type": "MultiPolygon",
        "coordinates": [
            [[list(c) for c in ring] for ring in poly] for poly in geom.polygons
        ],
    }


def buffer_m(center: Geometry, radius_m: float, segments: int = 32) -> Geometry:
    """Regular polygon approximating the metric circle around a point,
    using local equirectangular scaling by cos(lat)."""
    if center.shape != "POINT":
        raise ValueError("buffer_m requires a POINT center")
    if radius_m <= 0:
        raise ValueError("buffer radius must be > 0")
    if segments < 8:
        raise ValueError("buffer needs at least 8 segments")
    lon0, lat0 = center.point
    if abs(lat0) > 89.0:
        raise ValueError("buffer center too close to a pole")
    dlat = math.degrees(radius_m / EARTH_RADIUS_M)
    dlon = dlat / math.cos(math.radians(lat0))
    ring = []
    for i in range(segments):
        theta = 2.0 * math.pi * i / segments
        ring.append((lon0 + dlon * math.cos(theta), lat0 + dlat * math.sin(theta)))
    ring.append(ring[0])
    return polygon([ring])
