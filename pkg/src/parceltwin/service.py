"""HTTP API over the query catalogue.

Every read endpoint is a thin projection of one query-engine call: the JSON
body's rows equal the operation's rows field-for-field, and `?format=csv`
returns the same cells as CSV. Read queries run on a bounded worker pool
with a per-request time budget; exceeding it returns a `busy` error without
touching the store. The only writes happen through the /admin endpoints,
which take the store's exclusive writer role.
"""

from __future__ import annotations

import io
from concurrent.futures import Future, ThreadPoolExecutor, TimeoutError as FutureTimeout
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .geo import Geometry, point, to_geojson
from .geocode import Geocoder, GeocoderError
from .ingest import ingest_dataset, parse_mapping
from .query import ParcelFilters, QueryConfig, QueryEngine
from .rules import RuleConfig, run_all
from .store import Term, TripleStore, iri


class ApiError(Exception):
    STATUS = {
        "bad-request": 400,
        "not-found": 404,
        "conflict": 409,
        "busy": 503,
        "internal": 500,
    }

    def __init__(self, code: str, message: str, detail: Optional[str] = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.detail = detail

    def response(self) -> JSONResponse:
        body = {"code": self.code, "message": self.message}
        if self.detail:
            body["detail"] = self.detail
        return JSONResponse(body, status_code=self.STATUS[self.code])


@dataclass
class ServiceConfig:
    timeout_s: float = 30.0
    pool_size: int = 2
    geocoder: Optional[Geocoder] = None
    query: QueryConfig = field(default_factory=QueryConfig)
    rules: RuleConfig = field(default_factory=RuleConfig)


def _table(rows, headers=None) -> dict:
    if rows:
        headers = headers or rows[0].HEADERS
    return {
        "columns": list(headers or []),
        "rows": [list(r.cells()) for r in rows],
    }


def _csv_text(rows, headers=None) -> str:
    from .query import rows_to_csv

    return rows_to_csv(rows, headers)


def _feature(geom: Geometry, props: dict) -> dict:
    return {"type": "Feature", "properties": props, "geometry": to_geojson(geom)}


def _feature_collection(features) -> dict:
    return {"type": "FeatureCollection", "features": features}


def create_app(store: TripleStore, config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or ServiceConfig()
    engine = QueryEngine(store, config.query)
    pool = ThreadPoolExecutor(max_workers=max(1, config.pool_size))
    app = FastAPI(title="parceltwin", docs_url=None, redoc_url=None)

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        return exc.response()

    def run_query(fn, *args, **kwargs):
        """Execute a read on the pool under the read lock, respecting the
        request's time budget."""
        if len(store) == 0:
            raise ApiError("conflict", "store is empty; ingest data first")

        def call():
            with store.read_lock():
                return fn(*args, **kwargs)

        future: Future = pool.submit(call)
        try:
            return future.result(timeout=config.timeout_s)
        except FutureTimeout:
            raise ApiError("busy", f"query exceeded the {config.timeout_s:.0f}s budget")
        except ApiError:
            raise
        except Exception as exc:  # surface evaluator errors as internal
            raise ApiError("internal", str(exc))

    def resolve_parcel(parcel_id: str) -> Term:
        if len(store) == 0:
            raise ApiError("conflict", "store is empty; ingest data first")
        if "://" in parcel_id or parcel_id.startswith("urn:"):
            candidate = iri(parcel_id)
            if engine._geometry(candidate) is not None or store.types_of(candidate):
                return candidate
            raise ApiError("not-found", f"no parcel {parcel_id}")
        for parcel in engine.parcels():
            if parcel.value.endswith("#" + parcel_id) or parcel.value.endswith("/" + parcel_id):
                return parcel
        raise ApiError("not-found", f"no parcel {parcel_id}")

    def table_response(request: Request, rows, headers, extra: Optional[dict] = None):
        if request.query_params.get("format") == "csv":
            return PlainTextResponse(_csv_text(rows, headers), media_type="text/csv")
        body = _table(rows, headers)
        if extra:
            body.update(extra)
        return JSONResponse(body)

    @app.get("/parcels/search")
    def parcels_search(request: Request, address: Optional[str] = None,
                       lon: Optional[float] = None, lat: Optional[float] = None):
        geocoded = None
        if address is not None:
            if not address.strip():
                raise ApiError("bad-request", "address must be non-empty")
            if config.geocoder is None:
                raise ApiError("conflict", "no geocoder configured")
            try:
                result = config.geocoder.geocode(address)
            except GeocoderError as exc:
                raise ApiError("internal", "geocoder failure", str(exc))
            if result is None:
                raise ApiError("not-found", f"address not found: {address}")
            search_point = result.point
            geocoded = result.normalized
        elif lon is not None and lat is not None:
            search_point = point(lon, lat)
        else:
            raise ApiError("bad-request", "supply address or lon & lat")

        ref = run_query(engine.find_parcel_at, search_point)
        if ref is None:
            raise ApiError("not-found", "no parcel at that location")
        features = [_feature(search_point, {"layer": "search-point"})]
        if ref.geometry is not None:
            features.append(_feature(ref.geometry, {"layer": "parcel", "parcel": ref.iri.value}))
        return {
            "parcel": ref.iri.value,
            "geocoded": geocoded,
            "point": to_geojson(search_point),
            "features": _feature_collection(features),
        }

    @app.get("/parcels/{parcel_id}/attributes")
    def parcel_attributes(parcel_id: str, request: Request):
        parcel = resolve_parcel(parcel_id)
        rows = run_query(engine.parcel_attributes, parcel)
        from .query import AttributeRow

        return table_response(request, rows, AttributeRow.HEADERS)

    @app.get("/parcels/{parcel_id}/land-use")
    def land_use(parcel_id: str):
        parcel = resolve_parcel(parcel_id)
        result = run_query(engine.land_use, parcel)
        return {"allowed": list(result.allowed), "current": list(result.current)}

    @app.get("/parcels/{parcel_id}/zoning")
    def zoning(parcel_id: str, request: Request):
        parcel = resolve_parcel(parcel_id)
        rows = run_query(engine.applicable_zoning, parcel)
        from .query import ZoningRow

        features = [
            _feature(r.geometry, {"layer": "zone", "label": r.zone_label})
            for r in rows
            if r.geometry is not None
        ]
        return table_response(request, rows, ZoningRow.HEADERS,
                              {"features": _feature_collection(features)})

    @app.get("/parcels/{parcel_id}/compliance")
    def compliance(parcel_id: str, request: Request, attribute: str,
                   radius: Optional[float] = None):
        parcel = resolve_parcel(parcel_id)
        known = dict(run_query(engine.list_constrained_attributes))
        attribute_iri = attribute
        if attribute not in known:
            by_label = {label: prop for prop, label in known.items()}
            if attribute in by_label:
                attribute_iri = by_label[attribute]
            else:
                raise ApiError("bad-request", f"unknown constrained attribute: {attribute}")
        rows = run_query(engine.zoning_compliance, parcel, attribute_iri, radius)
        from .query import ComplianceRow

        seen = set()
        features = []
        counts: dict[str, int] = {}
        for r in rows:
            if r.geometry is None or r.nearby_parcel in seen:
                continue
            seen.add(r.nearby_parcel)
            status = r.status.value
            counts[status] = counts.get(status, 0) + 1
            features.append(
                _feature(r.geometry, {"layer": "compliance", "parcel": r.nearby_parcel,
                                      "status": status})
            )
        return table_response(
            request, rows, ComplianceRow.HEADERS,
            {"features": _feature_collection(features), "legend": counts},
        )

    @app.get("/parcels/{parcel_id}/demographics")
    def demographics(parcel_id: str, request: Request, characteristics: Optional[str] = None):
        parcel = resolve_parcel(parcel_id)
        classes = None
        if characteristics:
            classes = [c for c in characteristics.split(",") if c]
        rows = run_query(engine.neighbourhood_demographics, parcel, classes)
        from .query import DemographicsRow

        seen = set()
        features = []
        for r in rows:
            if r.geometry is not None and r.census_tract not in seen:
                seen.add(r.census_tract)
                features.append(_feature(r.geometry, {"layer": "tract", "label": r.census_tract}))
        return table_response(request, rows, DemographicsRow.HEADERS,
                              {"features": _feature_collection(features)})

    @app.get("/parcels/{parcel_id}/services")
    def services(parcel_id: str, request: Request):
        parcel = resolve_parcel(parcel_id)
        rows = run_query(engine.available_services, parcel)
        from .query import ServiceRow

        return table_response(request, rows, ServiceRow.HEADERS)

    @app.get("/parcels")
    def parcels(request: Request,
                vacant: Optional[bool] = None,
                government_owned: Optional[bool] = None,
                zoned_for_use: Optional[str] = None,
                neighbourhood: Optional[str] = None,
                area_min: Optional[float] = None, area_max: Optional[float] = None,
                perimeter_min: Optional[float] = None, perimeter_max: Optional[float] = None):
        filters = ParcelFilters(
            vacant=vacant,
            government_owned=government_owned,
            zoned_for_use=zoned_for_use,
            neighbourhood=neighbourhood,
            area_range=(area_min, area_max) if area_min is not None or area_max is not None else None,
            perimeter_range=(perimeter_min, perimeter_max)
            if perimeter_min is not None or perimeter_max is not None
            else None,
        )
        refs = run_query(engine.advanced_parcel_search, filters)
        features = [
            _feature(r.geometry, {"layer": "parcel", "parcel": r.iri.value})
            for r in refs
            if r.geometry is not None
        ]
        return {
            "parcels": [r.iri.value for r in refs],
            "features": _feature_collection(features),
        }

    @app.get("/averages/{kind}")
    def averages(kind: str, request: Request):
        if kind not in ("demographics", "services", "zoning"):
            raise ApiError("bad-request", f"unknown averages kind: {kind}")
        rows = run_query(engine.city_averages, kind)
        from .query import AverageRow

        return table_response(request, rows, AverageRow.HEADERS)

    @app.get("/meta/constrained-attributes")
    def constrained_attributes():
        pairs = run_query(engine.list_constrained_attributes)
        return [{"iri": prop, "label": label} for prop, label in pairs]

    @app.get("/meta/service-types")
    def service_types():
        leaves = run_query(engine.leaf_service_types)
        return [
            {"iri": leaf.value, "label": engine._label(leaf) or ""}
            for leaf in leaves
        ]

    @app.post("/admin/ingest")
    async def admin_ingest(request: Request):
        body = await request.json()
        mapping_text = body.get("mapping")
        if not mapping_text:
            raise ApiError("bad-request", "body needs a mapping document")
        try:
            spec = parse_mapping(mapping_text)
        except Exception as exc:
            raise ApiError("bad-request", "invalid mapping document", str(exc))
        source_text = body.get("source_text")
        source_path = body.get("source")
        if source_text is None and source_path is None:
            raise ApiError("bad-request", "body needs source or source_text")
        source = io.StringIO(source_text) if source_text is not None else Path(source_path)
        with store.write_lock():
            report = ingest_dataset(store, spec, source)
        return {
            "spec": report.spec,
            "graph": report.graph,
            "rows": report.rows,
            "emitted": report.emitted,
            "inserted": report.inserted,
            "duplicates": report.duplicates,
            "diagnostics": report.diagnostics,
        }

    @app.post("/admin/infer")
    def admin_infer():
        with store.write_lock():
            report = run_all(store, config.rules)
        return report.to_dict()

    return app
