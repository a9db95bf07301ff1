"""Pipeline orchestration: schema load, manifest-driven ingestion, synthetic
dataset generation, and rule materialization, shared by the CLI and tests.

A manifest is a two-column TSV (mapping document path, source path); paths
resolve against the manifest's directory. Synthetic generation reads the
fixture inputs, writes CSV/GeoJSON into an output directory, and the synth
manifest then maps those files through ordinary ingestion.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Optional, Union

from . import fixtures, synth
from .geo import Geometry, buffer_m, point
from .ingest import IngestReport, ingest_dataset, load_mapping, read_geo, read_table
from .rules import RuleConfig, RuleReport, run_all
from .store import TripleStore

# lon-lat sanity window used to flag axis-swapped municipal inputs
TORONTO_BBOX = (-80.5, 43.0, -78.5, 44.5)

SUPERMARKET_CATCHMENT_RADIUS_M = math.sqrt(5_000_000 / math.pi)  # ~5 km^2 disc


def read_manifest(path: Union[str, Path]) -> list[tuple[Path, Path]]:
    base = Path(path).parent
    pairs = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        map_path, source_path = line.split("\t")
        pairs.append((base / map_path, base / source_path))
    return pairs


def ingest_manifest(
    store: TripleStore,
    manifest: Union[str, Path],
    expect_bbox: Optional[tuple] = TORONTO_BBOX,
    source_base: Optional[Path] = None,
) -> list[IngestReport]:
    reports = []
    for map_path, source_path in read_manifest(manifest):
        if source_base is not None:
            source_path = source_base / source_path.name
        spec = load_mapping(map_path)
        reports.append(ingest_dataset(store, spec, source_path, expect_bbox=expect_bbox))
    return reports


# --- synthetic dataset generation --------------------------------------------


def _geom_center(geom: Geometry) -> tuple[float, float]:
    x0, y0, x1, y1 = geom.bbox()
    return ((x0 + x1) / 2.0, (y0 + y1) / 2.0)


def _geojson_polygon(geom: Geometry) -> dict:
    return {
        "type": "Polygon",
        "coordinates": [[list(c) for c in ring] for ring in geom.polygons[0]],
    }


def _feature_collection(features: list[dict]) -> dict:
    return {"type": "FeatureCollection", "features": features}


def generate_synthetic(fixture_dir: Union[str, Path], out_dir: Union[str, Path], seed: int) -> list[str]:
    """Generate every synthetic dataset the bundled pipeline consumes.
    Deterministic under the seed; returns the file names written."""
    fixture_dir = Path(fixture_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = fixture_dir / "data"
    rng = synth.Rng(seed)
    written: list[str] = []

    def emit(name: str, header, rows):
        synth.write_csv(out / name, header, rows)
        written.append(name)

    fmt = synth.format_number

    # parcel owners
    parcel_rows = list(read_geo(data / "parcels.geojson"))
    parcel_ids = [r.columns["PARCELID"] for r in parcel_rows]
    owners = synth.fake_owners(parcel_ids, rng)
    emit("fakeowners.csv", ["PARCELID", "FAKE_OWNER", "PIN"],
         [(o.parcel_id, o.owner_name, o.pin) for o in owners])

    # building-parcel spatial join
    building_rows = list(read_geo(data / "buildings.geojson"))
    joins = synth.building_parcel_join(
        [(r.columns["id"], r.geometry) for r in building_rows],
        [(r.columns["PARCELID"], r.geometry) for r in parcel_rows],
    )
    emit("building_occupies.csv", ["BUILDING_ID", "PARCELID"], joins)

    # road link capacities
    road_rows = []
    for r in read_geo(data / "roads.geojson"):
        params = synth.RoadLinkParams(
            float(r.columns["SPEED_LIMIT"]), int(r.columns["NUMBER_OF_LANES"]), r.columns["ROAD_CLASS"]
        )
        split = synth.road_capacity(params, rng.split(f"road:{r.columns['OGF_ID']}"))
        road_rows.append((r.columns["OGF_ID"], fmt(split.total), fmt(split.in_use), fmt(split.available)))
    emit("road_capacities.csv", ["OGF_ID", "TOTAL", "IN_USE", "AVAILABLE"], road_rows)

    # gravity sewer capacities
    rows = []
    for r in read_geo(data / "sewer_gravity.geojson"):
        params = synth.SewerParams(float(r.columns["DIAMETER_M"]), float(r.columns["SLOPE"]))
        split = synth.sewer_capacity_gravity(params, rng.split(f"sg:{r.columns['_id']}"))
        rows.append((r.columns["_id"], fmt(split.total), fmt(split.in_use), fmt(split.available)))
    emit("sewer_gravity_capacities.csv", ["ID", "CAPACITY", "IN_USE", "AVAILABLE"], rows)

    # pressurized sewer capacities
    rows = []
    for r in read_geo(data / "sewer_pressurized.geojson"):
        params = synth.SewerParams(float(r.columns["DIAMETER_MM"]) / 1000.0)
        split = synth.sewer_capacity_pressurized(params, rng.split(f"sp:{r.columns['_id']}"))
        rows.append((r.columns["_id"], fmt(split.total, 2), fmt(split.in_use, 2), fmt(split.available, 2)))
    emit("sewer_pressurized_capacities.csv", ["ID", "CAPACITY", "IN_USE", "AVAILABLE"], rows)

    # occupancy-style datasets
    rows = []
    for r in read_table(data / "childcare.csv"):
        used = synth.occupancy(int(r.columns["TOTSPACE"]), *synth.OCCUPANCY_95_100,
                               rng.split(f"cc:{r.columns['_id']}"))
        rows.append((r.columns["_id"], used))
    emit("childcare_occupancy.csv", ["ID", "FAKE_OCCUPANCY"], rows)

    rows = []
    for r in read_table(data / "senior_care.csv"):
        used = synth.occupancy(int(r.columns["BEDS"]), *synth.OCCUPANCY_95_100,
                               rng.split(f"ltc:{r.columns['FID']}"))
        rows.append((r.columns["FID"], used))
    emit("seniorcare_occupancy.csv", ["FID", "FAKE_OCCUPANCY"], rows)

    # community centre client spaces: 34,000 +/- up to 20%
    rows = []
    for r in read_table(data / "comm_centres.csv"):
        sub = rng.split(f"ccentre:{r.columns['_id']}")
        base = synth.ratio_capacity("community_centre")["total_spaces"]
        spread = synth.ratio_capacity("community_centre")["total_spaces_spread"]
        spaces = round(base * sub.uniform(1.0 - spread, 1.0 + spread))
        rows.append((r.columns["_id"], spaces))
    emit("community_centre_capacity.csv", ["ID", "FAKE_CAPACITY"], rows)

    # fire staffing ratios
    run_areas = [r.columns["RUN_AREA"] for r in read_geo(data / "fire_run_areas.geojson")]
    fire_rows = synth.fire_capacity(run_areas, rng)
    emit("fire_staffing.csv", ["RUN_AREA", "FIREFIGHTERS", "POPULATION", "RATIO"],
         [(f.run_area, f.firefighters, f.population, fmt(f.in_use_ratio, 9)) for f in fire_rows])

    # transit max daily throughput
    rows = []
    for r in read_table(data / "routes.csv"):
        total = synth.transit_capacity(r.columns["route_type"], int(r.columns["daily_trips"]))
        vehicle = synth.TRANSIT_VEHICLE_CAPACITY[r.columns["route_type"].lower()]
        rows.append((r.columns["route_id"], r.columns["route_name"], r.columns["route_type"],
                     vehicle, r.columns["daily_trips"], total))
    emit("transit_throughput.csv",
         ["route_id", "route_name", "route_type", "vehicle_capacity",
          "daily_trip_count_monthly", "daily_passenger_throughput"], rows)

    # ward water capacity scaled above use
    rows = []
    for r in read_table(data / "water_consumption.csv"):
        split = synth.scaled_total_capacity(
            float(r.columns["CONSUMPTION"]), *synth.WATER_SCALE,
            rng.split(f"water:{r.columns['WARD']}"))
        rows.append((r.columns["WARD"], r.columns["YEAR"], fmt(split.total, 2), fmt(split.available, 2)))
    emit("water_capacity.csv", ["WARD", "YEAR", "CAPACITY", "AVAILABLE"], rows)

    # electric totals 3-6x the published available
    rows = []
    for r in read_geo(data / "hydro_feeders.geojson"):
        split = synth.electric_capacity(float(r.columns["FEEDER_CAPACITY"]),
                                        rng.split(f"kva:{r.columns['NETWORK_ID']}"))
        rows.append((r.columns["NETWORK_ID"], fmt(split.total, 2)))
    emit("electric_total.csv", ["NETWORK_ID", "TOTAL_KVA"], rows)

    # park catchments (800 m discs) and area-per-person ratios
    park_features = []
    park_ratio_rows = []
    park_constants = synth.ratio_capacity("park")
    for r in read_geo(data / "parks.geojson"):
        center = _geom_center(r.geometry)
        disc = buffer_m(point(*center), park_constants["radius_m"])
        park_features.append({
            "type": "Feature",
            "properties": {"OSM_ID": r.columns["OSM_ID"]},
            "geometry": _geojson_polygon(disc),
        })
        ratio = float(r.columns["SURFACE_AREA"]) / park_constants["population"]
        park_ratio_rows.append((r.columns["OSM_ID"], fmt(ratio, 6), fmt(park_constants["min_ratio"], 6)))
    (out / "park_catchments.geojson").write_text(
        json.dumps(_feature_collection(park_features)), encoding="utf-8")
    written.append("park_catchments.geojson")
    emit("park_capacity.csv", ["OSM_ID", "RATIO_IN_USE", "MIN_RATIO"], park_ratio_rows)

    # supermarket catchments (~5 km^2 discs) and populations
    market_features = []
    market_pop_rows = []
    market_constants = synth.ratio_capacity("supermarket")
    for r in read_table(data / "supermarkets.csv"):
        disc = buffer_m(point(float(r.columns["LON"]), float(r.columns["LAT"])),
                        SUPERMARKET_CATCHMENT_RADIUS_M)
        market_features.append({
            "type": "Feature",
            "properties": {"OSM_ID": r.columns["OSM_ID"]},
            "geometry": _geojson_polygon(disc),
        })
        market_pop_rows.append((r.columns["OSM_ID"], market_constants["population"]))
    (out / "supermarket_catchments.geojson").write_text(
        json.dumps(_feature_collection(market_features)), encoding="utf-8")
    written.append("supermarket_catchments.geojson")
    emit("supermarket_population.csv", ["OSM_ID", "POPULATION"], market_pop_rows)

    return written


def ingest_synthetic(
    store: TripleStore, fixture_dir: Union[str, Path], synth_dir: Union[str, Path]
) -> list[IngestReport]:
    """Run the synth manifest: bundled mapping documents against the
    generated files."""
    fixture_dir = Path(fixture_dir)
    return ingest_manifest(
        store, fixture_dir / "synth_manifest.tsv", source_base=Path(synth_dir)
    )


def synthesize(
    store: TripleStore,
    fixture_dir: Optional[Union[str, Path]] = None,
    seed: int = 42,
) -> list[IngestReport]:
    """Direct triple-emitting path: generate the synthetic datasets and load
    them straight into the store, without the caller managing intermediate
    files."""
    import tempfile

    fixture_dir = Path(fixture_dir) if fixture_dir else fixtures.toronto_dir()
    with tempfile.TemporaryDirectory() as tmp:
        generate_synthetic(fixture_dir, tmp, seed)
        return ingest_synthetic(store, fixture_dir, tmp)


def build_fixture_store(
    seed: int = 42,
    synth_dir: Optional[Union[str, Path]] = None,
    rule_config: Optional[RuleConfig] = None,
) -> tuple[TripleStore, RuleReport]:
    """Schema + full fixture ingest + synthetic generation + materialization.
    The complete desk-scale twin used by tests and the demo CLI."""
    fixture_dir = fixtures.toronto_dir()
    store = TripleStore()
    fixtures.load_schema(store)
    ingest_manifest(store, fixture_dir / "ingest_manifest.tsv")
    if synth_dir is None:
        synthesize(store, fixture_dir, seed)
    else:
        generate_synthetic(fixture_dir, synth_dir, seed)
        ingest_synthetic(store, fixture_dir, synth_dir)
    report = run_all(store, rule_config)
    return store, report
