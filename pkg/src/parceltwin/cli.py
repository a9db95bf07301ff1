"""Command line driver for the pipeline: ingest -> synth -> infer -> query,
plus dump and serve. Store state persists between invocations as an N-Quads
snapshot.

Settings resolve in order: explicit flag, PARCELTWIN_<NAME> environment
variable, --config key=value file, built-in default.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import fixtures, vocab
from .geo import point
from .geocode import OfflineGeocoder
from .ingest import ingest_dataset, load_mapping
from .pipeline import (
    TORONTO_BBOX,
    generate_synthetic,
    ingest_manifest,
    ingest_synthetic,
)
from .query import ParcelFilters, QueryEngine, rows_to_csv
from .rdfio import dump_store, load_nquads, load_turtle, save_nquads
from .rules import RuleConfig, run_all
from .store import TripleStore, iri

ENV_PREFIX = "PARCELTWIN_"


def load_config_file(path: str) -> dict[str, str]:
    values = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise click.ClickException(f"bad config line: {line!r}")
        values[key.strip()] = value.strip()
    return values


def setting(name: str, flag_value, config: dict[str, str], default):
    """flag > environment > config file > default."""
    if flag_value is not None:
        return flag_value
    env = os.environ.get(ENV_PREFIX + name.upper().replace(".", "_").replace("-", "_"))
    if env is not None:
        return env
    if name in config:
        return config[name]
    return default


def resolve_store_path(flag_value) -> str:
    return str(setting("store", flag_value, {}, "twin.nq"))


def open_store(path: str, must_exist: bool = False) -> TripleStore:
    store = TripleStore()
    if Path(path).exists():
        load_nquads(store, path)
    elif must_exist:
        raise click.ClickException(f"store snapshot not found: {path}")
    return store


@click.group()
def main():
    """Housing-potential digital twin pipeline."""


@main.command()
def fixtures_dir():
    """Print the bundled Toronto fixture directory."""
    click.echo(str(fixtures.toronto_dir()))


@main.command()
@click.option("--store", "store_path", default=None, help="Snapshot path [default: twin.nq or PARCELTWIN_STORE].")
@click.option("--spec", "spec_path", type=click.Path(exists=True), default=None,
              help="One mapping document to run.")
@click.option("--source", "source_path", type=click.Path(exists=True), default=None,
              help="Source file for --spec.")
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), default=None,
              help="TSV of (mapping, source) pairs, paths relative to the manifest.")
@click.option("--schema", "schema_path", type=click.Path(exists=True), default=None,
              help="Turtle vocabulary file loaded into the schema graph.")
def ingest(store_path, spec_path, source_path, manifest_path, schema_path):
    """Run mapping documents against source files."""
    store_path = resolve_store_path(store_path)
    if not (spec_path or manifest_path or schema_path):
        raise click.ClickException("supply --spec/--source, --manifest, or --schema")
    if bool(spec_path) != bool(source_path):
        raise click.ClickException("--spec and --source go together")
    store = open_store(store_path)
    if schema_path:
        count = load_turtle(store, vocab.GRAPH_SCHEMA,
                            Path(schema_path).read_text(encoding="utf-8"))
        click.echo(f"schema: {count} statements")
    reports = []
    if manifest_path:
        reports.extend(ingest_manifest(store, manifest_path, expect_bbox=TORONTO_BBOX))
    if spec_path:
        spec = load_mapping(spec_path)
        reports.append(ingest_dataset(store, spec, source_path, expect_bbox=TORONTO_BBOX))
    for report in reports:
        click.echo(report.summary())
        for diag in report.diagnostics:
            click.echo(f"  {diag}", err=True)
    save_nquads(store, store_path)


@main.command()
@click.option("--store", "store_path", default=None, help="Snapshot path [default: twin.nq or PARCELTWIN_STORE].")
@click.option("--fixtures", "fixtures_path", type=click.Path(exists=True), default=None,
              help="Fixture directory (defaults to the bundled Toronto set).")
@click.option("--out", "out_dir", required=True, help="Directory for generated files.")
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--no-ingest", is_flag=True, help="Generate files without loading them.")
def synth(store_path, fixtures_path, out_dir, seed, no_ingest):
    """Generate the synthetic capacity datasets and load them."""
    store_path = resolve_store_path(store_path)
    fixture_dir = Path(fixtures_path) if fixtures_path else fixtures.toronto_dir()
    written = generate_synthetic(fixture_dir, out_dir, seed)
    click.echo(f"generated {len(written)} files in {out_dir}")
    if not no_ingest:
        store = open_store(store_path)
        for report in ingest_synthetic(store, fixture_dir, out_dir):
            click.echo(report.summary())
        save_nquads(store, store_path)


@main.command()
@click.option("--store", "store_path", default=None, help="Snapshot path [default: twin.nq or PARCELTWIN_STORE].")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--service-class", "service_classes", multiple=True,
              help="Restrict servicedBy to these service classes.")
@click.option("--report", "report_path", default=None,
              help="Also write the machine-readable rule report as JSON.")
def infer(store_path, config_path, service_classes, report_path):
    """Materialize property chains and geospatial rules."""
    store_path = resolve_store_path(store_path)
    store = open_store(store_path, must_exist=True)
    config_values = load_config_file(config_path) if config_path else {}
    rule_config = RuleConfig.from_mapping(config_values)
    if service_classes:
        rule_config.service_classes = {
            c if "://" in c else vocab.HP + c for c in service_classes
        }
    report = run_all(store, rule_config)
    for line in report.log_lines():
        click.echo(line)
    click.echo(f"{report.new_triples} inferred")
    if report_path:
        Path(report_path).write_text(json.dumps(report.to_dict(), indent=2), encoding="utf-8")
    save_nquads(store, store_path)


QUERY_NAMES = [
    "parcel-search", "parcel-attributes", "land-use", "applicable-zoning",
    "zoning-compliance", "demographics", "available-services",
    "averages-zoning", "averages-services", "averages-demographics",
    "advanced-search",
]


@main.command()
@click.argument("name", type=click.Choice(QUERY_NAMES))
@click.option("--store", "store_path", default=None, help="Snapshot path [default: twin.nq or PARCELTWIN_STORE].")
@click.option("--parcel", "parcel_id", default=None, help="Parcel IRI or local name.")
@click.option("--attribute", default=None, help="Constrained attribute IRI (compliance).")
@click.option("--radius", type=float, default=None)
@click.option("--point", "point_text", default=None, help="lon,lat for parcel-search.")
@click.option("--address", default=None, help="Address for parcel-search.")
@click.option("--geocodes", "geocodes_path", type=click.Path(exists=True), default=None,
              help="Offline geocode table (address,normalized,lon,lat).")
@click.option("--vacant/--no-vacant", "vacant", default=None)
@click.option("--government-owned/--no-government-owned", "government_owned", default=None)
@click.option("--zoned-for-use", default=None)
@click.option("--neighbourhood", default=None)
@click.option("--area-min", type=float, default=None)
@click.option("--area-max", type=float, default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
def query(name, store_path, parcel_id, attribute, radius, point_text, address,
          geocodes_path, vacant, government_owned, zoned_for_use, neighbourhood,
          area_min, area_max, fmt):
    """Run one catalogue query and print the result table."""
    store_path = resolve_store_path(store_path)
    store = open_store(store_path, must_exist=True)
    engine = QueryEngine(store)

    def resolve():
        if parcel_id is None:
            raise click.ClickException(f"{name} needs --parcel")
        if "://" in parcel_id or parcel_id.startswith("urn:"):
            return iri(parcel_id)
        for parcel in engine.parcels():
            if parcel.value.endswith("#" + parcel_id) or parcel.value.endswith("/" + parcel_id):
                return parcel
        raise click.ClickException(f"no parcel named {parcel_id}")

    def emit(rows, headers):
        if fmt == "csv":
            click.echo(rows_to_csv(rows, headers), nl=False)
        else:
            click.echo(json.dumps({"columns": list(headers),
                                   "rows": [list(r.cells()) for r in rows]}, indent=2))

    if name == "parcel-search":
        if point_text:
            lon, lat = (float(x) for x in point_text.split(","))
            search_point = point(lon, lat)
            geocoded = None
        elif address:
            table = geocodes_path or fixtures.fixture_path("data", "geocodes.csv")
            result = OfflineGeocoder.from_csv(table).geocode(address)
            if result is None:
                raise click.ClickException(f"address not found: {address}")
            search_point = result.point
            geocoded = result.normalized
        else:
            raise click.ClickException("parcel-search needs --point or --address")
        ref = engine.find_parcel_at(search_point)
        if ref is None:
            raise click.ClickException("no parcel at that location")
        payload = {"parcel": ref.iri.value}
        if geocoded:
            payload["geocoded"] = geocoded
        click.echo(json.dumps(payload, indent=2))
        return

    from .query import (
        AttributeRow, AverageRow, ComplianceRow, DemographicsRow, ServiceRow, ZoningRow,
    )

    if name == "parcel-attributes":
        emit(engine.parcel_attributes(resolve()), AttributeRow.HEADERS)
    elif name == "land-use":
        result = engine.land_use(resolve())
        click.echo(json.dumps({"allowed": list(result.allowed),
                               "current": list(result.current)}, indent=2))
    elif name == "applicable-zoning":
        emit(engine.applicable_zoning(resolve()), ZoningRow.HEADERS)
    elif name == "zoning-compliance":
        if not attribute:
            raise click.ClickException("zoning-compliance needs --attribute")
        attribute_iri = attribute if "://" in attribute else vocab.HP + attribute
        emit(engine.zoning_compliance(resolve(), attribute_iri, radius), ComplianceRow.HEADERS)
    elif name == "demographics":
        emit(engine.neighbourhood_demographics(resolve()), DemographicsRow.HEADERS)
    elif name == "available-services":
        emit(engine.available_services(resolve()), ServiceRow.HEADERS)
    elif name.startswith("averages-"):
        emit(engine.city_averages(name.removeprefix("averages-")), AverageRow.HEADERS)
    elif name == "advanced-search":
        filters = ParcelFilters(
            vacant=vacant,
            government_owned=government_owned,
            zoned_for_use=zoned_for_use,
            neighbourhood=neighbourhood,
            area_range=(area_min, area_max) if area_min is not None or area_max is not None else None,
        )
        refs = engine.advanced_parcel_search(filters)
        click.echo(json.dumps({"parcels": [r.iri.value for r in refs]}, indent=2))


@main.command()
@click.option("--store", "store_path", default=None, help="Snapshot path [default: twin.nq or PARCELTWIN_STORE].")
@click.option("--out", "out_path", default="-", show_default=True)
@click.option("--graph", default=None, help="Dump just one named graph.")
def dump(store_path, out_path, graph):
    """Write a sorted N-Triples dump (diff-stable)."""
    store_path = resolve_store_path(store_path)
    store = open_store(store_path, must_exist=True)
    text = dump_store(store, graph)
    if out_path == "-":
        click.echo(text, nl=False)
    else:
        Path(out_path).write_text(text, encoding="utf-8")
        click.echo(f"wrote {len(text.splitlines())} triples to {out_path}")


@main.command()
@click.option("--store", "store_path", default=None)
@click.option("--port", type=int, default=None)
@click.option("--host", default=None)
@click.option("--timeout", type=float, default=None, help="Per-query budget, seconds.")
@click.option("--pool", type=int, default=None, help="Concurrent read queries.")
@click.option("--geocodes", "geocodes_path", default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def serve(store_path, port, host, timeout, pool, geocodes_path, config_path):
    """Start the HTTP API."""
    import uvicorn

    from .service import ServiceConfig, create_app

    config_values = load_config_file(config_path) if config_path else {}
    store_path = setting("store", store_path, config_values, "twin.nq")
    port = int(setting("port", port, config_values, 8080))
    host = setting("host", host, config_values, "127.0.0.1")
    timeout = float(setting("timeout", timeout, config_values, 30.0))
    pool = int(setting("pool", pool, config_values, 2))
    geocodes_path = setting("geocodes", geocodes_path, config_values, None)

    store = open_store(store_path, must_exist=True)
    geocoder = None
    table = geocodes_path or fixtures.fixture_path("data", "geocodes.csv")
    if Path(table).exists():
        geocoder = OfflineGeocoder.from_csv(table)
    service_config = ServiceConfig(
        timeout_s=timeout,
        pool_size=pool,
        geocoder=geocoder,
        rules=RuleConfig.from_mapping(config_values),
    )
    app = create_app(store, service_config)
    click.echo(f"serving {store_path} on {host}:{port} (pool={pool}, timeout={timeout:.0f}s)")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    sys.exit(main())
