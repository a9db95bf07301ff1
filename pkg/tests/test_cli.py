import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from parceltwin.cli import main
from parceltwin.fixtures import toronto_dir


@pytest.fixture(scope="module")
def pipeline_dir(tmp_path_factory):
    """One full CLI pipeline run shared by the read-only CLI tests."""
    workdir = tmp_path_factory.mktemp("cli")
    store = str(workdir / "twin.nq")
    synth_out = str(workdir / "synth")
    runner = CliRunner()
    fix = toronto_dir()

    r = runner.invoke(main, ["ingest", "--store", store,
                             "--schema", str(fix / "schema.ttl"),
                             "--manifest", str(fix / "ingest_manifest.tsv")])
    assert r.exit_code == 0, r.output
    r = runner.invoke(main, ["synth", "--store", store, "--out", synth_out, "--seed", "42"])
    assert r.exit_code == 0, r.output
    r = runner.invoke(main, ["infer", "--store", store])
    assert r.exit_code == 0, r.output
    return workdir


def run(args):
    runner = CliRunner()
    result = runner.invoke(main, args)
    return result


class TestPipeline:
    def test_infer_twice_prints_zero(self, pipeline_dir):
        store = str(pipeline_dir / "twin.nq")
        result = run(["infer", "--store", store])
        assert result.exit_code == 0
        assert "0 inferred" in result.output

    def test_ingest_reports_counts(self, tmp_path):
        store = str(tmp_path / "s.nq")
        fix = toronto_dir()
        result = run(["ingest", "--store", store,
                      "--spec", str(fix / "maps" / "parcels.map"),
                      "--source", str(fix / "data" / "parcels.geojson")])
        assert result.exit_code == 0
        assert "rows=7" in result.output
        assert "inserted=" in result.output

    def test_query_parcel_attributes_csv(self, pipeline_dir):
        store = str(pipeline_dir / "twin.nq")
        result = run(["query", "parcel-attributes", "--store", store,
                      "--parcel", "Property5314508"])
        assert result.exit_code == 0
        lines = result.output.splitlines()
        assert lines[0] == "Attribute,Value,Unit of Measure"
        assert "area,943.29,square metres" in lines
        assert "perimeter,131.12,metres" in lines

    def test_query_compliance(self, pipeline_dir):
        store = str(pipeline_dir / "twin.nq")
        result = run(["query", "zoning-compliance", "--store", store,
                      "--parcel", "Property5314508", "--attribute", "hasArea"])
        assert result.exit_code == 0
        assert "Property5309824,Zone String rd_f6_0_a185_d0_75,Minimum,185" in result.output

    def test_parcel_search_by_address(self, pipeline_dir):
        store = str(pipeline_dir / "twin.nq")
        result = run(["query", "parcel-search", "--store", store,
                      "--address", "1203 Broadview Ave"])
        assert result.exit_code == 0
        body = json.loads(result.output)
        assert body["parcel"].endswith("#Property5314508")
        assert "East York" in body["geocoded"]

    def test_dump_sorted(self, pipeline_dir, tmp_path):
        store = str(pipeline_dir / "twin.nq")
        out = tmp_path / "dump.nt"
        result = run(["dump", "--store", store, "--out", str(out)])
        assert result.exit_code == 0
        lines = out.read_text().splitlines()
        assert lines == sorted(lines)
        assert lines, "dump should not be empty"

    def test_averages_query(self, pipeline_dir):
        store = str(pipeline_dir / "twin.nq")
        result = run(["query", "averages-zoning", "--store", store])
        assert result.exit_code == 0
        assert "area,277.5,square metres" in result.output

    def test_advanced_search(self, pipeline_dir):
        store = str(pipeline_dir / "twin.nq")
        result = run(["query", "advanced-search", "--store", store,
                      "--vacant", "--area-min", "900", "--area-max", "1000"])
        assert result.exit_code == 0
        body = json.loads(result.output)
        assert len(body["parcels"]) == 1


class TestErrors:
    def test_missing_store_is_actionable(self):
        result = run(["infer", "--store", "/nonexistent/path.nq"])
        assert result.exit_code != 0
        assert "not found" in result.output
        assert "Traceback" not in result.output

    def test_unknown_parcel_is_actionable(self, pipeline_dir):
        store = str(pipeline_dir / "twin.nq")
        result = run(["query", "parcel-attributes", "--store", store, "--parcel", "Nope"])
        assert result.exit_code != 0
        assert "no parcel" in result.output
        assert "Traceback" not in result.output

    def test_fixtures_dir_prints_path(self):
        result = run(["fixtures-dir"])
        assert result.exit_code == 0
        assert Path(result.output.strip()).is_dir()


class TestDeterminism:
    def test_double_ingest_zero_new(self, tmp_path):
        store = str(tmp_path / "s.nq")
        fix = toronto_dir()
        args = ["ingest", "--store", store,
                "--spec", str(fix / "maps" / "parcels.map"),
                "--source", str(fix / "data" / "parcels.geojson")]
        first = run(args)
        assert "duplicates=0" in first.output
        second = run(args)
        assert "inserted=0" in second.output


class TestSettingsChain:
    def test_env_var_store_override(self, pipeline_dir, monkeypatch):
        monkeypatch.setenv("PARCELTWIN_STORE", str(pipeline_dir / "twin.nq"))
        result = run(["query", "parcel-attributes", "--parcel", "Property5314508"])
        assert result.exit_code == 0
        assert "area,943.29,square metres" in result.output

    def test_flag_beats_env(self, pipeline_dir, monkeypatch, tmp_path):
        monkeypatch.setenv("PARCELTWIN_STORE", str(tmp_path / "missing.nq"))
        result = run(["query", "parcel-attributes",
                      "--store", str(pipeline_dir / "twin.nq"),
                      "--parcel", "Property5314508"])
        assert result.exit_code == 0


class TestInferReport:
    def test_machine_readable_report(self, pipeline_dir, tmp_path):
        store = str(pipeline_dir / "twin.nq")
        out = tmp_path / "report.json"
        result = run(["infer", "--store", store, "--report", str(out)])
        assert result.exit_code == 0
        body = json.loads(out.read_text())
        assert "rules" in body and "new_triples" in body
        assert "zonedAsType" in body["rules"]
