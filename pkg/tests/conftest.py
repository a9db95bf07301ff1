import pytest

from parceltwin.pipeline import build_fixture_store
from parceltwin.query import QueryEngine

ACCEPTANCE_LABELS = {
    "test_compliance_truth_table": "compliance truth table (8 cases incl. dashboard rows, <1s)",
    "test_transit_oracle": "transit capacity oracle rows (601000 / 2520)",
    "test_manning_oracle": "Manning full-flow oracle (24.0 @1e-9) + monotonicity grid",
    "test_road_capacity": "road capacity: 13 class densities exact, 10k draws in band",
    "test_ratio_capacity_constants": "ratio-capacity constants (populations + min ratios)",
    "test_geo_rule_oracle_equivalence": "geo rules == brute-force oracle on 50x5x12 world, idempotent, <10s",
    "test_property_chain_fixtures": "four property chains, exact edge sets",
    "test_figure_fidelity": "figure-fidelity fixtures (attributes/services/zoning/demographics)",
    "test_averages_negative_limit_filter": "zoning averages exclude negative limits (277.5)",
    "test_ingest_determinism": "ingest determinism: identical dumps, zero net new",
    "test_store_correctness": "store indexes == linear scan on 10k triples + graph isolation",
    "test_geodesy": "geodesy: 1 deg latitude and buffer radii within tolerance",
    "test_end_to_end_cli_pipeline": "end-to-end CLI pipeline < 60s reproduces figure checks",
}


@pytest.fixture(scope="session")
def fixture_store():
    store, report = build_fixture_store(seed=42)
    return store


@pytest.fixture(scope="session")
def engine(fixture_store):
    return QueryEngine(fixture_store)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion."""
    outcomes = {}
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            if "test_acceptance.py" in str(getattr(report, "nodeid", "")):
                name = report.nodeid.split("::")[-1].split("[")[0]
                if name in ACCEPTANCE_LABELS:
                    outcomes[name] = status
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name, label in ACCEPTANCE_LABELS.items():
        status = outcomes.get(name)
        if status is None:
            continue
        verdict = "PASS" if status == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {label}")
