"""Re-record the frontend's mock-API fixtures from the bundled pipeline."""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from parceltwin.fixtures import fixture_path
from parceltwin.geocode import OfflineGeocoder
from parceltwin.pipeline import build_fixture_store
from parceltwin.service import ServiceConfig, create_app

OUT = Path(__file__).resolve().parent.parent / "frontend" / "fixtures"
PARCEL = "Property5314508"


def main() -> None:
    store, _ = build_fixture_store(seed=42)
    geocoder = OfflineGeocoder.from_csv(fixture_path("data", "geocodes.csv"))
    client = TestClient(create_app(store, ServiceConfig(geocoder=geocoder)))
    OUT.mkdir(parents=True, exist_ok=True)

    def save(name: str, response, text: bool = False) -> None:
        response.raise_for_status()
        if text:
            (OUT / name).write_text(response.text, encoding="utf-8")
        else:
            (OUT / name).write_text(json.dumps(response.json(), indent=1), encoding="utf-8")
        print("wrote", name)

    save("search.json", client.get("/parcels/search", params={"address": "1203 Broadview Ave"}))
    save("attributes.json", client.get(f"/parcels/{PARCEL}/attributes"))
    save("attributes.csv", client.get(f"/parcels/{PARCEL}/attributes", params={"format": "csv"}), text=True)
    save("land-use.json", client.get(f"/parcels/{PARCEL}/land-use"))
    save("zoning.json", client.get(f"/parcels/{PARCEL}/zoning"))
    save("compliance-area.json", client.get(f"/parcels/{PARCEL}/compliance", params={"attribute": "area"}))
    save("compliance-area.csv",
         client.get(f"/parcels/{PARCEL}/compliance", params={"attribute": "area", "format": "csv"}),
         text=True)
    save("demographics.json", client.get(f"/parcels/{PARCEL}/demographics"))
    save("services.json", client.get(f"/parcels/{PARCEL}/services"))
    for kind in ("zoning", "services", "demographics"):
        save(f"averages-{kind}.json", client.get(f"/averages/{kind}"))
    save("meta-constrained-attributes.json", client.get("/meta/constrained-attributes"))
    save("meta-service-types.json", client.get("/meta/service-types"))


if __name__ == "__main__":
    main()
