// Mock API backed by recorded fixture responses, so the dashboard runs and
// tests with no engine behind it. The loader is injected: the browser build
// fetches fixtures/ files, tests read them from disk.

import { ApiError, type ApiClient } from "./api";
import type {
  CompliancePayload,
  DemographicsPayload,
  LandUsePayload,
  MetaEntry,
  SearchResult,
  TablePayload,
  ZoningPayload,
} from "./types";

export type FixtureLoader = (name: string) => Promise<unknown>;

const FIXTURE_ADDRESS = "1203 broadview ave";
const FIXTURE_PARCEL_SUFFIX = "Property5314508";

function checkParcel(parcel: string): void {
  if (!parcel.endsWith(FIXTURE_PARCEL_SUFFIX)) {
    throw new ApiError("not-found", `no parcel ${parcel}`, 404);
  }
}

export class MockApiClient implements ApiClient {
  constructor(private readonly load: FixtureLoader) {}

  private async fixture<T>(name: string): Promise<T> {
    return (await this.load(name)) as T;
  }

  async search(address: string): Promise<SearchResult> {
    if (!address.trim()) {
      throw new ApiError("bad-request", "address must be non-empty", 400);
    }
    if (address.trim().toLowerCase() !== FIXTURE_ADDRESS) {
      throw new ApiError("not-found", `address not found: ${address}`, 404);
    }
    return this.fixture<SearchResult>("search.json");
  }

  async searchPoint(): Promise<SearchResult> {
    return this.fixture<SearchResult>("search.json");
  }

  async attributes(parcel: string): Promise<TablePayload> {
    checkParcel(parcel);
    return this.fixture<TablePayload>("attributes.json");
  }

  async landUse(parcel: string): Promise<LandUsePayload> {
    checkParcel(parcel);
    return this.fixture<LandUsePayload>("land-use.json");
  }

  async zoning(parcel: string): Promise<ZoningPayload> {
    checkParcel(parcel);
    return this.fixture<ZoningPayload>("zoning.json");
  }

  async compliance(parcel: string, attribute: string): Promise<CompliancePayload> {
    checkParcel(parcel);
    if (attribute !== "area" && !attribute.endsWith("hasArea")) {
      throw new ApiError("bad-request", `unknown constrained attribute: ${attribute}`, 400);
    }
    return this.fixture<CompliancePayload>("compliance-area.json");
  }

  async demographics(parcel: string): Promise<DemographicsPayload> {
    checkParcel(parcel);
    return this.fixture<DemographicsPayload>("demographics.json");
  }

  async services(parcel: string): Promise<TablePayload> {
    checkParcel(parcel);
    return this.fixture<TablePayload>("services.json");
  }

  async averages(kind: "demographics" | "services" | "zoning"): Promise<TablePayload> {
    return this.fixture<TablePayload>(`averages-${kind}.json`);
  }

  async constrainedAttributes(): Promise<MetaEntry[]> {
    return this.fixture<MetaEntry[]>("meta-constrained-attributes.json");
  }
}

export function browserFixtureLoader(base = "fixtures"): FixtureLoader {
  return async (name) => {
    const response = await fetch(`${base}/${name}`);
    if (!response.ok) {
      throw new ApiError("internal", `fixture ${name} missing`, response.status);
    }
    return response.json();
  };
}
