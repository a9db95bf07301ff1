// Typed client for the parceltwin API. Every dashboard number comes from
// one of these calls; the app layer never computes domain values itself.

import type {
  CompliancePayload,
  DemographicsPayload,
  LandUsePayload,
  MetaEntry,
  SearchResult,
  TablePayload,
  ZoningPayload,
} from "./types";

export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

export interface ApiClient {
  search(address: string, signal?: AbortSignal): Promise<SearchResult>;
  searchPoint(lon: number, lat: number, signal?: AbortSignal): Promise<SearchResult>;
  attributes(parcel: string, signal?: AbortSignal): Promise<TablePayload>;
  landUse(parcel: string, signal?: AbortSignal): Promise<LandUsePayload>;
  zoning(parcel: string, signal?: AbortSignal): Promise<ZoningPayload>;
  compliance(parcel: string, attribute: string, signal?: AbortSignal): Promise<CompliancePayload>;
  demographics(parcel: string, signal?: AbortSignal): Promise<DemographicsPayload>;
  services(parcel: string, signal?: AbortSignal): Promise<TablePayload>;
  averages(kind: "demographics" | "services" | "zoning", signal?: AbortSignal): Promise<TablePayload>;
  constrainedAttributes(signal?: AbortSignal): Promise<MetaEntry[]>;
}

async function getJson<T>(url: string, signal?: AbortSignal): Promise<T> {
  const response = await fetch(url, { signal });
  if (!response.ok) {
    let code = "internal";
    let message = `${response.status}`;
    try {
      const body = await response.json();
      code = body.code ?? code;
      message = body.message ?? message;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(code, message, response.status);
  }
  return (await response.json()) as T;
}

export class HttpApiClient implements ApiClient {
  constructor(private readonly base: string) {}

  private url(path: string, params?: Record<string, string>): string {
    const qs = params ? `?${new URLSearchParams(params)}` : "";
    return `${this.base}${path}${qs}`;
  }

  search(address: string, signal?: AbortSignal) {
    return getJson<SearchResult>(this.url("/parcels/search", { address }), signal);
  }

  searchPoint(lon: number, lat: number, signal?: AbortSignal) {
    return getJson<SearchResult>(
      this.url("/parcels/search", { lon: String(lon), lat: String(lat) }),
      signal,
    );
  }

  attributes(parcel: string, signal?: AbortSignal) {
    return getJson<TablePayload>(this.url(`/parcels/${encodeURIComponent(parcel)}/attributes`), signal);
  }

  landUse(parcel: string, signal?: AbortSignal) {
    return getJson<LandUsePayload>(this.url(`/parcels/${encodeURIComponent(parcel)}/land-use`), signal);
  }

  zoning(parcel: string, signal?: AbortSignal) {
    return getJson<ZoningPayload>(this.url(`/parcels/${encodeURIComponent(parcel)}/zoning`), signal);
  }

  compliance(parcel: string, attribute: string, signal?: AbortSignal) {
    return getJson<CompliancePayload>(
      this.url(`/parcels/${encodeURIComponent(parcel)}/compliance`, { attribute }),
      signal,
    );
  }

  demographics(parcel: string, signal?: AbortSignal) {
    return getJson<DemographicsPayload>(
      this.url(`/parcels/${encodeURIComponent(parcel)}/demographics`),
      signal,
    );
  }

  services(parcel: string, signal?: AbortSignal) {
    return getJson<TablePayload>(this.url(`/parcels/${encodeURIComponent(parcel)}/services`), signal);
  }

  averages(kind: "demographics" | "services" | "zoning", signal?: AbortSignal) {
    return getJson<TablePayload>(this.url(`/averages/${kind}`), signal);
  }

  constrainedAttributes(signal?: AbortSignal) {
    return getJson<MetaEntry[]>(this.url("/meta/constrained-attributes"), signal);
  }
}
