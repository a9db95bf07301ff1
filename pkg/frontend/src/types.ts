// Payload shapes of the parceltwin HTTP API.

export interface TablePayload {
  columns: string[];
  rows: string[][];
}

export interface GeoJsonGeometry {
  type: string;
  coordinates: unknown;
}

export interface Feature {
  type: "Feature";
  properties: Record<string, string>;
  geometry: GeoJsonGeometry;
}

export interface FeatureCollection {
  type: "FeatureCollection";
  features: Feature[];
}

export interface SearchResult {
  parcel: string;
  geocoded: string | null;
  point: GeoJsonGeometry;
  features: FeatureCollection;
}

export interface ZoningPayload extends TablePayload {
  features: FeatureCollection;
}

export interface CompliancePayload extends TablePayload {
  features: FeatureCollection;
  legend: Record<string, number>;
}

export interface DemographicsPayload extends TablePayload {
  features: FeatureCollection;
}

export interface LandUsePayload {
  allowed: string[];
  current: string[];
}

export interface MetaEntry {
  iri: string;
  label: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail?: string;
}
