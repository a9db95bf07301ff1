// Canvas renderer for GeoJSON overlays plus the legend bookkeeping. No
// basemap: layers draw on a plain canvas scaled to the feature extent, so
// tests can run without any tile service (and without a 2d context at all:
// legend math is pure).

import type { Feature, FeatureCollection } from "./types";

const STATUS_COLORS: Record<string, string> = {
  compliant: "#2e7d32",
  noncompliant: "#c62828",
  "incompatible units": "#ef6c00",
  unknown: "#757575",
  "not-applicable": "#9e9e9e",
};

const LAYER_COLORS: Record<string, string> = {
  "search-point": "#1565c0",
  parcel: "#1565c0",
  zone: "#6a1b9a",
  tract: "#00838f",
  compliance: "#757575",
};

export interface LegendEntry {
  label: string;
  count: number;
  color: string;
}

export function featureColor(feature: Feature): string {
  const status = feature.properties.status;
  if (status && STATUS_COLORS[status]) {
    return STATUS_COLORS[status];
  }
  return LAYER_COLORS[feature.properties.layer] ?? "#455a64";
}

export function legendKey(feature: Feature): string {
  return (
    feature.properties.status ??
    feature.properties.label ??
    feature.properties.layer ??
    "layer"
  );
}

/** Count rendered overlay features per status/label, the way the map legend
 * displays them (e.g. "compliant (214)"). */
export function legendCounts(features: Feature[]): LegendEntry[] {
  const counts = new Map<string, LegendEntry>();
  for (const feature of features) {
    const key = legendKey(feature);
    const entry = counts.get(key);
    if (entry) {
      entry.count += 1;
    } else {
      counts.set(key, { label: key, count: 1, color: featureColor(feature) });
    }
  }
  return [...counts.values()].sort((a, b) => a.label.localeCompare(b.label));
}

type Bounds = { minX: number; minY: number; maxX: number; maxY: number };

function walkCoordinates(geometry: { type: string; coordinates: unknown }, visit: (lon: number, lat: number) => void): void {
  const descend = (node: unknown): void => {
    if (!Array.isArray(node)) return;
    if (node.length >= 2 && typeof node[0] === "number" && typeof node[1] === "number") {
      visit(node[0] as number, node[1] as number);
      return;
    }
    for (const child of node) descend(child);
  };
  descend(geometry.coordinates);
}

function extent(features: Feature[]): Bounds | null {
  let bounds: Bounds | null = null;
  for (const feature of features) {
    walkCoordinates(feature.geometry, (lon, lat) => {
      if (!bounds) {
        bounds = { minX: lon, minY: lat, maxX: lon, maxY: lat };
      } else {
        bounds.minX = Math.min(bounds.minX, lon);
        bounds.minY = Math.min(bounds.minY, lat);
        bounds.maxX = Math.max(bounds.maxX, lon);
        bounds.maxY = Math.max(bounds.maxY, lat);
      }
    });
  }
  return bounds;
}

export class MapView {
  private layers = new Map<string, Feature[]>();

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly legendElement: HTMLElement,
  ) {}

  setLayer(name: string, collection: FeatureCollection | null): void {
    if (collection === null) {
      this.layers.delete(name);
    } else {
      this.layers.set(name, collection.features);
    }
    this.redraw();
  }

  clearOverlays(keep: string[] = []): void {
    for (const name of [...this.layers.keys()]) {
      if (!keep.includes(name)) {
        this.layers.delete(name);
      }
    }
    this.redraw();
  }

  allFeatures(): Feature[] {
    return [...this.layers.values()].flat();
  }

  private redraw(): void {
    this.renderLegend();
    const context = this.canvas.getContext ? this.canvas.getContext("2d") : null;
    if (!context) {
      return; // headless test environment; legend still reflects state
    }
    const { width, height } = this.canvas;
    context.clearRect(0, 0, width, height);
    const features = this.allFeatures();
    const bounds = extent(features);
    if (!bounds) return;
    const pad = 12;
    const spanX = Math.max(bounds.maxX - bounds.minX, 1e-9);
    const spanY = Math.max(bounds.maxY - bounds.minY, 1e-9);
    const scale = Math.min((width - 2 * pad) / spanX, (height - 2 * pad) / spanY);
    const toPixel = (lon: number, lat: number): [number, number] => [
      pad + (lon - bounds.minX) * scale,
      height - pad - (lat - bounds.minY) * scale,
    ];

    for (const feature of features) {
      context.strokeStyle = featureColor(feature);
      context.fillStyle = featureColor(feature) + "33";
      context.lineWidth = 1.5;
      this.drawGeometry(context, feature, toPixel);
    }
  }

  private drawGeometry(
    context: CanvasRenderingContext2D,
    feature: Feature,
    toPixel: (lon: number, lat: number) => [number, number],
  ): void {
    const geometry = feature.geometry;
    if (geometry.type === "Point") {
      const [lon, lat] = geometry.coordinates as [number, number];
      const [x, y] = toPixel(lon, lat);
      context.beginPath();
      context.arc(x, y, 4, 0, 2 * Math.PI);
      context.fill();
      context.stroke();
      return;
    }
    const rings: number[][][] =
      geometry.type === "Polygon"
        ? (geometry.coordinates as number[][][])
        : geometry.type === "MultiPolygon"
          ? (geometry.coordinates as number[][][][]).flat()
          : geometry.type === "LineString"
            ? [geometry.coordinates as number[][]]
            : [];
    for (const ring of rings) {
      context.beginPath();
      ring.forEach(([lon, lat], index) => {
        const [x, y] = toPixel(lon, lat);
        if (index === 0) context.moveTo(x, y);
        else context.lineTo(x, y);
      });
      if (geometry.type !== "LineString") {
        context.closePath();
        context.fill();
      }
      context.stroke();
    }
  }

  private renderLegend(): void {
    this.legendElement.textContent = "";
    for (const entry of legendCounts(this.allFeatures())) {
      const item = document.createElement("span");
      item.className = "legend-item";
      const swatch = document.createElement("span");
      swatch.className = "legend-swatch";
      swatch.style.backgroundColor = entry.color;
      item.append(swatch, ` ${entry.label} (${entry.count}) `);
      this.legendElement.append(item);
    }
  }
}
