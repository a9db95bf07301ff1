// Dashboard wiring: address search selects a parcel, the query selector runs
// one endpoint per tab and renders its table, overlays, and supplemental
// city-average context.

import { ApiError, type ApiClient } from "./api";
import { MapView } from "./map";
import { QUERY_TABS, TabRequests, initialState, type QueryTab, type ViewState } from "./state";
import { downloadCsv, exportCsv, renderList, renderMessage, renderTable } from "./table";
import type { TablePayload } from "./types";

const TAB_LABELS: Record<QueryTab, string> = {
  attributes: "Parcel Attributes",
  services: "Available Services",
  zoning: "Applicable Zoning",
  "land-use": "Land Use",
  demographics: "Neighbourhood Demographics",
  compliance: "Zoning Compliance",
};

const AVERAGES_FOR_TAB: Partial<Record<QueryTab, "services" | "zoning" | "demographics">> = {
  services: "services",
  zoning: "zoning",
  demographics: "demographics",
};

function localName(iri: string): string {
  const hash = iri.lastIndexOf("#");
  const slash = iri.lastIndexOf("/");
  return iri.slice(Math.max(hash, slash) + 1);
}

export class Dashboard {
  readonly state: ViewState = initialState();
  private readonly requests = new TabRequests();
  private map!: MapView;
  private lastTable: TablePayload | null = null;

  private searchInput!: HTMLInputElement;
  private verification!: HTMLElement;
  private parcelLine!: HTMLElement;
  private searchError!: HTMLElement;
  private tabSelect!: HTMLSelectElement;
  private attributeSelect!: HTMLSelectElement;
  private attributeLabel!: HTMLLabelElement;
  private runButton!: HTMLButtonElement;
  private exportButton!: HTMLButtonElement;
  private results!: HTMLElement;
  private context!: HTMLElement;
  private queryError!: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {
    this.build();
  }

  private build(): void {
    this.root.textContent = "";
    this.root.innerHTML = `
      <header>
        <h1>Housing Potential Dashboard</h1>
      </header>
      <section class="search" aria-label="Parcel search">
        <label for="address">Address</label>
        <input id="address" type="text" autocomplete="street-address" />
        <button id="search-button" type="button">Search Parcel</button>
        <p id="search-error" class="error" role="alert" hidden></p>
        <p id="verification" class="verification" hidden></p>
        <p id="parcel-line" class="parcel-line" hidden></p>
      </section>
      <section class="query" aria-label="Parcel queries" hidden>
        <label for="tab-select">Choose a query to run on this parcel</label>
        <select id="tab-select"></select>
        <label for="attribute-select" id="attribute-label" hidden>Select Attribute to Review</label>
        <select id="attribute-select" hidden></select>
        <button id="run-button" type="button">Run</button>
        <button id="export-button" type="button" disabled>Export CSV</button>
        <p id="query-error" class="error" role="alert" hidden></p>
        <div id="results" aria-live="polite"></div>
        <div id="context" class="context"></div>
      </section>
      <section class="map-section" aria-label="Map">
        <div id="legend" class="legend"></div>
        <canvas id="map" width="640" height="420"></canvas>
      </section>
    `;
    this.searchInput = this.root.querySelector("#address")!;
    this.verification = this.root.querySelector("#verification")!;
    this.parcelLine = this.root.querySelector("#parcel-line")!;
    this.searchError = this.root.querySelector("#search-error")!;
    this.tabSelect = this.root.querySelector("#tab-select")!;
    this.attributeSelect = this.root.querySelector("#attribute-select")!;
    this.attributeLabel = this.root.querySelector("#attribute-label")!;
    this.runButton = this.root.querySelector("#run-button")!;
    this.exportButton = this.root.querySelector("#export-button")!;
    this.results = this.root.querySelector("#results")!;
    this.context = this.root.querySelector("#context")!;
    this.queryError = this.root.querySelector("#query-error")!;
    this.map = new MapView(
      this.root.querySelector("#map")!,
      this.root.querySelector("#legend")!,
    );

    for (const tab of QUERY_TABS) {
      const option = document.createElement("option");
      option.value = tab;
      option.textContent = TAB_LABELS[tab];
      this.tabSelect.append(option);
    }

    this.root.querySelector("#search-button")!.addEventListener("click", () => {
      void this.search(this.searchInput.value);
    });
    this.searchInput.addEventListener("keydown", (event) => {
      if ((event as KeyboardEvent).key === "Enter") {
        void this.search(this.searchInput.value);
      }
    });
    this.tabSelect.addEventListener("change", () => {
      this.state.activeTab = this.tabSelect.value as QueryTab;
      this.attributeLabel.hidden = this.state.activeTab !== "compliance";
      this.attributeSelect.hidden = this.state.activeTab !== "compliance";
    });
    this.attributeSelect.addEventListener("change", () => {
      this.state.complianceAttribute = this.attributeSelect.value;
    });
    this.runButton.addEventListener("click", () => {
      void this.runQuery();
    });
    this.exportButton.addEventListener("click", () => {
      if (this.lastTable) {
        downloadCsv(this.lastTable, `${this.state.activeTab}.csv`);
      }
    });
  }

  async search(address: string): Promise<void> {
    this.state.searchText = address;
    this.searchError.hidden = true;
    const signal = this.requests.begin("search");
    try {
      // "lon, lat" typed directly skips the geocoder but lands in the same
      // downstream state as an address search
      const direct = address.trim().match(/^(-?\d+(?:\.\d+)?)\s*,\s*(-?\d+(?:\.\d+)?)$/);
      const result = direct
        ? await this.api.searchPoint(Number(direct[1]), Number(direct[2]), signal)
        : await this.api.search(address, signal);
      this.state.parcel = localName(result.parcel);
      this.state.geocoded = result.geocoded;
      this.state.complianceAttribute = null;
      this.verification.textContent = result.geocoded ? `Geocoded: ${result.geocoded}` : "";
      this.verification.hidden = !result.geocoded;
      this.parcelLine.textContent = `Detected Parcel ID: ${result.parcel}`;
      this.parcelLine.hidden = false;
      (this.root.querySelector(".query") as HTMLElement).hidden = false;
      // a newly selected parcel invalidates prior results and overlays
      this.lastTable = null;
      this.exportButton.disabled = true;
      this.results.textContent = "";
      this.context.textContent = "";
      this.map.clearOverlays();
      this.map.setLayer("search", result.features);
      await this.loadAttributeChoices();
    } catch (error) {
      if ((error as Error).name === "AbortError") return;
      const message = error instanceof ApiError ? error.message : String(error);
      this.searchError.textContent = message;
      this.searchError.hidden = false;
    }
  }

  private async loadAttributeChoices(): Promise<void> {
    const entries = await this.api.constrainedAttributes();
    this.attributeSelect.textContent = "";
    for (const entry of entries) {
      const option = document.createElement("option");
      option.value = entry.iri;
      option.textContent = entry.label;
      this.attributeSelect.append(option);
    }
    if (entries.length > 0) {
      const preferred = entries.find((entry) => entry.label === "area") ?? entries[0];
      this.attributeSelect.value = preferred.iri;
      this.state.complianceAttribute = preferred.iri;
    }
  }

  async runQuery(): Promise<void> {
    if (!this.state.parcel) return;
    const tab = this.state.activeTab;
    const parcel = this.state.parcel;
    const signal = this.requests.begin(`query:${tab}`);
    this.queryError.hidden = true;
    try {
      this.map.clearOverlays(["search"]);
      this.lastTable = null;
      this.exportButton.disabled = true;
      if (tab === "attributes") {
        this.showTable(await this.api.attributes(parcel, signal));
      } else if (tab === "services") {
        this.showTable(await this.api.services(parcel, signal));
      } else if (tab === "zoning") {
        const payload = await this.api.zoning(parcel, signal);
        this.showTable(payload);
        this.map.setLayer("zones", payload.features);
      } else if (tab === "land-use") {
        const payload = await this.api.landUse(parcel, signal);
        this.results.textContent = "";
        renderList(this.results, "Allowed Use", payload.allowed);
        renderList(this.results, "Current Use", payload.current);
      } else if (tab === "demographics") {
        const payload = await this.api.demographics(parcel, signal);
        this.showTable(payload);
        this.map.setLayer("tracts", payload.features);
      } else if (tab === "compliance") {
        const attribute = this.state.complianceAttribute;
        if (!attribute) {
          throw new ApiError("bad-request", "choose an attribute to review", 400);
        }
        const payload = await this.api.compliance(parcel, attribute, signal);
        this.showTable(payload);
        this.map.setLayer("compliance", payload.features);
      }
      await this.showAverages(tab, signal);
    } catch (error) {
      if ((error as Error).name === "AbortError") return;
      this.renderQueryError(error);
    }
  }

  private showTable(payload: TablePayload): void {
    if (payload.rows.length === 0) {
      renderMessage(this.results, "No data available for this parcel.");
      this.lastTable = null;
      this.exportButton.disabled = true;
      return;
    }
    renderTable(this.results, payload);
    this.lastTable = payload;
    this.exportButton.disabled = false;
  }

  private async showAverages(tab: QueryTab, signal: AbortSignal): Promise<void> {
    this.context.textContent = "";
    const kind = AVERAGES_FOR_TAB[tab];
    if (!kind) return;
    const payload = await this.api.averages(kind, signal);
    if (payload.rows.length === 0) return;
    const heading = document.createElement("h3");
    heading.textContent = "City-wide averages";
    this.context.append(heading);
    const holder = document.createElement("div");
    this.context.append(holder);
    renderTable(holder, payload);
  }

  private renderQueryError(error: unknown): void {
    const isBusy = error instanceof ApiError && error.code === "busy";
    const message = error instanceof ApiError ? error.message : String(error);
    this.queryError.textContent = isBusy
      ? `${message} — try again`
      : message;
    this.queryError.hidden = false;
    if (isBusy) {
      const retry = document.createElement("button");
      retry.type = "button";
      retry.textContent = "Retry";
      retry.addEventListener("click", () => void this.runQuery());
      this.queryError.append(" ", retry);
    }
  }

  exportCurrentCsv(): string | null {
    return this.lastTable ? exportCsv(this.lastTable) : null;
  }
}

export function mount(root: HTMLElement, api: ApiClient): Dashboard {
  return new Dashboard(root, api);
}
