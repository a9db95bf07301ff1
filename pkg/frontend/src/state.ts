// Dashboard view state. Result tables always correspond to the selected
// parcel: selecting a new parcel resets the query results and overlays, and
// each tab keeps at most one request in flight (a new submission cancels
// the previous one).

export const QUERY_TABS = [
  "attributes",
  "services",
  "zoning",
  "land-use",
  "demographics",
  "compliance",
] as const;

export type QueryTab = (typeof QUERY_TABS)[number];

export interface ViewState {
  searchText: string;
  geocoded: string | null;
  parcel: string | null;
  activeTab: QueryTab;
  complianceAttribute: string | null;
}

export function initialState(): ViewState {
  return {
    searchText: "",
    geocoded: null,
    parcel: null,
    activeTab: "attributes",
    complianceAttribute: null,
  };
}

export class TabRequests {
  private controllers = new Map<string, AbortController>();

  /** Abort any request in flight for the tab and hand back a fresh signal. */
  begin(tab: string): AbortSignal {
    this.controllers.get(tab)?.abort();
    const controller = new AbortController();
    this.controllers.set(tab, controller);
    return controller.signal;
  }

  abortAll(): void {
    for (const controller of this.controllers.values()) {
      controller.abort();
    }
    this.controllers.clear();
  }
}
