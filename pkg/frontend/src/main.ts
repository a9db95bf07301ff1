// Entry point: real API by default, recorded-fixture mock with ?mock=1 (no
// engine required).

import { HttpApiClient } from "./api";
import { mount } from "./app";
import { MockApiClient, browserFixtureLoader } from "./mockApi";

declare global {
  interface Window {
    PARCELTWIN_API?: string;
  }
}

const params = new URLSearchParams(window.location.search);
const base =
  params.get("api") ?? window.PARCELTWIN_API ?? "http://127.0.0.1:8080";
const client =
  params.get("mock") === "1" || base === "mock"
    ? new MockApiClient(browserFixtureLoader())
    : new HttpApiClient(base);

mount(document.getElementById("app")!, client);
