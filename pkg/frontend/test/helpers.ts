import { readFile } from "node:fs/promises";
import { resolve } from "node:path";

import type { FixtureLoader } from "../src/mockApi";
import { MockApiClient } from "../src/mockApi";

function fixturePath(name: string): string {
  return resolve(process.cwd(), "fixtures", name);
}

export const diskLoader: FixtureLoader = async (name) => {
  return JSON.parse(await readFile(fixturePath(name), "utf-8"));
};

export function mockClient(): MockApiClient {
  return new MockApiClient(diskLoader);
}

export async function fixtureText(name: string): Promise<string> {
  return readFile(fixturePath(name), "utf-8");
}

export function tableCells(root: HTMLElement): string[][] {
  const table = root.querySelector("table.results");
  if (!table) return [];
  return [...table.querySelectorAll("tbody tr")].map((tr) =>
    [...tr.querySelectorAll("td")].map((td) => td.textContent ?? ""),
  );
}

export function headerCells(root: HTMLElement): string[] {
  const table = root.querySelector("table.results");
  if (!table) return [];
  return [...table.querySelectorAll("thead th")].map((th) => th.textContent ?? "");
}
