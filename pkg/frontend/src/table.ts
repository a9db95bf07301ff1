// Result table rendering and CSV download. Cells are inserted verbatim from
// the API payload; no reformatting happens here.

import { toCsv } from "./csv";
import type { TablePayload } from "./types";

export function renderTable(container: HTMLElement, payload: TablePayload): HTMLTableElement {
  container.textContent = "";
  const table = document.createElement("table");
  table.className = "results";
  const thead = document.createElement("thead");
  const headRow = document.createElement("tr");
  for (const column of payload.columns) {
    const cell = document.createElement("th");
    cell.setAttribute("scope", "col");
    cell.textContent = column;
    headRow.append(cell);
  }
  thead.append(headRow);
  const tbody = document.createElement("tbody");
  for (const row of payload.rows) {
    const tr = document.createElement("tr");
    for (const value of row) {
      const td = document.createElement("td");
      td.textContent = value;
      tr.append(td);
    }
    tbody.append(tr);
  }
  table.append(thead, tbody);
  container.append(table);
  return table;
}

export function renderMessage(container: HTMLElement, text: string, kind = "empty"): void {
  container.textContent = "";
  const paragraph = document.createElement("p");
  paragraph.className = kind;
  paragraph.textContent = text;
  container.append(paragraph);
}

export function renderList(container: HTMLElement, heading: string, items: string[]): void {
  const section = document.createElement("section");
  const title = document.createElement("h3");
  title.textContent = heading;
  section.append(title);
  if (items.length === 0) {
    const none = document.createElement("p");
    none.className = "empty";
    none.textContent = "No data available for this parcel.";
    section.append(none);
  } else {
    const list = document.createElement("ul");
    for (const item of items) {
      const li = document.createElement("li");
      li.textContent = item;
      list.append(li);
    }
    section.append(list);
  }
  container.append(section);
}

export function exportCsv(payload: TablePayload): string {
  return toCsv(payload.columns, payload.rows);
}

export function downloadCsv(payload: TablePayload, filename: string): void {
  const blob = new Blob([exportCsv(payload)], { type: "text/csv" });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  anchor.click();
  URL.revokeObjectURL(url);
}
