// CSV text matching the API's export byte-for-byte: minimal quoting, "" for
// embedded quotes, \n line terminator, no trailing newline differences.

function quoteIfNeeded(field: string): string {
  if (/[",\r\n]/.test(field)) {
    return `"${field.replace(/"/g, '""')}"`;
  }
  return field;
}

export function toCsv(columns: string[], rows: string[][]): string {
  if (columns.length === 0 && rows.length === 0) {
    return "";
  }
  const lines = [columns, ...rows].map((cells) => cells.map(quoteIfNeeded).join(","));
  return lines.join("\n") + "\n";
}
