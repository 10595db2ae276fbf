import { EmptySelection } from "./errors.js";
import { selectSeries } from "./figures.js";
import { rawField, type ResultRow } from "./schema.js";

/**
 * Two-row figure-of-merit table over the surface-count sweep, cascaded MMSE
 * rows only. Every number is the untouched CSV field string; this layer
 * never recomputes or reformats a result.
 */
export function renderFomTable(rows: ResultRow[]): string {
  const byProtocol: Array<[string, ResultRow[]]> = [
    ["Proposed", selectSeries(rows, {
      protocol: "proposed",
      channelKind: "cascaded",
      estimatorKind: "mmse",
      eta: null,
    })],
    ["Benchmark", selectSeries(rows, {
      protocol: "benchmark",
      channelKind: "cascaded",
      estimatorKind: "mmse",
      eta: null,
    })],
  ];
  for (const [label, selected] of byProtocol) {
    if (selected.length === 0) {
      throw new EmptySelection(
        `no cascaded MMSE rows for the ${label.toLowerCase()} protocol`,
      );
    }
  }

  const first = byProtocol[0]![1];
  const sweepValues = first.map((row) => row.sweepValue);
  const header = [first[0]!.sweepName, ...sweepValues.map((v) => String(v))];
  const lines: string[][] = [header];
  for (const [label, selected] of byProtocol) {
    const cells = [label];
    for (const v of sweepValues) {
      const row = selected.find((r) => r.sweepValue === v);
      cells.push(row === undefined ? "" : rawField(row, "fom"));
    }
    lines.push(cells);
  }

  const widths = header.map((_, col) =>
    Math.max(...lines.map((cells) => (cells[col] ?? "").length)),
  );
  const body = lines
    .map((cells) =>
      cells
        .map((cell, col) => cell.padEnd(widths[col]!))
        .join("  ")
        .trimEnd(),
    )
    .join("\n");
  return `Figure of merit 1/(NMSE * training time) [1/s], cascaded MMSE\n${body}\n`;
}
