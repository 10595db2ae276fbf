import { readFileSync, writeFileSync } from "node:fs";

import { EmptySelection } from "./errors.js";
import {
  figureSpec,
  selectSeries,
  type FigureId,
  type PlotSpec,
} from "./figures.js";
import { parseResultCsv, rawField, type ResultRow } from "./schema.js";
import {
  renderChartSvg,
  type ChartInput,
  type PanelInput,
  type SeriesInput,
} from "./svg.js";
import { renderFomTable } from "./table.js";

export interface RenderResult {
  outputPath: string;
  /** present for the figure-of-merit table */
  table: string | null;
}

function buildChart(spec: PlotSpec, rows: ResultRow[]): ChartInput {
  let matched = 0;
  const panels: PanelInput[] = spec.panels.map((panel) => {
    const series: SeriesInput[] = [];
    for (const def of panel.series) {
      const selected = selectSeries(rows, def.filter);
      if (selected.length === 0) continue; // absent series are dropped, not faked
      matched += selected.length;
      const markers = def.markers;
      const line = def.line;
      series.push({
        def,
        xRaw: selected.map((row) => rawField(row, "sweep_value")),
        markerRaw: markers === null
          ? null
          : selected.map((row) => rawField(row, markers)),
        lineRaw: line === null
          ? null
          : selected.map((row) => rawField(row, line)),
      });
    }
    return { yAxis: panel.yAxis, series };
  });
  if (matched === 0) {
    throw new EmptySelection(
      `no rows in ${spec.inputPath} match any ${spec.figureId} series`,
    );
  }
  return { figureId: spec.figureId, title: spec.title, xAxis: spec.xAxis, panels };
}

/** Monospace SVG wrapper so the table figure is still an image file. */
function tableSvg(title: string, table: string): string {
  const lines = table.trimEnd().split("\n");
  const width = Math.max(...lines.map((l) => l.length)) * 8.5 + 40;
  const height = lines.length * 20 + 60;
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${Math.ceil(width)}" height="${height}" viewBox="0 0 ${Math.ceil(width)} ${height}">`,
    `<metadata id="table-data">${escapeXml(table)}</metadata>`,
    `<rect width="${Math.ceil(width)}" height="${height}" fill="#ffffff"/>`,
    `<text x="20" y="28" font-size="15" font-family="Helvetica, Arial, sans-serif">${escapeXml(title)}</text>`,
  ];
  let y = 56;
  for (const line of lines.slice(1)) {
    parts.push(
      `<text x="20" y="${y}" font-size="13" font-family="Menlo, Consolas, monospace" xml:space="preserve">${escapeXml(line)}</text>`,
    );
    y += 20;
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/**
 * Read the CSV named by the plot spec and write the figure to its output path.
 * table1 writes plain text when the output path ends in .txt, otherwise an
 * SVG carrying the same table; either way the table text is returned.
 */
export function render(spec: PlotSpec): RenderResult {
  const text = readFileSync(spec.inputPath, "utf8");
  const rows = parseResultCsv(text).filter(
    (row) => row.sweepName === spec.sweepName,
  );
  if (rows.length === 0) {
    throw new EmptySelection(
      `${spec.inputPath} has no '${spec.sweepName}' sweep rows for ${spec.figureId}`,
    );
  }

  if (spec.figureId === "table1") {
    const table = renderFomTable(rows);
    const payload = spec.outputPath.endsWith(".txt")
      ? table
      : tableSvg(spec.title, table);
    writeFileSync(spec.outputPath, payload, "utf8");
    return { outputPath: spec.outputPath, table };
  }

  const chart = buildChart(spec, rows);
  writeFileSync(spec.outputPath, renderChartSvg(chart), "utf8");
  return { outputPath: spec.outputPath, table: null };
}

/** Render a figure with its default axis scales and series filters. */
export function renderFigure(
  figureId: FigureId,
  inputPath: string,
  outputPath: string,
): RenderResult {
  return render(figureSpec(figureId, inputPath, outputPath));
}
