import type { AxisSpec, FigureId, SeriesDef } from "./figures.js";

/**
 * Hand-rolled SVG charting, no DOM and no drawing dependencies. Everything
 * is computed from the input strings alone, so re-rendering the same CSV
 * gives byte-identical output. The untouched CSV field strings are embedded
 * in a <metadata> block; tests and downstream tools compare figures through
 * that block rather than through pixel or byte equality.
 */

export interface SeriesInput {
  def: SeriesDef;
  /** raw sweep_value strings, plot order */
  xRaw: string[];
  /** raw marker-column strings ("" where the harness left the field empty) */
  markerRaw: string[] | null;
  /** raw line-column strings, same convention */
  lineRaw: string[] | null;
}

export interface PanelInput {
  yAxis: AxisSpec;
  series: SeriesInput[];
}

const WIDTH = 880;
const PLOT_LEFT = 86;
const PLOT_RIGHT = 610;
const LEGEND_X = 628;
const TITLE_H = 40;
const PANEL_H = 330;
const PLOT_TOP_PAD = 18;
const PLOT_BOTTOM_PAD = 64;

const FONT = "font-family=\"Helvetica, Arial, sans-serif\"";

function xmlEscape(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function px(v: number): string {
  return v.toFixed(2);
}

interface Scale {
  (value: number): number | null;
  ticks: Array<{ value: number; label: string }>;
}

function tickLabel(value: number): string {
  if (Number.isInteger(value) && Math.abs(value) < 1e6) return String(value);
  return value.toExponential(0).replace("e+", "e");
}

function logScale(values: number[], lo: number, hi: number): Scale {
  const positives = values.filter((v) => v > 0);
  let dlo = 0;
  let dhi = 1;
  if (positives.length > 0) {
    dlo = Math.floor(Math.log10(Math.min(...positives)) - 1e-9);
    dhi = Math.ceil(Math.log10(Math.max(...positives)) + 1e-9);
    if (dhi <= dlo) dhi = dlo + 1;
  }
  const scale = ((value: number) => {
    if (!(value > 0)) return null; // log axis cannot place zero or negatives
    const t = (Math.log10(value) - dlo) / (dhi - dlo);
    return lo + t * (hi - lo);
  }) as Scale;
  const decades = dhi - dlo;
  const step = Math.max(1, Math.ceil(decades / 8));
  scale.ticks = [];
  for (let d = dlo; d <= dhi; d += step) {
    scale.ticks.push({ value: Math.pow(10, d), label: `1e${d}` });
  }
  return scale;
}

function niceStep(rough: number): number {
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const r = rough / mag;
  if (r <= 1) return mag;
  if (r <= 2) return 2 * mag;
  if (r <= 5) return 5 * mag;
  return 10 * mag;
}

function linearScale(values: number[], lo: number, hi: number): Scale {
  let vmin = values.length ? Math.min(...values) : 0;
  let vmax = values.length ? Math.max(...values) : 1;
  if (vmin === vmax) {
    const pad = vmin === 0 ? 1 : Math.abs(vmin) * 0.5;
    vmin -= pad;
    vmax += pad;
  }
  const span = vmax - vmin;
  vmin -= span * 0.05;
  vmax += span * 0.05;
  const scale = ((value: number) => {
    const t = (value - vmin) / (vmax - vmin);
    return lo + t * (hi - lo);
  }) as Scale;
  const step = niceStep((vmax - vmin) / 6);
  scale.ticks = [];
  for (let v = Math.ceil(vmin / step) * step; v <= vmax + step * 1e-9; v += step) {
    const snapped = Math.abs(v) < step * 1e-9 ? 0 : v;
    scale.ticks.push({
      value: snapped,
      label: Number.isInteger(snapped) && Math.abs(snapped) < 1e6
        ? String(snapped)
        : snapped.toExponential(1).replace("e+", "e").replace("e-", "e-"),
    });
  }
  return scale;
}

function makeScale(axis: AxisSpec, values: number[], lo: number, hi: number): Scale {
  return axis.scale === "log"
    ? logScale(values, lo, hi)
    : linearScale(values, lo, hi);
}

function markerElement(
  shape: SeriesDef["shape"],
  cx: number,
  cy: number,
  color: string,
): string {
  const x = px(cx);
  const y = px(cy);
  switch (shape) {
    case "circle":
      return `<circle cx="${x}" cy="${y}" r="4" fill="${color}"/>`;
    case "square":
      return `<rect x="${px(cx - 3.5)}" y="${px(cy - 3.5)}" width="7" height="7" fill="${color}"/>`;
    case "diamond":
      return `<path d="M ${x} ${px(cy - 5)} L ${px(cx + 5)} ${y} L ${x} ${px(cy + 5)} L ${px(cx - 5)} ${y} Z" fill="${color}"/>`;
    case "triangle":
      return `<path d="M ${x} ${px(cy - 5)} L ${px(cx + 4.5)} ${px(cy + 4)} L ${px(cx - 4.5)} ${px(cy + 4)} Z" fill="${color}"/>`;
  }
}

interface Point {
  x: number;
  y: number;
}

function numericPoints(
  xRaw: string[],
  yRaw: string[] | null,
): Array<Point | null> {
  if (yRaw === null) return xRaw.map(() => null);
  return xRaw.map((xs, i) => {
    const ys = yRaw[i] ?? "";
    if (ys === "") return null;
    return { x: Number(xs), y: Number(ys) };
  });
}

function panelBody(
  panel: PanelInput,
  xScale: Scale,
  top: number,
): string {
  const plotTop = top + PLOT_TOP_PAD;
  const plotBottom = top + PANEL_H - PLOT_BOTTOM_PAD;
  const yValues: number[] = [];
  for (const s of panel.series) {
    for (const pts of [
      numericPoints(s.xRaw, s.markerRaw),
      numericPoints(s.xRaw, s.lineRaw),
    ]) {
      for (const p of pts) {
        if (p && Number.isFinite(p.y)) yValues.push(p.y);
      }
    }
  }
  const yScale = makeScale(panel.yAxis, yValues, plotBottom, plotTop);

  const parts: string[] = [];
  // frame and grid
  parts.push(
    `<rect x="${px(PLOT_LEFT)}" y="${px(plotTop)}" width="${px(PLOT_RIGHT - PLOT_LEFT)}" height="${px(plotBottom - plotTop)}" fill="none" stroke="#444444"/>`,
  );
  for (const tick of yScale.ticks) {
    const y = yScale(tick.value);
    if (y === null || y < plotTop - 0.5 || y > plotBottom + 0.5) continue;
    parts.push(
      `<line x1="${px(PLOT_LEFT)}" y1="${px(y)}" x2="${px(PLOT_RIGHT)}" y2="${px(y)}" stroke="#dddddd"/>`,
      `<text x="${px(PLOT_LEFT - 8)}" y="${px(y + 4)}" text-anchor="end" font-size="12" ${FONT}>${xmlEscape(tick.label)}</text>`,
    );
  }
  for (const tick of xScale.ticks) {
    const x = xScale(tick.value);
    if (x === null || x < PLOT_LEFT - 0.5 || x > PLOT_RIGHT + 0.5) continue;
    parts.push(
      `<line x1="${px(x)}" y1="${px(plotTop)}" x2="${px(x)}" y2="${px(plotBottom)}" stroke="#dddddd"/>`,
      `<text x="${px(x)}" y="${px(plotBottom + 18)}" text-anchor="middle" font-size="12" ${FONT}>${xmlEscape(tick.label)}</text>`,
    );
  }
  // y axis label
  const yMid = (plotTop + plotBottom) / 2;
  parts.push(
    `<text x="${px(PLOT_LEFT - 58)}" y="${px(yMid)}" text-anchor="middle" font-size="13" ${FONT} transform="rotate(-90 ${px(PLOT_LEFT - 58)} ${px(yMid)})">${xmlEscape(panel.yAxis.label)}</text>`,
  );

  // series: lines first, markers on top
  for (const s of panel.series) {
    const line = numericPoints(s.xRaw, s.lineRaw);
    const coords: string[] = [];
    for (const p of line) {
      if (!p) continue;
      const x = xScale(p.x);
      const y = yScale(p.y);
      if (x === null || y === null) continue;
      coords.push(`${px(x)},${px(y)}`);
    }
    if (coords.length > 1) {
      const dash = s.def.dashed ? " stroke-dasharray=\"7 4\"" : "";
      parts.push(
        `<polyline points="${coords.join(" ")}" fill="none" stroke="${s.def.color}" stroke-width="1.6"${dash}/>`,
      );
    }
  }
  for (const s of panel.series) {
    const markers = numericPoints(s.xRaw, s.markerRaw);
    for (const p of markers) {
      if (!p) continue;
      const x = xScale(p.x);
      const y = yScale(p.y);
      if (x === null || y === null) continue;
      parts.push(markerElement(s.def.shape, x, y, s.def.color));
    }
  }

  // legend, to the right of the plot frame
  let legendY = plotTop + 10;
  for (const s of panel.series) {
    const midY = legendY - 4;
    if (s.lineRaw !== null) {
      const dash = s.def.dashed ? " stroke-dasharray=\"7 4\"" : "";
      parts.push(
        `<line x1="${px(LEGEND_X)}" y1="${px(midY)}" x2="${px(LEGEND_X + 30)}" y2="${px(midY)}" stroke="${s.def.color}" stroke-width="1.6"${dash}/>`,
      );
    }
    if (s.markerRaw !== null) {
      parts.push(markerElement(s.def.shape, LEGEND_X + 15, midY, s.def.color));
    }
    parts.push(
      `<text x="${px(LEGEND_X + 38)}" y="${px(legendY)}" font-size="12" ${FONT}>${xmlEscape(s.def.name)}</text>`,
    );
    legendY += 18;
  }
  return parts.join("\n");
}

export interface ChartInput {
  figureId: FigureId;
  title: string;
  xAxis: AxisSpec;
  panels: PanelInput[];
}

/** JSON payload mirrored into the SVG <metadata> block. */
export function chartData(chart: ChartInput): string {
  return JSON.stringify({
    figure: chart.figureId,
    x_column: "sweep_value",
    panels: chart.panels.map((panel) => ({
      y_label: panel.yAxis.label,
      series: panel.series.map((s) => ({
        name: s.def.name,
        x: s.xRaw,
        markers: s.markerRaw,
        line: s.lineRaw,
      })),
    })),
  });
}

export function renderChartSvg(chart: ChartInput): string {
  const height = TITLE_H + chart.panels.length * PANEL_H;
  const xValues: number[] = [];
  for (const panel of chart.panels) {
    for (const s of panel.series) {
      for (const raw of s.xRaw) xValues.push(Number(raw));
    }
  }
  const xScale = makeScale(chart.xAxis, xValues, PLOT_LEFT, PLOT_RIGHT);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${height}" viewBox="0 0 ${WIDTH} ${height}">`,
  );
  parts.push(`<metadata id="chart-data">${xmlEscape(chartData(chart))}</metadata>`);
  parts.push(`<rect width="${WIDTH}" height="${height}" fill="#ffffff"/>`);
  parts.push(
    `<text x="${px(WIDTH / 2)}" y="26" text-anchor="middle" font-size="16" ${FONT}>${xmlEscape(chart.title)}</text>`,
  );
  for (let i = 0; i < chart.panels.length; i++) {
    const top = TITLE_H + i * PANEL_H;
    parts.push(panelBody(chart.panels[i]!, xScale, top));
    const xLabelY = top + PANEL_H - PLOT_BOTTOM_PAD + 42;
    parts.push(
      `<text x="${px((PLOT_LEFT + PLOT_RIGHT) / 2)}" y="${px(xLabelY)}" text-anchor="middle" font-size="13" ${FONT}>${xmlEscape(chart.xAxis.label)}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

/** Pull the embedded data block back out of a rendered SVG. */
export function extractChartData(svg: string): unknown {
  const match = svg.match(/<metadata id="chart-data">([\s\S]*?)<\/metadata>/);
  if (!match) throw new Error("no chart-data metadata block in SVG");
  const unescaped = match[1]!
    .replace(/&lt;/g, "<")
    .replace(/&gt;/g, ">")
    .replace(/&quot;/g, "\"")
    .replace(/&amp;/g, "&");
  return JSON.parse(unescaped);
}
