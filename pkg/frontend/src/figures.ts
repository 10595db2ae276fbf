import type { ResultRow } from "./schema.js";

export const FIGURE_IDS = ["fig2a", "fig2b", "fig2c", "fig3", "table1"] as const;
export type FigureId = (typeof FIGURE_IDS)[number];

export type AxisScale = "log" | "linear";

export interface AxisSpec {
  label: string;
  scale: AxisScale;
}

/** Row filter selecting one plotted series out of the sweep CSV. */
export interface SeriesFilter {
  protocol: string;
  channelKind: string;
  estimatorKind: string;
  eta: number | null; // null: accept any correlation context
}

export type ValueColumn = "nmse_empirical" | "nmse_closed" | "tau_c";

export interface SeriesDef {
  name: string;
  filter: SeriesFilter;
  /** column drawn as markers, or null for a line-only series */
  markers: ValueColumn | null;
  /** column drawn as a line, or null for a marker-only series */
  line: ValueColumn | null;
  color: string;
  shape: "circle" | "square" | "diamond" | "triangle";
  dashed: boolean;
}

export interface PanelSpec {
  yAxis: AxisSpec;
  series: SeriesDef[];
}

export interface PlotSpec {
  figureId: FigureId;
  inputPath: string;
  outputPath: string;
  title: string;
  /** the sweep variable this figure plots; rows from other sweeps are ignored */
  sweepName: string;
  xAxis: AxisSpec;
  /** empty for the text-table figure */
  panels: PanelSpec[];
}

function series(
  name: string,
  filter: SeriesFilter,
  opts: Partial<Omit<SeriesDef, "name" | "filter">> = {},
): SeriesDef {
  return {
    name,
    filter,
    markers: opts.markers === undefined ? "nmse_empirical" : opts.markers,
    line: opts.line === undefined ? "nmse_closed" : opts.line,
    color: opts.color ?? "#1f77b4",
    shape: opts.shape ?? "circle",
    dashed: opts.dashed ?? false,
  };
}

const NMSE_AXIS: AxisSpec = { label: "NMSE", scale: "log" };

function filt(
  channelKind: string,
  estimatorKind: string,
  eta: number,
  protocol = "proposed",
): SeriesFilter {
  return { protocol, channelKind, estimatorKind, eta };
}

// Empirical markers over closed-form lines for each estimator/link pair,
// plus the correlated-MMSE overlay on shared noise draws.
function fig2Series(channelKinds: string[]): SeriesDef[] {
  const palette: Record<string, [string, string]> = {
    direct: ["#1f77b4", "#9467bd"],
    irs_link: ["#d62728", "#8c564b"],
  };
  const label: Record<string, string> = {
    direct: "direct",
    irs_link: "reflected",
  };
  const out: SeriesDef[] = [];
  for (const kind of channelKinds) {
    const [lsColor, mmseColor] = palette[kind] ?? ["#333333", "#777777"];
    out.push(
      series(`${label[kind] ?? kind} LS`, filt(kind, "ls", 0.0), {
        color: lsColor,
        shape: "square",
      }),
      series(`${label[kind] ?? kind} MMSE`, filt(kind, "mmse", 0.0), {
        color: mmseColor,
        shape: "circle",
      }),
    );
  }
  for (const kind of channelKinds) {
    out.push(
      series(
        `${label[kind] ?? kind} MMSE, eta=0.95`,
        filt(kind, "mmse", 0.95),
        {
          color: kind === "direct" ? "#2ca02c" : "#e377c2",
          shape: "diamond",
          dashed: true,
        },
      ),
    );
  }
  return out;
}

function fig3Panels(): PanelSpec[] {
  const nmse: SeriesDef[] = [];
  const colors: Record<string, [string, string]> = {
    proposed: ["#1f77b4", "#9467bd"],
    benchmark: ["#d62728", "#8c564b"],
  };
  for (const protocol of ["proposed", "benchmark"]) {
    const [lsColor, mmseColor] = colors[protocol]!;
    nmse.push(
      series(`${protocol} LS`, filt("cascaded", "ls", 0.0, protocol), {
        line: "nmse_empirical",
        color: lsColor,
        shape: "square",
        dashed: protocol === "benchmark",
      }),
      series(`${protocol} MMSE`, filt("cascaded", "mmse", 0.0, protocol), {
        line: "nmse_empirical",
        color: mmseColor,
        shape: "circle",
        dashed: protocol === "benchmark",
      }),
    );
  }
  const tau: SeriesDef[] = [
    series("proposed", filt("cascaded", "mmse", 0.0, "proposed"), {
      markers: "tau_c",
      line: "tau_c",
      color: "#1f77b4",
      shape: "circle",
    }),
    series("benchmark", filt("cascaded", "mmse", 0.0, "benchmark"), {
      markers: "tau_c",
      line: "tau_c",
      color: "#d62728",
      shape: "square",
      dashed: true,
    }),
  ];
  return [
    { yAxis: NMSE_AXIS, series: nmse },
    { yAxis: { label: "training time [s]", scale: "linear" }, series: tau },
  ];
}

/** Default plot spec for a figure id; axis scales and filters pinned here. */
export function figureSpec(
  figureId: FigureId,
  inputPath: string,
  outputPath: string,
): PlotSpec {
  switch (figureId) {
    case "fig2a":
      return {
        figureId,
        inputPath,
        outputPath,
        sweepName: "sigma2",
        title: "NMSE vs noise power",
        xAxis: { label: "noise power [W]", scale: "log" },
        panels: [
          { yAxis: NMSE_AXIS, series: fig2Series(["direct", "irs_link"]) },
        ],
      };
    case "fig2b":
      return {
        figureId,
        inputPath,
        outputPath,
        sweepName: "beta_d",
        title: "NMSE vs direct-link path loss",
        xAxis: { label: "direct-link path loss factor", scale: "log" },
        panels: [{ yAxis: NMSE_AXIS, series: fig2Series(["direct"]) }],
      };
    case "fig2c":
      return {
        figureId,
        inputPath,
        outputPath,
        sweepName: "beta_2",
        title: "NMSE vs surface-user path loss",
        xAxis: { label: "surface-user path loss factor", scale: "log" },
        panels: [{ yAxis: NMSE_AXIS, series: fig2Series(["irs_link"]) }],
      };
    case "fig3":
      return {
        figureId,
        inputPath,
        outputPath,
        sweepName: "L",
        title: "Protocol comparison vs surface count",
        xAxis: { label: "number of surfaces", scale: "linear" },
        panels: fig3Panels(),
      };
    case "table1":
      return {
        figureId,
        inputPath,
        outputPath,
        sweepName: "L",
        title: "Figure of merit, cascaded MMSE",
        xAxis: { label: "number of surfaces", scale: "linear" },
        panels: [],
      };
  }
}

export function matchesFilter(row: ResultRow, filter: SeriesFilter): boolean {
  return (
    row.protocol === filter.protocol &&
    row.channelKind === filter.channelKind &&
    row.estimatorKind === filter.estimatorKind &&
    (filter.eta === null || row.eta === filter.eta)
  );
}

/** Rows for one series, sorted by sweep value. Stable for equal values. */
export function selectSeries(
  rows: ResultRow[],
  filter: SeriesFilter,
): ResultRow[] {
  return rows
    .filter((row) => matchesFilter(row, filter))
    .map((row, index) => ({ row, index }))
    .sort(
      (a, b) => a.row.sweepValue - b.row.sweepValue || a.index - b.index,
    )
    .map((entry) => entry.row);
}
