export { EmptySelection, SchemaMismatch } from "./errors.js";
export {
  CSV_COLUMNS,
  parseResultCsv,
  rawField,
  type ColumnName,
  type ResultRow,
} from "./schema.js";
export {
  FIGURE_IDS,
  figureSpec,
  matchesFilter,
  selectSeries,
  type AxisScale,
  type AxisSpec,
  type FigureId,
  type PanelSpec,
  type PlotSpec,
  type SeriesDef,
  type SeriesFilter,
} from "./figures.js";
export { renderFomTable } from "./table.js";
export { chartData, extractChartData, renderChartSvg } from "./svg.js";
export { render, renderFigure, type RenderResult } from "./render.js";
export { run } from "./cli.js";
