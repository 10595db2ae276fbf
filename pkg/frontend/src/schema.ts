import { SchemaMismatch } from "./errors.js";

/**
 * The sweep-result CSV contract, column for column. The simulation harness
 * writes this exact header; anything else is rejected rather than guessed at.
 */
export const CSV_COLUMNS = [
  "sweep_name",
  "sweep_value",
  "protocol",
  "channel_kind",
  "estimator_kind",
  "nmse_empirical",
  "nmse_closed",
  "fom",
  "trials",
  "seed",
  "eta",
  "s_effective",
  "tau_c",
] as const;

export type ColumnName = (typeof CSV_COLUMNS)[number];

export interface ResultRow {
  sweepName: string;
  sweepValue: number;
  protocol: string;
  channelKind: string;
  estimatorKind: string;
  nmseEmpirical: number;
  /** null when the harness wrote an empty field (no closed form exists) */
  nmseClosed: number | null;
  /** null when NMSE was exactly zero */
  fom: number | null;
  trials: number;
  seed: number;
  eta: number;
  sEffective: number;
  tauC: number;
  /** the 13 untouched field strings, for verbatim output */
  raw: string[];
}

const FLOAT_REQUIRED: Array<[number, string]> = [
  [1, "sweep_value"],
  [5, "nmse_empirical"],
  [10, "eta"],
  [12, "tau_c"],
];
const FLOAT_OPTIONAL: Array<[number, string]> = [
  [6, "nmse_closed"],
  [7, "fom"],
];
const INT_REQUIRED: Array<[number, string]> = [
  [8, "trials"],
  [9, "seed"],
  [11, "s_effective"],
];

function parseFloatField(value: string, column: string, line: number): number {
  const parsed = Number(value);
  if (value === "" || !Number.isFinite(parsed)) {
    throw new SchemaMismatch(
      `line ${line}: column '${column}' is not a finite number: '${value}'`,
    );
  }
  return parsed;
}

function parseIntField(value: string, column: string, line: number): number {
  const parsed = Number(value);
  if (value === "" || !Number.isInteger(parsed)) {
    throw new SchemaMismatch(
      `line ${line}: column '${column}' is not an integer: '${value}'`,
    );
  }
  return parsed;
}

/**
 * Parse harness CSV text into rows. Strict by design: exact header, exact
 * field count, LF line endings, finite numbers. The raw field strings are
 * kept on every row so downstream output can quote values verbatim.
 */
export function parseResultCsv(text: string): ResultRow[] {
  if (text.includes("\r")) {
    throw new SchemaMismatch("CR line endings; the harness writes LF only");
  }
  const lines = text.split("\n");
  if (lines[lines.length - 1] === "") lines.pop();
  if (lines.length === 0) {
    throw new SchemaMismatch("empty file, header row missing");
  }

  const header = lines[0]!.split(",");
  for (let i = 0; i < CSV_COLUMNS.length; i++) {
    if (header[i] !== CSV_COLUMNS[i]) {
      throw new SchemaMismatch(
        `header column ${i + 1} is '${header[i] ?? ""}', expected '${CSV_COLUMNS[i]}'`,
      );
    }
  }
  if (header.length !== CSV_COLUMNS.length) {
    throw new SchemaMismatch(
      `header has ${header.length} columns, expected ${CSV_COLUMNS.length}`,
    );
  }

  const rows: ResultRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const fields = lines[i]!.split(",");
    const lineNo = i + 1;
    if (fields.length !== CSV_COLUMNS.length) {
      throw new SchemaMismatch(
        `line ${lineNo}: ${fields.length} fields, expected ${CSV_COLUMNS.length}`,
      );
    }
    const floats = new Map<string, number>();
    for (const [idx, column] of FLOAT_REQUIRED) {
      floats.set(column, parseFloatField(fields[idx]!, column, lineNo));
    }
    const optional = new Map<string, number | null>();
    for (const [idx, column] of FLOAT_OPTIONAL) {
      const value = fields[idx]!;
      optional.set(
        column,
        value === "" ? null : parseFloatField(value, column, lineNo),
      );
    }
    const ints = new Map<string, number>();
    for (const [idx, column] of INT_REQUIRED) {
      ints.set(column, parseIntField(fields[idx]!, column, lineNo));
    }
    rows.push({
      sweepName: fields[0]!,
      sweepValue: floats.get("sweep_value")!,
      protocol: fields[2]!,
      channelKind: fields[3]!,
      estimatorKind: fields[4]!,
      nmseEmpirical: floats.get("nmse_empirical")!,
      nmseClosed: optional.get("nmse_closed")!,
      fom: optional.get("fom")!,
      trials: ints.get("trials")!,
      seed: ints.get("seed")!,
      eta: floats.get("eta")!,
      sEffective: ints.get("s_effective")!,
      tauC: floats.get("tau_c")!,
      raw: fields,
    });
  }
  return rows;
}

/** Raw field string for a named column (verbatim as written by the harness). */
export function rawField(row: ResultRow, column: ColumnName): string {
  return row.raw[CSV_COLUMNS.indexOf(column)]!;
}
