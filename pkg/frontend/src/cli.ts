#!/usr/bin/env node
import { EmptySelection, SchemaMismatch } from "./errors.js";
import { FIGURE_IDS, type FigureId } from "./figures.js";
import { renderFigure } from "./render.js";

const USAGE =
  "usage: irsce-plots --in <csv> --figure <fig2a|fig2b|fig2c|fig3|table1> --out <path>";

export interface CliIo {
  log: (line: string) => void;
  error: (line: string) => void;
}

function parseArgs(argv: string[]): { in: string; figure: FigureId; out: string } {
  const values: Record<string, string> = {};
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (flag === undefined || !flag.startsWith("--") || value === undefined) {
      throw new Error(USAGE);
    }
    values[flag.slice(2)] = value;
  }
  const missing = ["in", "figure", "out"].filter((k) => !(k in values));
  if (missing.length > 0 || Object.keys(values).length !== 3) {
    throw new Error(USAGE);
  }
  const figure = values["figure"]!;
  if (!(FIGURE_IDS as readonly string[]).includes(figure)) {
    throw new Error(
      `unknown figure '${figure}', expected one of ${FIGURE_IDS.join(", ")}`,
    );
  }
  return { in: values["in"]!, figure: figure as FigureId, out: values["out"]! };
}

/** Exit codes follow the simulator CLI: 0 ok, 1 bad input, 2 I/O failure. */
export function run(argv: string[], io: CliIo = console): number {
  let args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    io.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
  try {
    const result = renderFigure(args.figure, args.in, args.out);
    if (result.table !== null) io.log(result.table.trimEnd());
    io.log(`wrote ${result.outputPath}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaMismatch || err instanceof EmptySelection) {
      io.error(`${err.name}: ${err.message}`);
      return 1;
    }
    if (err instanceof Error && "code" in err) {
      io.error(`I/O error: ${err.message}`);
      return 2;
    }
    throw err;
  }
}

const entry = process.argv[1];
if (entry !== undefined && (entry.endsWith("cli.js") || entry.endsWith("irsce-plots"))) {
  process.exit(run(process.argv.slice(2)));
}
