/**
 * gaussqmc-plot --csv results.csv --out figure.svg [--methods mc,rqmc]
 *               [--guides -1,-1.5] [--title "..."]
 *
 * Renders the log2-log2 RMSE chart for a gaussqmc results CSV.
 * Exit codes: 0 ok, 2 bad arguments or schema mismatch.
 */

import { readFileSync, writeFileSync } from "node:fs";
import process from "node:process";

import { parseResultsCsv, SchemaMismatchError } from "./csv.js";
import { defaultTitle, renderSvg } from "./plot.js";

interface Args {
  csv: string;
  out: string;
  methods?: string[];
  guides?: number[];
  title?: string;
}

export function parseArgs(argv: string[]): Args {
  const args: Partial<Args> = {};
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) {
      throw new Error(`missing value for ${flag}`);
    }
    switch (flag) {
      case "--csv":
        args.csv = value;
        break;
      case "--out":
        args.out = value;
        break;
      case "--methods":
        args.methods = value.split(",").map((s) => s.trim()).filter(Boolean);
        break;
      case "--guides":
        args.guides = value.split(",").map((s) => {
          const g = Number(s);
          if (Number.isNaN(g)) throw new Error(`bad guide slope ${JSON.stringify(s)}`);
          return g;
        });
        break;
      case "--title":
        args.title = value;
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!args.csv || !args.out) {
    throw new Error("usage: gaussqmc-plot --csv results.csv --out figure.svg " +
      "[--methods a,b] [--guides -1,-1.5] [--title text]");
  }
  return args as Args;
}

export function run(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  try {
    const rows = parseResultsCsv(readFileSync(args.csv, "utf8"));
    const svg = renderSvg({
      rows,
      methods: args.methods,
      guides: args.guides,
      title: args.title ?? defaultTitle(rows),
    });
    writeFileSync(args.out, svg + "\n");
    console.log(`wrote ${args.out}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaMismatchError) {
      console.error(`error: ${err.message}`);
    } else {
      console.error(`error: ${(err as Error).message}`);
    }
    return 2;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(run(process.argv.slice(2)));
}
