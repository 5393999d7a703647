#!/usr/bin/env node
/**
 * forchflow-plot: render harness outputs to SVG.
 *
 *   forchflow-plot --job job.json
 *   forchflow-plot log.csv --kind timeseries --out fig.svg [--columns a,b]
 *   forchflow-plot log.csv --kind decay --out fig.svg [--column Linf_pbar]
 *   forchflow-plot sweep_report.json --kind orderfit --out fig.svg [--metric l2]
 *   forchflow-plot lemma_report.json --kind sequence --out fig.svg
 */

import { readFileSync, writeFileSync } from "fs";
import { basename } from "path";

import { parseCsv, parseLemmaReport, parseSweepReport, SchemaError } from "./schema.js";
import { renderDecay, renderOrderFit, renderSequence, renderTimeseries } from "./plots.js";

export interface PlotJob {
  input: string;
  kind: "timeseries" | "decay" | "orderfit" | "sequence";
  out: string;
  columns?: string[];
  column?: string;
  metric?: string;
  title?: string;
}

const KINDS = ["timeseries", "decay", "orderfit", "sequence"];

export function renderJob(job: PlotJob): string {
  const text = readFileSync(job.input, "utf8");
  const title = job.title ?? `${job.kind}: ${basename(job.input)}`;
  switch (job.kind) {
    case "timeseries": {
      const table = parseCsv(text, job.input);
      return renderTimeseries(table, job.columns ?? ["L2_pbar", "Linf_pbar"], title);
    }
    case "decay": {
      const table = parseCsv(text, job.input);
      return renderDecay(table, job.column ?? "Linf_pbar", title);
    }
    case "orderfit": {
      const report = parseSweepReport(text, job.input);
      return renderOrderFit(report, job.metric ?? "l2", title);
    }
    case "sequence": {
      return renderSequence(parseLemmaReport(text, job.input), title);
    }
    default:
      throw new SchemaError(`unknown figure kind '${job.kind}' (have: ${KINDS.join(", ")})`);
  }
}

export function runJob(job: PlotJob): void {
  if (!job.input || !job.out || !job.kind) {
    throw new SchemaError("job needs 'input', 'kind' and 'out'");
  }
  writeFileSync(job.out, renderJob(job), "utf8");
}

function parseArgs(argv: string[]): PlotJob {
  const flags = new Map<string, string>();
  const positional: string[] = [];
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a.startsWith("--")) {
      flags.set(a.slice(2), argv[++i] ?? "");
    } else {
      positional.push(a);
    }
  }
  if (flags.has("job")) {
    const raw = JSON.parse(readFileSync(flags.get("job")!, "utf8")) as PlotJob;
    return raw;
  }
  if (positional.length !== 1) {
    throw new SchemaError("usage: forchflow-plot <input> --kind <kind> --out <file.svg> | --job <job.json>");
  }
  return {
    input: positional[0],
    kind: (flags.get("kind") ?? "") as PlotJob["kind"],
    out: flags.get("out") ?? "",
    columns: flags.get("columns")?.split(","),
    column: flags.get("column"),
    metric: flags.get("metric"),
    title: flags.get("title"),
  };
}

export function main(argv: string[]): number {
  try {
    runJob(parseArgs(argv));
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
