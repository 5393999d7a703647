/**
 * Input contracts: observation-log CSV and the sweep / lemma report JSON
 * emitted by the simulation harness. Validation failures always name the
 * offending column or field.
 */

export class SchemaError extends Error {}

export interface CsvTable {
  path: string;
  columns: string[];
  rows: number[][];
}

export function parseCsv(text: string, path: string): CsvTable {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty CSV (missing header)`);
  }
  const columns = lines[0].split(",");
  if (lines.length === 1) {
    throw new SchemaError(`${path}: no data rows`);
  }
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== columns.length) {
      throw new SchemaError(`${path}:${i + 1}: expected ${columns.length} fields, got ${parts.length}`);
    }
    rows.push(parts.map((p) => Number(p)));
  }
  return { path, columns, rows };
}

export function columnIndex(table: CsvTable, name: string): number {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`${table.path}: missing column '${name}' (have: ${table.columns.join(", ")})`);
  }
  return idx;
}

export function column(table: CsvTable, name: string): number[] {
  const idx = columnIndex(table, name);
  return table.rows.map((r) => r[idx]);
}

export interface OrderFitRecord {
  exponent: number;
  r2: number;
  window: number[];
  guaranteed_exponent: number;
}

export interface SweepReport {
  axis: string;
  epsilons: number[];
  magnitudes: number[];
  sup_l2: number[];
  sup_linf_interior: number[];
  fits: Record<string, OrderFitRecord>;
  scenario?: string;
}

function requireField(obj: Record<string, unknown>, name: string, path: string): unknown {
  if (!(name in obj) || obj[name] === undefined) {
    throw new SchemaError(`${path}: missing field '${name}'`);
  }
  return obj[name];
}

export function parseSweepReport(text: string, path: string): SweepReport {
  let raw: Record<string, unknown>;
  try {
    raw = JSON.parse(text) as Record<string, unknown>;
  } catch (err) {
    throw new SchemaError(`${path}: not valid JSON (${(err as Error).message})`);
  }
  const report: SweepReport = {
    axis: String(requireField(raw, "axis", path)),
    epsilons: requireField(raw, "epsilons", path) as number[],
    magnitudes: requireField(raw, "magnitudes", path) as number[],
    sup_l2: requireField(raw, "sup_l2", path) as number[],
    sup_linf_interior: requireField(raw, "sup_linf_interior", path) as number[],
    fits: requireField(raw, "fits", path) as Record<string, OrderFitRecord>,
    scenario: raw["scenario"] as string | undefined,
  };
  if (report.magnitudes.length !== report.sup_l2.length) {
    throw new SchemaError(`${path}: field 'sup_l2' length does not match 'magnitudes'`);
  }
  return report;
}

export interface LemmaSequence {
  label: string;
  log10Values: number[];
}

export function parseLemmaReport(text: string, path: string): LemmaSequence[] {
  let raw: Record<string, unknown>;
  try {
    raw = JSON.parse(text) as Record<string, unknown>;
  } catch (err) {
    throw new SchemaError(`${path}: not valid JSON (${(err as Error).message})`);
  }
  const verdicts = requireField(raw, "verdicts", path) as Array<Record<string, unknown>>;
  const out: LemmaSequence[] = [];
  for (const v of verdicts) {
    const lemma = String(v["lemma"] ?? "lemma");
    if (Array.isArray(v["sequence_log10_head"])) {
      out.push({ label: lemma, log10Values: v["sequence_log10_head"] as number[] });
    }
    if (Array.isArray(v["instances"])) {
      (v["instances"] as Array<Record<string, unknown>>).forEach((inst, k) => {
        if (Array.isArray(inst["sequence_log10_head"])) {
          out.push({
            label: `${lemma}[${k}]`,
            log10Values: inst["sequence_log10_head"] as number[],
          });
        }
      });
    }
  }
  if (out.length === 0) {
    throw new SchemaError(`${path}: no field 'sequence_log10_head' found in any verdict`);
  }
  return out;
}
