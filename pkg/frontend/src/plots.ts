/**
 * Figure kinds over the harness outputs. Rendering never recomputes
 * physics: every number on a figure traces to a stored field in the inputs.
 */

import {
  column,
  CsvTable,
  LemmaSequence,
  SchemaError,
  SweepReport,
} from "./schema.js";
import {
  Canvas,
  drawFrame,
  fmt,
  fmt3,
  HEIGHT,
  linearScale,
  log10Scale,
  MARGIN,
  PALETTE,
  WIDTH,
} from "./svg.js";

const X0 = MARGIN.left;
const X1 = WIDTH - MARGIN.right;
const Y0 = HEIGHT - MARGIN.bottom;
const Y1 = MARGIN.top;

function finitePairs(t: number[], v: number[]): Array<[number, number]> {
  const out: Array<[number, number]> = [];
  for (let i = 0; i < t.length; i++) {
    if (Number.isFinite(t[i]) && Number.isFinite(v[i])) out.push([t[i], v[i]]);
  }
  return out;
}

export function renderTimeseries(table: CsvTable, columns: string[], title: string): string {
  const t = column(table, "t");
  const series = columns.map((name) => ({ name, values: column(table, name) }));
  const allPairs = series.map((s) => finitePairs(t, s.values));
  const flat = allPairs.flat();
  if (flat.length === 0) throw new SchemaError(`${table.path}: selected columns have no finite samples`);
  const vLo = Math.min(0, ...flat.map(([, v]) => v));
  const vHi = Math.max(...flat.map(([, v]) => v), vLo + 1e-12);
  const xs = linearScale(Math.min(...t), Math.max(...t), X0, X1);
  const ys = linearScale(vLo, vHi, Y0, Y1);

  const c = new Canvas();
  drawFrame(c, xs, ys, "t", "norm", title);
  series.forEach((s, k) => {
    c.polyline(allPairs[k].map(([x, v]) => [xs(x), ys(v)]), PALETTE[k % PALETTE.length]);
    c.text(X1 - 8, Y1 + 16 + 14 * k, s.name, { anchor: "end", fill: PALETTE[k % PALETTE.length] });
  });
  return c.render();
}

export function renderDecay(table: CsvTable, columnName: string, title: string): string {
  const t = column(table, "t");
  const v = column(table, columnName);
  const pairs = finitePairs(t, v).filter(([, y]) => y > 0);
  if (pairs.length < 2) throw new SchemaError(`${table.path}: column '${columnName}' has no positive samples`);
  const ymin = Math.min(...pairs.map(([, y]) => y));
  const ymax = Math.max(...pairs.map(([, y]) => y));
  const xs = linearScale(Math.min(...t), Math.max(...t), X0, X1);
  const ys = log10Scale(ymin, ymax, Y0, Y1);

  const c = new Canvas();
  drawFrame(c, xs, ys, "t", `${columnName} (log scale)`, title);
  c.polyline(pairs.map(([x, y]) => [xs(x), ys(y)]), PALETTE[0]);
  const final = pairs[pairs.length - 1][1];
  c.text(X1 - 8, Y1 + 16, `final/max = ${fmt(final / ymax)}`, { anchor: "end" });
  return c.render();
}

export function renderOrderFit(report: SweepReport, metric: string, title: string): string {
  const fit = report.fits[metric];
  if (!fit) {
    const have = Object.keys(report.fits).join(", ") || "(none)";
    throw new SchemaError(`sweep report: missing fit '${metric}' (have: ${have})`);
  }
  const sups = metric === "linf_interior" ? report.sup_linf_interior : report.sup_l2;
  const pts: Array<[number, number]> = [];
  for (let i = 0; i < report.magnitudes.length; i++) {
    if (sups[i] > 0) pts.push([report.magnitudes[i], sups[i]]);
  }
  if (pts.length === 0) throw new SchemaError("sweep report: all sup norms are zero");
  const xsDom = pts.map(([m]) => m);
  const ysDom = pts.map(([, s]) => s);
  const xs = log10Scale(Math.min(...xsDom), Math.max(...xsDom), X0, X1);
  const ys = log10Scale(Math.min(...ysDom), Math.max(...ysDom), Y0, Y1);

  const c = new Canvas();
  drawFrame(c, xs, ys, "perturbation size (log)", "sup norm (log)", title);
  for (const [m, s] of pts) c.circle(xs(m), ys(s), 3.5, PALETTE[1]);

  // fitted line through the last point with the fitted slope
  const [mRef, sRef] = pts[pts.length - 1];
  const lineOf = (slope: number): Array<[number, number]> =>
    [pts[0][0], mRef].map((m) => [xs(m), ys(sRef * Math.pow(m / mRef, slope))] as [number, number]);
  c.polyline(lineOf(fit.exponent), PALETTE[0], 1.5);
  c.polyline(lineOf(fit.guaranteed_exponent), "#888888", 1.2, "6 4");

  c.text(X1 - 8, Y1 + 16, `fit slope = ${fmt3(fit.exponent)}`, { anchor: "end", fill: PALETTE[0] });
  c.text(X1 - 8, Y1 + 32, `guaranteed = ${fmt3(fit.guaranteed_exponent)}`, { anchor: "end", fill: "#888888" });
  c.text(X1 - 8, Y1 + 48, `r2 = ${fmt3(fit.r2)}`, { anchor: "end" });
  return c.render();
}

export function renderSequence(sequences: LemmaSequence[], title: string): string {
  const pts = sequences.map((s) =>
    s.log10Values.map((v, i) => [i, v] as [number, number]).filter(([, v]) => Number.isFinite(v))
  );
  const flat = pts.flat();
  if (flat.length === 0) throw new SchemaError("lemma report: sequences contain no finite values");
  const iMax = Math.max(...flat.map(([i]) => i));
  const vLo = Math.min(...flat.map(([, v]) => v));
  const vHi = Math.max(...flat.map(([, v]) => v));
  const xs = linearScale(0, Math.max(iMax, 1), X0, X1);
  const ys = linearScale(vLo, vHi + 1e-12, Y0, Y1);

  const c = new Canvas();
  drawFrame(c, xs, ys, "iteration", "log10 Y_i", title);
  sequences.forEach((s, k) => {
    c.polyline(pts[k].map(([i, v]) => [xs(i), ys(v)]), PALETTE[k % PALETTE.length]);
    c.text(X1 - 8, Y1 + 16 + 14 * k, s.label, { anchor: "end", fill: PALETTE[k % PALETTE.length] });
  });
  return c.render();
}
