/**
 * Minimal deterministic SVG builder: fixed fonts and sizes, no timestamps,
 * numbers rendered through one canonical formatter so identical inputs give
 * byte-identical files.
 */

export const WIDTH = 720;
export const HEIGHT = 480;
export const MARGIN = { left: 72, right: 24, top: 40, bottom: 56 };

export const PALETTE = ["#1f6fb2", "#d1495b", "#3a7d44", "#8e6c8a", "#e0a458", "#30638e"];

export function fmt(x: number): string {
  if (!Number.isFinite(x)) return String(x);
  if (x === 0) return "0";
  const s = x.toPrecision(6);
  return s.includes(".") ? s.replace(/\.?0+$/, "").replace(/\.?0+e/, "e") : s;
}

export function fmt3(x: number): string {
  return x.toFixed(3);
}

export interface Scale {
  (v: number): number;
  ticks: number[];
  tickLabel(v: number): string;
}

export function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  if (hi <= lo) hi = lo + 1;
  const f = ((v: number) => outLo + ((v - lo) / (hi - lo)) * (outHi - outLo)) as Scale;
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / 4)));
  const mult = span / step <= 8 ? 1 : span / step <= 16 ? 2 : 5;
  const ticks: number[] = [];
  const start = Math.ceil(lo / (step * mult)) * step * mult;
  for (let v = start; v <= hi + 1e-12 * span; v += step * mult) ticks.push(v);
  f.ticks = ticks;
  f.tickLabel = fmt;
  return f;
}

export function log10Scale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi);
  const lin = linearScale(llo, lhi <= llo ? llo + 1 : lhi, outLo, outHi);
  const f = ((v: number) => lin(Math.log10(v))) as Scale;
  const ticks: number[] = [];
  for (let e = Math.ceil(llo); e <= Math.floor(lhi) + 1e-9; e++) ticks.push(Math.pow(10, e));
  if (ticks.length < 2) {
    f.ticks = lin.ticks.map((e) => Math.pow(10, e));
  } else {
    f.ticks = ticks;
  }
  f.tickLabel = (v: number) => {
    const e = Math.log10(v);
    return Number.isInteger(e) ? `1e${e}` : fmt(v);
  };
  return f;
}

export class Canvas {
  private parts: string[] = [];

  add(part: string): void {
    this.parts.push(part);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1): void {
    this.add(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"/>`
    );
  }

  polyline(pts: Array<[number, number]>, stroke: string, width = 1.5, dash = ""): void {
    const d = pts.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.add(`<polyline points="${d}" fill="none" stroke="${stroke}" stroke-width="${width}"${dashAttr}/>`);
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.add(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${r}" fill="${fill}"/>`);
  }

  text(x: number, y: number, s: string, opts: { anchor?: string; size?: number; fill?: string } = {}): void {
    const anchor = opts.anchor ?? "start";
    const size = opts.size ?? 12;
    const fill = opts.fill ?? "#222222";
    this.add(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-family="monospace" font-size="${size}" fill="${fill}" text-anchor="${anchor}">${escapeXml(s)}</text>`
    );
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`,
      ...this.parts,
      "</svg>",
      "",
    ].join("\n");
  }
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function drawFrame(c: Canvas, xs: Scale, ys: Scale, xLabel: string, yLabel: string, title: string): void {
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  c.line(x0, y0, x1, y0, "#222222");
  c.line(x0, y0, x0, y1, "#222222");
  for (const t of xs.ticks) {
    const px = xs(t);
    if (px < x0 - 0.5 || px > x1 + 0.5) continue;
    c.line(px, y0, px, y0 + 5, "#222222");
    c.text(px, y0 + 18, xs.tickLabel(t), { anchor: "middle", size: 10 });
  }
  for (const t of ys.ticks) {
    const py = ys(t);
    if (py > y0 + 0.5 || py < y1 - 0.5) continue;
    c.line(x0 - 5, py, x0, py, "#222222");
    c.text(x0 - 8, py + 3, ys.tickLabel(t), { anchor: "end", size: 10 });
  }
  c.text((x0 + x1) / 2, HEIGHT - 16, xLabel, { anchor: "middle" });
  c.text(16, (y0 + y1) / 2, yLabel, { anchor: "middle" });
  c.text((x0 + x1) / 2, 22, title, { anchor: "middle", size: 14 });
}
