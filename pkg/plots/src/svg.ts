/**
 * Minimal deterministic SVG scene builder: fixed-precision coordinates,
 * no timestamps, no randomness, so identical inputs give byte-identical
 * files (golden hashes stay stable).
 */

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export const PALETTE = [
  "#1f6fb4", "#d1495b", "#2e8b57", "#e69f00", "#6a4c93", "#444444",
];

const fmt = (v: number): string => (Object.is(v, -0) ? "0.00" : v.toFixed(2));

export class Scene {
  readonly width: number;
  readonly height: number;
  private parts: string[] = [];

  constructor(width: number, height: number) {
    this.width = width;
    this.height = height;
  }

  raw(tag: string): void {
    this.parts.push(tag);
  }

  rect(r: Rect, stroke = "#222222", fill = "none"): void {
    this.parts.push(
      `<rect x="${fmt(r.x)}" y="${fmt(r.y)}" width="${fmt(r.w)}" height="${fmt(r.h)}" ` +
      `fill="${fill}" stroke="${stroke}"/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke = "#999999", width = 1): void {
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
      `stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1.5, dash = ""): void {
    if (points.length === 0) return;
    const attr = dash ? ` stroke-dasharray="${dash}"` : "";
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(
      `<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${width}"${attr}/>`,
    );
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${fmt(r)}" fill="${fill}"/>`);
  }

  text(x: number, y: number, s: string, size = 11, anchor = "start", color = "#111111"): void {
    const esc = s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-size="${size}" text-anchor="${anchor}" ` +
      `font-family="Helvetica, Arial, sans-serif" fill="${color}">${esc}</text>`,
    );
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" ` +
      `viewBox="0 0 ${this.width} ${this.height}">`,
      `<rect x="0" y="0" width="${this.width}" height="${this.height}" fill="#ffffff"/>`,
      ...this.parts,
      "</svg>",
      "",
    ].join("\n");
  }
}

export interface AxisSpec {
  lo: number;
  hi: number;
}

/** Pad a data range so flat series do not collapse the axis. */
export function padRange(values: number[], frac = 0.08): AxisSpec {
  const finite = values.filter(Number.isFinite);
  if (finite.length === 0) return { lo: 0, hi: 1 };
  let lo = Math.min(...finite);
  let hi = Math.max(...finite);
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = (hi - lo) * frac;
  return { lo: lo - pad, hi: hi + pad };
}

export interface Mapper {
  x(v: number): number;
  y(v: number): number;
}

export function mapper(plot: Rect, xs: AxisSpec, ys: AxisSpec): Mapper {
  const sx = plot.w / (xs.hi - xs.lo);
  const sy = plot.h / (ys.hi - ys.lo);
  return {
    x: (v) => plot.x + (v - xs.lo) * sx,
    y: (v) => plot.y + plot.h - (v - ys.lo) * sy,
  };
}

function niceTicks(lo: number, hi: number, count = 5): number[] {
  const span = hi - lo;
  if (!(span > 0)) return [lo];
  const step0 = span / count;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const norm = step0 / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-9 * step; v += step) out.push(Number(v.toPrecision(10)));
  return out;
}

export function drawAxes(sc: Scene, plot: Rect, xs: AxisSpec, ys: AxisSpec,
                         xlabel: string, ylabel: string, title = ""): Mapper {
  const m = mapper(plot, xs, ys);
  sc.rect(plot);
  for (const tx of niceTicks(xs.lo, xs.hi)) {
    const px = m.x(tx);
    sc.line(px, plot.y + plot.h, px, plot.y + plot.h + 4, "#222222");
    sc.line(px, plot.y, px, plot.y + plot.h, "#eeeeee");
    sc.text(px, plot.y + plot.h + 16, trimTick(tx), 10, "middle");
  }
  for (const ty of niceTicks(ys.lo, ys.hi)) {
    const py = m.y(ty);
    sc.line(plot.x - 4, py, plot.x, py, "#222222");
    sc.line(plot.x, py, plot.x + plot.w, py, "#eeeeee");
    sc.text(plot.x - 7, py + 3.5, trimTick(ty), 10, "end");
  }
  sc.text(plot.x + plot.w / 2, plot.y + plot.h + 32, xlabel, 12, "middle");
  sc.raw(
    `<text x="${(plot.x - 38).toFixed(2)}" y="${(plot.y + plot.h / 2).toFixed(2)}" font-size="12" ` +
    `text-anchor="middle" font-family="Helvetica, Arial, sans-serif" fill="#111111" ` +
    `transform="rotate(-90 ${(plot.x - 38).toFixed(2)} ${(plot.y + plot.h / 2).toFixed(2)})">` +
    `${ylabel}</text>`,
  );
  if (title) sc.text(plot.x + plot.w / 2, plot.y - 8, title, 13, "middle");
  return m;
}

function trimTick(v: number): string {
  const a = Math.abs(v);
  if (a >= 1000) return v.toFixed(0);
  if (a >= 10 || v === Math.round(v)) return String(Number(v.toFixed(1)));
  return String(Number(v.toFixed(3)));
}

export function drawLegend(sc: Scene, x: number, y: number,
                           entries: Array<[string, string]>): void {
  entries.forEach(([label, color], i) => {
    const ly = y + i * 16;
    sc.line(x, ly - 4, x + 18, ly - 4, color, 2.5);
    sc.text(x + 24, ly, label, 11);
  });
}

/** Split a series into NaN-free segments so gaps break the line. */
export function segments(xs: number[], ys: number[]): Array<Array<[number, number]>> {
  const out: Array<Array<[number, number]>> = [];
  let cur: Array<[number, number]> = [];
  for (let i = 0; i < xs.length; i++) {
    if (Number.isFinite(xs[i]) && Number.isFinite(ys[i])) {
      cur.push([xs[i], ys[i]]);
    } else if (cur.length) {
      out.push(cur);
      cur = [];
    }
  }
  if (cur.length) out.push(cur);
  return out;
}
