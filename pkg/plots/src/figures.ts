/**
 * Figure assembly: one function per figure kind, CSV rows in, SVG text out.
 *
 * Kinds mirror the simulator study outputs: trajectory fans with an SNR
 * inset, RMSE curves, detection-probability curves, multi-run comparison
 * grids, and per-trial action traces.
 */

import {
  MetricRow,
  RecordRow,
  metricsByPolicy,
  trialsByPolicy,
} from "./csv.js";
import {
  PALETTE,
  Rect,
  Scene,
  drawAxes,
  drawLegend,
  padRange,
  segments,
} from "./svg.js";

export const FIGURE_KINDS = [
  "trajectories", "rmse_pos", "rmse_vel", "pd", "depth_grid", "actions",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureSpec {
  kind: FigureKind;
  inputs: string[];
  labels?: string[];
  title?: string;
}

const PLOT: Rect = { x: 62, y: 34, w: 530, h: 360 };

function policyColor(policy: string, i: number): string {
  const fixed: Record<string, string> = {
    pomcp: PALETTE[0],
    particle_filter: PALETTE[1],
    oracle: PALETTE[2],
    orthogonal: PALETTE[3],
  };
  return fixed[policy] ?? PALETTE[i % PALETTE.length];
}

function metricSeries(rows: MetricRow[], field: "rmse_pos_km" | "rmse_vel_kms" | "pd") {
  return {
    t: rows.map((r) => r.t),
    v: rows.map((r) => r[field]),
  };
}

function drawMetricLines(sc: Scene, rows: MetricRow[],
                         field: "rmse_pos_km" | "rmse_vel_kms" | "pd",
                         plot: Rect, xlabel: string, ylabel: string, title: string): void {
  const grouped = metricsByPolicy(rows);
  const allT: number[] = [];
  const allV: number[] = [];
  for (const series of grouped.values()) {
    const { t, v } = metricSeries(series, field);
    allT.push(...t);
    allV.push(...v.filter(Number.isFinite));
  }
  const xs = padRange(allT, 0.02);
  const ys = field === "pd" ? { lo: -0.04, hi: 1.04 } : padRange([0, ...allV]);
  const m = drawAxes(sc, plot, xs, ys, xlabel, ylabel, title);
  const legend: Array<[string, string]> = [];
  let i = 0;
  for (const [policy, series] of grouped) {
    const color = policyColor(policy, i++);
    const { t, v } = metricSeries(series, field);
    for (const seg of segments(t, v)) {
      sc.polyline(seg.map(([x, y]) => [m.x(x), m.y(y)]), color, 1.8);
    }
    legend.push([policy, color]);
  }
  drawLegend(sc, plot.x + plot.w - 130, plot.y + 18, legend);
}

export function renderMetricFigure(rows: MetricRow[], field: "rmse_pos_km" | "rmse_vel_kms" | "pd",
                                   title: string): string {
  const sc = new Scene(660, 450);
  const labels: Record<string, [string, string]> = {
    rmse_pos_km: ["time step", "position RMSE (km)"],
    rmse_vel_kms: ["time step", "velocity RMSE (km/s)"],
    pd: ["time step", "probability of detection"],
  };
  const [xl, yl] = labels[field];
  drawMetricLines(sc, rows, field, PLOT, xl, yl, title);
  return sc.render();
}

export function renderTrajectories(rows: RecordRow[], title: string): string {
  const sc = new Scene(660, 450);
  const byPolicy = trialsByPolicy(rows);
  const first = byPolicy.values().next().value as Map<number, RecordRow[]> | undefined;
  if (!first || first.size === 0) throw new Error("no per-step rows to plot");
  const xsAll: number[] = [];
  const ysAll: number[] = [];
  for (const arr of first.values()) {
    for (const r of arr) {
      xsAll.push(r.true_x);
      ysAll.push(r.true_y);
    }
  }
  const xs = padRange(xsAll);
  const ys = padRange(ysAll);
  const m = drawAxes(sc, PLOT, xs, ys, "x (km)", "y (km)", title);
  let i = 0;
  const trialIds = [...first.keys()].sort((a, b) => a - b);
  for (const trial of trialIds) {
    const arr = first.get(trial)!;
    const color = PALETTE[i++ % PALETTE.length];
    sc.polyline(arr.map((r) => [m.x(r.true_x), m.y(r.true_y)]), color, 1.4);
    const last = arr[arr.length - 1];
    sc.circle(m.x(last.true_x), m.y(last.true_y), 2.4, color);
  }
  // inset: average SNR trajectory over trials
  const inset: Rect = { x: PLOT.x + 40, y: PLOT.y + 24, w: 180, h: 110 };
  sc.rect(inset, "#222222", "#ffffff");
  const byT = new Map<number, number[]>();
  for (const arr of first.values())
    for (const r of arr) {
      if (!Number.isFinite(r.snr_db)) continue;
      const list = byT.get(r.t) ?? [];
      list.push(r.snr_db);
      byT.set(r.t, list);
    }
  const ts = [...byT.keys()].sort((a, b) => a - b);
  const means = ts.map((t) => {
    const v = byT.get(t)!;
    return v.reduce((a, b) => a + b, 0) / v.length;
  });
  const ixs = padRange(ts, 0.02);
  const iys = padRange(means, 0.15);
  const im = {
    x: (v: number) => inset.x + ((v - ixs.lo) / (ixs.hi - ixs.lo)) * inset.w,
    y: (v: number) => inset.y + inset.h - ((v - iys.lo) / (iys.hi - iys.lo)) * inset.h,
  };
  for (const seg of segments(ts, means)) {
    sc.polyline(seg.map(([x, y]) => [im.x(x), im.y(y)]), "#1f6fb4", 1.5);
  }
  sc.text(inset.x + inset.w / 2, inset.y + inset.h + 13, "mean SNR (dB) vs t", 9, "middle");
  sc.text(inset.x + 4, inset.y + 11, `${means.length ? means[0].toFixed(1) : "-"} dB`, 9);
  if (means.length) {
    sc.text(inset.x + inset.w - 4, inset.y + inset.h - 4,
            `${means[means.length - 1].toFixed(1)} dB`, 9, "end");
  }
  return sc.render();
}

export function renderActions(rows: RecordRow[], title: string): string {
  const byPolicy = trialsByPolicy(rows);
  const trials = byPolicy.values().next().value as Map<number, RecordRow[]> | undefined;
  if (!trials || trials.size === 0) throw new Error("no per-step rows to plot");
  const ids = [...trials.keys()].sort((a, b) => a - b).slice(0, 6);
  const cols = Math.min(2, ids.length);
  const rowsN = Math.ceil(ids.length / cols);
  const cellW = 310;
  const cellH = 220;
  const sc = new Scene(40 + cols * cellW, 50 + rowsN * cellH);
  sc.text(20 + (cols * cellW) / 2, 20, title, 13, "middle");
  ids.forEach((trial, i) => {
    const cx = 20 + (i % cols) * cellW;
    const cy = 36 + Math.floor(i / cols) * cellH;
    const plot: Rect = { x: cx + 46, y: cy + 14, w: cellW - 70, h: cellH - 62 };
    const arr = trials.get(trial)!;
    const ts = arr.map((r) => r.t);
    const chosen = arr.map((r) => r.chosen_bin);
    const truth = arr.map((r) => r.true_bin);
    const xs = padRange(ts, 0.02);
    const ys = padRange([...chosen, ...truth].filter((v) => v >= 0));
    const m = drawAxes(sc, plot, xs, ys, "time step", "angle bin", `trial ${trial}`);
    for (const seg of segments(ts, truth.map((v) => (v >= 0 ? v : NaN)))) {
      sc.polyline(seg.map(([x, y]) => [m.x(x), m.y(y)]), PALETTE[2], 2.2);
    }
    for (const seg of segments(ts, chosen.map((v) => (v >= 0 ? v : NaN)))) {
      sc.polyline(seg.map(([x, y]) => [m.x(x), m.y(y)]), PALETTE[0], 1.4, "4 3");
    }
  });
  drawLegend(sc, 30, 30, [["true bin", PALETTE[2]], ["chosen bin", PALETTE[0]]]);
  return sc.render();
}

export function renderDepthGrid(metricSets: MetricRow[][], labels: string[],
                                title: string): string {
  if (metricSets.length < 1) throw new Error("depth_grid needs at least one metrics file");
  const fields: Array<["rmse_pos_km" | "rmse_vel_kms" | "pd", string]> = [
    ["rmse_pos_km", "position RMSE (km)"],
    ["rmse_vel_kms", "velocity RMSE (km/s)"],
    ["pd", "P_D"],
  ];
  const cols = metricSets.length;
  const cellW = 330;
  const cellH = 240;
  const sc = new Scene(30 + cols * cellW, 50 + fields.length * cellH);
  sc.text(15 + (cols * cellW) / 2, 20, title, 13, "middle");
  metricSets.forEach((rows, c) => {
    fields.forEach(([field, ylabel], r) => {
      const plot: Rect = {
        x: 30 + c * cellW + 52,
        y: 40 + r * cellH + 16,
        w: cellW - 80,
        h: cellH - 70,
      };
      drawMetricLines(sc, rows, field, plot, "time step", ylabel,
                      r === 0 ? labels[c] ?? `run ${c + 1}` : "");
    });
  });
  return sc.render();
}
