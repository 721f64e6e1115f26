/**
 * CSV ingestion for the radar harness outputs.
 *
 * Two file schemas are understood, matching the simulator's export
 * contract exactly; any column drift is reported as an explicit diff so
 * schema mismatches are obvious at the command line.
 */

import { readFileSync } from "fs";

export const RECORD_COLUMNS = [
  "trial", "t", "policy",
  "true_x", "true_vx", "true_y", "true_vy",
  "est_x", "est_vx", "est_y", "est_vy",
  "chosen_bin", "true_bin", "statistic", "detected",
  "alpha_hat_abs", "snr_db", "reward", "flag",
] as const;

export const METRIC_COLUMNS = [
  "policy", "t", "rmse_pos_km", "rmse_vel_kms", "pd", "n_trials",
] as const;

export interface RecordRow {
  trial: number;
  t: number;
  policy: string;
  true_x: number;
  true_vx: number;
  true_y: number;
  true_vy: number;
  est_x: number;
  est_vx: number;
  est_y: number;
  est_vy: number;
  chosen_bin: number;
  true_bin: number;
  statistic: number;
  detected: number;
  alpha_hat_abs: number;
  snr_db: number;
  reward: number;
  flag: string;
}

export interface MetricRow {
  policy: string;
  t: number;
  rmse_pos_km: number;
  rmse_vel_kms: number;
  pd: number;
  n_trials: number;
}

export class SchemaError extends Error {}

function checkHeader(got: string[], want: readonly string[], path: string): void {
  if (got.length === want.length && got.every((c, i) => c === want[i])) return;
  const missing = want.filter((c) => !got.includes(c));
  const extra = got.filter((c) => !(want as readonly string[]).includes(c));
  const parts = [`${path}: header does not match the expected schema`];
  if (missing.length) parts.push(`missing: ${missing.join(", ")}`);
  if (extra.length) parts.push(`unexpected: ${extra.join(", ")}`);
  if (!missing.length && !extra.length) parts.push(`column order differs: got ${got.join(",")}`);
  throw new SchemaError(parts.join("; "));
}

function splitLines(text: string): string[] {
  return text.split(/\r?\n/).filter((line) => line.length > 0);
}

export function parseRecords(text: string, path = "<records>"): RecordRow[] {
  const lines = splitLines(text);
  if (lines.length === 0) throw new SchemaError(`${path}: empty file`);
  checkHeader(lines[0].split(","), RECORD_COLUMNS, path);
  return lines.slice(1).map((line, i) => {
    const f = line.split(",");
    if (f.length !== RECORD_COLUMNS.length) {
      throw new SchemaError(`${path}:${i + 2}: expected ${RECORD_COLUMNS.length} fields, got ${f.length}`);
    }
    return {
      trial: Number(f[0]),
      t: Number(f[1]),
      policy: f[2],
      true_x: Number(f[3]),
      true_vx: Number(f[4]),
      true_y: Number(f[5]),
      true_vy: Number(f[6]),
      est_x: Number(f[7]),
      est_vx: Number(f[8]),
      est_y: Number(f[9]),
      est_vy: Number(f[10]),
      chosen_bin: Number(f[11]),
      true_bin: Number(f[12]),
      statistic: Number(f[13]),
      detected: Number(f[14]),
      alpha_hat_abs: Number(f[15]),
      snr_db: Number(f[16]),
      reward: Number(f[17]),
      flag: f[18],
    };
  });
}

export function parseMetrics(text: string, path = "<metrics>"): MetricRow[] {
  const lines = splitLines(text);
  if (lines.length === 0) throw new SchemaError(`${path}: empty file`);
  checkHeader(lines[0].split(","), METRIC_COLUMNS, path);
  return lines.slice(1).map((line, i) => {
    const f = line.split(",");
    if (f.length !== METRIC_COLUMNS.length) {
      throw new SchemaError(`${path}:${i + 2}: expected ${METRIC_COLUMNS.length} fields, got ${f.length}`);
    }
    return {
      policy: f[0],
      t: Number(f[1]),
      rmse_pos_km: Number(f[2]),
      rmse_vel_kms: Number(f[3]),
      pd: Number(f[4]),
      n_trials: Number(f[5]),
    };
  });
}

export function loadRecords(path: string): RecordRow[] {
  return parseRecords(readFileSync(path, "utf8"), path);
}

export function loadMetrics(path: string): MetricRow[] {
  return parseMetrics(readFileSync(path, "utf8"), path);
}

/** Metric rows grouped by policy, ordered by time step. */
export function metricsByPolicy(rows: MetricRow[]): Map<string, MetricRow[]> {
  const out = new Map<string, MetricRow[]>();
  for (const row of rows) {
    const arr = out.get(row.policy) ?? [];
    arr.push(row);
    out.set(row.policy, arr);
  }
  for (const arr of out.values()) arr.sort((a, b) => a.t - b.t);
  return out;
}

/** Record rows grouped by (policy, trial), ordered by time step. */
export function trialsByPolicy(rows: RecordRow[]): Map<string, Map<number, RecordRow[]>> {
  const out = new Map<string, Map<number, RecordRow[]>>();
  for (const row of rows) {
    if (row.t < 0) continue; // truncation marker rows carry no step data
    let trials = out.get(row.policy);
    if (!trials) {
      trials = new Map();
      out.set(row.policy, trials);
    }
    const arr = trials.get(row.trial) ?? [];
    arr.push(row);
    trials.set(row.trial, arr);
  }
  for (const trials of out.values())
    for (const arr of trials.values()) arr.sort((a, b) => a.t - b.t);
  return out;
}
