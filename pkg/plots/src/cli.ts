#!/usr/bin/env node
/**
 * Batch figure generation from simulator CSV logs.
 *
 * Usage:
 *   cogradar-plot --kind pd --in results/metrics.csv --out pd.svg
 *   cogradar-plot --kind trajectories --in results/records.csv --out traj.svg
 *   cogradar-plot --kind depth_grid --in d2/metrics.csv --in d5/metrics.csv \
 *                 --label "depth 2" --label "depth 5" --out grid.svg
 *
 * Kinds: trajectories, rmse_pos, rmse_vel, pd, depth_grid, actions.
 * records.csv feeds trajectories/actions; metrics.csv feeds the rest.
 */

import { writeFileSync } from "fs";
import { loadMetrics, loadRecords, SchemaError } from "./csv.js";
import {
  FIGURE_KINDS,
  FigureKind,
  renderActions,
  renderDepthGrid,
  renderMetricFigure,
  renderTrajectories,
} from "./figures.js";

interface Args {
  kind: FigureKind;
  inputs: string[];
  labels: string[];
  out: string;
  title: string;
}

function usage(msg?: string): never {
  if (msg) console.error(`error: ${msg}`);
  console.error(
    "usage: cogradar-plot --kind KIND --in CSV [--in CSV ...] --out FILE.svg " +
    "[--label TEXT ...] [--title TEXT]\n" +
    `kinds: ${FIGURE_KINDS.join(", ")}`,
  );
  process.exit(2);
}

export function parseArgs(argv: string[]): Args {
  const args: Args = { kind: "pd", inputs: [], labels: [], out: "", title: "" };
  let kindSeen = false;
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    const next = () => {
      if (i + 1 >= argv.length) usage(`${a} needs a value`);
      return argv[++i];
    };
    switch (a) {
      case "--kind": {
        const k = next();
        if (!(FIGURE_KINDS as readonly string[]).includes(k)) usage(`unknown kind ${k}`);
        args.kind = k as FigureKind;
        kindSeen = true;
        break;
      }
      case "--in":
        args.inputs.push(next());
        break;
      case "--label":
        args.labels.push(next());
        break;
      case "--out":
        args.out = next();
        break;
      case "--title":
        args.title = next();
        break;
      default:
        usage(`unknown argument ${a}`);
    }
  }
  if (!kindSeen) usage("--kind is required");
  if (args.inputs.length === 0) usage("at least one --in is required");
  if (!args.out) usage("--out is required");
  return args;
}

export function renderFigure(args: Args): string {
  const title = args.title || args.kind;
  switch (args.kind) {
    case "trajectories":
      return renderTrajectories(loadRecords(args.inputs[0]), title);
    case "actions":
      return renderActions(loadRecords(args.inputs[0]), title);
    case "depth_grid":
      return renderDepthGrid(args.inputs.map((p) => loadMetrics(p)), args.labels, title);
    case "rmse_pos":
    case "rmse_vel":
    case "pd": {
      const field = args.kind === "pd" ? "pd"
        : args.kind === "rmse_pos" ? "rmse_pos_km" : "rmse_vel_kms";
      return renderMetricFigure(loadMetrics(args.inputs[0]), field, title);
    }
  }
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(String(err));
    return 2;
  }
  try {
    const svg = renderFigure(args);
    writeFileSync(args.out, svg, "utf8");
    console.log(`wrote ${args.out}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 3;
    }
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
}

const isDirectRun = process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (isDirectRun) {
  process.exit(main(process.argv.slice(2)));
}
