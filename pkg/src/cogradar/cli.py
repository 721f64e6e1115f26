"""Command-line front door.

Subcommands:
  run              run an experiment from a TOML config file
  validate-config  parse and validate a config file, print the summary
  case1 / case2    run the bundled study-case presets
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import PRESETS, ConfigError, config_from_dict, load_config
from .harness import export_results, run_monte_carlo


def _add_overrides(p: argparse.ArgumentParser, need_config: bool) -> None:
    if need_config:
        p.add_argument("--config", required=True, help="path to TOML config")
    p.add_argument("--policy", action="append", default=None, metavar="NAME",
                   help="policy to run (repeatable); default from config")
    p.add_argument("--trials", type=int, default=None, help="number of Monte-Carlo trials")
    p.add_argument("--seed", type=int, default=None, help="base seed")
    p.add_argument("--threads", type=int, default=None, help="worker processes")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--t-max", type=int, default=None, help="scans per trial")
    p.add_argument("--n-sim", type=int, default=None, help="planner simulations per scan")
    p.add_argument("--n-particles", type=int, default=None, help="belief particle count")


def _apply_overrides(data: dict, args: argparse.Namespace) -> dict:
    exp = data.setdefault("experiment", {})
    if args.policy:
        exp["policies"] = args.policy
    if args.trials is not None:
        exp["n_trials"] = args.trials
    if args.seed is not None:
        exp["base_seed"] = args.seed
    if args.threads is not None:
        exp["threads"] = args.threads
    if args.out is not None:
        exp["out_dir"] = args.out
    if args.t_max is not None:
        data.setdefault("scenario", {})["t_max"] = args.t_max
    pom = data.setdefault("pomcp", {})
    if args.n_sim is not None:
        pom["n_sim"] = args.n_sim
    if args.n_particles is not None:
        pom["n_particles"] = args.n_particles
    return data


def _load_toml(path: str) -> dict:
    if sys.version_info >= (3, 11):
        import tomllib
    else:
        import tomli as tomllib
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _run(data: dict, args: argparse.Namespace) -> int:
    cfg = config_from_dict(_apply_overrides(data, args))
    records, metrics = run_monte_carlo(cfg)
    paths = export_results(records, metrics, cfg.out_dir, cfg)
    for policy in cfg.policies:
        m = metrics[policy]
        print(f"{policy}: mean P_D = {float(m.pd.mean()):.3f}  "
              f"final RMSE_pos = {float(m.rmse_pos[-1]):.3f} km")
    print("wrote " + " ".join(sorted(paths.values())))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cogradar",
        description="Cognitive MIMO radar joint detection-tracking simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment from a config file")
    _add_overrides(run_p, need_config=True)

    val_p = sub.add_parser("validate-config", help="validate a config file")
    val_p.add_argument("--config", required=True, help="path to TOML config")

    for name in PRESETS:
        pp = sub.add_parser(name, help=f"run the bundled {name} preset")
        _add_overrides(pp, need_config=False)

    args = parser.parse_args(argv)

    try:
        if args.command == "run":
            return _run(_load_toml(args.config), args)
        if args.command == "validate-config":
            cfg = load_config(args.config)
            from .harness import _config_dict

            print("config OK")
            print(json.dumps(_config_dict(cfg), indent=2, sort_keys=True))
            return 0
        return _run(PRESETS[args.command](), args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
