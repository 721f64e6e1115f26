"""Experiment orchestration: per-scan cognitive loop, seeded Monte Carlo
over trials, RMSE / P_D metrics and CSV export.

Determinism contract: trial seeds are base_seed + trial_index; each trial
owns three independent generator streams (world, planner, initialization)
derived from its seed, so results are byte-identical for any worker count
and scheduling order. Workers are separate processes; trials are the unit
of parallelism.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from time import perf_counter, thread_time

import numpy as np

from . import __version__
from .arrays import directed_waveform, orthogonal_waveform, virtual_channel
from .config import ExperimentConfig
from .detector import detect_batch, run_detector, threshold_from_pfa
from .disturbance import generate_ar_block, true_autocovariance
from .environment import (
    OUT_OF_VIEW,
    RcsModel,
    TargetState,
    calibrate_rcs,
    get_angle_bin,
    snr_db,
    synthesize_scan,
    transition,
)
from .pomcp import (
    EMPTY_OBSERVATION,
    History,
    RadarGenerator,
    TrackLossError,
    discretize_observation,
    update_belief,
)
from .policies import (
    AcquisitionFailure,
    OraclePlanner,
    ParticleFilterPlanner,
    PomcpPlanner,
    acquire,
    assisted_init,
)

RECORD_COLUMNS = (
    "trial", "t", "policy",
    "true_x", "true_vx", "true_y", "true_vy",
    "est_x", "est_vx", "est_y", "est_vy",
    "chosen_bin", "true_bin", "statistic", "detected",
    "alpha_hat_abs", "snr_db", "reward", "flag",
)

METRIC_COLUMNS = ("policy", "t", "rmse_pos_km", "rmse_vel_kms", "pd", "n_trials")

FLAG_OK = ""
FLAG_TRACK_LOSS = "track_loss"
FLAG_OUT_OF_FOV = "out_of_fov"
FLAG_ACQUISITION_FAILURE = "acquisition_failure"


@dataclass
class TrialRecord:
    """All per-step rows of one (trial, policy) run plus trial-level flags."""

    trial: int
    policy: str
    seed: int
    rows: list = field(default_factory=list)
    history: History = field(default_factory=list)
    truncated: bool = False
    flag: str = FLAG_OK
    scans_used: int = 0
    elapsed_s: float = 0.0
    cpu_s: float = 0.0


@dataclass
class MetricsSeries:
    """Per-step aggregates for one policy."""

    policy: str
    t: np.ndarray
    rmse_pos: np.ndarray
    rmse_vel: np.ndarray
    pd: np.ndarray
    n_trials: np.ndarray


def noise_power(cfg: ExperimentConfig) -> float:
    """True lag-0 disturbance power (analytic spectrum integral)."""
    return true_autocovariance(cfg.disturbance, 0, source="analytic-solve").power


def build_rcs(cfg: ExperimentConfig, r0: float | None = None) -> RcsModel:
    """RCS model calibrated so the initial state sits at the configured SNR."""
    if r0 is None:
        r0 = noise_power(cfg)
    return calibrate_rcs(cfg.scenario.initial_state.range_km,
                         cfg.scenario.initial_snr_db, r0)


def _trial_streams(base_seed: int, trial: int):
    seed = base_seed + trial
    world = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    planner = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    init = np.random.default_rng(np.random.SeedSequence([seed, 2]))
    return seed, world, planner, init


def _initialize(cfg: ExperimentConfig, rcs: RcsModel, lam: float,
                rng: np.random.Generator):
    sc = cfg.scenario
    kwargs = dict(
        cfg=cfg.array, grid=cfg.grid, dist=cfg.disturbance, rcs=rcs,
        s_true=sc.initial_state, lam=lam, n_particles=cfg.pomcp.n_particles,
        v_max=sc.v_max, rng=rng, range_std=sc.range_seed_std_km,
        bandwidth=cfg.bandwidth, signal_model=sc.signal_model,
    )
    if sc.init_mode == "acquire":
        return acquire(max_scans=sc.max_acquisition_scans, **kwargs)
    return assisted_init(pool_scans=sc.pool_scans, **kwargs)


def _orthogonal_step(cfg: ExperimentConfig, rcs: RcsModel, V_orth: np.ndarray,
                     s_next: TargetState, true_bin: int, lam: float,
                     rng: np.random.Generator):
    """Orthogonal-baseline scan: the target bin's detector outputs.

    The baseline nominally tests every bin each scan, but only the target
    bin's outcome is observable in the records (P_D counts that bin's
    fires), and per-bin disturbance realizations are independent, so only
    the target bin's snapshot is synthesized here; the all-bins firing
    statistics are covered by the acquisition path and its own test.
    """
    n = cfg.array.n_virtual
    C = generate_ar_block(cfg.disturbance, 1, n, rng)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    alpha = rcs.amplitude(s_next.range_km) * np.exp(1j * phase)
    Y = C
    if cfg.scenario.signal_model == "beampattern":
        theta_true = float(np.arctan2(s_next.y, s_next.x))
        W = orthogonal_waveform(cfg.array)
        Y = C + alpha * virtual_channel(W, theta_true, cfg.array)[None, :]
    else:
        Y = C + alpha * V_orth[true_bin][None, :]
    lam_stat, alpha_hat, _, detected = detect_batch(Y, V_orth[true_bin][None, :],
                                                    cfg.bandwidth, lam)
    return float(lam_stat[0]), float(np.abs(alpha_hat[0])), bool(detected[0])


def run_trial(cfg: ExperimentConfig, policy_kind: str, trial: int,
              rcs: RcsModel | None = None, r0: float | None = None) -> TrialRecord:
    """One full cognitive-loop trial for one policy, deterministic in (cfg, trial)."""
    t_start = perf_counter()
    c_start = thread_time()
    if r0 is None:
        r0 = noise_power(cfg)
    if rcs is None:
        rcs = build_rcs(cfg, r0)
    lam = threshold_from_pfa(cfg.scenario.p_fa)
    seed, world_rng, planner_rng, init_rng = _trial_streams(cfg.base_seed, trial)
    record = TrialRecord(trial=trial, policy=policy_kind, seed=seed)

    grid, array = cfg.grid, cfg.array
    directed_v = None  # lazy (L, N) cache of per-bin directed steering

    belief = None
    planner = None
    gen = None
    if policy_kind == "orthogonal":
        W = orthogonal_waveform(array)
        V_orth = np.stack([virtual_channel(W, th, array) for th in grid.centers])
    else:
        try:
            init = _initialize(cfg, rcs, lam, init_rng)
        except AcquisitionFailure:
            record.truncated = True
            record.flag = FLAG_ACQUISITION_FAILURE
            record.rows.append(_flag_row(trial, policy_kind, FLAG_ACQUISITION_FAILURE))
            record.elapsed_s = perf_counter() - t_start
            record.cpu_s = thread_time() - c_start
            return record
        record.scans_used = init.scans_used
        belief = init.belief
        gen = RadarGenerator(cfg.motion, grid, rcs, init.sigma_table, init.beta_table,
                             lam, k_max=cfg.pomcp.k_max, v_max=cfg.scenario.v_max)
        if policy_kind == "pomcp":
            planner = PomcpPlanner(gen, cfg.pomcp)
        elif policy_kind == "particle_filter":
            planner = ParticleFilterPlanner(grid, cfg.motion)
        elif policy_kind == "oracle":
            planner = OraclePlanner()
        else:
            raise ValueError(f"unknown policy {policy_kind!r}")
        directed_v = np.stack(
            [virtual_channel(directed_waveform(array, th), th, array) for th in grid.centers])

    s_true = cfg.scenario.initial_state
    for t in range(cfg.scenario.t_max):
        s_next = transition(s_true, cfg.motion, world_rng)
        true_bin = get_angle_bin(s_next.x, s_next.y, grid)
        if true_bin == OUT_OF_VIEW:
            record.truncated = True
            record.flag = FLAG_OUT_OF_FOV
            if record.rows:
                record.rows[-1] = record.rows[-1][:-1] + (FLAG_OUT_OF_FOV,)
            else:
                record.rows.append(_flag_row(trial, policy_kind, FLAG_OUT_OF_FOV))
            break
        step_snr = snr_db(s_next, rcs, r0)

        if policy_kind == "orthogonal":
            lam_stat, amp, detected = _orthogonal_step(
                cfg, rcs, V_orth, s_next, true_bin, lam, world_rng)
            record.rows.append((
                trial, t, policy_kind,
                s_next.x, s_next.vx, s_next.y, s_next.vy,
                float("nan"), float("nan"), float("nan"), float("nan"),
                -1, true_bin, lam_stat, int(detected), amp, step_snr,
                float("nan"), FLAG_OK,
            ))
            s_true = s_next
            continue

        action = planner.choose(belief, true_bin, planner_rng)
        W = directed_waveform(array, grid.centers[action])
        y, truth = synthesize_scan(W, s_next, action, cfg.disturbance, rcs, array,
                                   grid, world_rng, cfg.scenario.signal_model)
        report = run_detector(y, directed_v[action], cfg.bandwidth, lam)
        if report.detected:
            obs = discretize_observation(abs(report.alpha_hat),
                                         gen.beta_table[action], cfg.pomcp.k_max)
        else:
            obs = EMPTY_OBSERVATION
        record.history.append((action, obs))
        try:
            belief = update_belief(belief, action, obs, gen, planner_rng)
        except TrackLossError:
            record.truncated = True
            record.flag = FLAG_TRACK_LOSS
            record.rows.append((
                trial, t, policy_kind,
                s_next.x, s_next.vx, s_next.y, s_next.vy,
                float("nan"), float("nan"), float("nan"), float("nan"),
                action, true_bin, report.statistic, int(report.detected),
                abs(report.alpha_hat), step_snr,
                float(action == true_bin), FLAG_TRACK_LOSS,
            ))
            break
        est = belief.mean()
        record.rows.append((
            trial, t, policy_kind,
            s_next.x, s_next.vx, s_next.y, s_next.vy,
            float(est[0]), float(est[1]), float(est[2]), float(est[3]),
            action, true_bin, report.statistic, int(report.detected),
            abs(report.alpha_hat), step_snr,
            float(action == true_bin), FLAG_OK,
        ))
        s_true = s_next

    record.elapsed_s = perf_counter() - t_start
    record.cpu_s = thread_time() - c_start
    return record


def _flag_row(trial: int, policy: str, flag: str):
    nan = float("nan")
    return (trial, -1, policy, nan, nan, nan, nan, nan, nan, nan, nan,
            -1, -1, nan, 0, nan, nan, nan, flag)


def _run_one(args):
    cfg, policy, trial = args
    return run_trial(cfg, policy, trial)


def run_monte_carlo(cfg: ExperimentConfig) -> tuple[list[TrialRecord], dict]:
    """All (policy, trial) runs plus per-policy metrics.

    Aggregation is order-independent; with threads > 1 trials run in
    worker processes.
    """
    tasks = [(cfg, policy, trial)
             for policy in cfg.policies
             for trial in range(cfg.n_trials)]
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            records = list(pool.map(_run_one, tasks, chunksize=1))
    else:
        records = [_run_one(t) for t in tasks]
    records.sort(key=lambda r: (cfg.policies.index(r.policy), r.trial))
    metrics = {policy: compute_metrics(
        [r for r in records if r.policy == policy], cfg.scenario.t_max)
        for policy in cfg.policies}
    return records, metrics


def compute_metrics(records: list[TrialRecord], t_max: int) -> MetricsSeries:
    """RMSE over non-truncated trials; P_D over all trials (misses counted)."""
    if not records:
        raise ValueError("no records to aggregate")
    policy = records[0].policy
    n_total = len(records)
    sq_pos = np.zeros(t_max)
    sq_vel = np.zeros(t_max)
    n_valid = np.zeros(t_max, dtype=np.int64)
    n_det = np.zeros(t_max, dtype=np.int64)
    for rec in records:
        include_rmse = not rec.truncated
        for row in rec.rows:
            t = row[1]
            if t < 0:
                continue
            if row[14]:
                n_det[t] += 1
            if include_rmse and np.isfinite(row[7]):
                dx, dy = row[7] - row[3], row[9] - row[5]
                dvx, dvy = row[8] - row[4], row[10] - row[6]
                sq_pos[t] += dx * dx + dy * dy
                sq_vel[t] += dvx * dvx + dvy * dvy
                n_valid[t] += 1
    with np.errstate(invalid="ignore", divide="ignore"):
        rmse_pos = np.where(n_valid > 0, np.sqrt(sq_pos / np.maximum(n_valid, 1)), np.nan)
        rmse_vel = np.where(n_valid > 0, np.sqrt(sq_vel / np.maximum(n_valid, 1)), np.nan)
    return MetricsSeries(
        policy=policy,
        t=np.arange(t_max),
        rmse_pos=rmse_pos,
        rmse_vel=rmse_vel,
        pd=n_det / n_total,
        n_trials=n_valid,
    )


def compute_rmse(records: list[TrialRecord], t_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Position/velocity RMSE series (convenience view of compute_metrics)."""
    m = compute_metrics(records, t_max)
    return m.rmse_pos, m.rmse_vel


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def export_results(records: list[TrialRecord], metrics: dict, out_dir: str,
                   cfg: ExperimentConfig, extra_meta: dict | None = None) -> dict:
    """Write records.csv, metrics.csv and run_meta.json; returns file paths."""
    os.makedirs(out_dir, exist_ok=True)
    rec_path = os.path.join(out_dir, "records.csv")
    met_path = os.path.join(out_dir, "metrics.csv")
    meta_path = os.path.join(out_dir, "run_meta.json")

    with open(rec_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(RECORD_COLUMNS) + "\n")
        for rec in records:
            for row in rec.rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")

    with open(met_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(METRIC_COLUMNS) + "\n")
        for policy in cfg.policies:
            m = metrics[policy]
            for i in range(len(m.t)):
                fh.write(",".join((
                    policy, str(int(m.t[i])),
                    repr(float(m.rmse_pos[i])), repr(float(m.rmse_vel[i])),
                    repr(float(m.pd[i])), str(int(m.n_trials[i])),
                )) + "\n")

    r0 = noise_power(cfg)
    meta = {
        "package": "cogradar",
        "version": __version__,
        "config": _config_dict(cfg),
        "threshold_lambda": threshold_from_pfa(cfg.scenario.p_fa),
        "noise_power_lag0": r0,
        "noise_power_source": "analytic-solve",
        "snr_definition": "10*log10(|alpha(R)|^2 / r0), r0 = true lag-0 disturbance power",
        "seeding": "trial seed = base_seed + trial index; streams world/planner/init",
        "truncation_policy": "truncated trials excluded from RMSE, counted as misses in P_D",
        "trial_flags": {f"{r.policy}/{r.trial}": r.flag for r in records if r.flag},
        "scans_used": {f"{r.policy}/{r.trial}": r.scans_used for r in records},
    }
    if extra_meta:
        meta.update(extra_meta)
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"records": rec_path, "metrics": met_path, "meta": meta_path}


def _config_dict(cfg: ExperimentConfig) -> dict:
    sc = cfg.scenario
    return {
        "array": {"n_tx": cfg.array.n_tx, "n_rx": cfg.array.n_rx,
                  "element_spacing": cfg.array.element_spacing,
                  "total_power": cfg.array.total_power},
        "grid": {"fov_min_rad": cfg.grid.fov_min, "fov_max_rad": cfg.grid.fov_max,
                 "n_bins": cfg.grid.n_bins},
        "disturbance": {
            "order": cfg.disturbance.order,
            "coefficients_real": list(np.real(cfg.disturbance.coefficients)),
            "coefficients_imag": list(np.imag(cfg.disturbance.coefficients)),
            "innovation_kind": cfg.disturbance.innovation.kind,
            "innovation_shape": cfg.disturbance.innovation.shape,
            "innovation_power": cfg.disturbance.innovation.power,
            "burn_in": cfg.disturbance.burn_in,
        },
        "motion": {"dt": cfg.motion.dt, "sigma_s": cfg.motion.sigma_s},
        "scenario": {
            "initial_state": list(sc.initial_state.as_array()),
            "initial_snr_db": sc.initial_snr_db, "p_fa": sc.p_fa,
            "t_max": sc.t_max, "init_mode": sc.init_mode,
            "signal_model": sc.signal_model, "v_max": sc.v_max,
            "range_seed_std_km": sc.range_seed_std_km,
            "pool_scans": sc.pool_scans,
            "max_acquisition_scans": sc.max_acquisition_scans,
        },
        "detector": {"bandwidth": cfg.bandwidth},
        "pomcp": {
            "n_sim": cfg.pomcp.n_sim, "n_particles": cfg.pomcp.n_particles,
            "ucb_c": cfg.pomcp.ucb_c, "gamma": cfg.pomcp.gamma,
            "max_depth": cfg.pomcp.max_depth, "epsilon": cfg.pomcp.epsilon,
            "k_max": cfg.pomcp.k_max,
        },
        "experiment": {
            "policies": list(cfg.policies), "n_trials": cfg.n_trials,
            "base_seed": cfg.base_seed, "threads": cfg.threads,
            "out_dir": cfg.out_dir,
        },
    }


def load_metrics_csv(path: str) -> dict:
    """Re-import a metrics.csv into {policy: MetricsSeries} (round-trip exact)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != METRIC_COLUMNS:
            raise ValueError(f"unexpected metrics columns {header}")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    out: dict = {}
    for policy in {r[0] for r in rows}:
        sel = [r for r in rows if r[0] == policy]
        sel.sort(key=lambda r: int(r[1]))
        out[policy] = MetricsSeries(
            policy=policy,
            t=np.array([int(r[1]) for r in sel]),
            rmse_pos=np.array([float(r[2]) for r in sel]),
            rmse_vel=np.array([float(r[3]) for r in sel]),
            pd=np.array([float(r[4]) for r in sel]),
            n_trials=np.array([int(r[5]) for r in sel]),
        )
    return out
