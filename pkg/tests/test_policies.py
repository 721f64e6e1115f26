"""Acquisition / initialization phase and the per-scan decision policies."""

import numpy as np
import pytest

from cogradar.arrays import AngleGrid, ArrayConfig, directed_waveform, virtual_channel
from cogradar.config import study_disturbance
from cogradar.detector import default_bandwidth, detect_batch, threshold_from_pfa
from cogradar.disturbance import generate_ar_block, true_autocovariance
from cogradar.environment import MotionModel, RcsModel, TargetState, calibrate_rcs, get_angle_bin
from cogradar.pomcp import BeliefSet
from cogradar.policies import (
    AcquisitionFailure,
    OraclePlanner,
    ParticleFilterPlanner,
    acquire,
    assisted_init,
    invert_range,
    oracle_policy_step,
    pf_policy_step,
    pf_predict,
)

MOTION = MotionModel(dt=1.0, sigma_s=0.03)


def small_setup(snr_db=0.0, n=32, l_bins=16):
    """Target placed at a bin center (edge placement suffers straddle loss)."""
    cfg = ArrayConfig(n, n)
    grid = AngleGrid.default(l_bins)
    dist = study_disturbance()
    r0 = true_autocovariance(dist, 0, source="analytic-solve").power
    r_km = np.hypot(60.0, 60.0)
    th = grid.centers[get_angle_bin(60.0, -60.0, grid)]
    s0 = TargetState(r_km * np.cos(th), 0.2, r_km * np.sin(th), 0.2)
    rcs = calibrate_rcs(s0.range_km, snr_db, r0)
    return cfg, grid, dist, rcs, s0


def test_pf_predict_single_particle():
    s = np.array([60.0, 0.2, -60.0, 0.2])
    belief = BeliefSet(s[None, :], 1)
    assert np.allclose(pf_predict(belief, MOTION), MOTION.A @ s)


def test_pf_predict_symmetric_cancellation():
    a = np.array([10.0, 0.5, -3.0, 0.2])
    belief = BeliefSet(np.vstack([a, -a]), 2)
    assert np.allclose(pf_predict(belief, MOTION), 0.0)


def test_pf_predict_case1_concentrated():
    s = np.array([60.0, 0.2, -60.0, 0.2])
    belief = BeliefSet(np.tile(s, (100, 1)), 100)
    assert np.allclose(pf_predict(belief, MOTION), [60.2, 0.2, -59.8, 0.2])


def test_pf_predict_linear_in_particles():
    rng = np.random.default_rng(0)
    parts = rng.standard_normal((100, 4)) * [5, 0.1, 5, 0.1] + [60, 0.2, -60, 0.2]
    full = pf_predict(BeliefSet(parts, 100), MOTION)
    half = 0.5 * (pf_predict(BeliefSet(parts[:50], 50), MOTION)
                  + pf_predict(BeliefSet(parts[50:], 50), MOTION))
    assert np.allclose(full, half)


def test_pf_policy_step_bin_of_prediction():
    grid = AngleGrid.default(100)
    s = np.array([60.0, 0.2, -60.0, 0.2])
    belief = BeliefSet(np.tile(s, (10, 1)), 10)
    a = pf_policy_step(belief, grid, MOTION)
    assert a == get_angle_bin(60.2, -59.8, grid)


def test_pf_policy_step_out_of_view_clamps_to_edge():
    grid = AngleGrid(-0.5, 0.5, 10)
    s_hi = np.array([1.0, 0.0, 10.0, 0.0])   # theta ~ 84 deg > fov_max
    belief = BeliefSet(np.tile(s_hi, (4, 1)), 4)
    assert pf_policy_step(belief, grid, MOTION) == 9
    s_lo = np.array([1.0, 0.0, -10.0, 0.0])
    belief = BeliefSet(np.tile(s_lo, (4, 1)), 4)
    assert pf_policy_step(belief, grid, MOTION) == 0


def test_oracle_policy_is_identity_on_true_bin():
    assert oracle_policy_step(42) == 42
    planner = OraclePlanner()
    assert planner.choose(None, 17, None) == 17


def test_invert_range_example():
    rcs = RcsModel(ref_amplitude=0.5, ref_range=84.853)
    r_hat = invert_range(rcs, 0.5 / 4.0)
    assert abs(r_hat - 169.706) < 1e-2
    with pytest.raises(ValueError):
        invert_range(rcs, 0.0)


def test_acquire_fires_at_benign_snr():
    """At 0 dB the orthogonal scan detects within a few scans at the true bin."""
    cfg, grid, dist, rcs, s0 = small_setup(snr_db=0.0)
    lam = threshold_from_pfa(1e-4)
    res = acquire(cfg, grid, dist, rcs, s0, lam, n_particles=300, v_max=0.5,
                  rng=np.random.default_rng(3), max_scans=20, range_std=2.0)
    assert res.scans_used <= 5
    assert res.detected_bin == get_angle_bin(s0.x, s0.y, grid)
    assert len(res.belief.particles) == 300
    assert np.allclose(res.beta_table, np.sqrt(3.0) * res.sigma_table)
    assert np.all(res.sigma_table > 0)
    # seeded particles live in the detected bin with bounded velocities
    from cogradar.environment import angle_bins

    bins = angle_bins(res.belief.particles[:, [0, 2]], grid)
    assert np.all(bins == res.detected_bin)
    assert np.all(np.abs(res.belief.particles[:, [1, 3]]) <= 0.5)


def test_acquire_degenerate_noise_first_scan():
    """With essentially no disturbance the first scan fires at the true bin
    and every seeded particle lands in it."""
    from cogradar.disturbance import ARModel, InnovationSpec
    from cogradar.environment import angle_bins

    cfg = ArrayConfig(16, 16)
    grid = AngleGrid.default(8)
    quiet = ARModel(np.zeros(0), InnovationSpec("complex-gaussian", 0.0, 1e-14))
    r_km = np.hypot(60.0, 60.0)
    th = grid.centers[2]
    s0 = TargetState(r_km * np.cos(th), 0.0, r_km * np.sin(th), 0.0)
    rcs = RcsModel(0.5, r_km)
    res = acquire(cfg, grid, quiet, rcs, s0, threshold_from_pfa(1e-4),
                  n_particles=100, v_max=0.5, rng=np.random.default_rng(5), max_scans=20)
    assert res.scans_used == 1
    assert res.detected_bin == 2
    assert np.all(angle_bins(res.belief.particles[:, [0, 2]], grid) == 2)


def test_acquire_fails_without_detectable_target():
    cfg, grid, dist, rcs, s0 = small_setup(snr_db=-60.0, n=32, l_bins=8)
    lam = threshold_from_pfa(1e-4)
    with pytest.raises(AcquisitionFailure):
        acquire(cfg, grid, dist, rcs, s0, lam, n_particles=50, v_max=0.5,
                rng=np.random.default_rng(1), max_scans=3)


def test_assisted_init_shapes_and_seeding():
    cfg, grid, dist, rcs, s0 = small_setup(snr_db=-17.0)
    lam = threshold_from_pfa(1e-4)
    res = assisted_init(cfg, grid, dist, rcs, s0, lam, n_particles=200, v_max=0.5,
                        rng=np.random.default_rng(7), pool_scans=4, range_std=2.0)
    assert res.scans_used == 5
    tbin = get_angle_bin(s0.x, s0.y, grid)
    assert res.detected_bin == tbin
    from cogradar.environment import angle_bins

    bins = angle_bins(res.belief.particles[:, [0, 2]], grid)
    assert np.all(bins == tbin)
    ranges = np.hypot(res.belief.particles[:, 0], res.belief.particles[:, 2])
    assert abs(np.median(ranges) - s0.range_km) < 10.0


def test_pooled_sigma_matches_truth():
    """sigma_l from pooled orthogonal scans tracks the exact directed value
    (floored at the same quadratic-form floor the detector applies)."""
    from cogradar.detector import QFORM_FLOOR

    cfg, grid, dist, rcs, s0 = small_setup(snr_db=-17.0)
    lam = threshold_from_pfa(1e-4)
    res = assisted_init(cfg, grid, dist, rcs, s0, lam, n_particles=50, v_max=0.5,
                        rng=np.random.default_rng(11), pool_scans=12)
    acv = true_autocovariance(dist, 400, source="analytic-solve")
    r = acv.lags
    n = cfg.n_virtual
    for l in range(0, grid.n_bins, 3):
        th = grid.centers[l]
        v = virtual_channel(directed_waveform(cfg, th), th, cfg)
        t = np.array([np.vdot(v[m:], v[: n - m]) for m in range(min(400, n))])
        q_true = r[0].real * t[0].real + 2.0 * np.sum((r[1 : len(t)] * t[1:]).real)
        q_true = max(q_true, QFORM_FLOOR * r[0].real * t[0].real)
        sigma_true = np.sqrt(q_true) / t[0].real
        assert abs(res.sigma_table[l] - sigma_true) < 0.25 * sigma_true


def test_orthogonal_null_firing_rate_across_bins():
    """H0 all-bins firing rate per scan ~ 1 - (1 - P_FA)^L."""
    cfg = ArrayConfig(32, 32)
    grid = AngleGrid.default(8)
    dist = study_disturbance()
    p_fa = 0.05
    lam = threshold_from_pfa(p_fa)
    j = default_bandwidth(cfg.n_virtual)
    from cogradar.arrays import orthogonal_waveform

    W = orthogonal_waveform(cfg)
    V = np.stack([virtual_channel(W, th, cfg) for th in grid.centers])
    rng = np.random.default_rng(13)
    fired = 0
    scans = 400
    for _ in range(scans):
        C = generate_ar_block(dist, grid.n_bins, cfg.n_virtual, rng)
        _, _, _, det = detect_batch(C, V, j, lam)
        fired += bool(det.any())
    expected = 1.0 - (1.0 - p_fa) ** grid.n_bins
    assert abs(fired / scans - expected) < 0.08


def test_orthogonal_policy_step_is_constant_waveform():
    from cogradar.policies import orthogonal_policy_step

    cfg = ArrayConfig(16, 16)
    w1 = orthogonal_policy_step(cfg)
    w2 = orthogonal_policy_step(cfg)
    assert np.array_equal(w1.entries, w2.entries)
    assert np.allclose(np.diag(w1.entries), np.sqrt(1.0 / 16.0))


def test_particle_filter_planner_wraps_policy():
    grid = AngleGrid.default(100)
    planner = ParticleFilterPlanner(grid, MOTION)
    s = np.array([60.0, 0.2, -60.0, 0.2])
    belief = BeliefSet(np.tile(s, (10, 1)), 10)
    assert planner.choose(belief, 99, None) == pf_policy_step(belief, grid, MOTION)
