"""Per-scan decision policies and the shared initialization phase.

Initialization transmits the orthogonal waveform and pools residual
autocorrelation lags across scans and bins (the disturbance is i.i.d.
per scan and bin) into one covariance estimate, from which the per-bin
directed noise scales sigma_l and discretization steps beta_l = sqrt(3)
sigma_l are tabulated for the generator. In "acquire" mode the phase ends
when some bin's Wald test fires and the belief is seeded from that
detection; "assisted" mode seeds from the true bin with one directed-noise
amplitude draw, standing in for a successful acquisition when the scenario
SNR makes a genuine orthogonal-scan detection astronomically unlikely.

Particles are seeded with angle uniform in the detected bin, range
Gaussian around the inverse-square-law estimate R_hat = R_ref *
sqrt(a_ref/|alpha_hat|), and velocities uniform on [-V_max, V_max]^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arrays import AngleGrid, ArrayConfig, directed_waveform, orthogonal_waveform, virtual_channel
from .detector import QFORM_FLOOR, detect_batch, default_bandwidth, steering_lag_products
from .disturbance import ARModel, generate_ar_block
from .environment import (
    OUT_OF_VIEW,
    MotionModel,
    RcsModel,
    TargetState,
    get_angle_bin,
    get_rcs,
)
from .pomcp import BeliefSet, PomcpParams, RadarGenerator, solve

POLICY_KINDS = ("pomcp", "particle_filter", "oracle", "orthogonal")


class AcquisitionFailure(RuntimeError):
    """No bin fired within the acquisition scan budget."""


@dataclass
class AcquisitionResult:
    """Initialization products: seeded belief and the per-bin scale tables."""

    belief: BeliefSet
    sigma_table: np.ndarray
    beta_table: np.ndarray
    scans_used: int
    detected_bin: int
    observed_amplitude: float


def _directed_lag_products(cfg: ArrayConfig, grid: AngleGrid, bandwidth: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-bin lag products t_m of the directed virtual-channel vectors.

    Returns (T, norms2): T[l, m] = sum_n conj(v_l[n+m]) v_l[n] for the
    directed v_l of bin l, norms2[l] = ||v_l||^2.
    """
    n = cfg.n_virtual
    V = np.empty((grid.n_bins, n), dtype=complex)
    for l, theta in enumerate(grid.centers):
        V[l] = virtual_channel(directed_waveform(cfg, theta), theta, cfg)
    T = np.empty((grid.n_bins, bandwidth + 1), dtype=complex)
    for m in range(bandwidth + 1):
        T[:, m] = np.sum(np.conj(V[:, m:]) * V[:, : n - m], axis=1)
    return T, T[:, 0].real.copy()


def _sigma_from_pooled_lags(pooled: np.ndarray, T: np.ndarray, norms2: np.ndarray) -> np.ndarray:
    """Directed sigma_l = sqrt(v_l^H Sigma_pool v_l) / ||v_l||^2 from pooled lags."""
    q = pooled[0].real * norms2 + 2.0 * np.sum((pooled[None, 1:] * T[:, 1:]).real, axis=1)
    q = np.maximum(q, QFORM_FLOOR * pooled[0].real * norms2)
    return np.sqrt(q) / norms2


def _orthogonal_scan(cfg: ArrayConfig, grid: AngleGrid, dist: ARModel, rcs: RcsModel,
                     s_true: TargetState, V_orth: np.ndarray, bandwidth: int, lam: float,
                     rng: np.random.Generator, signal_model: str = "bin-center",
                     v_lags: np.ndarray | None = None):
    """One all-bins orthogonal scan; returns detector outputs and residual lags."""
    n = cfg.n_virtual
    C = generate_ar_block(dist, grid.n_bins, n, rng)
    alpha = get_rcs(s_true, rcs, rng)
    tbin = get_angle_bin(s_true.x, s_true.y, grid)
    Y = C
    if tbin != OUT_OF_VIEW:
        if signal_model == "beampattern":
            theta_true = float(np.arctan2(s_true.y, s_true.x))
            W = orthogonal_waveform(cfg)
            Y = C + alpha * virtual_channel(W, theta_true, cfg)[None, :]
        else:
            Y[tbin] = Y[tbin] + alpha * V_orth[tbin]
    lam_stat, alpha_hat, _, detected = detect_batch(Y, V_orth, bandwidth, lam, v_lags)
    R = Y - alpha_hat[:, None] * V_orth
    lags = np.empty(bandwidth + 1, dtype=complex)
    for m in range(bandwidth + 1):
        lags[m] = np.mean(R[:, m:] * np.conj(R[:, : n - m]))
    return lam_stat, alpha_hat, detected, lags


def _seed_particles(grid: AngleGrid, detected_bin: int, r_hat: float, range_std: float,
                    v_max: float, n_particles: int, rng: np.random.Generator) -> np.ndarray:
    """Particle cloud for a fresh detection: bin-uniform angle, Gaussian range."""
    lo = grid.fov_min + detected_bin * grid.bin_width
    theta = rng.uniform(lo, lo + grid.bin_width, n_particles)
    rr = r_hat + range_std * rng.standard_normal(n_particles)
    rr = np.maximum(rr, 0.05 * r_hat)
    out = np.empty((n_particles, 4))
    out[:, 0] = rr * np.cos(theta)
    out[:, 2] = rr * np.sin(theta)
    out[:, [1, 3]] = rng.uniform(-v_max, v_max, (n_particles, 2))
    return out


def invert_range(rcs: RcsModel, observed_amplitude: float) -> float:
    """Range estimate from an amplitude observation under the inverse-square law."""
    if observed_amplitude <= 0:
        raise ValueError("observed amplitude must be positive")
    return float(rcs.ref_range * np.sqrt(rcs.ref_amplitude / observed_amplitude))


def acquire(cfg: ArrayConfig, grid: AngleGrid, dist: ARModel, rcs: RcsModel,
            s_true: TargetState, lam: float, n_particles: int, v_max: float,
            rng: np.random.Generator, max_scans: int = 20, range_std: float = 2.0,
            bandwidth: int | None = None,
            signal_model: str = "bin-center") -> AcquisitionResult:
    """Literal acquisition: orthogonal scans until some bin's Wald test fires.

    The target holds at s_true during the phase. Raises AcquisitionFailure
    when no bin fires within max_scans.
    """
    if bandwidth is None:
        bandwidth = default_bandwidth(cfg.n_virtual)
    W = orthogonal_waveform(cfg)
    V_orth = np.stack([virtual_channel(W, th, cfg) for th in grid.centers])
    v_lags = steering_lag_products(V_orth, bandwidth)
    T_dir, norms2 = _directed_lag_products(cfg, grid, bandwidth)
    pooled = np.zeros(bandwidth + 1, dtype=complex)
    for scan in range(1, max_scans + 1):
        lam_stat, alpha_hat, detected, lags = _orthogonal_scan(
            cfg, grid, dist, rcs, s_true, V_orth, bandwidth, lam, rng, signal_model,
            v_lags)
        pooled += (lags - pooled) / scan
        if np.any(detected):
            fired = np.flatnonzero(detected)
            best = int(fired[np.argmax(lam_stat[fired])])
            amp = float(np.abs(alpha_hat[best]))
            sigma = _sigma_from_pooled_lags(pooled, T_dir, norms2)
            particles = _seed_particles(grid, best, invert_range(rcs, amp), range_std,
                                        v_max, n_particles, rng)
            return AcquisitionResult(
                belief=BeliefSet(particles, n_particles),
                sigma_table=sigma,
                beta_table=np.sqrt(3.0) * sigma,
                scans_used=scan,
                detected_bin=best,
                observed_amplitude=amp,
            )
    raise AcquisitionFailure(f"no detection within {max_scans} orthogonal scans")


def assisted_init(cfg: ArrayConfig, grid: AngleGrid, dist: ARModel, rcs: RcsModel,
                  s_true: TargetState, lam: float, n_particles: int, v_max: float,
                  rng: np.random.Generator, pool_scans: int = 10, range_std: float = 2.0,
                  bandwidth: int | None = None,
                  signal_model: str = "bin-center") -> AcquisitionResult:
    """Successful-acquisition-equivalent initialization.

    Pools sigma_l exactly as acquire does over pool_scans orthogonal scans,
    then seeds the belief from the target's true bin using one amplitude
    draw at the directed noise scale (a confirmation look at that bin).
    """
    if bandwidth is None:
        bandwidth = default_bandwidth(cfg.n_virtual)
    W = orthogonal_waveform(cfg)
    V_orth = np.stack([virtual_channel(W, th, cfg) for th in grid.centers])
    v_lags = steering_lag_products(V_orth, bandwidth)
    T_dir, norms2 = _directed_lag_products(cfg, grid, bandwidth)
    pooled = np.zeros(bandwidth + 1, dtype=complex)
    for scan in range(1, pool_scans + 1):
        _, _, _, lags = _orthogonal_scan(
            cfg, grid, dist, rcs, s_true, V_orth, bandwidth, lam, rng, signal_model,
            v_lags)
        pooled += (lags - pooled) / scan
    sigma = _sigma_from_pooled_lags(pooled, T_dir, norms2)
    tbin = get_angle_bin(s_true.x, s_true.y, grid)
    if tbin == OUT_OF_VIEW:
        raise AcquisitionFailure("target outside the field of view at initialization")
    alpha = get_rcs(s_true, rcs, rng)
    noise = rng.standard_normal(2)
    alpha_hat = alpha + sigma[tbin] * complex(noise[0], noise[1]) / np.sqrt(2.0)
    amp = abs(alpha_hat)
    particles = _seed_particles(grid, tbin, invert_range(rcs, amp), range_std,
                                v_max, n_particles, rng)
    return AcquisitionResult(
        belief=BeliefSet(particles, n_particles),
        sigma_table=sigma,
        beta_table=np.sqrt(3.0) * sigma,
        scans_used=pool_scans + 1,
        detected_bin=tbin,
        observed_amplitude=float(amp),
    )


def pf_predict(belief: BeliefSet, motion: MotionModel) -> np.ndarray:
    """Predicted mean state: (1/|B|) sum A s (the noise term has zero mean)."""
    if len(belief.particles) == 0:
        raise ValueError("empty belief")
    return motion.A @ belief.mean()


def pf_policy_step(belief: BeliefSet, grid: AngleGrid, motion: MotionModel) -> int:
    """Particle-filter action: the angle bin of the predicted mean position."""
    pred = pf_predict(belief, motion)
    theta = float(np.arctan2(pred[2], pred[0]))
    if theta < grid.fov_min:
        return 0
    if theta >= grid.fov_max:
        return grid.n_bins - 1
    return get_angle_bin(float(pred[0]), float(pred[2]), grid)


def oracle_policy_step(true_next_bin: int) -> int:
    """Oracle action: the target's true next bin (forced miss when out of view)."""
    return true_next_bin


def orthogonal_policy_step(cfg: ArrayConfig):
    """Orthogonal baseline decision: transmit W_orth and test every bin.

    There is no per-scan choice to make; the returned waveform is the same
    every scan and detection is scored on the target's bin.
    """
    return orthogonal_waveform(cfg)


class PomcpPlanner:
    """Tree-search policy: rebuilds the tree each scan from the root belief."""

    kind = "pomcp"

    def __init__(self, gen: RadarGenerator, params: PomcpParams):
        self.gen = gen
        self.params = params

    def choose(self, belief: BeliefSet, true_next_bin: int, rng: np.random.Generator) -> int:
        return solve(belief, self.gen, self.params, rng)


class ParticleFilterPlanner:
    """Predict-the-mean policy over the same belief machinery."""

    kind = "particle_filter"

    def __init__(self, grid: AngleGrid, motion: MotionModel):
        self.grid = grid
        self.motion = motion

    def choose(self, belief: BeliefSet, true_next_bin: int, rng: np.random.Generator) -> int:
        return pf_policy_step(belief, self.grid, self.motion)


class OraclePlanner:
    """Idealized policy that always illuminates the target's true next bin."""

    kind = "oracle"

    def choose(self, belief: BeliefSet, true_next_bin: int, rng: np.random.Generator) -> int:
        return oracle_policy_step(true_next_bin)
