"""Ground-truth world model.

Target kinematics follow the white-acceleration linear-Gaussian model
s' = A s + G w with state [x, Vx, y, Vy] in km and km/s. The radar cross
section amplitude follows the inverse-square range law; SNR is defined as
|alpha(R)|^2 over the lag-0 disturbance power. Scan synthesis is full
physics: the target contributes through the transmit beampattern at its
true azimuth, not at the illuminated bin center.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arrays import AngleGrid, ArrayConfig, WaveformMatrix, virtual_channel
from .disturbance import ARModel, generate_ar

OUT_OF_VIEW = -1


@dataclass(frozen=True)
class TargetState:
    """Hidden kinematic state (positions km, velocities km/s)."""

    x: float
    vx: float
    y: float
    vy: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.vx, self.y, self.vy])

    @classmethod
    def from_array(cls, arr) -> "TargetState":
        x, vx, y, vy = (float(a) for a in arr)
        return cls(x, vx, y, vy)

    @property
    def range_km(self) -> float:
        return float(np.hypot(self.x, self.y))


def transition_matrices(dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Block transition matrix A and noise input matrix G for scan interval dt."""
    a_b = np.array([[1.0, dt], [0.0, 1.0]])
    g_b = np.array([[dt * dt / 2.0], [dt]])
    A = np.zeros((4, 4))
    A[:2, :2] = a_b
    A[2:, 2:] = a_b
    G = np.zeros((4, 2))
    G[:2, :1] = g_b
    G[2:, 1:] = g_b
    return A, G


@dataclass(frozen=True)
class MotionModel:
    """Linear-Gaussian target dynamics with process-noise std sigma_s."""

    dt: float = 1.0
    sigma_s: float = 0.0
    A: np.ndarray = field(init=False, repr=False)
    G: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.sigma_s < 0:
            raise ValueError("sigma_s must be >= 0")
        A, G = transition_matrices(self.dt)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "G", G)


def transition(s: TargetState, model: MotionModel, rng: np.random.Generator) -> TargetState:
    """One motion step s' = A s + G w, w ~ N(0, sigma_s^2 I_2)."""
    w = model.sigma_s * rng.standard_normal(2)
    return TargetState.from_array(model.A @ s.as_array() + model.G @ w)


def transition_batch(states: np.ndarray, model: MotionModel,
                     rng: np.random.Generator) -> np.ndarray:
    """Vectorized motion step on an (n, 4) particle array."""
    w = model.sigma_s * rng.standard_normal((states.shape[0], 2))
    return states @ model.A.T + w @ model.G.T


# nudge keeps exact bin-edge angles in the bin whose lower edge they are
_BIN_EDGE_EPS = 1e-9


def get_angle_bin(x: float, y: float, grid: AngleGrid) -> int:
    """Containing angle bin of azimuth atan2(y, x); OUT_OF_VIEW if outside the FOV."""
    if x == 0.0 and y == 0.0:
        raise ValueError("angle undefined at the origin")
    theta = np.arctan2(y, x)
    if theta < grid.fov_min or theta >= grid.fov_max:
        return OUT_OF_VIEW
    k = int((theta - grid.fov_min) / grid.bin_width + _BIN_EDGE_EPS)
    return min(k, grid.n_bins - 1)


def angle_bins(xy: np.ndarray, grid: AngleGrid) -> np.ndarray:
    """Vectorized get_angle_bin on an (n, 2) position array."""
    theta = np.arctan2(xy[:, 1], xy[:, 0])
    k = np.floor((theta - grid.fov_min) / grid.bin_width + _BIN_EDGE_EPS).astype(np.int64)
    k = np.minimum(k, grid.n_bins - 1)
    out = (theta < grid.fov_min) | (theta >= grid.fov_max)
    k[out] = OUT_OF_VIEW
    return k


@dataclass(frozen=True)
class RcsModel:
    """Inverse-square amplitude law |alpha(R)| = ref_amplitude * (ref_range/R)^2."""

    ref_amplitude: float
    ref_range: float

    def __post_init__(self):
        if self.ref_amplitude <= 0 or self.ref_range <= 0:
            raise ValueError("RCS reference amplitude and range must be positive")

    def amplitude(self, range_km) -> np.ndarray:
        return self.ref_amplitude * (self.ref_range / np.asarray(range_km)) ** 2


def calibrate_rcs(initial_range_km: float, initial_snr_db: float, noise_power: float) -> RcsModel:
    """RcsModel whose amplitude at initial_range gives the requested SNR."""
    amp = np.sqrt(noise_power * 10.0 ** (initial_snr_db / 10.0))
    return RcsModel(float(amp), initial_range_km)


def get_rcs(s: TargetState, model: RcsModel, rng: np.random.Generator) -> complex:
    """Complex RCS draw: range-law magnitude, phase uniform on (0, 2pi)."""
    r = s.range_km
    if r <= 0:
        raise ValueError("target range must be positive")
    phase = rng.uniform(0.0, 2.0 * np.pi)
    return complex(model.amplitude(r) * np.exp(1j * phase))


def snr_db(s: TargetState, rcs: RcsModel, noise_power: float) -> float:
    """Post-calibration SNR definition: 10 log10(|alpha(R)|^2 / r[0])."""
    if noise_power <= 0:
        raise ValueError("noise_power must be positive")
    amp = float(rcs.amplitude(s.range_km))
    return float(10.0 * np.log10(amp * amp / noise_power))


@dataclass(frozen=True)
class ScanTruth:
    """Per-scan ground truth recorded next to the synthesized snapshot."""

    alpha: complex
    target_bin: int


SIGNAL_MODELS = ("bin-center", "beampattern")


def signal_steering_angle(s_next: TargetState, illuminated_bin: int,
                          grid: AngleGrid, signal_model: str):
    """Angle through which the target enters the tested snapshot, or None.

    "bin-center": the target contributes through the steering vector of its
    containing bin, and only when that bin is the illuminated one (the
    binary hypothesis pair the detector is built on).
    "beampattern": the target contributes through the transmit beampattern
    at its true azimuth in every snapshot, so off-center targets suffer
    straddle loss and sidelobe leakage is present.
    """
    target_bin = get_angle_bin(s_next.x, s_next.y, grid)
    if target_bin == OUT_OF_VIEW:
        return target_bin, None
    if signal_model == "beampattern":
        return target_bin, float(np.arctan2(s_next.y, s_next.x))
    if signal_model != "bin-center":
        raise ValueError(f"unknown signal model {signal_model!r}")
    if target_bin == illuminated_bin:
        return target_bin, float(grid.centers[target_bin])
    return target_bin, None


def synthesize_scan(W: WaveformMatrix, s_next: TargetState, illuminated_bin: int,
                    dist: ARModel, rcs: RcsModel, cfg: ArrayConfig, grid: AngleGrid,
                    rng: np.random.Generator,
                    signal_model: str = "bin-center") -> tuple[np.ndarray, ScanTruth]:
    """Received snapshot for one scan testing `illuminated_bin`.

    The disturbance realization is fresh per call. An out-of-view target
    contributes nothing (forced miss); truth carries alpha and the true bin.
    """
    alpha = get_rcs(s_next, rcs, rng)
    target_bin, theta = signal_steering_angle(s_next, illuminated_bin, grid, signal_model)
    c = generate_ar(dist, cfg.n_virtual, rng)
    if theta is None:
        return c, ScanTruth(alpha, target_bin)
    y = alpha * virtual_channel(W, theta, cfg) + c
    return y, ScanTruth(alpha, target_bin)
