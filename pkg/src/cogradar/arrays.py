"""Co-located MIMO array geometry: steering vectors, waveform matrices,
virtual-channel vectors and transmit beampattern gains.

Both sides are uniform linear arrays with configurable element spacing
(default half wavelength), so element n of a steering vector carries the
phase exp(j*2*pi*spacing*n*sin(theta)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HALF_PI = np.pi / 2.0


@dataclass(frozen=True)
class ArrayConfig:
    """Physical array: element counts, spacing (wavelengths) and total power."""

    n_tx: int
    n_rx: int
    element_spacing: float = 0.5
    total_power: float = 1.0

    def __post_init__(self):
        if self.n_tx < 1 or self.n_rx < 1:
            raise ValueError("n_tx and n_rx must be >= 1")
        if self.total_power <= 0:
            raise ValueError("total_power must be positive")

    @property
    def n_virtual(self) -> int:
        return self.n_tx * self.n_rx


@dataclass(frozen=True)
class AngleGrid:
    """Uniform partition of the field of view into angle bins.

    Bins are half-open [edge_k, edge_{k+1}); centers are the bin midpoints.
    """

    fov_min: float
    fov_max: float
    n_bins: int
    centers: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (-HALF_PI <= self.fov_min < self.fov_max <= HALF_PI + 1e-12):
            raise ValueError("field of view must satisfy -pi/2 <= fov_min < fov_max <= pi/2")
        if self.n_bins < 1:
            raise ValueError("n_bins must be >= 1")
        width = (self.fov_max - self.fov_min) / self.n_bins
        centers = self.fov_min + width * (np.arange(self.n_bins) + 0.5)
        object.__setattr__(self, "centers", centers)

    @property
    def bin_width(self) -> float:
        return (self.fov_max - self.fov_min) / self.n_bins

    @classmethod
    def default(cls, n_bins: int) -> "AngleGrid":
        return cls(-HALF_PI, HALF_PI, n_bins)


@dataclass(frozen=True)
class WaveformMatrix:
    """Transmit waveform matrix W (n_tx x n_tx), trace(W W^H) = total power."""

    entries: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.entries, dtype=complex)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("waveform matrix must be square")
        object.__setattr__(self, "entries", w)

    @property
    def trace_power(self) -> float:
        w = self.entries
        return float(np.sum(np.abs(w) ** 2))


def steering_vector(cfg: ArrayConfig, theta: float, side: str = "transmit") -> np.ndarray:
    """Unit-modulus ULA steering vector a(theta) for one side of the array."""
    if not -HALF_PI <= theta <= HALF_PI:
        raise ValueError(f"theta {theta!r} outside [-pi/2, pi/2]")
    if side == "transmit":
        n = cfg.n_tx
    elif side == "receive":
        n = cfg.n_rx
    else:
        raise ValueError(f"unknown side {side!r}")
    phase = 2.0 * np.pi * cfg.element_spacing * np.sin(theta)
    return np.exp(1j * phase * np.arange(n))


def directed_waveform(cfg: ArrayConfig, theta_l: float) -> WaveformMatrix:
    """Rank-1 waveform focusing the full transmit power on angle theta_l.

    W = (sqrt(P_T)/N_T) * conj(a_T) a_T^T, the explicit square root of
    (P_T/N_T) conj(a_T) a_T^T, which attains the beampattern maximum
    P_T * N_T under the trace power constraint.
    """
    a_t = steering_vector(cfg, theta_l, "transmit")
    w = (np.sqrt(cfg.total_power) / cfg.n_tx) * np.outer(np.conj(a_t), a_t)
    return WaveformMatrix(w)


def orthogonal_waveform(cfg: ArrayConfig) -> WaveformMatrix:
    """Omnidirectional waveform sqrt(P_T/N_T) * I."""
    w = np.sqrt(cfg.total_power / cfg.n_tx) * np.eye(cfg.n_tx, dtype=complex)
    return WaveformMatrix(w)


def virtual_channel(W: WaveformMatrix, theta: float, cfg: ArrayConfig) -> np.ndarray:
    """Virtual-channel vector v = (W^T a_T(theta)) kron a_R(theta), length N_T*N_R."""
    a_t = steering_vector(cfg, theta, "transmit")
    a_r = steering_vector(cfg, theta, "receive")
    return np.kron(W.entries.T @ a_t, a_r)


def beam_gain(W: WaveformMatrix, theta: float, cfg: ArrayConfig) -> float:
    """Transmit beampattern a_T^T W W^H conj(a_T) at angle theta (real, >= 0)."""
    a_t = steering_vector(cfg, theta, "transmit")
    x = W.entries.conj().T @ np.conj(a_t)
    return float(np.real(np.vdot(x, x)))
