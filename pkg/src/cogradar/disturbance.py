"""Heavy-tailed autoregressive disturbance generation.

The length-N disturbance vector is one realization of a stationary complex
AR(p) process c_n = sum_i rho_i c_{n-i} + w_n driven by i.i.d. circular
innovations. The complex-t innovation is sampled through its compound-
Gaussian representation: a CN(0,1) variate scaled by the square root of an
inverse-gamma mixing variable with mean sigma_w^2, so the innovation power
is sigma_w^2 for every shape mu > 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

INNOVATION_KINDS = ("complex-t", "complex-gaussian", "generalized-gaussian")


@dataclass(frozen=True)
class InnovationSpec:
    """Innovation distribution: kind, shape and power sigma_w^2.

    shape is the t shape mu (> 1) for "complex-t" and the exponent s (> 0)
    for "generalized-gaussian"; it is ignored for "complex-gaussian".
    """

    kind: str = "complex-t"
    shape: float = 2.0
    power: float = 1.0

    def __post_init__(self):
        if self.kind not in INNOVATION_KINDS:
            raise ValueError(f"unknown innovation kind {self.kind!r}")
        if self.power <= 0:
            raise ValueError("innovation power must be positive")
        if self.kind == "complex-t" and self.shape <= 1:
            raise ValueError("complex-t shape mu must exceed 1 (finite variance)")
        if self.kind == "generalized-gaussian" and self.shape <= 0:
            raise ValueError("generalized-gaussian exponent must be positive")

    @property
    def scale_xi(self) -> float:
        """The t scale parameter xi = mu / (power * (mu - 1)); derived, never stored."""
        if self.kind != "complex-t":
            raise ValueError("xi only defined for complex-t innovations")
        return self.shape / (self.power * (self.shape - 1.0))


def sample_innovations(spec: InnovationSpec, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw `size` i.i.d. circular complex innovations with E|w|^2 = power."""
    g = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)
    if spec.kind == "complex-gaussian":
        return np.sqrt(spec.power) * g
    if spec.kind == "complex-t":
        mu = spec.shape
        # tau ~ InvGamma(mu, b) with b = power*(mu-1) so that E[tau] = power
        b = spec.power * (mu - 1.0)
        tau = b / rng.gamma(mu, 1.0, size)
        return np.sqrt(tau) * g
    # generalized gaussian: density prop. to exp(-(|w|^2/a)^s), so
    # |w|^2 = a * T^(1/s) with T ~ Gamma(1/s), a set so E|w|^2 = power.
    s = spec.shape
    from math import gamma as _gamma

    a = spec.power * _gamma(1.0 / s) / _gamma(2.0 / s)
    t = rng.gamma(1.0 / s, 1.0, size)
    r = np.sqrt(a * t ** (1.0 / s))
    phase = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size))
    return r * phase


def sample_innovation(spec: InnovationSpec, rng: np.random.Generator) -> complex:
    """Scalar convenience wrapper around sample_innovations."""
    return complex(sample_innovations(spec, 1, rng)[0])


def check_stability(coefficients: np.ndarray) -> float:
    """Spectral radius of the AR companion matrix (stable iff < 1)."""
    rho = np.atleast_1d(np.asarray(coefficients, dtype=complex))
    p = rho.size
    if p == 0:
        return 0.0
    comp = np.zeros((p, p), dtype=complex)
    comp[0, :] = rho
    if p > 1:
        comp[1:, :-1] = np.eye(p - 1)
    return float(np.abs(np.linalg.eigvals(comp)).max())


def coefficients_from_poles(magnitudes, frequencies) -> np.ndarray:
    """AR coefficients whose characteristic polynomial has poles m_k e^{-j2pi f_k}."""
    mags = np.asarray(magnitudes, dtype=float)
    freqs = np.asarray(frequencies, dtype=float)
    if mags.shape != freqs.shape:
        raise ValueError("pole magnitudes and frequencies must have equal length")
    poles = mags * np.exp(-2j * np.pi * freqs)
    return -np.poly(poles)[1:]


@dataclass(frozen=True)
class ARModel:
    """Stable complex AR(p) disturbance model."""

    coefficients: np.ndarray
    innovation: InnovationSpec = field(default_factory=InnovationSpec)
    burn_in: int = 1000

    def __post_init__(self):
        rho = np.atleast_1d(np.asarray(self.coefficients, dtype=complex))
        object.__setattr__(self, "coefficients", rho)
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        radius = check_stability(rho)
        if radius >= 1.0:
            raise ValueError(
                f"unstable AR model: companion spectral radius {radius:.4f} >= 1"
            )

    @property
    def order(self) -> int:
        return int(self.coefficients.size)


def generate_ar(model: ARModel, length: int, rng: np.random.Generator) -> np.ndarray:
    """One realization of the AR process, length samples after burn-in.

    Started from zero initial conditions; burn_in warm-up samples are
    discarded so the retained block is effectively stationary.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    total = model.burn_in + length
    w = sample_innovations(model.innovation, total, rng)
    if model.order == 0:
        return w[model.burn_in:]
    a = np.concatenate(([1.0 + 0j], -model.coefficients))
    c = lfilter([1.0 + 0j], a, w)
    return c[model.burn_in:]


def generate_ar_block(model: ARModel, n_rows: int, length: int,
                      rng: np.random.Generator) -> np.ndarray:
    """n_rows independent realizations, shape (n_rows, length)."""
    total = model.burn_in + length
    w = sample_innovations(model.innovation, n_rows * total, rng).reshape(n_rows, total)
    if model.order == 0:
        return w[:, model.burn_in:]
    a = np.concatenate(([1.0 + 0j], -model.coefficients))
    c = lfilter([1.0 + 0j], a, w, axis=1)
    return c[:, model.burn_in:]


@dataclass(frozen=True)
class AutocovarianceSequence:
    """Lags r[0..m_max] of the disturbance autocovariance, r[m] = E[c_{n+m} conj(c_n)]."""

    lags: np.ndarray
    source: str

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=complex)
        object.__setattr__(self, "lags", lags)
        if lags.size == 0 or lags[0].real <= 0 or abs(lags[0].imag) > 1e-9 * lags[0].real:
            raise ValueError("lag 0 must be real and positive")

    @property
    def power(self) -> float:
        return float(self.lags[0].real)


def true_autocovariance(model: ARModel, max_lag: int, rng: np.random.Generator | None = None,
                        source: str = "monte-carlo", n_samples: int = 1_000_000,
                        ) -> AutocovarianceSequence:
    """Autocovariance of the stationary AR process up to max_lag.

    source "monte-carlo" (default): sample averages over one long run.
    source "analytic-solve": inverse FFT of the AR power spectrum
    sigma_w^2 / |1 - sum rho_k e^{-j w k}|^2, exact up to grid aliasing.
    """
    if source == "analytic-solve":
        m = 1 << 16
        w = 2.0 * np.pi * np.arange(m) / m
        rho = model.coefficients
        denom = np.ones(m, dtype=complex)
        for k in range(model.order):
            denom -= rho[k] * np.exp(-1j * w * (k + 1))
        spectrum = model.innovation.power / np.abs(denom) ** 2
        lags = np.fft.ifft(spectrum)[: max_lag + 1]
        lags[0] = lags[0].real
        return AutocovarianceSequence(lags, "analytic-solve")
    if source != "monte-carlo":
        raise ValueError(f"unknown source {source!r}")
    if rng is None:
        rng = np.random.default_rng(0)
    n = max(n_samples, 10 * (max_lag + 1))
    c = generate_ar(model, n + max_lag, rng)
    lags = np.empty(max_lag + 1, dtype=complex)
    for m in range(max_lag + 1):
        lags[m] = np.mean(c[m : m + n] * np.conj(c[:n]))
    lags[0] = lags[0].real
    return AutocovarianceSequence(lags, "monte-carlo")
