"""Experiment configuration: TOML schema, validation and bundled presets.

The file format is TOML with one section per subsystem. Unknown sections
or keys are rejected so typos fail loudly. The disturbance block accepts
either pole placement (pole_magnitudes / pole_frequencies, the form the
study cases use) or explicit complex coefficients (coefficients_real /
coefficients_imag); stability is checked at load either way.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .arrays import AngleGrid, ArrayConfig
from .disturbance import ARModel, InnovationSpec, coefficients_from_poles
from .environment import MotionModel, TargetState
from .pomcp import PomcpParams
from .policies import POLICY_KINDS

INIT_MODES = ("acquire", "assisted")
SIGNAL_MODELS = ("bin-center", "beampattern")


@dataclass(frozen=True)
class ScenarioConfig:
    """Target scenario and initialization knobs."""

    initial_state: TargetState
    initial_snr_db: float = -17.0
    p_fa: float = 1e-4
    t_max: int = 100
    init_mode: str = "assisted"
    signal_model: str = "bin-center"
    v_max: float = 0.5
    range_seed_std_km: float = 2.0
    pool_scans: int = 10
    max_acquisition_scans: int = 20

    def __post_init__(self):
        if self.t_max < 1:
            raise ValueError("t_max must be >= 1")
        if not 0.0 < self.p_fa <= 1.0:
            raise ValueError("p_fa must lie in (0, 1]")
        if self.init_mode not in INIT_MODES:
            raise ValueError(f"init_mode must be one of {INIT_MODES}")
        if self.signal_model not in SIGNAL_MODELS:
            raise ValueError(f"signal_model must be one of {SIGNAL_MODELS}")
        if self.v_max <= 0 or self.range_seed_std_km <= 0:
            raise ValueError("v_max and range_seed_std_km must be positive")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one Monte-Carlo experiment needs, fully resolved."""

    array: ArrayConfig
    grid: AngleGrid
    disturbance: ARModel
    motion: MotionModel
    scenario: ScenarioConfig
    pomcp: PomcpParams
    policies: tuple
    n_trials: int = 25
    base_seed: int = 20260808
    threads: int = 1
    out_dir: str = "results"
    detector_bandwidth: int = 0  # 0 -> ceil(N^(1/3))

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        bad = [p for p in self.policies if p not in POLICY_KINDS]
        if bad:
            raise ValueError(f"unknown policies {bad}; valid: {POLICY_KINDS}")
        if not self.policies:
            raise ValueError("at least one policy required")

    @property
    def bandwidth(self) -> int:
        if self.detector_bandwidth > 0:
            return self.detector_bandwidth
        n = self.array.n_virtual
        return int(math.ceil(n ** (1.0 / 3.0)))


_SCHEMA = {
    "array": {"n_tx", "n_rx", "element_spacing", "total_power"},
    "grid": {"fov_min_deg", "fov_max_deg", "n_bins"},
    "disturbance": {
        "kind", "shape", "power", "burn_in",
        "pole_magnitudes", "pole_frequencies",
        "coefficients_real", "coefficients_imag",
    },
    "motion": {"dt", "sigma_s"},
    "scenario": {
        "initial_state", "initial_snr_db", "p_fa", "t_max", "init_mode",
        "signal_model", "v_max", "range_seed_std_km", "pool_scans",
        "max_acquisition_scans",
    },
    "detector": {"bandwidth"},
    "pomcp": {"n_sim", "n_particles", "ucb_c", "gamma", "max_depth", "epsilon", "k_max"},
    "experiment": {"policies", "n_trials", "base_seed", "threads", "out_dir"},
}


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


def _check_keys(data: dict) -> None:
    unknown_sections = set(data) - set(_SCHEMA)
    if unknown_sections:
        raise ConfigError(f"unknown config sections: {sorted(unknown_sections)}")
    for section, keys in _SCHEMA.items():
        got = data.get(section, {})
        if not isinstance(got, dict):
            raise ConfigError(f"section [{section}] must be a table")
        unknown = set(got) - keys
        if unknown:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")


def _ar_from_section(d: dict) -> ARModel:
    innovation = InnovationSpec(
        kind=d.get("kind", "complex-t"),
        shape=float(d.get("shape", 2.0)),
        power=float(d.get("power", 1.0)),
    )
    has_poles = "pole_magnitudes" in d or "pole_frequencies" in d
    has_coefs = "coefficients_real" in d or "coefficients_imag" in d
    if has_poles and has_coefs:
        raise ConfigError("give either poles or coefficients, not both")
    if has_poles:
        coefs = coefficients_from_poles(d["pole_magnitudes"], d["pole_frequencies"])
    elif has_coefs:
        re = np.asarray(d["coefficients_real"], dtype=float)
        im = np.asarray(d.get("coefficients_imag", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape:
            raise ConfigError("coefficient real/imag parts must have equal length")
        coefs = re + 1j * im
    else:
        coefs = np.zeros(0, dtype=complex)
    try:
        return ARModel(coefs, innovation, burn_in=int(d.get("burn_in", 1000)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def config_from_dict(data: dict) -> ExperimentConfig:
    _check_keys(data)
    a = data.get("array", {})
    array = ArrayConfig(
        n_tx=int(a.get("n_tx", 100)),
        n_rx=int(a.get("n_rx", 100)),
        element_spacing=float(a.get("element_spacing", 0.5)),
        total_power=float(a.get("total_power", 1.0)),
    )
    g = data.get("grid", {})
    grid = AngleGrid(
        fov_min=math.radians(float(g.get("fov_min_deg", -90.0))),
        fov_max=math.radians(float(g.get("fov_max_deg", 90.0))),
        n_bins=int(g.get("n_bins", 100)),
    )
    disturbance = _ar_from_section(data.get("disturbance", {}))
    m = data.get("motion", {})
    motion = MotionModel(dt=float(m.get("dt", 1.0)), sigma_s=float(m.get("sigma_s", 0.0)))
    s = data.get("scenario", {})
    state = s.get("initial_state", [60.0, 0.2, -60.0, 0.2])
    if len(state) != 4:
        raise ConfigError("initial_state must have 4 entries [x, vx, y, vy]")
    scenario = ScenarioConfig(
        initial_state=TargetState(*(float(v) for v in state)),
        initial_snr_db=float(s.get("initial_snr_db", -17.0)),
        p_fa=float(s.get("p_fa", 1e-4)),
        t_max=int(s.get("t_max", 100)),
        init_mode=str(s.get("init_mode", "assisted")),
        signal_model=str(s.get("signal_model", "bin-center")),
        v_max=float(s.get("v_max", 0.5)),
        range_seed_std_km=float(s.get("range_seed_std_km", 2.0)),
        pool_scans=int(s.get("pool_scans", 10)),
        max_acquisition_scans=int(s.get("max_acquisition_scans", 20)),
    )
    p = data.get("pomcp", {})
    max_depth = p.get("max_depth", 2)
    pomcp = PomcpParams(
        n_sim=int(p.get("n_sim", 10_000)),
        n_particles=int(p.get("n_particles", 10_000)),
        ucb_c=float(p.get("ucb_c", math.sqrt(2.0))),
        gamma=float(p.get("gamma", 0.8)),
        max_depth=None if max_depth in (None, 0) else int(max_depth),
        epsilon=float(p.get("epsilon", 0.01)),
        k_max=int(p.get("k_max", 64)),
    )
    e = data.get("experiment", {})
    try:
        return ExperimentConfig(
            array=array,
            grid=grid,
            disturbance=disturbance,
            motion=motion,
            scenario=scenario,
            pomcp=pomcp,
            policies=tuple(e.get("policies", ["pomcp", "particle_filter", "oracle"])),
            n_trials=int(e.get("n_trials", 25)),
            base_seed=int(e.get("base_seed", 20260808)),
            threads=int(e.get("threads", 1)),
            out_dir=str(e.get("out_dir", "results")),
            detector_bandwidth=int(data.get("detector", {}).get("bandwidth", 0)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str) -> ExperimentConfig:
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"TOML parse error in {path}: {exc}") from exc
    return config_from_dict(data)


# --- bundled study-case presets -------------------------------------

STUDY_POLE_MAGNITUDES = (0.5, 0.6, 0.7, 0.4, 0.5, 0.6)
STUDY_POLE_FREQUENCIES = (0.4, 0.2, 0.0, 0.1, 0.3, 0.35)


def study_disturbance(kind: str = "complex-t", shape: float = 2.0,
                      power: float = 1.0, burn_in: int = 1000) -> ARModel:
    """The AR(6) disturbance of the study cases (pole form, radius 0.7)."""
    coefs = coefficients_from_poles(STUDY_POLE_MAGNITUDES, STUDY_POLE_FREQUENCIES)
    return ARModel(coefs, InnovationSpec(kind, shape, power), burn_in=burn_in)


def _scaled_preset(initial_state, sigma_s, policies) -> dict:
    return {
        "array": {"n_tx": 100, "n_rx": 100},
        "grid": {"n_bins": 100},
        "disturbance": {
            "kind": "complex-t", "shape": 2.0, "power": 1.0, "burn_in": 1000,
            "pole_magnitudes": list(STUDY_POLE_MAGNITUDES),
            "pole_frequencies": list(STUDY_POLE_FREQUENCIES),
        },
        "motion": {"dt": 1.0, "sigma_s": sigma_s},
        "scenario": {
            "initial_state": list(initial_state),
            "initial_snr_db": -17.0,
            "p_fa": 1e-4,
            "t_max": 100,
            "init_mode": "assisted",
            "v_max": 0.5,
            "range_seed_std_km": 3.0,
            "pool_scans": 10,
        },
        "pomcp": {"n_sim": 2000, "n_particles": 2000, "max_depth": 2},
        "experiment": {
            "policies": list(policies),
            "n_trials": 25,
            "base_seed": 20260808,
            "threads": 1,
            "out_dir": "results",
        },
    }


def preset_case1() -> dict:
    """Slow target: s0 = (60, 0.2, -60, 0.2), sigma_s = 0.03."""
    return _scaled_preset([60.0, 0.2, -60.0, 0.2], 0.03,
                          ["pomcp", "particle_filter", "oracle"])


def preset_case2() -> dict:
    """Fast target: s0 = (60, 0.35, -60, 0.35), sigma_s = 0.005."""
    return _scaled_preset([60.0, 0.35, -60.0, 0.35], 0.005,
                          ["pomcp", "particle_filter", "oracle", "orthogonal"])


PRESETS = {"case1": preset_case1, "case2": preset_case2}
