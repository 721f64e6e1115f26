"""Cognitive massive-MIMO radar simulator.

Robust Wald-type detection under unknown heavy-tailed disturbance, wrapped
in a POMDP whose tree-search planner steers the transmit beam each scan to
jointly detect and track a single moving target, with particle-filter,
Oracle and orthogonal-waveform baselines under a seeded Monte-Carlo
harness.
"""

__version__ = "0.1.0"

from .arrays import (
    AngleGrid,
    ArrayConfig,
    WaveformMatrix,
    beam_gain,
    directed_waveform,
    orthogonal_waveform,
    steering_vector,
    virtual_channel,
)
from .config import ExperimentConfig, load_config, study_disturbance
from .detector import (
    CovarianceEstimate,
    DetectionReport,
    approx_pd,
    estimate_alpha,
    estimate_covariance,
    marcum_q1,
    quadratic_form,
    run_detector,
    sigma_hat,
    threshold_from_pfa,
    wald_statistic,
)
from .disturbance import (
    ARModel,
    AutocovarianceSequence,
    InnovationSpec,
    check_stability,
    generate_ar,
    sample_innovation,
    true_autocovariance,
)
from .environment import (
    MotionModel,
    RcsModel,
    TargetState,
    get_angle_bin,
    get_rcs,
    snr_db,
    synthesize_scan,
    transition,
)
from .harness import compute_rmse, export_results, run_monte_carlo, run_trial
from .pomcp import (
    BeliefSet,
    Observation,
    PomcpParams,
    RadarGenerator,
    discretize_observation,
    rollout,
    simulate,
    solve,
    ucb1_select,
    update_belief,
)
from .policies import AcquisitionResult, acquire, oracle_policy_step, pf_policy_step, pf_predict
