"""Cooperative spectrum sensing toolkit.

Closed-form and Monte Carlo performance analysis of a K-radio cognitive
network that senses with energy detectors over Rayleigh fading, reports
one-bit decisions over a noisy channel, and fuses them with an n-out-of-K
vote. Includes ROC generation, rule-crossover detection, and adaptive
selection of the vote threshold for a target miss-detection probability.
"""

from .fusion import (
    FusionConfig,
    PerfPoint,
    asymptotic_qf,
    asymptotic_qm,
    enumerate_rule,
    fused_qf,
    fused_qm,
)
from .local_sensing import SensingParams, local_pd, local_pf, local_pm, threshold_for_pf
from .mathx import Probability, db_to_linear, gaussian_q, log_binomial, reg_upper_incomplete_gamma
from .montecarlo import SimResult, SimScenario, run_grid, run_sim, run_sweep
from .reporting import (
    ReportChannel,
    channel_from_snr_db,
    error_probability,
    flip_composition,
    perfect_channel,
)
from .roc import (
    CrossoverTable,
    InfeasibleTargetError,
    NoCrossoverError,
    OptimalRule,
    RocCurve,
    analytic_roc,
    crossover_table,
    operating_point,
    optimal_n,
    qf_at_qm,
    qm_star,
)

__version__ = "0.1.0"

__all__ = [
    "Probability",
    "SensingParams",
    "ReportChannel",
    "FusionConfig",
    "PerfPoint",
    "SimScenario",
    "SimResult",
    "RocCurve",
    "CrossoverTable",
    "OptimalRule",
    "NoCrossoverError",
    "InfeasibleTargetError",
    "reg_upper_incomplete_gamma",
    "gaussian_q",
    "log_binomial",
    "db_to_linear",
    "local_pf",
    "local_pd",
    "local_pm",
    "threshold_for_pf",
    "perfect_channel",
    "channel_from_snr_db",
    "error_probability",
    "flip_composition",
    "fused_qf",
    "fused_qm",
    "asymptotic_qf",
    "asymptotic_qm",
    "enumerate_rule",
    "run_sim",
    "run_sweep",
    "run_grid",
    "operating_point",
    "analytic_roc",
    "qf_at_qm",
    "qm_star",
    "crossover_table",
    "optimal_n",
]
