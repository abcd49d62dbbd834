"""Curve-free Bayesian decision-theoretic dose-finding (CFBD / c-CFBD).

One- and two-agent phase I designs with extrapolating Beta-binomial
prior updates, optional effective-sample-size calibration, a Monte
Carlo operating-characteristics simulator, and an HTTP service for
conducting a live trial cohort by cohort.
"""

from .decision import DesignConfig, StopStatus, expected_utility
from .dose_model import (CohortOutcome, DoseGrid1, DoseGrid2, calibrate1,
                         calibrate2, dominates, update1, update2)
from .engine import TrialState, start_trial
from .simulator import (OperatingCharacteristics, Scenario, band_group,
                        builtin_scenarios, export_report, get_scenario,
                        run_replicates)
from .stats_kernel import BetaParams, RngStream, beta_cdf, beta_tail, log_gamma

__version__ = "0.1.0"

__all__ = [
    "BetaParams", "RngStream", "beta_cdf", "beta_tail", "log_gamma",
    "CohortOutcome", "DoseGrid1", "DoseGrid2", "dominates",
    "update1", "update2", "calibrate1", "calibrate2",
    "DesignConfig", "StopStatus", "expected_utility",
    "TrialState", "start_trial",
    "Scenario", "OperatingCharacteristics", "builtin_scenarios",
    "get_scenario", "run_replicates", "band_group", "export_report",
    "__version__",
]
