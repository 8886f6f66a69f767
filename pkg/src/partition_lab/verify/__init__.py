"""Seeded verification experiments and their reports."""

from .experiments import (
    DEFAULTS,
    THRESHOLDS,
    THRESHOLDS_VERSION,
    calibrate_threshold,
    draw,
    identity_violations,
    run_experiment,
)
from .report import CLAIMS, Check, ExperimentConfig, ExperimentId, Report
from .stats import chi2_pvalue, chi2_uniform_pvalue, ks_discrete_vs_cdf, ks_statistic, ks_two_sample, tv_distance

__all__ = [
    "CLAIMS",
    "Check",
    "DEFAULTS",
    "ExperimentConfig",
    "ExperimentId",
    "Report",
    "THRESHOLDS",
    "THRESHOLDS_VERSION",
    "calibrate_threshold",
    "chi2_pvalue",
    "chi2_uniform_pvalue",
    "draw",
    "ks_discrete_vs_cdf",
    "ks_statistic",
    "ks_two_sample",
    "identity_violations",
    "run_experiment",
    "tv_distance",
]
