"""Experiment orchestration: configs, runners, reports, statistics, CLI."""

from .config import ConfigError, ExperimentConfig, build_config, load_config, parse_config_text
from .experiments import (
    TAGS,
    replica_stream,
    run_calibrate,
    run_experiment,
    run_gw_verify,
    run_prop1,
    run_thm1,
    run_thm2,
)
from .report import ExperimentReport
from .stats import (
    empirical_quantiles,
    frechet_cdf,
    ks_statistic,
    log_log_slope,
    tv_distances,
    wilson_interval,
)
from .cli import cli_main
