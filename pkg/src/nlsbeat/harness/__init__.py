"""Configuration, scenario catalog, reports and the command line."""
from .config import ExperimentConfig, read_config, write_config
from .report import Check, VerificationReport, merge_reports
from .scenarios import CATALOG, run_scenario, run_sweep, scenario_catalog

__all__ = ["CATALOG", "Check", "ExperimentConfig", "VerificationReport", "merge_reports",
           "read_config", "run_scenario", "run_sweep", "scenario_catalog", "write_config"]
