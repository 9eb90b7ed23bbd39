"""Random generators, inequality suites, scenario configs and the command line."""

from .generators import generate
from .scenario import ConfigError, Scenario, load_config, run_config, run_scenario
from .suites import SUITES, SuiteResult, estimate_best_constant, verify_inequality_suite

__all__ = ["ConfigError", "SUITES", "Scenario", "SuiteResult", "estimate_best_constant",
           "generate", "load_config", "run_config", "run_scenario", "verify_inequality_suite"]
