"""Delay-tolerant routing with ARMA contact prediction, plus PRoPHET and Epidemic baselines."""
from .simcore import Protocol, ScenarioConfig, run_scenario, simulate

__version__ = "0.1.0"

__all__ = ["Protocol", "ScenarioConfig", "run_scenario", "simulate", "__version__"]
