"""Hybrid network experimentation engine.

Control-plane activity is replayed at (optionally wall-paced) fixed time
increments; the fluid-rate data plane advances as a fast discrete-event
simulation in between.
"""

from .engine import Engine, EngineReport, MS, SEC, US
from .experiment import ExperimentSpec, RunReport, parse_spec, run_experiment

__all__ = [
    "Engine", "EngineReport", "ExperimentSpec", "RunReport",
    "parse_spec", "run_experiment", "US", "MS", "SEC",
]
