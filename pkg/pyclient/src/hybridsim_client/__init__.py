from .builder import ExperimentBuilder, fattree, tworouter
from .errors import (BinaryNotFound, ClientError, EmptyResults, MissingResult,
                     RunFailed)
from .plots import plot_rates, plot_timings
from .results import ResultSet, load_results
from .runner import build_and_run, find_cli, validate

__all__ = [
    "ExperimentBuilder", "fattree", "tworouter",
    "ClientError", "BinaryNotFound", "RunFailed", "MissingResult",
    "EmptyResults",
    "ResultSet", "load_results",
    "build_and_run", "find_cli", "validate",
    "plot_rates", "plot_timings",
]
