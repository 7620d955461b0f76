"""Temporal drift experiments driven from Python.

A recurrent generator learns how a predictive network's parameters move
across a sequence of time-indexed domains and writes the parameters for the
next, unseen domain. This package wraps the C++ core; configs are the same
JSON documents the command-line tool reads.
"""

from ._driftgen import (
    ConfigError,
    IoError,
    NumericError,
    ShapeError,
    canonical_config,
    config_hash,
    make_drifting_regression,
    make_moons,
    predict_future_params,
    run_method,
    run_suite,
    version,
)

__version__ = version()

__all__ = [
    "ConfigError",
    "IoError",
    "NumericError",
    "ShapeError",
    "canonical_config",
    "config_hash",
    "make_drifting_regression",
    "make_moons",
    "predict_future_params",
    "run_method",
    "run_suite",
    "version",
    "__version__",
]
