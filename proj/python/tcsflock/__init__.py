"""Thermodynamic flocking in a harmonic potential.

Thin wrapper around the compiled extension. The heavy lifting (sampling,
integration, hypothesis checks, decay verification) lives in C++; this
package re-exports it for scripting and analysis.
"""

from tcsflock._core import (
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_UNSATISFIED,
    EXIT_USAGE,
    EXIT_VIOLATION,
    ConfigError,
    Interval,
    ParticleEnsemble,
    ScenarioConfig,
    apply_override,
    check,
    config_to_string,
    fit_exponential,
    gronwall_bound,
    load_config,
    parse_config,
    preset,
    sample_initial_data,
    simulate,
)

__all__ = [
    "EXIT_NUMERICAL",
    "EXIT_OK",
    "EXIT_UNSATISFIED",
    "EXIT_USAGE",
    "EXIT_VIOLATION",
    "ConfigError",
    "Interval",
    "ParticleEnsemble",
    "ScenarioConfig",
    "apply_override",
    "check",
    "config_to_string",
    "fit_exponential",
    "gronwall_bound",
    "load_config",
    "parse_config",
    "preset",
    "sample_initial_data",
    "simulate",
]
