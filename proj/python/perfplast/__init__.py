"""Elasto-plastic evolution with Yosida regularization and optimal control.

simulate(), rate_study() and ControlProblem take an optional INI path and a
dict of "section.key" overrides; see docs/config.md for the keys.
"""

from ._perfplast import (
    ConfigError,
    ControlProblem,
    SolverError,
    acceptance,
    config_schema,
    deviator,
    displacement,
    exact_stress,
    project,
    rate_study,
    run,
    simulate,
    verify_weak_solution,
    yosida_deriv,
    yosida_value,
)

__all__ = [
    "ConfigError",
    "ControlProblem",
    "SolverError",
    "acceptance",
    "config_schema",
    "deviator",
    "displacement",
    "exact_stress",
    "project",
    "rate_study",
    "run",
    "simulate",
    "verify_weak_solution",
    "yosida_deriv",
    "yosida_value",
]
