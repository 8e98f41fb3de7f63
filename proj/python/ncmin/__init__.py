"""Minimizers of non-coercive integral functionals by two-level truncation.

Thin wrappers over the compiled core; structured results come back as
plain dictionaries.
"""

import json

from . import _core
from ._core import ConfigError, Field, Grid, interpolate, interval_grid, rect_grid

__all__ = [
    "ConfigError",
    "Field",
    "Grid",
    "audit",
    "certify",
    "divergence_report",
    "echo_config",
    "interpolate",
    "interval_grid",
    "rect_grid",
    "run",
    "solve",
]


def echo_config(text=""):
    """Completed configuration (defaults filled in) as YAML text."""
    return _core.echo_config(text)


def solve(config_text=""):
    """Solve the configured problem; returns nodes, values, energy and trace."""
    return json.loads(_core.solve_json(config_text))


def audit(config_text=""):
    """Solve and audit; adds 'estimates' keyed by estimate id."""
    return json.loads(_core.audit_json(config_text))


def divergence_report(N=3, rho=0.25, n_max=12):
    return json.loads(_core.divergence_json(N, rho, float(n_max)))


def certify(integrand, samples=1000, seed=0):
    return json.loads(_core.certify_json(integrand, samples, seed))


def run(config_text, subcommand, out_dir):
    """Run a subcommand writing artifacts to out_dir; returns (exit_code, log)."""
    return _core.run(config_text, subcommand, out_dir)
