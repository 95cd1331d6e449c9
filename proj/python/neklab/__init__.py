"""Experiments on smoothing, steepness, resonance geography, normal forms and
long-time stability of nearly integrable Hamiltonian systems."""

import json as _json

from ._neklab import (
    ConfigError,
    DomainError,
    Error,
    __version__,
    integrate,
    sha256_hex,
    steepness_benchmarks,
    subcommands,
    system_benchmarks,
)
from . import _neklab

__all__ = [
    "ConfigError",
    "DomainError",
    "Error",
    "__version__",
    "estimate_indices",
    "fit_exponents",
    "geography_params",
    "integrate",
    "run",
    "sha256_hex",
    "steepness_benchmarks",
    "subcommands",
    "system_benchmarks",
]


def run(subcommand, config="schema_version: 1\n", *, seed=None, threads=None, output=None):
    """Runs a subcommand from a YAML config string.

    Returns a dict with ``exit_code``, ``message`` and ``files`` (artifact name
    to content). With ``output`` the artifacts and manifest are also written
    to that directory.
    """
    return _json.loads(_neklab._run(subcommand, config, seed, threads, output))


def geography_params(n, alpha, ell):
    return _json.loads(_neklab._geography_params(n, list(alpha), ell))


def estimate_indices(benchmark, seed=0, points=()):
    return _json.loads(_neklab._estimate_indices(benchmark, seed, [list(p) for p in points]))


def fit_exponents(eps, values, ell=0.0):
    """Log-log slope of ``values`` against ``eps`` with a 95% band."""
    return _json.loads(_neklab._fit_exponents(list(eps), list(values), ell))
