"""Python access to the shelab stochastic heat equation lab."""

from ._core import (
    ConfigError,
    LabError,
    __version__,
    canonical_config,
    config_hash,
    density_sequence,
    heat_kernel,
    run,
    simulate,
    ucp_constants,
)

__all__ = [
    "ConfigError",
    "LabError",
    "__version__",
    "canonical_config",
    "config_hash",
    "density_sequence",
    "heat_kernel",
    "run",
    "simulate",
    "ucp_constants",
]
