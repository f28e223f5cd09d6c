"""Joint sparse recovery of multiple measurement vectors.

Thin wrapper over the C++ core: the spike-and-slab row denoiser, relaxed
belief propagation, AMP, state evolution and the experiment driver.
"""

from ._jointsparse import (
    ConfigError,
    Instance,
    NumericalError,
    amp,
    denoise,
    generate_instance,
    hard_threshold_limit,
    rbp,
    run_config,
    scalar_shrinkage,
    se_fixed_point,
    se_step,
    se_trace,
)

__all__ = [
    "ConfigError",
    "Instance",
    "NumericalError",
    "amp",
    "denoise",
    "generate_instance",
    "hard_threshold_limit",
    "rbp",
    "run_config",
    "scalar_shrinkage",
    "se_fixed_point",
    "se_step",
    "se_trace",
]
