"""Bounded-noise consistent multi-view triangulation."""

from ._ctri import (
    Camera,
    ConfigError,
    InfeasibleError,
    NumericalError,
    __version__,
    fit_loglog_slope,
    in_consistent_region,
    lower_bound_reference,
    make_camera,
    project,
    run_decay_experiment,
    triangulate,
)

__all__ = [
    "Camera",
    "ConfigError",
    "InfeasibleError",
    "NumericalError",
    "__version__",
    "fit_loglog_slope",
    "in_consistent_region",
    "lower_bound_reference",
    "make_camera",
    "project",
    "run_decay_experiment",
    "triangulate",
]
