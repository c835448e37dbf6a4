"""Exact values, region geometry and Monte Carlo tools for the sequential assignment game."""

from ._core import (
    Graph,
    SapgError,
    ValueTable,
    a_star,
    boundary_distance,
    classify,
    membership_flow,
    phase_diagram,
    round_config,
    simulate,
    transition_scan,
    wilson,
    x_star,
)

__all__ = [
    "Graph",
    "SapgError",
    "ValueTable",
    "a_star",
    "boundary_distance",
    "classify",
    "membership_flow",
    "phase_diagram",
    "round_config",
    "simulate",
    "transition_scan",
    "wilson",
    "x_star",
]

__version__ = "0.1.0"
