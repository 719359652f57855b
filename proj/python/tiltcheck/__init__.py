"""Tilt stability analysis of nonlinear programs.

Thin wrapper around the compiled core. The heavy lifting (symbolic
differentiation, constraint-qualification checks, multiplier polyhedra, the
tilt verdict, and the perturbation oracle) lives in C++; this package
exposes the pipeline-level entry points.
"""

from tiltcheck._core import (
    Problem,
    analyze,
    analyze_json,
    check_gradients,
    enumerate_vertices,
    load_problem,
    parse_problem,
    __version__,
)

__all__ = [
    "Problem",
    "analyze",
    "analyze_json",
    "check_gradients",
    "enumerate_vertices",
    "load_problem",
    "parse_problem",
    "__version__",
]
