"""Discrete uniformization of decorated piecewise-Euclidean surfaces.

Given per-edge lengths and separated vertex-circle radii on a closed
triangulated surface, the package finds the per-vertex log scale factors
whose conformally changed metric attains a prescribed (or constant)
combinatorial curvature, maintaining a weighted Delaunay triangulation by
edge flips along the way.
"""

from .curvature import (
    CurvatureField,
    CurvatureTarget,
    alpha_curvature,
    angle_defects,
    classify_target,
    constraint_residual,
    curvature_field,
    make_target,
)
from .delaunay import (
    ConformalState,
    evaluate_at,
    is_weighted_delaunay,
    delaunay_margins,
    make_weighted_delaunay,
)
from .energy import energy_value, grad_energy, grad_prescribed, hessian
from .mesh import MeshConnectivity, build_connectivity, euler_characteristic, flip_connectivity
from .metric import DecoratedMetric, apply_conformal, conformal_length, conformal_radii, inversive_distance, validate
from .solver import (
    SolveConfig,
    SolveReport,
    solve_constant,
    solve_prescribed,
    verify_solution,
)

__version__ = "0.1.0"

__all__ = [
    "ConformalState",
    "CurvatureField",
    "CurvatureTarget",
    "DecoratedMetric",
    "MeshConnectivity",
    "SolveConfig",
    "SolveReport",
    "alpha_curvature",
    "angle_defects",
    "apply_conformal",
    "build_connectivity",
    "classify_target",
    "conformal_length",
    "conformal_radii",
    "constraint_residual",
    "curvature_field",
    "delaunay_margins",
    "energy_value",
    "euler_characteristic",
    "evaluate_at",
    "flip_connectivity",
    "grad_energy",
    "grad_prescribed",
    "hessian",
    "inversive_distance",
    "is_weighted_delaunay",
    "make_target",
    "make_weighted_delaunay",
    "solve_constant",
    "solve_prescribed",
    "validate",
    "verify_solution",
]
