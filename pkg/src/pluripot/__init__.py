"""Desk-scale numerics for Kaehler-Einstein potentials on domains in C^n.

The package verifies, on explicit domains, the chain from a metric potential
to a complete holomorphic vector field: exact Wirtinger jets feed a pointwise
tensor calculus, ball automorphisms rescale potentials toward a constant
gradient-length limit, the turned gradient of that limit integrates to an
interior-preserving flow, and a radial Monge-Ampere solver corrects an
approximate boundary metric into the Einstein one.
"""

from .complexad import CPoint, WJet, compose_jet, fd_check, jet_arith, jet_of, jet_space
from .domains import (
    DefiningFunction,
    MoebiusMap,
    Potential,
    PullbackPotential,
    ball_defining,
    boundary_sequence,
    domain_catalog,
    fefferman_F,
    length_identity_check,
    moebius,
    moebius_apply,
    moebius_jet,
    potential_catalog,
    radial_defining,
    w_inverse,
    w_metric,
    w_potential,
)
from .kaehler import (
    MetricFrame,
    PotentialReport,
    curvature_identity_residual,
    einstein_residual,
    frame_from_potential,
    gradient_length_sq,
    key_equation_residual,
    pde_residual,
    potential_report,
    s_operator,
    segment_metric_length,
)
from .ma_solver import (
    BoundaryScan,
    RadialSolution,
    boundary_limit_scan,
    decay_fit,
    radial_ma_determinant,
    solve_radial,
)
from .scaling import (
    ConvergenceReport,
    ScalingRun,
    gronwall_check,
    make_grid,
    pluriharmonic_residual,
    rescale,
    run_scaling,
    sigma_ratio,
)
from .vectorfield import (
    FieldEval,
    FlowTrace,
    build_field,
    flow,
    flow_automorphy_check,
    flow_map,
    rho_scaled_completeness_check,
    tangency_residual,
)

__all__ = [
    "BoundaryScan",
    "CPoint",
    "ConvergenceReport",
    "DefiningFunction",
    "FieldEval",
    "FlowTrace",
    "MetricFrame",
    "MoebiusMap",
    "Potential",
    "PotentialReport",
    "PullbackPotential",
    "RadialSolution",
    "ScalingRun",
    "WJet",
    "ball_defining",
    "boundary_limit_scan",
    "boundary_sequence",
    "build_field",
    "compose_jet",
    "curvature_identity_residual",
    "decay_fit",
    "domain_catalog",
    "einstein_residual",
    "fd_check",
    "fefferman_F",
    "flow",
    "flow_automorphy_check",
    "flow_map",
    "frame_from_potential",
    "gradient_length_sq",
    "gronwall_check",
    "jet_arith",
    "jet_of",
    "jet_space",
    "key_equation_residual",
    "length_identity_check",
    "make_grid",
    "moebius",
    "moebius_apply",
    "moebius_jet",
    "pde_residual",
    "pluriharmonic_residual",
    "potential_catalog",
    "potential_report",
    "radial_defining",
    "radial_ma_determinant",
    "rescale",
    "rho_scaled_completeness_check",
    "run_scaling",
    "s_operator",
    "segment_metric_length",
    "sigma_ratio",
    "solve_radial",
    "tangency_residual",
    "w_inverse",
    "w_metric",
    "w_potential",
]

__version__ = "0.1.0"
