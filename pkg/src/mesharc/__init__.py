"""Meshfree multiscale Galerkin solver with compactly supported kernels."""

from .analysis import (
    RateReport,
    SubspaceAngle,
    nested_rate_bound,
    rate_estimates,
    subspace_angles,
)
from .assembly import (
    PROBLEMS,
    Assembler,
    ProblemSpec,
    StiffnessSystem,
    assemble_cross,
    assemble_load,
    assemble_stiffness,
)
from .geometry import (
    Level,
    LevelSchedule,
    PointSet,
    RectDomain,
    fill_distance,
    neighbor_pairs,
    separation_radius,
    uniform_grid,
)
from .kernels import ScaledKernel, WendlandKernel, kernel_gradient, kernel_value, wendland
from .multiscale import (
    MultiscaleSolution,
    NestedConfig,
    RunResult,
    condition_number,
    evaluate,
    run_multiscale,
    run_nested,
    solve_level,
)
from .nitsche import NitscheParams, beta_schedule, estimate_beta
from .quadrature import (
    LobattoGrid,
    QuadratureSpec,
    error_norms,
    integrate_boundary,
    integrate_box,
    integrate_support_pair,
)

__version__ = "0.1.0"
