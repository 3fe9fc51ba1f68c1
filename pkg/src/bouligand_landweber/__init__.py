"""Bouligand-Landweber iterative regularization for a nonsmooth inverse source problem.

The package reconstructs the source u in

    -Laplace(y) + max(y, 0) = u  on (0,1)^2,    y = 0 on the boundary,

from noisy observations of the state y.  The forward map is only
directionally differentiable where the state vanishes, so the Landweber
update employs a Bouligand subderivative: the solution operator of the
linear PDE with coefficient ind_{y > 0}.  Stopping follows the Morozov
discrepancy principle.

Layout:
  mesh_fem      P1 finite elements on the uniform Friedrichs-Keller mesh
  sparse_linalg preconditioned CG for the SPD systems
  forward       semi-smooth Newton forward solver, PC1 nonlinearities
  bouligand     assembly/application of the subderivative systems
  landweber     outer iteration, discrepancy stopping, run records
  verification  tangential-cone surveys, oracle and adjoint checks
  experiments   exact benchmark data, noise, experiment campaigns
  cli           command-line front end
"""

from .mesh_fem import (
    GridFunction,
    Mesh,
    assemble,
    assemble_full,
    build_mesh,
    interpolate,
    m_inner,
    m_norm,
    read_grid_function,
    write_grid_function,
)
from .sparse_linalg import (
    ConvergenceError,
    SolveOptions,
    SpdSystem,
    apply,
    poisson_preconditioner,
    solve_spd,
)
from .forward import (
    ForwardProblem,
    ForwardSolution,
    ForwardSolveError,
    PC1Nonlinearity,
    brute_force_forward,
    forward_residual,
    positive_part,
    solve_forward,
)
from .bouligand import LinearizedOperator, apply_subderivative, build_linearized
from .landweber import (
    LandweberConfig,
    ParameterCheck,
    RunRecord,
    check_parameters,
    empirical_rate,
    relative_error,
    run,
)
from .verification import (
    AdjointReport,
    DegeneratePairError,
    OracleReport,
    TCCEstimate,
    TCCSurvey,
    adjoint_check,
    mismatch_measure,
    oracle_sweep,
    tcc_ratio,
    tcc_survey,
)
from .experiments import (
    NoiseSpec,
    add_noise,
    consistency_residuals,
    exact_fields,
    exact_source,
    exact_state,
    read_table_csv,
    run_noise_free,
    run_table,
    source_guess,
    write_table_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AdjointReport",
    "ConvergenceError",
    "DegeneratePairError",
    "ForwardProblem",
    "ForwardSolution",
    "ForwardSolveError",
    "GridFunction",
    "LandweberConfig",
    "LinearizedOperator",
    "Mesh",
    "NoiseSpec",
    "OracleReport",
    "PC1Nonlinearity",
    "ParameterCheck",
    "RunRecord",
    "SolveOptions",
    "SpdSystem",
    "TCCEstimate",
    "TCCSurvey",
    "add_noise",
    "adjoint_check",
    "apply",
    "apply_subderivative",
    "assemble",
    "assemble_full",
    "brute_force_forward",
    "build_linearized",
    "build_mesh",
    "check_parameters",
    "consistency_residuals",
    "empirical_rate",
    "exact_fields",
    "exact_source",
    "exact_state",
    "forward_residual",
    "interpolate",
    "m_inner",
    "m_norm",
    "mismatch_measure",
    "oracle_sweep",
    "poisson_preconditioner",
    "positive_part",
    "read_grid_function",
    "read_table_csv",
    "relative_error",
    "run",
    "run_noise_free",
    "run_table",
    "solve_forward",
    "solve_spd",
    "source_guess",
    "tcc_ratio",
    "tcc_survey",
    "write_grid_function",
    "write_table_csv",
]
