"""Application of the Bouligand subderivative of the forward map.

At a state y the subderivative maps w to the solution eta of the linear
system (A + K_y) eta = M w, where K_y = D diag(a) and a is the nodewise
subderivative coefficient of the nonlinearity at y.  For the default max
nonlinearity a is the strict indicator of y_i > 0, so K_y has entries
h^2 at strictly positive interior nodes and 0 elsewhere.

The operator (A + K_y)^{-1} M is self-adjoint in the M-weighted inner
product, so the Landweber step uses it directly in place of a separately
implemented adjoint; the tests verify this rather than assume it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .forward import ForwardProblem
from .mesh_fem import GridFunction, values_of
from .sparse_linalg import SpdSystem, solve_spd


@dataclass(frozen=True)
class LinearizedOperator:
    """The matrix A + K_y frozen at a base state y."""

    problem: ForwardProblem
    base_state: np.ndarray
    coeff: np.ndarray
    system: SpdSystem


def build_linearized(problem: ForwardProblem, y) -> LinearizedOperator:
    """Assemble A + K_y with the subderivative coefficient of the nonlinearity at y."""
    yv = values_of(y)
    if yv.size != problem.mesh.n_interior:
        raise ValueError(
            f"state has {yv.size} values, mesh has {problem.mesh.n_interior} interior nodes"
        )
    coeff = problem.nonlinearity.bouligand_coeff(yv)
    return LinearizedOperator(
        problem=problem,
        base_state=yv,
        coeff=coeff,
        system=SpdSystem(problem.A, problem.D * coeff),
    )


def apply_subderivative(op: LinearizedOperator, M: sp.spmatrix, w) -> GridFunction:
    """Solve (A + K_y) eta = M w and return eta."""
    wv = values_of(w)
    if M.shape[1] != wv.size or op.system.dim != wv.size:
        raise ValueError(f"dimension mismatch: operator {op.system.dim}, w {wv.size}")
    eta = solve_spd(op.system, M @ wv, op.problem.options, op.problem.precond)
    return GridFunction(op.problem.mesh, eta, "source")
