"""P1 finite elements on a uniform Friedrichs-Keller mesh of the unit square.

The mesh has n_h vertices per side (spacing h = 1/(n_h-1)); every grid cell
is split along its bottom-left to top-right diagonal.  Homogeneous Dirichlet
conditions are imposed by eliminating boundary unknowns, so the assembled
system matrices act on the (n_h-2)^2 interior nodes only.  Interior nodes
are numbered row-major: x1 varies fastest, x2 slowest.

For interior nodes the resulting stencils are

* stiffness A: 4 on the diagonal, -1 at the four edge neighbors (dimensionless),
* consistent mass M: h^2/2 on the diagonal, h^2/12 at the six edge-connected
  neighbors (E, W, N, S, NE, SW),
* lumped mass D: one third of the nodal support area, i.e. h^2.

Since all discrete fields of interest vanish on the boundary, inner products
taken with the interior mass matrix coincide with boundary-inclusive ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

ROLES = ("state", "source", "data")


@dataclass(frozen=True)
class Mesh:
    """Uniform Friedrichs-Keller triangulation with n_h vertices per side."""

    n_h: int

    @property
    def h(self) -> float:
        """Grid spacing 1/(n_h - 1)."""
        return 1.0 / (self.n_h - 1)

    @property
    def m(self) -> int:
        """Interior nodes per side."""
        return self.n_h - 2

    @property
    def n_interior(self) -> int:
        return self.m * self.m

    def interior_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinates (x1, x2) of all interior nodes in row-major order."""
        idx = np.arange(self.n_interior)
        iy, ix = np.divmod(idx, self.m)
        return (ix + 1) * self.h, (iy + 1) * self.h

    def interior_to_full(self) -> np.ndarray:
        """Full-grid node ids of the interior nodes, row-major."""
        idx = np.arange(self.n_interior)
        iy, ix = np.divmod(idx, self.m)
        return (iy + 1) * self.n_h + (ix + 1)


def build_mesh(n_h: int) -> Mesh:
    """Mesh with n_h >= 3 vertices per side; smaller grids have no interior node."""
    if int(n_h) != n_h or n_h < 3:
        raise ValueError(f"invalid mesh: n_h={n_h} (need an integer n_h >= 3)")
    return Mesh(int(n_h))


@dataclass
class GridFunction:
    """Nodal values at the interior mesh nodes; boundary values are implicitly zero."""

    mesh: Mesh
    values: np.ndarray
    role: str = "source"

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_interior,):
            raise ValueError(
                f"grid function needs {self.mesh.n_interior} interior values, "
                f"got shape {self.values.shape}"
            )
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}, expected one of {ROLES}")

    def copy(self) -> "GridFunction":
        return GridFunction(self.mesh, self.values.copy(), self.role)


def values_of(v) -> np.ndarray:
    """Raw value array of a GridFunction or array-like."""
    if isinstance(v, GridFunction):
        return v.values
    return np.asarray(v, dtype=float)


# local element matrices on the two triangles of a cell with corners
# n00=(0,0), n10=(h,0), n01=(0,h), n11=(h,h):
#   lower triangle (n00, n10, n11), upper triangle (n00, n11, n01)
_STIFF_LOWER = 0.5 * np.array([[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]])
_STIFF_UPPER = 0.5 * np.array([[1.0, 0.0, -1.0], [0.0, 1.0, -1.0], [-1.0, -1.0, 2.0]])
_MASS_UNIT = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0  # times |T|


def _triangles(mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
    """Vertex index triples (lower, upper) of all cells in full-grid numbering."""
    n = mesh.n_h
    c = np.arange(n - 1)
    cx, cy = np.meshgrid(c, c, indexing="xy")
    n00 = (cy * n + cx).ravel()
    lower = np.stack([n00, n00 + 1, n00 + n + 1], axis=1)
    upper = np.stack([n00, n00 + n + 1, n00 + n], axis=1)
    return lower, upper


def _accumulate(tris: np.ndarray, local: np.ndarray, n: int) -> sp.coo_matrix:
    ii = np.repeat(tris, 3, axis=1).ravel()
    jj = np.tile(tris, (1, 3)).ravel()
    vv = np.tile(local.ravel(), tris.shape[0])
    return sp.coo_matrix((vv, (ii, jj)), shape=(n, n))


def assemble_full(mesh: Mesh) -> tuple[sp.csr_matrix, sp.csr_matrix, np.ndarray]:
    """Boundary-inclusive stiffness, mass and lumped-mass over all n_h^2 nodes.

    Used for verification (partition of unity, row-sum lumping); production
    systems use the interior-restricted matrices from :func:`assemble`.
    """
    n2 = mesh.n_h * mesh.n_h
    area = 0.5 * mesh.h * mesh.h
    lower, upper = _triangles(mesh)
    A = (_accumulate(lower, _STIFF_LOWER, n2) + _accumulate(upper, _STIFF_UPPER, n2)).tocsr()
    mass_local = area * _MASS_UNIT
    M = (_accumulate(lower, mass_local, n2) + _accumulate(upper, mass_local, n2)).tocsr()
    # nodal support areas, divided by 3 once at the end (one rounding, not six)
    D = np.zeros(n2)
    np.add.at(D, lower.ravel(), area)
    np.add.at(D, upper.ravel(), area)
    D /= 3.0
    A.sort_indices()
    M.sort_indices()
    return A, M, D


def assemble(mesh: Mesh) -> tuple[sp.csr_matrix, sp.csr_matrix, np.ndarray]:
    """Interior (A, M, D) with homogeneous Dirichlet conditions by elimination.

    A is the P1 stiffness matrix, M the consistent mass matrix (both CSR,
    symmetric with both triangles stored) and D the lumped mass diagonal.
    """
    A_full, M_full, D_full = assemble_full(mesh)
    idx = mesh.interior_to_full()
    A = A_full[idx][:, idx].tocsr()
    M = M_full[idx][:, idx].tocsr()
    A.sort_indices()
    M.sort_indices()
    return A, M, D_full[idx]


def interpolate(mesh: Mesh, f: Callable, role: str = "source") -> GridFunction:
    """Nodal interpolant of the scalar field f(x1, x2) at the interior nodes."""
    x1, x2 = mesh.interior_coords()
    try:
        vals = np.asarray(f(x1, x2), dtype=float)
        if vals.shape != x1.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([float(f(a, b)) for a, b in zip(x1, x2)])
    bad = ~np.isfinite(vals)
    if bad.any():
        k = int(np.argmax(bad))
        raise ValueError(
            f"non-finite value {vals[k]} at interior node {k} = ({x1[k]:.6g}, {x2[k]:.6g})"
        )
    return GridFunction(mesh, vals, role)


def m_inner(M: sp.spmatrix, v, w) -> float:
    """Discrete L2 inner product v^T M w."""
    a, b = values_of(v), values_of(w)
    if a.shape != b.shape or M.shape[1] != a.size:
        raise ValueError(f"dimension mismatch: M {M.shape}, v {a.shape}, w {b.shape}")
    return float(a @ (M @ b))


def m_norm(M: sp.spmatrix, v) -> float:
    """Discrete L2 norm sqrt(v^T M v)."""
    return math.sqrt(max(m_inner(M, v, v), 0.0))


def write_grid_function(path, gf: GridFunction) -> None:
    """Write a grid function as CSV: header `n_h=<int>,role=<role>`, then one value per line."""
    with open(path, "w") as fh:
        fh.write(f"n_h={gf.mesh.n_h},role={gf.role}\n")
        for v in gf.values:
            fh.write(f"{v:.17g}\n")


def read_grid_function(path) -> GridFunction:
    """Read a grid function written by :func:`write_grid_function`."""
    with open(path) as fh:
        header = fh.readline().strip()
        fields = dict(item.split("=", 1) for item in header.split(","))
        if "n_h" not in fields or "role" not in fields:
            raise ValueError(f"malformed grid function header: {header!r}")
        mesh = build_mesh(int(fields["n_h"]))
        vals = np.array([float(line) for line in fh if line.strip()])
    return GridFunction(mesh, vals, fields["role"])
