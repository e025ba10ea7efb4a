"""Second-order 5-point Dirichlet solver and discrete normal derivatives.

The solver treats the h²-scaled system (stencil weights 4 / -1), which is
symmetric positive definite on the interior unknowns.  Two backends sit
behind one contract:

* ``method="cg"`` (default): matrix-free conjugate gradients, see
  :mod:`harmrec.kernels`.  Residual tolerance is relative to the boundary
  load (clamped at 1 from below).
* ``method="direct"``: sparse LU of the interior operator, factorized once
  per grid shape and cached, which makes many solves on one grid cheap and
  reproduces the stencil solution to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SolverError, ValidationError
from .grid import BoundaryPartition, Grid2D
from .kernels import cg_dirichlet, stencil_residual


@dataclass(frozen=True)
class ScalarField:
    """Per-node real values on a grid, stored as an immutable (ny, nx) array."""

    grid: Grid2D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValidationError(
                f"field shape {v.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.isfinite(v).all():
            raise ValidationError("field contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def boundary_array(grid: Grid2D, partition: BoundaryPartition,
                   boundary_values: np.ndarray) -> np.ndarray:
    """(ny, nx) array with the per-boundary-node data written on the rim."""
    bv = np.asarray(boundary_values, dtype=float)
    if bv.shape != (partition.n_boundary,):
        raise ValidationError(
            f"expected {partition.n_boundary} boundary values, got {bv.shape}"
        )
    u = np.zeros(grid.shape)
    u[partition.nodes[:, 1], partition.nodes[:, 0]] = bv
    return u


@lru_cache(maxsize=8)
def _interior_lu(nx: int, ny: int):
    """Cached sparse LU of the interior 5-point operator for an (nx, ny) grid."""
    mx, my = nx - 2, ny - 2
    ax = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(mx, mx))
    ay = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(my, my))
    lap = sp.kronsum(ax, ay, format="csc")  # rows ordered j-major, matching ravel
    return spla.splu(lap)


def _solve_direct(u: np.ndarray) -> None:
    ny, nx = u.shape
    rhs = np.zeros((ny - 2, nx - 2))
    rhs[0, :] += u[0, 1:-1]
    rhs[-1, :] += u[-1, 1:-1]
    rhs[:, 0] += u[1:-1, 0]
    rhs[:, -1] += u[1:-1, -1]
    lu = _interior_lu(nx, ny)
    u[1:-1, 1:-1] = lu.solve(rhs.ravel()).reshape(ny - 2, nx - 2)


def solve_dirichlet(grid: Grid2D, partition: BoundaryPartition,
                    boundary_values: np.ndarray, tol: float = 1e-10,
                    method: str = "cg", backend: str | None = None) -> ScalarField:
    """Solve the discrete Laplace equation with the given Dirichlet data.

    Boundary nodes of the result carry the data exactly; interior nodes
    satisfy the 5-point stencil with max-norm residual at most
    ``tol * max(1, |load|_inf)``.  Raises :class:`SolverError` (with the
    achieved residual attached) if the iteration budget is exhausted.
    """
    if tol <= 0:
        raise ValidationError(f"solver tolerance must be positive, got {tol}")
    if grid.nx < 3 or grid.ny < 3:
        raise ValidationError("grid must be at least 3x3 for an interior solve")
    u = boundary_array(grid, partition, boundary_values)
    if method == "direct":
        _solve_direct(u)
    elif method == "cg":
        # Same load norm the kernel uses for its relative stopping rule.
        load_inf = float(np.abs(stencil_residual(u)).max())
        max_iter = 40 * max(grid.nx, grid.ny) + 200
        iters, res = cg_dirichlet(u, tol, max_iter, backend=backend)
        stop = tol * max(1.0, load_inf)
        if res > stop:
            raise SolverError(
                f"CG did not converge in {iters} iterations "
                f"(residual {res:.3e} > {stop:.3e})",
                achieved_residual=res,
            )
    else:
        raise ValidationError(f"unknown solve method {method!r}")
    return ScalarField(grid=grid, values=u)


def laplacian_residual(fld: ScalarField) -> float:
    """Max interior residual of the h²-scaled 5-point stencil, |4u - Σ neighbors|."""
    if fld.grid.nx < 3 or fld.grid.ny < 3:
        raise ValidationError("need nx, ny >= 3 to evaluate the interior stencil")
    return float(np.abs(stencil_residual(fld.values)).max())


def normal_derivative(fld: ScalarField, partition: BoundaryPartition,
                      order: int = 2) -> np.ndarray:
    """Outward normal derivative at every Γ node, one-sided into the domain.

    order 1: two-point difference, O(h); order 2: three-point difference,
    O(h²).  At a corner the normal follows the side that put the node into Γ
    (vertical sides win ties, see BoundaryPartition.gamma_normals).
    """
    if order not in (1, 2):
        raise ValidationError(f"difference order must be 1 or 2, got {order}")
    grid = fld.grid
    if partition.grid != grid:
        raise ValidationError("field and partition live on different grids")
    need = order + 1
    if grid.nx < need or grid.ny < need:
        raise ValidationError(
            f"grid too small for an order-{order} one-sided stencil"
        )
    v = fld.values
    h = grid.h
    sides, _ = partition.gamma_normals()
    out = np.empty(partition.m)
    for k, ((i, j), side) in enumerate(zip(partition.gamma_nodes, sides)):
        i, j = int(i), int(j)
        if side == "bottom":
            line = v[j:j + 3, i] if order == 2 else v[j:j + 2, i]
        elif side == "top":
            line = v[j::-1, i][:3] if order == 2 else v[j::-1, i][:2]
        elif side == "left":
            line = v[j, i:i + 3] if order == 2 else v[j, i:i + 2]
        else:  # right
            line = v[j, i::-1][:3] if order == 2 else v[j, i::-1][:2]
        if order == 1:
            out[k] = -(line[1] - line[0]) / h
        else:
            out[k] = (3.0 * line[0] - 4.0 * line[1] + line[2]) / (2.0 * h)
    return out
