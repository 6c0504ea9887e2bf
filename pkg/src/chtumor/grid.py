"""Uniform cell-centered grids with no-flux (homogeneous Neumann) boundaries.

Fields live at cell centers of a rectangular box in 1, 2 or 3 dimensions.
The discrete Laplacian uses the standard 2*dim+1 point stencil with ghost
values mirrored across each boundary face, which realizes zero normal flux
exactly and makes the operator self-adjoint, negative semidefinite, and
mass-conserving (zero column sums) by construction.

Two symmetric positive definite solves are provided, for shifted-Laplacian
(Helmholtz-type) and for the linearly implicit Cahn-Hilliard operator
I + dt*s*(-Lap) + dt*Lap^2.  Both offer a matrix-free conjugate-gradient
path and a fast path that diagonalizes the Neumann stencil by the type-II
cosine transform; the fast path is the default and both are held to the
same residual contract.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import Callable

import numpy as np
from scipy import fft as sp_fft

from .errors import ConfigurationError, SolverError

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell-centered grid on a box of the given side lengths.

    ``cells[i]`` cells of spacing ``lengths[i] / cells[i]`` along axis i.
    """

    cells: tuple[int, ...]
    lengths: tuple[float, ...]

    def __post_init__(self):
        cells = tuple(int(n) for n in self.cells)
        lengths = tuple(float(x) for x in self.lengths)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "lengths", lengths)
        if not 1 <= len(cells) <= 3:
            raise ConfigurationError(f"grid dimension must be 1, 2 or 3, got {len(cells)}")
        if len(lengths) != len(cells):
            raise ConfigurationError(f"got {len(cells)} cell counts but {len(lengths)} lengths")
        if any(n <= 0 for n in cells):
            raise ConfigurationError(f"cell counts must be positive, got {cells}")
        if any(not math.isfinite(x) or x <= 0.0 for x in lengths):
            raise ConfigurationError(f"box lengths must be positive and finite, got {lengths}")

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.lengths, self.cells))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def cell_volume(self) -> float:
        return self.volume / self.n_cells

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.cells))

    def cell_centers(self, axis: int) -> np.ndarray:
        """Coordinates of cell centers along one axis."""
        h = self.spacing[axis]
        return (np.arange(self.cells[axis]) + 0.5) * h


@dataclass(frozen=True, eq=False)
class Field:
    """Immutable scalar field: one float64 value per cell, row-major layout."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True).reshape(self.grid.cells)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @staticmethod
    def full(grid: GridSpec, value: float) -> "Field":
        return Field(grid, np.full(grid.cells, float(value)))

    def require_finite(self) -> "Field":
        if not np.all(np.isfinite(self.values)):
            raise FloatingPointError("field contains non-finite values")
        return self

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def _check_same_grid(f: Field, g: Field) -> None:
    if f.grid != g.grid:
        raise ConfigurationError("fields live on different grids")


# ---------------------------------------------------------------------------
# stencil kernels (array level, reused by the time stepper)
# ---------------------------------------------------------------------------

def laplacian_array(values: np.ndarray, spacing: tuple[float, ...]) -> np.ndarray:
    """Apply the mirrored-ghost Neumann Laplacian to a shaped array."""
    out = np.zeros_like(values)
    for axis, h in enumerate(spacing):
        pad = [(0, 0)] * values.ndim
        pad[axis] = (1, 1)
        p = np.pad(values, pad, mode="edge")
        lo = [slice(None)] * values.ndim
        hi = [slice(None)] * values.ndim
        lo[axis] = slice(0, -2)
        hi[axis] = slice(2, None)
        out += (p[tuple(lo)] - 2.0 * values + p[tuple(hi)]) / (h * h)
    return out


def laplacian_neumann(f: Field) -> Field:
    """Discrete Laplacian with zero normal flux on every boundary face.

    Constants are in the kernel and the cellwise sum of the result vanishes
    to machine precision (mirrored ghosts give zero column sums).
    """
    return Field(f.grid, laplacian_array(f.values, f.grid.spacing))


def mean(f: Field) -> float:
    """Volume-weighted average of the field over the box."""
    return float(np.sum(f.values) * f.grid.cell_volume / f.grid.volume)


def inner(f: Field, g: Field) -> float:
    """Discrete L2 scalar product: sum of f*g times the cell volume."""
    _check_same_grid(f, g)
    return float(np.vdot(f.values, g.values) * f.grid.cell_volume)


def norm_l2(f: Field) -> float:
    return math.sqrt(max(inner(f, f), 0.0))


def grad_sq_norm(f: Field) -> float:
    """Squared discrete H1 seminorm: face-difference quotients over interior faces.

    Equals -inner(f, laplacian_neumann(f)) exactly (summation by parts with
    no-flux boundaries), which is what makes the energy diagnostics and the
    operator identities consistent.
    """
    total = 0.0
    cv = f.grid.cell_volume
    for axis, h in enumerate(f.grid.spacing):
        d = np.diff(f.values, axis=axis) / h
        total += float(np.vdot(d, d)) * cv
    return total


# ---------------------------------------------------------------------------
# cosine-transform diagonalization of the Neumann stencil
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _neumann_symbol(cells: tuple[int, ...], spacing: tuple[float, ...]) -> np.ndarray:
    """Eigenvalues of the Neumann Laplacian on the DCT-II basis, shaped like the grid.

    Per axis the stencil has eigenvectors cos(pi*k*(j+1/2)/n) with
    eigenvalues -(2/h^2)*(1 - cos(pi*k/n)); multi-dimensional eigenvalues
    are the axis sums.
    """
    per_axis = []
    for n, h in zip(cells, spacing):
        k = np.arange(n, dtype=np.float64)
        per_axis.append(-(2.0 / (h * h)) * (1.0 - np.cos(np.pi * k / n)))
    return reduce(np.add.outer, per_axis) if len(per_axis) > 1 else per_axis[0]


def _dct_solve(grid: GridSpec, rhs: np.ndarray, factor_of_eigenvalue) -> np.ndarray:
    lam = _neumann_symbol(grid.cells, grid.spacing)
    coef = sp_fft.dctn(rhs, type=2, norm="ortho")
    coef /= factor_of_eigenvalue(lam)
    return sp_fft.idctn(coef, type=2, norm="ortho")


# ---------------------------------------------------------------------------
# matrix-free conjugate gradient
# ---------------------------------------------------------------------------

def conjugate_gradient(
    apply_op: Callable[[np.ndarray], np.ndarray],
    rhs: np.ndarray,
    tol: float,
    max_iter: int,
    precond: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[np.ndarray, float, int]:
    """Solve A x = rhs for SPD A, to a relative 2-norm residual of tol.

    Returns (x, relative_residual, iterations).  The returned residual is
    recomputed from scratch, not taken from the recurrence, so the solver
    contract is verified rather than assumed.
    """
    rhs_norm = float(np.linalg.norm(rhs.ravel()))
    x = np.zeros_like(rhs)
    if rhs_norm == 0.0:
        return x, 0.0, 0
    target = tol * rhs_norm
    r = rhs.copy()
    z = precond(r) if precond is not None else r
    p = z.copy()
    rz = float(np.vdot(r, z))
    for it in range(1, max_iter + 1):
        ap = apply_op(p)
        pap = float(np.vdot(p, ap))
        if pap <= 0.0:
            raise SolverError("operator lost positive definiteness in CG",
                              float(np.linalg.norm(r.ravel())) / rhs_norm, it)
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        if float(np.linalg.norm(r.ravel())) <= target:
            true_r = rhs - apply_op(x)
            true_norm = float(np.linalg.norm(true_r.ravel()))
            if true_norm <= target:
                return x, true_norm / rhs_norm, it
            r = true_r  # recurrence drifted; restart from the true residual
        z = precond(r) if precond is not None else r
        rz_new = float(np.vdot(r, z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    final = float(np.linalg.norm((rhs - apply_op(x)).ravel())) / rhs_norm
    raise SolverError("conjugate gradient did not converge", final, max_iter)


def _iteration_cap(grid: GridSpec) -> int:
    return 10 * grid.n_cells


# ---------------------------------------------------------------------------
# public solves
# ---------------------------------------------------------------------------

def solve_helmholtz(a: float, b: float, rhs: Field, tol: float = DEFAULT_TOL,
                    method: str = "dct") -> Field:
    """Solve (a*I - b*Lap) u = rhs with a > 0, b >= 0.

    -Lap is positive semidefinite, so a > 0 makes the operator SPD.  The
    default method diagonalizes by cosine transform; method="cg" runs the
    unpreconditioned matrix-free conjugate gradient.  Either way the result
    is checked against the residual contract
    ||(a*I - b*Lap) u - rhs||_2 <= tol * ||rhs||_2.
    """
    a = float(a)
    b = float(b)
    if a <= 0.0:
        raise ConfigurationError(f"helmholtz shift a must be positive, got {a}")
    if b < 0.0:
        raise ConfigurationError(f"helmholtz coefficient b must be nonnegative, got {b}")
    grid = rhs.grid
    spacing = grid.spacing

    def apply_op(u: np.ndarray) -> np.ndarray:
        return a * u - b * laplacian_array(u, spacing)

    if method == "dct":
        u = _dct_solve(grid, rhs.values, lambda lam: a - b * lam)
        _verify_residual(apply_op, u, rhs.values, tol, "helmholtz solve")
    elif method == "cg":
        u, _, _ = conjugate_gradient(apply_op, rhs.values, tol, _iteration_cap(grid))
    else:
        raise ConfigurationError(f"unknown solve method {method!r}")
    return Field(grid, u)


def solve_ch_linear(dt: float, s: float, rhs: Field, tol: float = DEFAULT_TOL,
                    method: str = "dct") -> Field:
    """Solve (I + dt*s*(-Lap) + dt*Lap^2) u = rhs with dt > 0, s >= 0.

    The fourth-order term is the Laplacian applied twice, so boundary
    handling matches the second-order operator and the matrix stays
    symmetric positive definite (constants are fixed points).
    """
    dt = float(dt)
    s = float(s)
    if dt <= 0.0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    if s < 0.0:
        raise ConfigurationError(f"stabilization must be nonnegative, got {s}")
    grid = rhs.grid
    spacing = grid.spacing

    def apply_op(u: np.ndarray) -> np.ndarray:
        lap = laplacian_array(u, spacing)
        return u - dt * s * lap + dt * laplacian_array(lap, spacing)

    if method == "dct":
        u = _dct_solve(grid, rhs.values, lambda lam: 1.0 - dt * s * lam + dt * lam * lam)
        _verify_residual(apply_op, u, rhs.values, tol, "implicit Cahn-Hilliard solve")
    elif method == "cg":
        u, _, _ = conjugate_gradient(apply_op, rhs.values, tol, _iteration_cap(grid))
    else:
        raise ConfigurationError(f"unknown solve method {method!r}")
    return Field(grid, u)


def solve_shifted_laplacian(diag: np.ndarray, b: float, rhs: Field,
                            tol: float = DEFAULT_TOL) -> Field:
    """Solve (diag(d) - b*Lap) u = rhs for a cellwise positive shift d.

    Used by the nutrient step, where the consumption term contributes a
    variable nonnegative diagonal.  Conjugate gradient preconditioned by the
    constant-shift operator (mean of d), inverted by cosine transform.
    """
    grid = rhs.grid
    spacing = grid.spacing
    diag = np.asarray(diag, dtype=np.float64)
    if diag.shape != rhs.values.shape:
        raise ConfigurationError("diagonal shift has wrong shape")
    dmin = float(diag.min())
    if dmin <= 0.0:
        raise ConfigurationError(f"diagonal shift must be positive, min is {dmin}")
    a0 = float(diag.mean())

    def apply_op(u: np.ndarray) -> np.ndarray:
        return diag * u - b * laplacian_array(u, spacing)

    def precond(r: np.ndarray) -> np.ndarray:
        return _dct_solve(grid, r, lambda lam: a0 - b * lam)

    u, _, _ = conjugate_gradient(apply_op, rhs.values, tol, _iteration_cap(grid), precond)
    return Field(grid, u)


def _verify_residual(apply_op, u: np.ndarray, rhs: np.ndarray, tol: float, what: str) -> None:
    rhs_norm = float(np.linalg.norm(rhs.ravel()))
    if rhs_norm == 0.0:
        return
    res = float(np.linalg.norm((apply_op(u) - rhs).ravel())) / rhs_norm
    if res > tol:
        raise SolverError(f"{what} failed the residual contract", res, 1)
