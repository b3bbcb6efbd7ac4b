"""Navier boundary-value solvers on balls with point charges at the origin.

The singular part of a solution is kept analytic: for charges
``(alpha_0, ..., alpha_{m-1})`` the solution of

    (-Delta)^m u = rhs + sum_i alpha_i (-Delta)^i delta_0   in B_R,
    u = Delta u = ... = Delta^(m-1) u = 0                   on dB_R,

is written ``u = sum_i alpha_i G_(m-i) + w`` and only the regular remainder
``w`` is discretized.  ``w`` solves a chain of m Poisson problems whose
boundary data cancel the singular part at r = R.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.linalg import solveh_banded

from .calculus import RadialField, _shift_down, radial_integral
from .fundamental import (  # noqa: F401  (re-exported)
    DEFAULT_LOG_SCALE,
    biharmonic_normalization,
    fundamental_biharmonic,
    fundamental_coefficient,
    fundamental_laplace,
    polyharmonic_fundamental,
    surface_area,
)
from .grid import RadialGrid


class MaximumPrincipleViolation(RuntimeError):
    pass


@lru_cache(maxsize=64)
def _poisson_system(grid: RadialGrid):
    """Symmetric finite-volume matrix for -Delta with zero flux at r = 0.

    Node i owns the shell between the midpoints of its neighbouring
    intervals; node 0 owns the whole ball B_(r_1/2).  The last node carries
    the Dirichlet value.  Returns the banded upper form, the cell volumes and
    the coupling to the boundary node.
    """
    r = grid.nodes
    N = grid.N
    faces = 0.5 * (r[1:] + r[:-1])
    k = faces ** (N - 1) / np.diff(r)
    outer = faces ** N / N
    vol = np.diff(np.concatenate(([0.0], outer)))
    diag = k.copy()
    diag[1:] += k[:-1]
    ab = np.zeros((2, r.size - 1))
    ab[0, 1:] = -k[:-1]
    ab[1] = diag
    return ab, vol, k[-1]


def solve_poisson_values(grid: RadialGrid, rhs: np.ndarray, boundary_value: float) -> np.ndarray:
    """Nodal solution of -Delta v = rhs, v(R) = boundary_value."""
    ab, vol, k_last = _poisson_system(grid)
    b = vol * rhs[:-1]
    b[-1] += k_last * boundary_value
    out = np.empty(grid.n)
    out[:-1] = solveh_banded(ab, b, lower=False, check_finite=False)
    out[-1] = boundary_value
    return out


def _rhs_values(rhs, grid: RadialGrid) -> np.ndarray:
    if isinstance(rhs, RadialField):
        return rhs.total()
    vals = np.broadcast_to(np.asarray(rhs, dtype=float), grid.nodes.shape)
    return np.array(vals)


def poisson_solve(rhs, boundary_value: float, grid: RadialGrid, check: bool = True) -> RadialField:
    """Solve -Delta v = rhs on B_R with v(R) = boundary_value.

    ``rhs`` is a :class:`RadialField` or nodal values.  The discrete
    operator is a conservative three-point scheme, symmetric and an
    M-matrix, solved by banded Cholesky; nonnegative data therefore give
    nonnegative solutions in floating point as well.
    """
    f = _rhs_values(rhs, grid)
    if not np.all(np.isfinite(f)):
        raise ValueError("non-finite right-hand side")
    if check and radial_integral(grid, np.abs(f)).diverged:
        raise ValueError("right-hand side is not integrable at the origin")
    return RadialField(grid, solve_poisson_values(grid, f, float(boundary_value)))


def singular_coefficients(charges, N: int) -> np.ndarray:
    """G_j coefficients for charges (alpha_0, ..., alpha_{m-1}): alpha_i sits on G_(m-i)."""
    charges = np.asarray(charges, dtype=float)
    m = charges.size
    if m < 1 or m > N // 2:
        raise ValueError(f"need 1 <= m <= {N // 2} charges in N={N}, got {m}")
    sing = np.zeros(N // 2)
    for i, a in enumerate(charges):
        sing[m - i - 1] = a
    return sing


def navier_solve(m: int, rhs, charges, grid: RadialGrid, *,
                 log_scale: float = DEFAULT_LOG_SCALE, validate: bool = False,
                 check: bool = True) -> RadialField:
    """Solve the order-m Navier problem with point charges at the origin.

    The result carries the intermediate regular stages ``(-Delta)^k w`` for
    k = 1..m-1 (see :meth:`RadialField.stage`).  With ``validate=True`` and
    nonnegative data, ``(-Delta)^k u >= 0`` is asserted at every node for
    k = 0..m-1.
    """
    charges = np.atleast_1d(np.asarray(charges, dtype=float))
    if charges.size != m:
        raise ValueError(f"expected {m} charges, got {charges.size}")
    f = _rhs_values(rhs, grid)
    if not np.all(np.isfinite(f)):
        raise ValueError("non-finite right-hand side")
    if check and radial_integral(grid, np.abs(f)).diverged:
        raise ValueError("right-hand side is not integrable at the origin")
    sing = singular_coefficients(charges, grid.N)

    R = np.array([grid.R])
    stages = [None] * m
    v = f
    for k in range(m - 1, -1, -1):
        s_k = sing
        for _ in range(k):
            s_k = _shift_down(s_k)
        boundary = -sum(c * polyharmonic_fundamental(grid.N, j, R, log_scale)[0]
                        for j, c in enumerate(s_k, start=1) if c)
        v = solve_poisson_values(grid, v, boundary)
        stages[k] = v
    u = RadialField(grid, stages[0], sing, log_scale, tuple(stages[1:]))

    if validate and np.all(f >= 0) and np.all(charges >= 0):
        for k in range(m):
            vals = u.stage(k).total()
            if np.any(vals < 0):
                i = int(np.argmin(vals))
                raise MaximumPrincipleViolation(
                    f"(-Delta)^{k} u = {vals[i]!r} < 0 at r = {grid.nodes[i]!r}")
    return u


def navier_green_origin(m: int, grid: RadialGrid, log_scale: float = DEFAULT_LOG_SCALE) -> RadialField:
    """Response to a unit charge alpha_0 = 1 and zero right-hand side."""
    charges = np.zeros(m)
    charges[0] = 1.0
    return navier_solve(m, np.zeros(grid.n), charges, grid, log_scale=log_scale)
