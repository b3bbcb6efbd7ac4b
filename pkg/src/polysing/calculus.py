"""Radial fields, discrete powers of the Laplacian and ball quadrature.

A :class:`RadialField` is a regular part sampled on a :class:`RadialGrid`
plus an analytic singular part ``sum_j c_j G_j`` built from the
fundamental solutions of :mod:`polysing.fundamental`.  Operators act on the
regular samples by finite differences and on the singular part in closed
form, so point charges at the origin are never differenced.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.integrate import simpson

from .fundamental import (
    DEFAULT_LOG_SCALE,
    polyharmonic_fundamental,
    polyharmonic_fundamental_derivative,
    surface_area,
)
from .grid import RadialGrid

# relative slack when comparing consecutive shell densities
SHELL_TOLERANCE = 1e-3
# log of the largest integrand magnitude accepted before declaring overflow
LOG_OVERFLOW_CAP = 700.0


class NonFiniteIntegrandError(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class RadialField:
    """``u(r) = values(r) + sum_j singular[j-1] * G_j(r)``.

    ``singular`` has one coefficient per G_j, j = 1..N/2.  ``stages`` may hold
    the regular parts of ``(-Delta)^k u`` for k = 1, 2, ... exactly as a
    solver produced them; :meth:`stage` prefers them to re-differencing.
    """

    grid: RadialGrid
    values: np.ndarray
    singular: np.ndarray = None
    log_scale: float = DEFAULT_LOG_SCALE
    stages: tuple = field(default=(), repr=False)
    origin: float | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.nodes.shape:
            raise ValueError("values must have one entry per grid node")
        object.__setattr__(self, "values", values)
        k = self.grid.N // 2
        sing = np.zeros(k) if self.singular is None else np.asarray(self.singular, dtype=float)
        if sing.shape != (k,):
            raise ValueError(f"singular part needs {k} coefficients in N={self.grid.N}")
        object.__setattr__(self, "singular", sing)
        object.__setattr__(self, "stages", tuple(np.asarray(s, dtype=float) for s in self.stages))

    @classmethod
    def from_values(cls, grid: RadialGrid, values, **kw) -> "RadialField":
        return cls(grid, np.asarray(values, dtype=float), **kw)

    @classmethod
    def from_function(cls, grid: RadialGrid, func, **kw) -> "RadialField":
        return cls(grid, np.asarray(func(grid.nodes), dtype=float) * np.ones(grid.n), **kw)

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "RadialField":
        return cls(grid, np.zeros(grid.n))

    @property
    def N(self) -> int:
        return self.grid.N

    @property
    def is_regular(self) -> bool:
        return not np.any(self.singular)

    @property
    def origin_value(self) -> float | None:
        """Value at r = 0, or None if the field is singular there.

        Without a stored value, the regular part is extrapolated as
        ``u0 + c r^2`` through the two innermost nodes.
        """
        if not self.is_regular:
            return None
        if self.origin is not None:
            return self.origin
        r0, r1 = self.grid.nodes[:2]
        u0, u1 = self.values[:2]
        return float(u0 - r0 ** 2 * (u1 - u0) / (r1 ** 2 - r0 ** 2))

    def singular_values(self, r=None) -> np.ndarray:
        r = self.grid.nodes if r is None else np.asarray(r, dtype=float)
        out = np.zeros(np.shape(r))
        for j, c in enumerate(self.singular, start=1):
            if c:
                out = out + c * polyharmonic_fundamental(self.N, j, r, self.log_scale)
        return out

    def total(self) -> np.ndarray:
        """Nodal values of the whole field."""
        return self.values + self.singular_values()

    def evaluate(self, r) -> np.ndarray:
        """Field at arbitrary radii in [eps, R]; the regular part is interpolated linearly."""
        r = np.asarray(r, dtype=float)
        return np.interp(r, self.grid.nodes, self.values) + self.singular_values(r)

    def restrict(self, grid: RadialGrid) -> "RadialField":
        """Same field on ``grid``; exact when ``grid`` is a prefix of this grid."""
        k = grid.n
        if k <= self.grid.n and np.array_equal(grid.nodes, self.grid.nodes[:k]):
            return RadialField(grid, self.values[:k].copy(), self.singular, self.log_scale,
                               tuple(s[:k].copy() for s in self.stages), self.origin)
        values = np.interp(grid.nodes, self.grid.nodes, self.values)
        return RadialField(grid, values, self.singular, self.log_scale)

    def stage(self, k: int) -> "RadialField":
        """``(-Delta)^k`` of this field, from stored solver stages when available."""
        out = self
        for _ in range(k):
            if out.stages:
                out = RadialField(out.grid, out.stages[0], _shift_down(out.singular),
                                  out.log_scale, out.stages[1:])
            else:
                out = neg_laplacian(out)
        return out

    def _combine(self, other, a: float, b: float) -> "RadialField":
        if other.grid is not self.grid and not np.array_equal(other.grid.nodes, self.grid.nodes):
            raise ValueError("fields live on different grids")
        if self.log_scale != other.log_scale:
            raise ValueError("fields use different log scales")
        stages = ()
        if len(self.stages) == len(other.stages):
            stages = tuple(a * s + b * t for s, t in zip(self.stages, other.stages))
        return RadialField(self.grid, a * self.values + b * other.values,
                           a * self.singular + b * other.singular, self.log_scale, stages)

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0)

    def __mul__(self, c):
        c = float(c)
        return RadialField(self.grid, c * self.values, c * self.singular, self.log_scale,
                           tuple(c * s for s in self.stages),
                           None if self.origin is None else c * self.origin)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


def _shift_down(sing: np.ndarray) -> np.ndarray:
    """Coefficients of -Delta(sum c_j G_j) = sum c_j G_(j-1) away from the origin."""
    out = np.zeros_like(sing)
    out[:-1] = sing[1:]
    return out


def _fd_weights(x: np.ndarray, x0: float, order: int) -> np.ndarray:
    """Weights w with sum w_i u(x_i) ~ u^(order)(x0), exact for polynomials of degree < len(x)."""
    h = float(np.max(np.abs(x - x0)))
    V = np.vander((x - x0) / h, increasing=True).T
    rhs = np.zeros(len(x))
    rhs[order] = float(np.prod(np.arange(1, order + 1)))
    return np.linalg.solve(V, rhs) / h ** order


def _expm1_quad(x: np.ndarray) -> np.ndarray:
    """(e^x - 1 - x) / x^2 without cancellation."""
    x = np.asarray(x)
    out = np.empty_like(x)
    small = np.abs(x) <= 0.1
    xs = x[small]
    term = np.full_like(xs, 0.5)
    acc = term.copy()
    for n in range(3, 12):
        term = term * xs / n
        acc += term
    out[small] = acc
    xl = x[~small]
    out[~small] = (np.expm1(xl) - xl) / xl ** 2
    return out


def laplacian_values(r: np.ndarray, u: np.ndarray, N: int) -> np.ndarray:
    """u'' + (N-1)/r u' by three-point differences.

    Interior weights are fixed by exactness on 1, r^2 and r^(2-N): second
    order, exact on quadratics in r, and the radial harmonic function
    r^(2-N) is annihilated exactly.  The first and last node use one-sided
    quadratic stencils in r.
    """
    if r.size < 3:
        raise ValueError("the radial Laplacian needs at least 3 nodes")
    # extended-precision inputs stay extended
    out = np.empty(u.shape, dtype=np.result_type(r, u, float))
    t = np.log(r)
    tp = t[2:] - t[1:-1]
    tm = t[:-2] - t[1:-1]
    p = 2.0 - N
    if p != 0:
        e = _expm1_quad
        Bm = np.expm1(p * tm)
        Bp = np.expm1(p * tp)
        # determinant of the exactness conditions with its leading terms
        # cancelled analytically
        Q = p * tp * tm * (2 * p * tm * e(p * tm) + 4 * tp * e(2 * tp)
                           + 4 * p * tp * tm * e(2 * tp) * e(p * tm)
                           - 2 * p * tp * e(p * tp) - 4 * tm * e(2 * tm)
                           - 4 * p * tm * tp * e(2 * tm) * e(p * tp))
        c = 2 * N * Bm / Q
        a = -2 * N * Bp / Q
    else:
        c = 2.0 / (tp * (tp - tm))
        a = -2.0 / (tm * (tp - tm))
    out[1:-1] = (a * (u[:-2] - u[1:-1]) + c * (u[2:] - u[1:-1])) / r[1:-1] ** 2
    for i, pts in ((0, slice(0, 3)), (-1, slice(-3, None))):
        x = np.asarray(r[pts], dtype=float)
        w1 = _fd_weights(x, x[i], 1)
        w2 = _fd_weights(x, x[i], 2)
        du = u[pts] - u[pts][i]
        out[i] = w2 @ du + (N - 1) / r[i] * (w1 @ du)
    return out


def derivative_values(r: np.ndarray, u: np.ndarray) -> np.ndarray:
    """u' by the same three-point stencils as :func:`laplacian_values`."""
    out = np.empty_like(u, dtype=float)
    hm = r[1:-1] - r[:-2]
    hp = r[2:] - r[1:-1]
    out[1:-1] = (hm ** 2 * u[2:] + (hp ** 2 - hm ** 2) * u[1:-1] - hp ** 2 * u[:-2]) / (
        hm * hp * (hm + hp))
    for i, pts in ((0, slice(0, 3)), (-1, slice(-3, None))):
        out[i] = _fd_weights(r[pts], r[i], 1) @ (u[pts] - u[i])
    return out


def radial_laplacian(f: RadialField) -> RadialField:
    """Delta f: finite differences on the regular part, exact on the singular part."""
    if f.grid.n < 3:
        raise ValueError("the radial Laplacian needs at least 3 nodes")
    values = laplacian_values(f.grid.nodes, f.values, f.N)
    return RadialField(f.grid, values, -_shift_down(f.singular), f.log_scale)


def neg_laplacian(f: RadialField) -> RadialField:
    return -radial_laplacian(f)


def polyharmonic_apply(f: RadialField, m: int) -> RadialField:
    """(-Delta)^m f by m-fold composition of :func:`radial_laplacian`.

    Only nodes ``m .. n-m-1`` see centered stencils at every stage; see
    :func:`interior`.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if f.grid.n < 2 * m + 3:
        raise ValueError(f"{f.grid.n} nodes cannot carry an {m}-fold stencil composition")
    out = f
    for _ in range(m):
        out = neg_laplacian(out)
    return out


def interior(m: int) -> slice:
    """Nodes on which an m-fold composition uses only centered stencils."""
    return slice(m, -m if m else None)


def charge_flux(f: RadialField, m: int, nodes: int = 3) -> np.ndarray:
    """-|S^(N-1)| r^(N-1) d/dr (-Delta)^(m-1) f at the innermost fully centered nodes.

    For a field with (-Delta)^m f = alpha_0 delta_0 + (regular) this tends to
    alpha_0 as r -> 0.  Everything is computed from nodal values: the
    ``(m-1)``-fold operator, then a three-point derivative, evaluated at
    nodes m, ..., m + nodes - 1 so that no one-sided stencil is involved.
    """
    v = polyharmonic_apply(f, m - 1).total() if m > 1 else f.total()
    r = f.grid.nodes
    idx = slice(m, m + nodes)
    dv = derivative_values(r[: m + nodes + 1], v[: m + nodes + 1])
    return -surface_area(f.N) * r[idx] ** (f.N - 1) * dv[idx]


class BallIntegral(NamedTuple):
    value: float
    diverged: bool


def shell_densities(r: np.ndarray, density: np.ndarray, shells: int = 3) -> np.ndarray | None:
    """Mean of ``density`` per unit log r over the dyadic shells [2^k eps, 2^(k+1) eps].

    Returns None when the grid is too short or too coarse to resolve them.
    """
    logr = np.log(r)
    targets = logr[0] + np.log(2.0) * np.arange(shells + 1)
    if targets[-1] > logr[-1] + 1e-12:
        return None
    idx = np.array([int(np.argmin(np.abs(logr - t))) for t in targets])
    if np.any(np.diff(idx) < 1):
        return None
    out = np.empty(shells)
    for k in range(shells):
        sl = slice(idx[k], idx[k + 1] + 1)
        out[k] = simpson(density[sl], x=logr[sl]) / (logr[idx[k + 1]] - logr[idx[k]])
    return out


def is_divergent(r: np.ndarray, density: np.ndarray) -> bool:
    """Cutoff-refinement test for int_0 density d(log r).

    The integral over [eps, R] is split at eps, 2 eps, 4 eps, 8 eps.  It is
    declared divergent when the three shell increments (normalized per
    unit log r) are positive and nondecreasing toward the origin, up to a
    relative slack of :data:`SHELL_TOLERANCE`.  For density ~ r^(N-s) this
    fires exactly when s >= N.
    """
    d = shell_densities(r, density)
    if d is None or not np.all(d > 0):
        return False
    return bool(d[0] >= d[1] * (1 - SHELL_TOLERANCE) and d[1] >= d[2] * (1 - SHELL_TOLERANCE))


def radial_integral(grid: RadialGrid, integrand) -> BallIntegral:
    """|S^(N-1)| int_eps^R integrand(r) r^(N-1) dr with divergence flag.

    Simpson's rule in log r on the graded nodes.
    """
    g = np.asarray(integrand, dtype=float)
    if not np.all(np.isfinite(g)):
        bad = int(np.flatnonzero(~np.isfinite(g))[0])
        raise NonFiniteIntegrandError(f"non-finite integrand at r={grid.nodes[bad]!r}")
    r = grid.nodes
    density = g * r ** grid.N
    value = surface_area(grid.N) * simpson(density, x=np.log(r))
    return BallIntegral(float(value), is_divergent(r, density))


def log_radial_integral(grid: RadialGrid, log_integrand) -> BallIntegral:
    """As :func:`radial_integral` for an integrand given by its logarithm.

    Integrands whose magnitude exceeds exp(LOG_OVERFLOW_CAP) anywhere are
    reported as ``(inf, True)`` without exponentiating.
    """
    lg = np.asarray(log_integrand, dtype=float)
    if np.any(np.isnan(lg)):
        raise NonFiniteIntegrandError("NaN in log-integrand")
    r = grid.nodes
    log_density = lg + grid.N * np.log(r)
    if np.max(log_density) > LOG_OVERFLOW_CAP:
        return BallIntegral(float("inf"), True)
    density = np.exp(log_density)
    value = surface_area(grid.N) * simpson(density, x=np.log(r))
    return BallIntegral(float(value), is_divergent(r, density))


def ball_integral(f: RadialField, weight=None) -> BallIntegral:
    """Integral of ``weight(r) * f(r)`` over the ball, excluding B_eps."""
    g = f.total()
    if weight is not None:
        g = weight(f.grid.nodes) * g
    return radial_integral(f.grid, g)
