"""Barrier construction and monotone iteration for (-Delta)^m u = a f(u) + alpha delta_0.

Starting from the subsolution u_0 = 0, each step solves the linear Navier
problem

    (-Delta)^m u_n = a f(u_(n-1)) + alpha delta_0    in B_r,
    u_n = Delta u_n = ... = 0                        on dB_r,

and the iterates increase monotonically under the supersolution

    ubar = (-log r + C phi) / gamma,   (-Delta)^m phi = a(r) |log r| / r in B_1,

where f(t) <= C e^(gamma t).  ubar is a supersolution on every ball B_r with
e^(C phi) <= |log r| / gamma.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .calculus import RadialField
from .fundamental import DEFAULT_LOG_SCALE, fundamental_coefficient
from .greens import navier_solve
from .grid import RadialGrid
from .nonlinearity import Nonlinearity, Weight, classify_growth, validate_hypotheses

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 500


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    m: int
    grid: RadialGrid
    weight: Weight
    f: Nonlinearity
    alpha: float = 0.0
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    log_scale: float = DEFAULT_LOG_SCALE

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.grid.N != 2 * self.m:
            raise ValueError(f"order m={self.m} needs dimension N={2 * self.m}, grid has {self.grid.N}")

    @property
    def charges(self) -> np.ndarray:
        c = np.zeros(self.m)
        c[0] = self.alpha
        return c

    def with_alpha(self, alpha: float) -> "ProblemSpec":
        return ProblemSpec(self.m, self.grid, self.weight, self.f, alpha, self.tol,
                           self.max_iter, self.log_scale)

    def with_grid(self, grid: RadialGrid) -> "ProblemSpec":
        return ProblemSpec(self.m, grid, self.weight, self.f, self.alpha, self.tol,
                           self.max_iter, self.log_scale)

    def validate(self):
        return validate_hypotheses(self.f, self.weight, self.m)


def barrier_charge(gamma: float, m: int = 2) -> float:
    """Point mass of (-Delta)^m (-log r / gamma) at the origin: 8 pi^2 / gamma for m = 2."""
    return 1.0 / (gamma * fundamental_coefficient(2 * m, m))


def guaranteed_alpha(gamma: float, m: int = 2) -> float:
    """Charge for which the iteration is run under the barrier: 1 / (8 pi^2 gamma) for m = 2.

    For general m this is c_m / gamma with c_m the normalization of G_m.  It
    never exceeds :func:`barrier_charge`, so the barrier stays valid.
    """
    return fundamental_coefficient(2 * m, m) / gamma


def barrier_phi(weight: Weight, m: int, grid: RadialGrid) -> RadialField:
    """phi with (-Delta)^m phi = a(r) |log r| / r on B_1 and homogeneous Navier data."""
    if not np.isclose(grid.R, 1.0):
        raise ValueError("the barrier is defined on the unit ball; grid.R must be 1")
    r = grid.nodes
    rhs = weight(r) * (-np.log(r)) / r
    rhs[-1] = 0.0
    return navier_solve(m, rhs, np.zeros(m), grid, validate=True)


def supersolution(gamma: float, C: float, phi: RadialField) -> RadialField:
    """ubar = (-log r + C phi) / gamma as a field with an analytic log part."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    m = phi.grid.N // 2
    sing = np.zeros(m)
    # log scale 1 makes the log part exactly -log(r) / gamma, with no constant to cancel
    sing[m - 1] = 1.0 / (gamma * fundamental_coefficient(phi.grid.N, m))
    stages = tuple((C / gamma) * s for s in phi.stages)
    return RadialField(phi.grid, (C / gamma) * phi.values, sing, 1.0, stages)


def supersolution_radius(gamma: float, C: float, phi: RadialField) -> float:
    """Largest node r with e^(C phi(x)) <= |log x| / gamma at every node x <= r."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    r = phi.grid.nodes
    with np.errstate(divide="ignore"):
        rhs = np.log(np.abs(np.log(r)) / gamma)
    ok = (r < 1.0) & (C * phi.total() <= rhs)
    bad = np.flatnonzero(~ok)
    first = int(bad[0]) if bad.size else r.size
    if first == 0:
        raise ValueError(f"no node satisfies e^(C phi) <= |log r|/gamma (gamma={gamma}, C={C})")
    return float(r[first - 1])


@dataclass
class Barrier:
    """A supersolution together with the witness pair and the ball it is valid on."""

    gamma: float
    C: float
    phi: RadialField
    field: RadialField
    radius: float

    @classmethod
    def build(cls, weight: Weight, m: int, grid: RadialGrid, gamma: float, C: float) -> "Barrier":
        phi = barrier_phi(weight, m, grid)
        return cls(gamma, C, phi, supersolution(gamma, C, phi), supersolution_radius(gamma, C, phi))

    @property
    def grid(self) -> RadialGrid:
        """The unit-ball grid cut off at the supersolution radius."""
        return self.phi.grid.truncate(self.radius)


@dataclass
class IterationReport:
    status: str
    iterations: int
    sup_norm_history: list
    changes: list
    residual: float
    solution: RadialField
    monotonicity_violations: int = 0
    barrier_violation: dict | None = None
    below_barrier: bool | None = None
    iterates: list = field(default_factory=list, repr=False)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "converged": self.converged,
            "iterations": self.iterations,
            "sup_norm_history": [float(x) for x in self.sup_norm_history],
            "changes": [float(x) for x in self.changes],
            "residual": float(self.residual),
            "monotonicity_violations": int(self.monotonicity_violations),
            "barrier_violation": self.barrier_violation,
            "below_barrier": self.below_barrier,
        }

    def write_iterates_csv(self, path) -> None:
        """Columns r, then (u_n, neg_laplacian_u_n) for every kept iterate."""
        if not self.iterates:
            raise ValueError("no iterates were kept; rerun with keep_iterates=True")
        r = self.solution.grid.nodes
        header = ["r"]
        cols = [r]
        for n, (u, w) in enumerate(self.iterates, start=1):
            header += [f"u_{n}", f"neg_laplacian_u_{n}"]
            cols += [u, w]
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(header)
            for row in zip(*cols):
                out.writerow([repr(float(x)) for x in row])


def monotone_solve(problem: ProblemSpec, barrier: RadialField | None = None,
                   keep_iterates: bool = False) -> IterationReport:
    """Monotone Picard iteration from u_0 = 0.

    Each iterate is built as u_n = u_(n-1) + d_n where d_n solves the Navier
    problem with data a (f(u_(n-1)) - f(u_(n-2))) (and the charge on the
    first step), so each increment solves a problem with nonnegative data
    whenever f is nondecreasing.  Stops when max|d_n| / max|u_n| < tol.  An iterate above
    ``barrier`` at any node ends the run with status ``"diverged"``.
    """
    grid = problem.grid
    m = problem.m
    a = problem.weight(grid.nodes)
    ub = None if barrier is None else barrier.restrict(grid).total()

    u = None
    u_tot = np.zeros(grid.n)
    w_tot = np.zeros(grid.n)
    f_prev = problem.f(u_tot)
    history = [0.0]
    changes = []
    violations = 0
    status = "max_iter"
    violation = None
    iterates = []
    n = 0
    for n in range(1, problem.max_iter + 1):
        if u is None:
            d = navier_solve(m, np.zeros(grid.n), problem.charges, grid,
                             log_scale=problem.log_scale, check=False)
        else:
            fu = problem.f(u_tot)
            if not np.all(np.isfinite(a * fu)):
                status = "diverged"
                violation = {"iterate": n, "reason": "f(u) overflowed"}
                break
            d = navier_solve(m, a * (fu - f_prev), np.zeros(m), grid,
                             log_scale=problem.log_scale, check=False)
            f_prev = fu
        u = d if u is None else u + d
        new_tot = u.total()
        new_w = u.stage(1).total()
        if not np.all(np.isfinite(new_tot)):
            status = "diverged"
            violation = {"iterate": n, "reason": "non-finite iterate"}
            break
        violations += int(np.sum(new_tot < u_tot)) + int(np.sum(new_w < w_tot))
        u_tot, w_tot = new_tot, new_w
        if keep_iterates:
            iterates.append((u_tot.copy(), w_tot.copy()))
        sup = float(np.max(np.abs(u_tot)))
        history.append(sup)
        if ub is not None and np.any(u_tot > ub):
            i = int(np.argmax(u_tot - ub))
            status = "diverged"
            violation = {"iterate": n, "node": i, "r": float(grid.nodes[i]),
                         "u": float(u_tot[i]), "barrier": float(ub[i])}
            break
        change = float(np.max(np.abs(d.total()))) / sup if sup > 0 else 0.0
        changes.append(change)
        if change < problem.tol:
            status = "converged"
            break

    residual = float("nan")
    if status == "converged":
        fixed = navier_solve(m, a * problem.f(u_tot), problem.charges, grid,
                             log_scale=problem.log_scale, check=False)
        scale = float(np.max(np.abs(u_tot)))
        residual = float(np.max(np.abs(fixed.total() - u_tot)) / scale) if scale > 0 else 0.0
    below = None if ub is None else bool(np.all(u_tot <= ub))
    return IterationReport(status, n, history, changes, residual, u, violations,
                           violation, below, iterates)


def admissible_barrier(f: Nonlinearity, alpha: float, phi: RadialField) -> tuple[float, float, float]:
    """(gamma, C_gamma, radius) whose barrier admits charge ``alpha``.

    Requires ``guaranteed_alpha(gamma) >= alpha``.  For power and
    sub-exponential ``exp_power`` kinds any gamma has a witness, so
    gamma = c_m / alpha works for every alpha > 0; for the exponential kind
    gamma is fixed by f.
    """
    m = phi.grid.N // 2
    c_m = fundamental_coefficient(2 * m, m)
    growth = classify_growth(f)
    if not growth.sub_exponential:
        raise ValueError("super-exponential f admits no barrier")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if alpha == 0:
        gamma = growth.gamma
    elif growth.gamma_min == 0.0:
        gamma = c_m / alpha
    else:
        gamma = growth.gamma_min
        if guaranteed_alpha(gamma, m) < alpha:
            raise ValueError(f"alpha={alpha} exceeds {guaranteed_alpha(gamma, m)} "
                             f"for the smallest admissible gamma={gamma}")
    C = f.witness_constant(gamma)
    if C is None:
        raise ValueError(f"no witness constant for gamma={gamma}")
    return gamma, C, supersolution_radius(gamma, C, phi)


def max_alpha(problem: ProblemSpec, barrier: RadialField | None = None, rtol: float = 0.01,
              alpha_hi: float | None = None, max_doublings: int = 60) -> float:
    """Largest alpha (to relative ``rtol``) for which :func:`monotone_solve` converges.

    Bracket by doubling from ``alpha_hi`` (default: ``problem.alpha`` or 1),
    then bisect.  alpha = 0 always converges.
    """
    def ok(alpha):
        return monotone_solve(problem.with_alpha(alpha), barrier).converged

    lo = 0.0
    hi = alpha_hi if alpha_hi is not None else (problem.alpha if problem.alpha > 0 else 1.0)
    for _ in range(max_doublings):
        if not ok(hi):
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ValueError("no failure found while doubling alpha")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo
