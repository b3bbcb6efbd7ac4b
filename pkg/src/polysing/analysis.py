"""Numerical checks of the classification results for isolated singularities.

Charge estimation near the origin, divergence checks that force charges
to vanish, exponential integrability, regularity and comparison checks,
and the closed-form log example ``w = (-4 log r)^(1/mu)`` in R^4.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .calculus import (
    RadialField,
    interior,
    laplacian_values,
    log_radial_integral,
    radial_integral,
)
from .fundamental import (
    exp_integrability_threshold,
    fundamental_coefficient,
    polyharmonic_gamma,
    polyharmonic_fundamental,
)
from .greens import navier_solve
from .grid import RadialGrid
from .nonlinearity import Nonlinearity, Weight, classify_growth

MIN_FIT_NODES = 8
MAX_NORMAL_CONDITION = 1e10


class RankDeficientFit(np.linalg.LinAlgError):
    pass


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    return x


# ---------------------------------------------------------------- charges


@dataclass
class AsymptoticFit:
    """Least-squares fit ``u ~ sum_i charges[i] G_(m-i) + constant`` near 0.

    ``charges[0]`` is alpha (on the log term), ``charges[1]`` is beta (on
    Gamma = G_(m-1) when m = 2).
    """

    charges: np.ndarray
    constant_hat: float
    fit_window: tuple
    residual: float
    nodes: int
    condition: float

    @property
    def alpha_hat(self) -> float:
        return float(self.charges[0])

    @property
    def beta_hat(self) -> float:
        return float(self.charges[1]) if self.charges.size > 1 else 0.0

    def to_dict(self) -> dict:
        return _jsonable({"alpha_hat": self.alpha_hat, "beta_hat": self.beta_hat,
                          "charges": self.charges, "constant_hat": self.constant_hat,
                          "fit_window": list(self.fit_window), "residual": self.residual,
                          "nodes": self.nodes, "condition": self.condition})


def estimate_charges(u: RadialField, window=None) -> AsymptoticFit:
    """Fit u on ``window`` (default [eps, 10 eps]) against {G_m, ..., G_1, 1}.

    Rows are weighted by 1/|u| and columns scaled to unit norm before
    solving.  A strong G_1 term swamps the log term inside one decade, so
    widen the window when beta is large.  The fit is refused when
    the condition number of the scaled normal equations reaches 1e10.
    """
    grid = u.grid
    r = grid.nodes
    lo, hi = (grid.eps, 10.0 * grid.eps) if window is None else map(float, window)
    if lo < grid.eps * (1 - 1e-12) or hi > grid.R * (1 + 1e-12) or not lo < hi:
        raise ValueError(f"window ({lo}, {hi}) must lie inside [{grid.eps}, {grid.R}]")
    sel = (r >= lo * (1 - 1e-12)) & (r <= hi * (1 + 1e-12))
    if int(sel.sum()) < MIN_FIT_NODES:
        raise ValueError(f"window holds {int(sel.sum())} nodes, need {MIN_FIT_NODES}")
    x = r[sel]
    y = u.total()[sel]
    m = grid.N // 2
    cols = [polyharmonic_fundamental(grid.N, j, x, u.log_scale) for j in range(m, 0, -1)]
    A = np.column_stack(cols + [np.ones_like(x)])
    # round-off in the samples scales with |u|, so weight rows by it
    scale = np.maximum(np.abs(y), np.abs(y[-1]) + np.finfo(float).tiny)
    A = A / scale[:, None]
    y = y / scale
    norms = np.linalg.norm(A, axis=0)
    As = A / norms
    cond = float(np.linalg.cond(As.T @ As))
    if not cond < MAX_NORMAL_CONDITION:
        raise RankDeficientFit(f"normal equations have condition {cond:.3g}; widen the window")
    coef, *_ = np.linalg.lstsq(As, y, rcond=None)
    coef = coef / norms
    resid = float(np.sqrt(np.mean(((A @ coef - y) * scale) ** 2)))
    return AsymptoticFit(coef[:m], float(coef[m]), (float(x[0]), float(x[-1])), resid,
                         int(x.size), cond)


# ------------------------------------------------------ divergence checks


@dataclass
class CheckResult:
    applicable: bool
    diverged: bool
    value: float
    reason: str = ""
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def beta_vanishing_check(f: Nonlinearity, a: Weight, beta: float, grid: RadialGrid) -> CheckResult:
    """Integrate a f(2 beta Gamma(r)) over the ball, i.e. a f(beta / (2 pi^2 r^2)) in R^4.

    Divergence means a solution with this beta cannot have a f(u) in L^1,
    so beta must vanish.  Only meaningful for superquadratic f.
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    growth = classify_growth(f)
    reasons = []
    if not growth.superquadratic:
        reasons.append("f is not superquadratic")
    if beta == 0:
        reasons.append("beta = 0")
    r = grid.nodes
    bound = 2.0 * beta * polyharmonic_fundamental(grid.N, 1, r)
    with np.errstate(divide="ignore"):
        log_g = np.log(a(r)) + f.log_value(bound)
    res = log_radial_integral(grid, log_g)
    return CheckResult(not reasons, res.diverged, res.value, "; ".join(reasons),
                       {"beta": beta, "growth": growth.to_dict()})


def alpha_removability_check(f: Nonlinearity, a: Weight, alpha: float, grid: RadialGrid,
                             variant: str = "half") -> CheckResult:
    """Integrate a e^(gamma u_low) with u_low = -(alpha c_m / 2) log r and gamma = 2N / (alpha c_m).

    In R^4 this is the lower bound -(alpha / 16 pi^2) log r with gamma =
    64 pi^2 / alpha, so the integrand is a r^-4.  ``variant="full"`` uses the
    whole coefficient alpha c_m instead of half of it (same gamma).
    Divergence means f(u) grows too fast for a nonzero alpha.
    """
    if variant not in ("half", "full"):
        raise ValueError("variant must be 'half' or 'full'")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    growth = classify_growth(f)
    reasons = []
    if not growth.super_exponential:
        reasons.append("f is sub-exponential")
    if alpha == 0:
        reasons.append("alpha = 0")
        return CheckResult(False, False, float("nan"), "; ".join(reasons),
                           {"alpha": 0.0, "gamma_used": None, "growth": growth.to_dict()})
    m = grid.N // 2
    c_m = fundamental_coefficient(grid.N, m)
    gamma = 2.0 * grid.N / (alpha * c_m)
    coef = alpha * c_m * (0.5 if variant == "half" else 1.0)
    r = grid.nodes
    with np.errstate(divide="ignore"):
        log_g = np.log(a(r)) - gamma * coef * np.log(r)
    res = log_radial_integral(grid, log_g)
    return CheckResult(not reasons, res.diverged, res.value, "; ".join(reasons),
                       {"alpha": alpha, "gamma_used": gamma, "variant": variant,
                        "growth": growth.to_dict()})


@dataclass
class ExpIntegrability:
    value: float
    finite: bool
    admissible: bool
    threshold: float

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def exp_integrability_check(h: RadialField, l1_norm: float, delta: float, m: int) -> ExpIntegrability:
    """Ball integral of exp(delta |h| / l1_norm).

    ``admissible`` is delta < 2m gamma_m (32 pi^2 for m = 2), the range in
    which the integral is guaranteed finite.
    """
    if not l1_norm > 0:
        raise ValueError("l1_norm must be positive")
    if delta < 0:
        raise ValueError("delta must be >= 0")
    res = log_radial_integral(h.grid, delta * np.abs(h.total()) / l1_norm)
    threshold = exp_integrability_threshold(m)
    finite = bool(np.isfinite(res.value) and not res.diverged)
    return ExpIntegrability(res.value, finite, bool(delta < threshold), threshold)


# ------------------------------------------------------------- regularity


def regularity_bootstrap_check(u: RadialField, f: Nonlinearity, a: Weight, ls=None) -> dict:
    """Exponential integrability of u, a Hoelder-split L^r bound and sup |u|.

    ``ls`` defaults to (1, 2 gamma, 4 gamma) with gamma from the growth
    witness of f.  The L^r check uses p = r = sqrt(k) with k the
    integrability exponent of a, so p r = k.
    """
    grid = u.grid
    m = grid.N // 2
    growth = classify_growth(f)
    gamma = growth.gamma if growth.gamma is not None else 1.0
    if ls is None:
        ls = (1.0, 2.0 * gamma, 4.0 * gamma)
    vals = u.total()
    exp_checks = []
    for l in ls:
        res = log_radial_integral(grid, l * np.abs(vals))
        exp_checks.append({"l": float(l), "value": res.value,
                           "finite": bool(np.isfinite(res.value) and not res.diverged)})
    k = a.integrability_exponent(m)
    p = float(np.sqrt(k))
    rr = grid.nodes
    with np.errstate(divide="ignore", over="ignore"):
        log_g = p * (np.log(a(rr)) + f.log_value(vals))
    g = log_radial_integral(grid, log_g)
    holder = {"k": k, "p": p, "r": p, "value": g.value,
              "finite": bool(np.isfinite(g.value) and not g.diverged)}
    sup = float(np.max(np.abs(vals)))
    bounded = bool(u.is_regular and np.isfinite(sup))
    return _jsonable({"exp_integrals": exp_checks, "holder": holder, "sup_norm": sup,
                      "bounded": bounded, "gamma": gamma,
                      "regular": bool(bounded and holder["finite"]
                                      and all(c["finite"] for c in exp_checks))})


# ------------------------------------------------------ comparison checks


def _smooth_basis(r: np.ndarray, R: float) -> np.ndarray:
    x = r / R
    cols = [np.ones_like(x), x ** 2, x ** 4, 1.0 + np.cos(np.pi * x)]
    cols += [np.exp(-(x / s) ** 2) for s in (0.05, 0.2, 0.5)]
    return np.column_stack(cols)


def random_rhs(grid: RadialGrid, rng: np.random.Generator) -> np.ndarray:
    """Random nonnegative smooth radial data: positive mix of a fixed basis."""
    B = _smooth_basis(grid.nodes, grid.R)
    coef = rng.exponential(1.0, B.shape[1]) * (rng.random(B.shape[1]) < 0.7)
    return B @ coef


@dataclass
class PropertyReport:
    trials: int
    seed: int
    failures: list
    min_values: list

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return _jsonable({"trials": self.trials, "seed": self.seed, "passed": self.passed,
                          "failures": self.failures, "min_values": self.min_values})


def comparison_property_check(trials: int, grid: RadialGrid, seed: int = 0, m: int | None = None,
                              verbose: bool = True) -> PropertyReport:
    """Nonnegative random data must give (-Delta)^k u >= 0 for k < m at every node.

    Trial i draws from ``np.random.default_rng([seed, i])``; each failure
    records that pair so it can be replayed alone.
    """
    m = grid.N // 2 if m is None else m
    failures = []
    mins = [float("inf")] * m
    for i in range(trials):
        rhs = random_rhs(grid, np.random.default_rng([seed, i]))
        u = navier_solve(m, rhs, np.zeros(m), grid)
        for k in range(m):
            v = u.stage(k).total()
            lo = float(np.min(v))
            mins[k] = min(mins[k], lo)
            if lo < 0:
                j = int(np.argmin(v))
                failures.append({"seed": [seed, i], "stage": k, "r": float(grid.nodes[j]),
                                 "value": lo})
                if verbose:
                    print(f"comparison failure: reproduce with default_rng([{seed}, {i}]), "
                          f"stage {k}, value {lo!r} at r={grid.nodes[j]!r}")
    return PropertyReport(trials, seed, failures, mins)


# --------------------------------------------------------- log example


@lru_cache(maxsize=None)
def _log_example_coefficients():
    """(b1, b2, b3) as functions of mu from symbolic differentiation of w."""
    import sympy as sp

    r, L, mu = sp.symbols("r L mu", positive=True)
    nu = 1 / mu
    w = (-4 * sp.log(r)) ** nu
    d = [sp.diff(w, r, k) for k in range(5)]
    bilap = d[4] + 6 / r * d[3] + 3 / r ** 2 * d[2] - 3 / r ** 3 * d[1]
    # w^mu = L so e^(w^mu) w^(1-4mu) = r^-4 L^(nu-4)
    scaled = (bilap * r ** 4 * (-4 * sp.log(r)) ** (4 - nu)).subs(sp.log(r), -L / 4)
    poly = sp.Poly(sp.expand(sp.powsimp(sp.expand(sp.simplify(scaled)), force=True)), L)
    if poly.degree() != 2 or poly.coeff_monomial(L) != 0:
        raise ArithmeticError(f"unexpected structure {poly}")
    lead = sp.simplify(poly.coeff_monomial(L ** 2))
    const = sp.simplify(poly.coeff_monomial(1))
    b3 = sp.simplify(-const / lead)
    return sp.lambdify(mu, lead, "math"), sp.lambdify(mu, b3, "math")


@dataclass
class LogExampleResult:
    mu: float
    b1: float
    b2: float
    b3: float
    max_rel_residual: float
    nodes: int
    precision: str

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def log_example_coefficients(mu: float) -> tuple[float, float, float]:
    lead, b3 = _log_example_coefficients()
    return float(lead(mu)), 1.0, float(b3(mu))


def verify_log_example(mu: float, grid: RadialGrid, precision: str = "extended") -> LogExampleResult:
    """Compare the discrete bilaplacian of w = (-4 log r)^(1/mu) with its closed form

        Delta^2 w = b1 e^(w^mu) w^(1-4mu) [b2 w^(2mu) - b3]

    on the fully centered nodes of ``grid``.  The error is measured
    relative to b1 e^(w^mu) w^(1-4mu) (b2 w^(2mu) + |b3|), which keeps it
    meaningful where the bracket changes sign.

    Fourth differences of double samples carry round-off of order
    eps |w| / h^4, which overtakes the truncation error near 10^3 nodes per
    two decades.  ``precision="extended"`` evaluates samples and stencils in
    ``np.longdouble`` so refinement studies see the discretization error;
    ``"double"`` uses float64 throughout.
    """
    if not mu > 1:
        raise ValueError("mu must be > 1")
    if grid.N != 4:
        raise ValueError("the log example lives in R^4")
    if grid.R > np.exp(-0.25) * (1 + 1e-12):
        raise ValueError("grid must stay inside r <= e^(-1/4)")
    dtypes = {"extended": np.longdouble, "double": np.float64}
    if precision not in dtypes:
        raise ValueError(f"precision must be one of {sorted(dtypes)}")
    dt = dtypes[precision]
    b1, b2, b3 = log_example_coefficients(mu)
    r = grid.nodes.astype(dt)
    L = -4 * np.log(r)
    nu = dt(1) / dt(mu)
    w = L ** nu
    discrete = laplacian_values(r, laplacian_values(r, w, 4), 4)
    pref = dt(b1) * r ** -4 * L ** (nu - 4)
    exact = pref * (dt(b2) * L ** 2 - dt(b3))
    scale = np.abs(pref) * (dt(b2) * L ** 2 + abs(dt(b3)))
    sl = interior(2)
    err = float(np.max(np.abs(discrete[sl] - exact[sl]) / scale[sl]))
    return LogExampleResult(float(mu), b1, b2, b3, err, grid.n, precision)


def gamma_m(m: int) -> float:
    """gamma_m = ((2m-1)!/2) |S^(2m)|."""
    return polyharmonic_gamma(m)


def l1_norm(grid: RadialGrid, rhs) -> float:
    return radial_integral(grid, np.abs(np.asarray(rhs, dtype=float))).value
