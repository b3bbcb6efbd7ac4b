"""Nonlinearities f, weights a, and the hypotheses they must satisfy.

Supported nonlinearity kinds (``scale`` multiplies each):

* ``power``       f(t) = t^p
* ``exponential`` f(t) = e^(gamma t) - 1
* ``exp_power``   f(t) = e^(t^delta) - 1
* ``tabulated``   piecewise-linear through samples (t_i, f_i)

Weights are ``power_law`` a(r) = c r^sigma or ``tabulated`` in r.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .calculus import radial_integral
from .grid import build_grid

KINDS = ("power", "exponential", "exp_power", "tabulated")

SAMPLES_PER_DECADE = 32
UNBOUNDED_RATIO = 1e6
SUPERQUADRATIC_RATIO = 0.9


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    kind: str
    p: float | None = None
    gamma: float | None = None
    delta: float | None = None
    scale: float = 1.0
    table_t: np.ndarray | None = field(default=None, repr=False)
    table_f: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown nonlinearity kind {self.kind!r}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        required = {"power": "p", "exponential": "gamma", "exp_power": "delta"}
        if self.kind in required:
            val = getattr(self, required[self.kind])
            if val is None or not val > 0:
                raise ValueError(f"{self.kind} needs a positive {required[self.kind]}")
        if self.kind == "tabulated":
            t = np.asarray(self.table_t, dtype=float)
            fv = np.asarray(self.table_f, dtype=float)
            if t.shape != fv.shape or t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
                raise ValueError("tabulated f needs matching increasing samples")
            object.__setattr__(self, "table_t", t)
            object.__setattr__(self, "table_f", fv)

    @classmethod
    def power(cls, p: float, scale: float = 1.0) -> "Nonlinearity":
        return cls("power", p=float(p), scale=scale)

    @classmethod
    def exponential(cls, gamma: float, C: float = 1.0) -> "Nonlinearity":
        """C (e^(gamma t) - 1), which satisfies f <= C e^(gamma t) with f(0) = 0."""
        return cls("exponential", gamma=float(gamma), scale=C)

    @classmethod
    def exp_power(cls, delta: float, scale: float = 1.0) -> "Nonlinearity":
        return cls("exp_power", delta=float(delta), scale=scale)

    @classmethod
    def tabulated(cls, t, values) -> "Nonlinearity":
        return cls("tabulated", table_t=np.asarray(t, float), table_f=np.asarray(values, float))

    def scaled(self, c: float) -> "Nonlinearity":
        if self.kind == "tabulated":
            return Nonlinearity.tabulated(self.table_t, c * self.table_f)
        return Nonlinearity(self.kind, self.p, self.gamma, self.delta, self.scale * c)

    @property
    def symbolic(self) -> bool:
        return self.kind != "tabulated"

    def _check_table(self, t):
        if np.any(t > self.table_t[-1] * (1 + 1e-12)) or np.any(t < self.table_t[0]):
            raise ValueError(f"t outside the table range [{self.table_t[0]}, {self.table_t[-1]}]")

    def __call__(self, t):
        """f(t); arguments are clipped at 0 since f is only defined on [0, inf)."""
        t = np.maximum(np.asarray(t, dtype=float), 0.0)
        with np.errstate(over="ignore"):
            if self.kind == "power":
                return self.scale * t ** self.p
            if self.kind == "exponential":
                return self.scale * np.expm1(self.gamma * t)
            if self.kind == "exp_power":
                return self.scale * np.expm1(t ** self.delta)
        self._check_table(t)
        return np.interp(t, self.table_t, self.table_f)

    def log_value(self, t):
        """log f(t), finite where f itself would overflow."""
        t = np.maximum(np.asarray(t, dtype=float), 0.0)
        with np.errstate(divide="ignore"):
            if self.kind == "power":
                return np.log(self.scale) + self.p * np.log(t)
            if self.kind in ("exponential", "exp_power"):
                s = self.gamma * t if self.kind == "exponential" else t ** self.delta
                return np.log(self.scale) + s + np.log(-np.expm1(-s))
            self._check_table(t)
            return np.log(np.interp(t, self.table_t, self.table_f))

    def witness_constant(self, gamma: float) -> float | None:
        """Smallest C with f(t) <= C e^(gamma t) for all t >= 0, or None if none exists.

        Tabulated kinds only see their samples.
        """
        if not gamma > 0:
            raise ValueError("gamma must be positive")
        if self.kind == "power":
            return self.scale * (self.p / (gamma * np.e)) ** self.p
        if self.kind == "exponential":
            return self.scale if gamma >= self.gamma else None
        if self.kind == "exp_power":
            if self.delta > 1:
                return None
            if self.delta == 1:
                return self.scale if gamma >= 1 else None
            return self.scale * np.exp(_max_log_exp_power(self.delta, gamma)) * (1 + 1e-9)
        with np.errstate(divide="ignore"):
            h = np.log(self.table_f) - gamma * self.table_t
        return float(np.exp(np.max(h)))

    def descriptor(self) -> dict:
        out = {"kind": self.kind, "scale": self.scale}
        for key in ("p", "gamma", "delta"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        if self.kind == "tabulated":
            out["table_t"] = self.table_t.tolist()
            out["table_f"] = self.table_f.tolist()
        return out


def _max_log_exp_power(delta: float, gamma: float) -> float:
    """max over t > 0 of log(e^(t^delta) - 1) - gamma t, for delta < 1."""
    t_star = (delta / gamma) ** (1.0 / (1.0 - delta))
    ts = np.geomspace(1e-8, 100.0 * max(t_star, 1.0) + 100.0 / gamma, 4001)
    s = ts ** delta
    h = s + np.log(-np.expm1(-s)) - gamma * ts
    i = int(np.argmax(h))
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, ts.size - 1)]

    def neg(t):
        s = t ** delta
        return -(s + np.log(-np.expm1(-s)) - gamma * t)

    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12 * hi})
    return float(max(-res.fun, h[i]))


@dataclass(frozen=True, eq=False)
class Weight:
    """a(r) = coefficient * r^sigma, or a table in r.

    ``k`` is the declared integrability exponent (a in L^k); when omitted a
    default admissible choice is reported.  ``r0`` is the radius of the ball
    on which a must stay bounded away from zero.
    """

    kind: str = "power_law"
    sigma: float = 0.0
    coefficient: float = 1.0
    k: float | None = None
    r0: float = 1.0
    table_r: np.ndarray | None = field(default=None, repr=False)
    table_a: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("power_law", "tabulated"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "tabulated":
            r = np.asarray(self.table_r, dtype=float)
            a = np.asarray(self.table_a, dtype=float)
            if r.shape != a.shape or r.size < 2 or np.any(np.diff(r) <= 0) or r[0] <= 0:
                raise ValueError("tabulated weight needs matching increasing radii > 0")
            object.__setattr__(self, "table_r", r)
            object.__setattr__(self, "table_a", a)
        elif self.coefficient < 0:
            raise ValueError("weights are nonnegative")

    @classmethod
    def power_law(cls, sigma: float, coefficient: float = 1.0, k=None, r0: float = 1.0) -> "Weight":
        return cls("power_law", float(sigma), float(coefficient), k, r0)

    @classmethod
    def tabulated(cls, r, a, k=None, r0: float = 1.0) -> "Weight":
        return cls("tabulated", k=k, r0=r0, table_r=np.asarray(r, float), table_a=np.asarray(a, float))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "power_law":
            if self.coefficient == 0:
                return np.zeros_like(r)
            return self.coefficient * r ** self.sigma
        tol = 1e-12 * self.table_r[-1]
        if np.any(r < self.table_r[0] - tol) or np.any(r > self.table_r[-1] + tol):
            raise ValueError("radius outside the weight table")
        return np.interp(r, self.table_r, self.table_a)

    def admissible_k(self, m: int) -> tuple[float, float]:
        """Open interval of exponents k > 2m/(2m-1) with a in L^k(B_1)."""
        lo = 2 * m / (2 * m - 1)
        if self.kind == "power_law" and self.sigma < 0 and self.coefficient > 0:
            return lo, 2 * m / -self.sigma
        return lo, float("inf")

    def integrability_exponent(self, m: int) -> float:
        if self.k is not None:
            return float(self.k)
        lo, hi = self.admissible_k(m)
        return 0.5 * (lo + hi) if np.isfinite(hi) else 2.0 * lo

    def essential_infimum(self, r0: float | None = None) -> float:
        r0 = self.r0 if r0 is None else r0
        if self.kind == "power_law":
            if self.coefficient == 0 or self.sigma > 0:
                return 0.0
            return self.coefficient * r0 ** self.sigma
        inside = self.table_a[self.table_r <= r0]
        return float(inside.min()) if inside.size else float(self.table_a[0])

    def descriptor(self) -> dict:
        if self.kind == "power_law":
            out = {"kind": "power_law", "sigma": self.sigma, "coefficient": self.coefficient,
                   "r0": self.r0}
        else:
            out = {"kind": "tabulated", "table_r": self.table_r.tolist(),
                   "table_a": self.table_a.tolist(), "r0": self.r0}
        if self.k is not None:
            out["k"] = self.k
        return out


@dataclass
class HypothesisCheck:
    name: str
    passed: bool
    witness: dict


@dataclass
class HypothesisReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> HypothesisCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [asdict(c) for c in self.checks]}


def _check_h1(f: Nonlinearity, t_max: float) -> HypothesisCheck:
    if f.kind == "tabulated":
        t = f.table_t
        if t[0] != 0.0:
            return HypothesisCheck("H1", False, {"reason": "table does not start at t = 0"})
    else:
        t = np.unique(np.concatenate([np.linspace(0.0, 1.0, 129),
                                      np.geomspace(1.0, t_max, 257)]))
    with np.errstate(over="ignore"):
        vals = np.asarray(f(t), dtype=float)
    if vals[0] != 0.0:
        return HypothesisCheck("H1", False, {"reason": "f(0) != 0", "f0": float(vals[0])})
    neg = np.flatnonzero(vals < 0)
    if neg.size:
        i = int(neg[0])
        return HypothesisCheck("H1", False, {"reason": "f < 0", "t": float(t[i]),
                                             "f": float(vals[i])})
    fin = np.isfinite(vals)
    drop = np.flatnonzero(np.diff(vals[fin]) < 0)
    if drop.size:
        i = int(drop[0])
        return HypothesisCheck("H1", False, {"reason": "f decreases", "t": float(t[fin][i + 1])})
    return HypothesisCheck("H1", True, {"samples": int(t.size), "t_max": float(t[-1])})


def validate_hypotheses(f: Nonlinearity, a: Weight, m: int, grid=None,
                        t_max: float = 100.0) -> HypothesisReport:
    """Check (H1)-(H3) for order m; never raises, every check carries a witness."""
    checks = [_check_h1(f, t_max)]

    lo, hi = a.admissible_k(m)
    k = a.integrability_exponent(m)
    g = grid if grid is not None else build_grid(2 * m, 1.0, 400, eps=1e-8)
    try:
        quad = radial_integral(g, a(g.nodes) ** k)
        quad_w = {"integral_a_k": quad.value, "diverged": quad.diverged}
    except (ValueError, ArithmeticError) as exc:
        quad, quad_w = None, {"error": str(exc)}
    if a.kind == "power_law":
        ok = lo < hi and lo < k < hi
    else:
        ok = k > lo and quad is not None and not quad.diverged
    checks.append(HypothesisCheck("H2", bool(ok), {"k": k, "k_range": [lo, hi], **quad_w}))

    inf = a.essential_infimum()
    checks.append(HypothesisCheck("H3", bool(inf > 0), {"r0": a.r0, "ess_inf": inf}))
    return HypothesisReport(checks)


@dataclass
class GrowthClass:
    superquadratic: bool
    sub_exponential: bool
    super_exponential: bool
    gamma: float | None
    C: float | None
    gamma_min: float | None
    method: str

    @property
    def label(self) -> str:
        return "super_exponential" if self.super_exponential else "sub_exponential"

    def to_dict(self) -> dict:
        return {**asdict(self), "class": self.label}


def _symbolic_growth(f: Nonlinearity, exponent: float) -> GrowthClass:
    if f.kind == "power":
        return GrowthClass(f.p >= exponent, True, False, 1.0, f.witness_constant(1.0), 0.0, "symbolic")
    if f.kind == "exponential":
        return GrowthClass(True, True, False, f.gamma, f.scale, f.gamma, "symbolic")
    if f.delta > 1:
        return GrowthClass(True, False, True, None, None, None, "symbolic")
    if f.delta == 1:
        return GrowthClass(True, True, False, 1.0, f.scale, 1.0, "symbolic")
    return GrowthClass(True, True, False, 1.0, f.witness_constant(1.0), 0.0, "symbolic")


def classify_growth(f: Nonlinearity, t_max: float = 1e3, exponent: float = 2.0,
                    gamma_max: float = 10.0) -> GrowthClass:
    """Decide superquadratic growth and the sub-/super-exponential dichotomy.

    Symbolic kinds are classified exactly.  Tabulated kinds are sampled at
    32 points per decade on [1, t_max]:

    * superquadratic: min of f/t^exponent over the top decade is positive and
      at least 0.9 times its min over the decade below;
    * sub-exponential with rate gamma: the top-decade max of f e^(-gamma t)
      is at most 1e6 times its max over [1, 10]; the smallest such gamma on a
      grid up to ``gamma_max`` is returned with C = sampled max of f e^(-gamma t).
    """
    if t_max < 10:
        raise ValueError("t_max must be >= 10")
    if f.symbolic:
        return _symbolic_growth(f, exponent)
    if t_max > f.table_t[-1] * (1 + 1e-12):
        raise ValueError(f"t_max={t_max} exceeds the table range {f.table_t[-1]}")

    decades = np.log10(t_max)
    t = np.geomspace(1.0, t_max, int(np.ceil(decades * SAMPLES_PER_DECADE)) + 1)
    lf = f.log_value(t)

    q = lf - exponent * np.log(t)
    top = t >= t_max / 10
    prev = (t >= max(1.0, t_max / 100)) & (t <= t_max / 10)
    superq = bool(np.all(np.isfinite(q[top])) and
                  np.min(q[top]) >= np.min(q[prev]) + np.log(SUPERQUADRATIC_RATIO))

    first = t <= 10.0
    t_all = np.concatenate([np.linspace(0.0, 1.0, 33)[:-1], t])
    lf_all = f.log_value(t_all)
    for gamma in np.geomspace(1e-3, gamma_max, 97):
        h = lf - gamma * t
        if np.max(h[top]) - np.max(h[first]) <= np.log(UNBOUNDED_RATIO):
            C = float(np.exp(np.max(lf_all - gamma * t_all)))
            return GrowthClass(superq, True, False, float(gamma), C, float(gamma), "sampled")
    return GrowthClass(superq, False, True, None, None, None, "sampled")
