"""Config-driven experiment runner.

Config files are flat ``key = value`` lines with dotted sections, for
example::

    command = solve
    problem.m = 2
    problem.f.kind = power
    problem.f.p = 2
    problem.a.sigma = -1
    problem.alpha_fraction = 0.5
    grid.n = 512

Every run writes ``report.json`` (sorted keys, no timestamps) to the output
directory; ``solve`` also writes ``solution.csv``.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__
from .analysis import (
    RankDeficientFit,
    alpha_removability_check,
    beta_vanishing_check,
    comparison_property_check,
    estimate_charges,
    exp_integrability_check,
    l1_norm,
    verify_log_example,
)
from .calculus import NonFiniteIntegrandError, RadialField
from .fundamental import exp_integrability_threshold, polyharmonic_gamma
from .greens import MaximumPrincipleViolation, navier_solve
from .grid import RadialGrid, build_grid
from .iteration import (
    Barrier,
    ProblemSpec,
    admissible_barrier,
    barrier_phi,
    guaranteed_alpha,
    monotone_solve,
)
from .nonlinearity import Nonlinearity, Weight, classify_growth, validate_hypotheses

SCHEMA_VERSION = 1
COMMANDS = ("solve", "classify", "charges", "verify-example", "check-estimates", "property-suite")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_HYPOTHESIS = 3
EXIT_DIVERGED = 4
EXIT_NUMERICAL = 5

DEFAULTS = {
    "command": "solve",
    "seed": 0,
    "problem.m": 2,
    "problem.f.kind": "power",
    "problem.f.p": 2.0,
    "problem.f.scale": 1.0,
    "problem.a.kind": "power_law",
    "problem.a.sigma": -1.0,
    "problem.a.coefficient": 1.0,
    "problem.a.r0": 1.0,
    "problem.tol": 1e-8,
    "problem.max_iter": 500,
    "problem.log_scale": 5.0,
    "problem.barrier": True,
    "grid.R": 1.0,
    "grid.n": 512,
    "grid.grading": "geometric",
    "charges.input": "solution.csv",
    "example.mu": 2.0,
    "example.r_min": 1e-3,
    "example.r_max": 0.1,
    "example.precision": "extended",
    "estimates.beta": 1.0,
    "estimates.alpha": [0.1, 1.0, 10.0],
    "estimates.delta_over_pi2": [8.0, 16.0, 24.0],
    "estimates.width": 0.01,
    "property.trials": 100,
}
OPTIONAL = {
    "problem.f.gamma", "problem.f.delta", "problem.f.table_t", "problem.f.table_f",
    "problem.a.k", "problem.a.table_r", "problem.a.table_a",
    "problem.alpha", "problem.alpha_fraction", "problem.gamma", "problem.C",
    "grid.N", "grid.q", "grid.eps", "charges.window", "charges.N",
}

CSV_HELP = """\
CSV files: solution.csv has columns r, u, neg_laplacian_u, ubar (the barrier,
empty without one).  Every value is written with full round-trip precision.
The charges command reads any CSV with columns r and u.

Exit codes: 0 success, 2 config error, 3 hypothesis failure, 4 solver
divergence, 5 numerical failure.
"""


class ConfigError(ValueError):
    pass


class HypothesisError(RuntimeError):
    pass


class DivergenceError(RuntimeError):
    def __init__(self, msg, report):
        super().__init__(msg)
        self.report = report


# ------------------------------------------------------------------ config


def _parse_value(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if "," in text:
        return [_parse_value(t) for t in text.split(",") if t.strip()]
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def parse_config(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS and key not in OPTIONAL:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _parse_value(value)
    return out


def load_config(path: str | None) -> dict:
    cfg = dict(DEFAULTS)
    if path is not None:
        try:
            with open(path) as fh:
                cfg.update(parse_config(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    return cfg


def _num(cfg, key, kind=float):
    val = cfg.get(key)
    if val is None:
        return None
    try:
        return kind(val)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be {kind.__name__}, got {val!r}") from exc


def _array(cfg, key):
    val = cfg.get(key)
    if val is None:
        return None
    return np.asarray(val if isinstance(val, list) else [val], dtype=float)


def build_nonlinearity(cfg) -> Nonlinearity:
    kind = cfg["problem.f.kind"]
    scale = _num(cfg, "problem.f.scale")
    if kind == "power":
        return Nonlinearity.power(_num(cfg, "problem.f.p"), scale)
    if kind == "exponential":
        return Nonlinearity.exponential(_num(cfg, "problem.f.gamma"), scale)
    if kind == "exp_power":
        return Nonlinearity.exp_power(_num(cfg, "problem.f.delta"), scale)
    if kind == "tabulated":
        return Nonlinearity.tabulated(_array(cfg, "problem.f.table_t"), _array(cfg, "problem.f.table_f"))
    raise ConfigError(f"unknown problem.f.kind {kind!r}")


def build_weight(cfg) -> Weight:
    kind = cfg["problem.a.kind"]
    k = _num(cfg, "problem.a.k")
    r0 = _num(cfg, "problem.a.r0")
    if kind == "power_law":
        return Weight.power_law(_num(cfg, "problem.a.sigma"), _num(cfg, "problem.a.coefficient"), k, r0)
    if kind == "tabulated":
        return Weight.tabulated(_array(cfg, "problem.a.table_r"), _array(cfg, "problem.a.table_a"), k, r0)
    raise ConfigError(f"unknown problem.a.kind {kind!r}")


def build_config_grid(cfg, N=None) -> RadialGrid:
    m = _num(cfg, "problem.m", int)
    N = N if N is not None else (_num(cfg, "grid.N", int) or 2 * m)
    return build_grid(N, _num(cfg, "grid.R"), _num(cfg, "grid.n", int), cfg["grid.grading"],
                      q=_num(cfg, "grid.q"), eps=_num(cfg, "grid.eps"))


# ------------------------------------------------------------------- output


def write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def write_field_csv(path: str, u: RadialField, extras: dict | None = None) -> None:
    """Columns r, u, neg_laplacian_u and any extras, in round-trip precision."""
    r = u.grid.nodes
    cols = {"r": r, "u": u.total(), "neg_laplacian_u": u.stage(1).total()}
    cols.update(extras or {})
    names = list(cols)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(names)
        for i in range(r.size):
            out.writerow(["" if cols[k] is None else repr(float(cols[k][i])) for k in names])


def read_field_csv(path: str, N: int) -> RadialField:
    """Field from columns r and u; the whole profile is stored as regular values."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "r" not in rows[0] or "u" not in rows[0]:
        raise ConfigError(f"{path} needs columns r and u")
    r = np.array([float(row["r"]) for row in rows])
    u = np.array([float(row["u"]) for row in rows])
    grid = RadialGrid(N, float(r[-1]), r, grading="tabulated")
    return RadialField(grid, u)


# ----------------------------------------------------------------- commands


def _problem_alpha(cfg, f, m):
    alpha = _num(cfg, "problem.alpha")
    frac = _num(cfg, "problem.alpha_fraction")
    if alpha is not None and frac is not None:
        raise ConfigError("give problem.alpha or problem.alpha_fraction, not both")
    gamma = _num(cfg, "problem.gamma")
    if frac is not None:
        if gamma is None:
            gamma = classify_growth(f).gamma
            if gamma is None:
                raise HypothesisError("super-exponential f has no growth witness")
        return frac * guaranteed_alpha(gamma, m), gamma
    return (alpha or 0.0), gamma


def cmd_solve(cfg) -> tuple[dict, int]:
    m = _num(cfg, "problem.m", int)
    f = build_nonlinearity(cfg)
    a = build_weight(cfg)
    grid = build_config_grid(cfg)
    hyp = validate_hypotheses(f, a, m)
    if not hyp.passed:
        raise HypothesisError(json.dumps(hyp.to_dict(), sort_keys=True))
    alpha, gamma = _problem_alpha(cfg, f, m)
    report = {"hypotheses": hyp.to_dict(), "alpha": alpha, "gamma_m": polyharmonic_gamma(m)}
    if alpha > 0 and classify_growth(f).super_exponential:
        chk = alpha_removability_check(f, a, alpha, grid)
        if chk.diverged:
            raise HypothesisError(f"super-exponential f forces alpha = 0, got alpha={alpha}")
    barrier = None
    if cfg["problem.barrier"]:
        growth = classify_growth(f)
        if not growth.sub_exponential:
            raise HypothesisError("super-exponential f admits no log barrier")
        phi = barrier_phi(a, m, grid)
        if gamma is None:
            gamma, C, _ = admissible_barrier(f, alpha, phi)
        C = _num(cfg, "problem.C") or f.witness_constant(gamma)
        if C is None:
            raise HypothesisError(f"f has no witness constant for gamma={gamma}")
        if guaranteed_alpha(gamma, m) < alpha:
            raise HypothesisError(f"alpha={alpha} exceeds {guaranteed_alpha(gamma, m)} for gamma={gamma}")
        barrier = Barrier.build(a, m, grid, gamma, C)
        grid = barrier.grid
        report["barrier"] = {"gamma": gamma, "C": C, "radius": barrier.radius,
                             "guaranteed_alpha": guaranteed_alpha(gamma, m)}
    problem = ProblemSpec(m, grid, a, f, alpha, _num(cfg, "problem.tol"),
                          _num(cfg, "problem.max_iter", int), _num(cfg, "problem.log_scale"))
    result = monotone_solve(problem, None if barrier is None else barrier.field)
    report["grid"] = grid.descriptor()
    report["iteration"] = result.to_dict()
    report["converged"] = result.converged
    if not result.converged:
        raise DivergenceError(f"iteration ended with status {result.status}", report)
    u = result.solution
    try:
        report["charges"] = estimate_charges(u).to_dict()
    except (ValueError, RankDeficientFit) as exc:
        report["charges"] = {"error": str(exc)}
    ub = None if barrier is None else barrier.field.restrict(grid).total()
    report["_csv"] = (u, {"ubar": ub})
    return report, EXIT_OK


def cmd_classify(cfg) -> tuple[dict, int]:
    m = _num(cfg, "problem.m", int)
    f = build_nonlinearity(cfg)
    a = build_weight(cfg)
    grid = build_config_grid(cfg)
    growth = classify_growth(f)
    report = {"growth": growth.to_dict(), "class": growth.label,
              "hypotheses": validate_hypotheses(f, a, m).to_dict()}
    verdict = {}
    if growth.super_exponential:
        chk = alpha_removability_check(f, a, 1.0, grid)
        verdict["alpha"] = "alpha must be 0" if chk.diverged else "undetermined"
        report["alpha_removability"] = chk.to_dict()
    else:
        verdict["alpha"] = "alpha may be nonzero"
    if growth.superquadratic:
        chk = beta_vanishing_check(f, a, _num(cfg, "estimates.beta"), grid)
        verdict["beta"] = "beta must be 0" if chk.diverged else "undetermined"
        report["beta_vanishing"] = chk.to_dict()
    else:
        verdict["beta"] = "undetermined"
    report["verdict"] = verdict
    return report, EXIT_OK


def cmd_charges(cfg) -> tuple[dict, int]:
    N = _num(cfg, "charges.N", int) or 2 * _num(cfg, "problem.m", int)
    path = cfg["charges.input"]
    try:
        u = read_field_csv(path, N)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    window = cfg.get("charges.window")
    fit = estimate_charges(u, window)
    return {"input": os.path.basename(path), "fit": fit.to_dict()}, EXIT_OK


def cmd_verify_example(cfg) -> tuple[dict, int]:
    mu = _num(cfg, "example.mu")
    n = _num(cfg, "grid.n", int)
    lo, hi = _num(cfg, "example.r_min"), _num(cfg, "example.r_max")
    prec = cfg["example.precision"]
    res = verify_log_example(mu, build_grid(4, hi, n, eps=lo), prec)
    fine = verify_log_example(mu, build_grid(4, hi, 2 * n, eps=lo), prec)
    return {"result": res.to_dict(), "refined": fine.to_dict(),
            "refinement_ratio": res.max_rel_residual / fine.max_rel_residual}, EXIT_OK


def cmd_check_estimates(cfg) -> tuple[dict, int]:
    m = _num(cfg, "problem.m", int)
    f = build_nonlinearity(cfg)
    a = build_weight(cfg)
    grid = build_config_grid(cfg)
    report = {"gamma_m": polyharmonic_gamma(m), "threshold": exp_integrability_threshold(m)}
    report["beta_vanishing"] = beta_vanishing_check(f, a, _num(cfg, "estimates.beta"), grid).to_dict()
    alphas = _array(cfg, "estimates.alpha")
    report["alpha_removability"] = [
        {"half": alpha_removability_check(f, a, float(al), grid).to_dict(),
         "full": alpha_removability_check(f, a, float(al), grid, "full").to_dict()}
        for al in alphas]
    r = grid.nodes
    rhs = np.exp(-(r / (_num(cfg, "estimates.width") * grid.R)) ** 2)
    rhs = rhs / l1_norm(grid, rhs)
    h = navier_solve(m, rhs, np.zeros(m), grid)
    report["exp_integrability"] = [
        {"delta": float(d) * np.pi ** 2, **exp_integrability_check(h, 1.0, float(d) * np.pi ** 2, m).to_dict()}
        for d in _array(cfg, "estimates.delta_over_pi2")]
    return report, EXIT_OK


def cmd_property_suite(cfg) -> tuple[dict, int]:
    grid = build_config_grid(cfg)
    rep = comparison_property_check(_num(cfg, "property.trials", int), grid, _num(cfg, "seed", int))
    return {"property": rep.to_dict()}, (EXIT_OK if rep.passed else EXIT_NUMERICAL)


HANDLERS = {
    "solve": cmd_solve,
    "classify": cmd_classify,
    "charges": cmd_charges,
    "verify-example": cmd_verify_example,
    "check-estimates": cmd_check_estimates,
    "property-suite": cmd_property_suite,
}


def run(cfg: dict, out_dir: str) -> int:
    """Execute ``cfg["command"]``, write artifacts to ``out_dir`` and return the exit code."""
    command = cfg.get("command")
    report = {"schema_version": SCHEMA_VERSION, "command": command, "version": __version__,
              "config": {k: cfg[k] for k in sorted(cfg)}}
    csv_data = None
    try:
        if command not in HANDLERS:
            raise ConfigError(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}")
        os.makedirs(out_dir, exist_ok=True)
        body, code = HANDLERS[command](cfg)
        csv_data = body.pop("_csv", None)
        report.update(body)
        report["status"] = "ok" if code == EXIT_OK else "failed"
    except ConfigError as exc:
        code, report["status"], report["error"] = EXIT_CONFIG, "config_error", str(exc)
    except HypothesisError as exc:
        code, report["status"], report["error"] = EXIT_HYPOTHESIS, "hypothesis_failure", str(exc)
    except DivergenceError as exc:
        report.update(exc.report)
        code, report["status"], report["error"] = EXIT_DIVERGED, "diverged", str(exc)
    except (MaximumPrincipleViolation, NonFiniteIntegrandError, RankDeficientFit,
            ArithmeticError, np.linalg.LinAlgError) as exc:
        code, report["status"], report["error"] = EXIT_NUMERICAL, "numerical_failure", str(exc)
    except (ValueError, TypeError, KeyError) as exc:
        # constructors reject invalid descriptors with ValueError
        code, report["status"], report["error"] = EXIT_CONFIG, "config_error", str(exc)
    report["exit_code"] = code
    try:
        os.makedirs(out_dir, exist_ok=True)
        write_json(os.path.join(out_dir, "report.json"), report)
        if csv_data is not None:
            u, extras = csv_data
            write_field_csv(os.path.join(out_dir, "solution.csv"), u, extras)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if code != EXIT_OK:
        print(f"{report['status']}: {report.get('error', '')}", file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="polysing",
        description="Radial polyharmonic singularity experiments.",
        epilog=CSV_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("command", nargs="?", choices=COMMANDS,
                   help="overrides the command key of the config")
    p.add_argument("--config", metavar="PATH", help="flat key = value config file")
    p.add_argument("--out", metavar="DIR", default=".", help="output directory (default: .)")
    p.add_argument("--seed", type=int, help="random seed for property-suite")
    p.add_argument("--grid-n", type=int, dest="grid_n", help="override grid.n")
    p.add_argument("--tol", type=float, help="override problem.tol")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config_error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command:
        cfg["command"] = args.command
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.grid_n is not None:
        cfg["grid.n"] = args.grid_n
    if args.tol is not None:
        cfg["problem.tol"] = args.tol
    return run(cfg, args.out)
