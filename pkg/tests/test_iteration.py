import csv
import json

import numpy as np
import pytest

from polysing.calculus import RadialField, charge_flux
from polysing.fundamental import fundamental_coefficient
from polysing.greens import navier_solve
from polysing.grid import build_grid
from polysing.iteration import (
    Barrier,
    ProblemSpec,
    admissible_barrier,
    barrier_charge,
    barrier_phi,
    guaranteed_alpha,
    max_alpha,
    monotone_solve,
    supersolution,
    supersolution_radius,
)
from polysing.nonlinearity import Nonlinearity, Weight

A = Weight.power_law(-1)
SQ = Nonlinearity.power(2)


@pytest.fixture(scope="module")
def grid():
    return build_grid(4, 1.0, 512)


@pytest.fixture(scope="module")
def barrier(grid):
    return Barrier.build(A, 2, grid, 1.0, SQ.witness_constant(1.0))


def test_phi_zero_weight(grid):
    phi = barrier_phi(Weight.power_law(0, coefficient=0.0), 2, grid)
    assert np.all(phi.total() == 0)


def test_phi_positive_and_bounded():
    maxima = []
    for n in (256, 512, 1024):
        g = build_grid(4, 1.0, n)
        phi = barrier_phi(A, 2, g)
        v = phi.total()
        assert np.all(v[:-1] > 0) and v[-1] == 0
        assert np.all(phi.stage(1).total() >= 0)
        maxima.append(v.max())
    assert abs(maxima[1] - maxima[2]) < 0.01 * maxima[2]
    with pytest.raises(ValueError):
        barrier_phi(A, 2, build_grid(4, 2.0, 64))


def test_supersolution_without_phi(grid):
    zero = RadialField.zeros(grid)
    ub = supersolution(2.0, 1.0, zero)
    assert np.allclose(ub.total(), -np.log(grid.nodes) / 2.0, rtol=1e-13, atol=0)
    with pytest.raises(ValueError):
        supersolution(0.0, 1.0, zero)


def test_supersolution_signs(barrier):
    ub = barrier.field
    assert np.all(ub.total() >= 0)
    assert np.all(ub.stage(1).total() >= 0)
    r = ub.grid.nodes
    assert np.all(ub.stage(1).total()[:-1] >= 2 / r[:-1] ** 2 * (1 - 1e-12))


def test_supersolution_mass(barrier, grid):
    # the origin mass of (-Delta)^2 ubar is 8 pi^2 / gamma
    for gamma in (1.0, 2.5):
        ub = supersolution(gamma, 0.0, RadialField.zeros(grid))
        assert np.allclose(charge_flux(ub, 2), 8 * np.pi ** 2 / gamma, rtol=1e-2)
        assert barrier_charge(gamma) == pytest.approx(8 * np.pi ** 2 / gamma)
    assert guaranteed_alpha(1.0) == pytest.approx(1 / (8 * np.pi ** 2))
    assert guaranteed_alpha(1.0, 3) == pytest.approx(fundamental_coefficient(6, 3))


def test_radius_examples():
    g = build_grid(4, 1.0, 2000, q=0.999)
    zero = RadialField.zeros(g)
    for gamma, target in ((1.0, np.exp(-1)), (0.5, np.exp(-0.5))):
        r = supersolution_radius(gamma, 1.0, zero)
        i = int(np.searchsorted(g.nodes, r))
        assert r <= target < g.nodes[i + 1]
    phi = barrier_phi(A, 2, g)
    radii = [supersolution_radius(1.0, C, phi) for C in (0.1, 1.0, 5.0, 10.0)]
    assert all(a >= b for a, b in zip(radii, radii[1:]))
    with pytest.raises(ValueError):
        supersolution_radius(1.0, 1e3, phi)


def test_alpha_zero_converges_immediately(grid):
    rep = monotone_solve(ProblemSpec(2, grid, A, SQ, 0.0))
    assert rep.converged and rep.iterations == 1
    assert np.all(rep.solution.total() == 0)


def test_model_problem(barrier):
    alpha = guaranteed_alpha(1.0) / 2
    rep = monotone_solve(ProblemSpec(2, barrier.grid, A, SQ, alpha), barrier.field, keep_iterates=True)
    assert rep.converged
    assert rep.monotonicity_violations == 0 and rep.below_barrier
    assert all(a <= b for a, b in zip(rep.sup_norm_history, rep.sup_norm_history[1:]))
    assert rep.residual < 10 * 1e-8


@pytest.mark.parametrize("fraction", [0.25, 0.9])
def test_large_charge_iterates(barrier, fraction):
    alpha = fraction * barrier_charge(1.0)
    rep = monotone_solve(ProblemSpec(2, barrier.grid, A, SQ, alpha), barrier.field, keep_iterates=True)
    assert rep.converged and rep.iterations >= 3
    prev_u = prev_w = np.zeros(barrier.grid.n)
    for u, w in rep.iterates:
        assert np.all(u >= prev_u) and np.all(w >= prev_w)
        prev_u, prev_w = u, w
    ub = barrier.field.restrict(barrier.grid).total()
    assert np.all(rep.solution.total() <= ub)
    u = rep.solution
    fixed = navier_solve(2, A(barrier.grid.nodes) * SQ(u.total()), [alpha, 0.0], barrier.grid)
    assert np.max(np.abs(fixed.total() - u.total())) <= 10 * 1e-8 * np.max(np.abs(u.total()))


def test_comparison_in_alpha(barrier):
    lo = monotone_solve(ProblemSpec(2, barrier.grid, A, SQ, 5.0), barrier.field)
    hi = monotone_solve(ProblemSpec(2, barrier.grid, A, SQ, 20.0), barrier.field)
    assert np.all(lo.solution.total() <= hi.solution.total())


def test_exponential_blows_through_barrier(grid):
    f = Nonlinearity.exponential(1.0)
    bar = Barrier.build(A, 2, grid, 1.0, 1.0)
    ok = monotone_solve(ProblemSpec(2, bar.grid, A, f, guaranteed_alpha(1.0)), bar.field)
    assert ok.converged
    bad = monotone_solve(ProblemSpec(2, bar.grid, A, f, 1.5 * barrier_charge(1.0)), bar.field)
    assert bad.status == "diverged"
    assert bad.barrier_violation["u"] > bad.barrier_violation["barrier"]


def test_max_alpha_bisection(grid):
    f = Nonlinearity.exponential(1.0)
    bar = Barrier.build(A, 2, grid, 1.0, 1.0)
    a_max = max_alpha(ProblemSpec(2, bar.grid, A, f, 1.0), bar.field)
    assert guaranteed_alpha(1.0) < a_max < 2 * barrier_charge(1.0)
    assert monotone_solve(ProblemSpec(2, bar.grid, A, f, a_max), bar.field).converged


def test_admissible_barrier(grid):
    phi = barrier_phi(A, 2, grid)
    cubic = Nonlinearity.power(3)
    for alpha in (0.005, 0.01, 0.02):
        gamma, C, r = admissible_barrier(cubic, alpha, phi)
        assert guaranteed_alpha(gamma) >= alpha * (1 - 1e-12)
        assert 0 < r < 1
    f = Nonlinearity.exponential(1.0)
    gamma, C, r = admissible_barrier(f, guaranteed_alpha(1.0), phi)
    assert gamma == 1.0 and C == 1.0
    with pytest.raises(ValueError):
        admissible_barrier(f, 2 * guaranteed_alpha(1.0), phi)
    # large charges force small gamma, and the barrier ball shrinks below eps
    with pytest.raises(ValueError):
        admissible_barrier(cubic, 0.1, phi)
    with pytest.raises(ValueError):
        admissible_barrier(Nonlinearity.exp_power(2), 1.0, phi)


def test_problem_validation(grid):
    with pytest.raises(ValueError):
        ProblemSpec(3, grid, A, SQ)
    with pytest.raises(ValueError):
        ProblemSpec(2, grid, A, SQ, -1.0)
    assert ProblemSpec(2, grid, A, SQ).validate().passed


def test_report_serialization(barrier, tmp_path):
    rep = monotone_solve(ProblemSpec(2, barrier.grid, A, SQ, 10.0), barrier.field, keep_iterates=True)
    json.dumps(rep.to_dict())
    path = tmp_path / "iterates.csv"
    rep.write_iterates_csv(path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:3] == ["r", "u_1", "neg_laplacian_u_1"]
    assert len(rows) == barrier.grid.n + 1
    last = np.array([float(row[-2]) for row in rows[1:]])
    assert np.array_equal(last, rep.solution.total())
    plain = monotone_solve(ProblemSpec(2, barrier.grid, A, SQ, 10.0), barrier.field)
    with pytest.raises(ValueError):
        plain.write_iterates_csv(path)


def test_order_three():
    g = build_grid(6, 1.0, 512)
    f = Nonlinearity.power(3)
    bar = Barrier.build(A, 3, g, 1.0, f.witness_constant(1.0))
    for k in range(3):
        assert np.all(bar.field.stage(k).total() >= 0)
    rep = monotone_solve(ProblemSpec(3, bar.grid, A, f, 0.5 * barrier_charge(1.0, 3)), bar.field)
    assert rep.converged and rep.monotonicity_violations == 0 and rep.below_barrier
