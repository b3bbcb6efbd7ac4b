r"""
Exponential integrability of biharmonic potentials
==================================================

If :math:`\Delta^2 h = f \ge 0` with :math:`\|f\|_{L^1} = 1`, then
:math:`e^{\delta |h|}` is integrable for every :math:`\delta < 32\pi^2`.
A point mass shows that the bound is sharp: the log profile gives
:math:`e^{\delta h} \sim r^{-\delta / 8\pi^2}`.
"""
import numpy as np

from polysing import build_grid, exp_integrability_check, l1_norm, navier_solve

grid = build_grid(4, 1.0, 512)
r = grid.nodes

rhs = np.exp(-(r / 0.01) ** 2)
rhs /= l1_norm(grid, rhs)
h = navier_solve(2, rhs, [0.0, 0.0], grid)
for d in (8, 16, 24, 31):
    res = exp_integrability_check(h, 1.0, d * np.pi ** 2, 2)
    print(f"concentrated data, delta = {d:2d} pi^2: integral = {res.value:.4g}")

point = navier_solve(2, 0.0, [1.0, 0.0], grid)
for d in (28, 31, 33, 36):
    res = exp_integrability_check(point, 1.0, d * np.pi ** 2, 2)
    print(f"point mass, delta = {d:2d} pi^2: finite = {res.finite}")
