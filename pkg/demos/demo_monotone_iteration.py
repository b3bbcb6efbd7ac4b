r"""
Monotone iteration under a log barrier
======================================

We solve

.. math:: \Delta^2 u = |x|^{-1} u^2 + \alpha \delta_0

on a small ball with Navier data.  The iteration starts from zero and
solves one linear problem per step.  Since :math:`t^2 \le C e^{t}`, the
profile :math:`\bar u = -\log r + C \varphi` bounds every iterate on the
ball where it stays a supersolution.
"""
import numpy as np

from polysing import (Barrier, Nonlinearity, ProblemSpec, Weight, barrier_charge,
                      build_grid, guaranteed_alpha, monotone_solve)

a = Weight.power_law(-1)
f = Nonlinearity.power(2)
grid = build_grid(4, 1.0, 512)
bar = Barrier.build(a, 2, grid, gamma=1.0, C=f.witness_constant(1.0))
print(f"witness C = {bar.C:.4f}, barrier valid up to r = {bar.radius:.4f}")

###############################################################################
# Sweep the charge up to a large fraction of the barrier mass.

for frac in (0.01, 0.25, 0.5, 0.9):
    alpha = frac * barrier_charge(1.0)
    rep = monotone_solve(ProblemSpec(2, bar.grid, a, f, alpha), bar.field)
    print(f"alpha = {alpha:8.3f}: {rep.status:9s} after {rep.iterations:3d} steps, "
          f"sup u = {rep.sup_norm_history[-1]:.4f}, below barrier = {rep.below_barrier}")

print(f"charge with a guaranteed barrier: {guaranteed_alpha(1.0):.5f}")

###############################################################################
# With :math:`f(t) = e^t - 1` the barrier mass is a hard limit.  Pushing the
# charge past it makes the iterates climb through the barrier.

g = Nonlinearity.exponential(1.0)
bar_e = Barrier.build(a, 2, grid, 1.0, 1.0)
for frac in (0.5, 1.5):
    rep = monotone_solve(ProblemSpec(2, bar_e.grid, a, g, frac * barrier_charge(1.0)), bar_e.field)
    print(f"exponential f, {frac} x barrier mass: {rep.status}")
