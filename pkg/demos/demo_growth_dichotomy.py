r"""
Growth of f decides which charges survive
=========================================

Quadratic or faster growth rules out the :math:`\Gamma` charge, because
:math:`f(\beta \Gamma)` fails to be integrable near the origin.
Super-exponential growth rules out the log charge as well.  Both facts
show up as divergent radial integrals.
"""
from polysing import (Nonlinearity, Weight, alpha_removability_check,
                      beta_vanishing_check, build_grid, classify_growth)

grid = build_grid(4, 1.0, 512)
a = Weight.power_law(0)



def verdict(check):
    if not check.applicable:
        return "n/a"
    return "diverges" if check.diverged else "finite"


for name, f in [("t", Nonlinearity.power(1)), ("t^2", Nonlinearity.power(2)),
                ("e^t - 1", Nonlinearity.exponential(1.0)), ("e^(t^2)", Nonlinearity.exp_power(2))]:
    g = classify_growth(f)
    beta = beta_vanishing_check(f, a, 1.0, grid)
    alpha = alpha_removability_check(f, a, 1.0, grid)
    print(f"{name:8s} class={g.label:18s} beta check: {verdict(beta):8s} alpha check: {verdict(alpha)}")
