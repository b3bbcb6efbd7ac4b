"""Radial solvers and checks for polyharmonic equations with isolated singularities.

    (-Delta)^m u = a(x) f(u) + sum_i alpha_i (-Delta)^i delta_0   in B_R subset R^(2m)

with Navier boundary data.  Singular parts are carried analytically as
combinations of fundamental solutions; regular parts live on graded radial
grids.
"""
__version__ = "0.1.0"

from .analysis import (  # noqa: E402
    AsymptoticFit,
    alpha_removability_check,
    beta_vanishing_check,
    comparison_property_check,
    estimate_charges,
    exp_integrability_check,
    l1_norm,
    log_example_coefficients,
    regularity_bootstrap_check,
    verify_log_example,
)
from .calculus import (  # noqa: E402
    RadialField,
    ball_integral,
    charge_flux,
    neg_laplacian,
    polyharmonic_apply,
    radial_integral,
    radial_laplacian,
)
from .fundamental import (  # noqa: E402
    biharmonic_normalization,
    exp_integrability_threshold,
    fundamental_biharmonic,
    fundamental_laplace,
    polyharmonic_gamma,
    polyharmonic_fundamental,
)
from .greens import navier_solve, poisson_solve  # noqa: E402
from .grid import RadialGrid, build_grid, grid_from_descriptor  # noqa: E402
from .iteration import (  # noqa: E402
    Barrier,
    ProblemSpec,
    barrier_charge,
    barrier_phi,
    guaranteed_alpha,
    max_alpha,
    monotone_solve,
    supersolution,
    supersolution_radius,
)
from .nonlinearity import Nonlinearity, Weight, classify_growth, validate_hypotheses  # noqa: E402
