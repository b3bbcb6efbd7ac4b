"""Fundamental solutions of powers of the Laplacian in even dimension.

In R^N with N = 2m the radial functions G_1, ..., G_m defined by

    (-Delta)^j G_j = delta_0,        -Delta G_{j+1} = G_j  (r > 0)

are

    G_j(r) = c_j r^(2j - N)          for 2j < N,
    G_m(r) = c_m log(s / r)          for 2j = N,

with c_1 = 1 / ((N - 2) |S^(N-1)|).  G_1 is the Newtonian potential Gamma,
and for N = 4, G_2 = log(s/r) / (8 pi^2) is the biharmonic fundamental
solution Phi.  The log scale ``s`` only shifts G_m by a constant.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import gamma as gamma_fn

DEFAULT_LOG_SCALE = 5.0


@lru_cache(maxsize=None)
def surface_area(N: int) -> float:
    """|S^(N-1)| = 2 pi^(N/2) / Gamma(N/2); 2 pi^2 for N = 4."""
    return float(2.0 * np.pi ** (N / 2.0) / gamma_fn(N / 2.0))


@lru_cache(maxsize=None)
def fundamental_coefficient(N: int, j: int) -> float:
    """Normalization c_j of G_j in R^N (N even, 1 <= j <= N/2)."""
    if N % 2 or N < 4:
        raise ValueError("N must be even and >= 4")
    if not 1 <= j <= N // 2:
        raise ValueError(f"order j={j} outside 1..{N // 2}")
    c = 1.0 / ((N - 2) * surface_area(N))
    for k in range(1, j):
        if k + 1 < N // 2:
            c = c / ((N - 2 * k - 2) * (2 * k))
        else:
            c = c / (N - 2)
    return c


def _check_r(r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("fundamental solutions are evaluated at r > 0 only")
    return r


def polyharmonic_fundamental(N: int, j: int, r, log_scale: float = DEFAULT_LOG_SCALE):
    """G_j(r) in R^N."""
    r = _check_r(r)
    c = fundamental_coefficient(N, j)
    if 2 * j == N:
        return c * np.log(log_scale / r)
    return c * r ** (2 * j - N)


def polyharmonic_fundamental_derivative(N: int, j: int, r):
    """d/dr G_j(r); independent of the log scale."""
    r = _check_r(r)
    c = fundamental_coefficient(N, j)
    if 2 * j == N:
        return -c / r
    p = 2 * j - N
    return c * p * r ** (p - 1)


def fundamental_laplace(N: int, r):
    """Gamma(r) = 1 / ((N-2) |S^(N-1)| r^(N-2)), the fundamental solution of -Delta."""
    if N < 3:
        raise ValueError("the Newtonian potential needs N >= 3")
    r = _check_r(r)
    return 1.0 / ((N - 2) * surface_area(N) * r ** (N - 2))


def biharmonic_normalization(N: int) -> float:
    """a_N in Phi = a_N * profile.

    N = 4 and N >= 5 carry the normalization that makes Delta^2 Phi = delta_0
    (a_4 = 1 / (8 pi^2)).  For N = 2, 3 the profile is returned unnormalized
    (a_N = 1).
    """
    if N == 4:
        return 1.0 / (8.0 * np.pi ** 2)
    if N >= 5:
        return 1.0 / (2.0 * (N - 4) * (N - 2) * surface_area(N))
    if N in (2, 3):
        return 1.0
    raise ValueError(f"unsupported dimension {N}")


def fundamental_biharmonic(N: int, r, log_scale: float = DEFAULT_LOG_SCALE):
    """Phi(r) = a_N * {r^(4-N), log(s/r), r, r^2 log(s/r)} for N >= 5, 4, 3, 2."""
    r = _check_r(r)
    a = biharmonic_normalization(N)
    if N >= 5:
        return a * r ** (4 - N)
    if N == 4:
        return a * np.log(log_scale / r)
    if N == 3:
        return a * r
    return a * r ** 2 * np.log(log_scale / r)


@lru_cache(maxsize=None)
def polyharmonic_gamma(m: int) -> float:
    """gamma_m = ((2m-1)! / 2) |S^(2m)|; 8 pi^2 for m = 2, 64 pi^3 for m = 3."""
    from math import factorial

    return factorial(2 * m - 1) / 2.0 * surface_area(2 * m + 1)


def exp_integrability_threshold(m: int) -> float:
    """Largest admissible delta in exp(delta |h| / ||f||_1) on R^(2m); 32 pi^2 for m = 2."""
    return 2 * m * polyharmonic_gamma(m)
