import numpy as np
import pytest

from polysing.calculus import laplacian_values
from polysing.fundamental import (
    biharmonic_normalization,
    exp_integrability_threshold,
    fundamental_biharmonic,
    fundamental_coefficient,
    fundamental_laplace,
    polyharmonic_gamma,
    polyharmonic_fundamental,
    surface_area,
)

PI = np.pi


def test_surface_areas():
    assert surface_area(4) == pytest.approx(2 * PI ** 2)
    assert surface_area(7) == pytest.approx(16 * PI ** 3 / 15)


def test_biharmonic_n4():
    assert biharmonic_normalization(4) == pytest.approx(1 / (8 * PI ** 2))
    assert fundamental_biharmonic(4, 5.0) == 0.0
    assert fundamental_biharmonic(4, 5.0 / np.e) == pytest.approx(1 / (8 * PI ** 2))
    with pytest.raises(ValueError):
        fundamental_biharmonic(4, 0.0)
    with pytest.raises(ValueError):
        fundamental_biharmonic(4, -1.0)


def test_biharmonic_other_dimensions():
    assert biharmonic_normalization(6) == pytest.approx(fundamental_coefficient(6, 2))
    assert fundamental_biharmonic(3, 2.0) == 2.0
    assert fundamental_biharmonic(2, 1.0) == pytest.approx(np.log(5.0))


def test_laplace():
    assert fundamental_laplace(4, 1.0) == pytest.approx(1 / (4 * PI ** 2))
    r = np.array([0.1, 0.7, 2.0])
    assert np.allclose(fundamental_laplace(4, 2 * r) / fundamental_laplace(4, r), 0.25)
    assert np.allclose(2 * fundamental_laplace(4, r), 1 / (2 * PI ** 2 * r ** 2))
    with pytest.raises(ValueError):
        fundamental_laplace(2, 1.0)
    with pytest.raises(ValueError):
        fundamental_laplace(4, 0.0)


def test_coefficients_match_closed_forms():
    assert fundamental_coefficient(4, 2) == pytest.approx(1 / (8 * PI ** 2))
    assert fundamental_coefficient(6, 2) == pytest.approx(1 / (16 * PI ** 3))
    assert fundamental_coefficient(6, 3) == pytest.approx(1 / (64 * PI ** 3))
    with pytest.raises(ValueError):
        fundamental_coefficient(6, 4)


@pytest.mark.parametrize("N", [4, 6, 8])
def test_chain_relation(N):
    # -Delta G_(j+1) = G_j away from the origin
    r = np.geomspace(1e-2, 1.0, 4001)
    for j in range(1, N // 2):
        lap = laplacian_values(r, polyharmonic_fundamental(N, j + 1, r), N)[1:-1]
        ref = polyharmonic_fundamental(N, j, r)[1:-1]
        assert np.max(np.abs(-lap - ref) / ref) < 1e-5
    lap1 = laplacian_values(r, polyharmonic_fundamental(N, 1, r), N)[1:-1]
    assert np.max(np.abs(lap1) * r[1:-1] ** N) < 1e-8


def test_integrability_constants():
    assert polyharmonic_gamma(2) == pytest.approx(8 * PI ** 2)
    assert polyharmonic_gamma(3) == pytest.approx(64 * PI ** 3)
    assert polyharmonic_gamma(3) == pytest.approx(60 * 16 * PI ** 3 / 15)
    assert exp_integrability_threshold(2) == pytest.approx(32 * PI ** 2)
