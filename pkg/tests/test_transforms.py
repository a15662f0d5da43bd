import numpy as np
import pytest
from scipy.special import gamma

from borelpde.core import make_grid, make_time_grid
from borelpde.transforms import (ContourSpec, ScaledILTSpec, ilt_contour, ilt_power_law,
                                 ilt_scaled_ex2, laplace_back)


@pytest.mark.parametrize("alpha", [1.0, 4 / 3, 2.0, 3.0])
def test_round_trip(alpha):
    g = make_grid(0.0, 5.0, 256, 2.0)
    F = ilt_power_law(alpha, 1.0, g)
    y = np.array([4.0, 8.0, 16.0])
    res = laplace_back(F, y)
    assert np.max(np.abs(res.value / y ** -alpha - 1)) < 1e-5


def test_laplace_back_example_and_tail():
    g = make_grid(0.0, 20.0, 256, 2.0)
    F = ilt_power_law(4 / 3, 1.0, g)
    res = laplace_back(F, 5.0)
    assert res.value[0] == pytest.approx(5.0 ** (-4 / 3), rel=1e-10)
    short = make_grid(0.0, 2.0, 256, 2.0)
    r2 = laplace_back(ilt_power_law(3.0, 1.0, short), 4.0, nu_min=2.0)
    # p^2/2 has decreasing weighted magnitude past p_max at nu = 2, so the tail is a bound
    assert abs(r2.value[0] - 4.0 ** -3) <= r2.tail[0] * 1.01 + 1e-14


def test_laplace_back_half_plane():
    g = make_grid(0.0, 5.0, 64)
    F = ilt_power_law(2.0, 1.0, g)
    with pytest.raises(ValueError):
        laplace_back(F, 1.0, nu_min=2.0)


def test_laplace_back_tilted_ray():
    g = make_grid(-0.3, 8.0, 256, 2.0)
    F = ilt_power_law(2.0, 1.0, g)
    y = 6.0 * np.exp(0.3j)
    assert laplace_back(F, y).value[0] == pytest.approx(y ** -2, rel=1e-8)


def test_power_law_rule():
    g = make_grid(0.0, 2.0, 32)
    F = ilt_power_law(2.0, 3.0, g)
    assert F.sigma == 1.0 and np.allclose(F.values()[0], 3 * g.points)
    with pytest.raises(ValueError):
        ilt_power_law(0.0, 1.0, g)


@pytest.mark.parametrize("g_fn, exact, sigma", [
    (lambda y, t: y ** -2, lambda p: p, 1.0),
    (lambda y, t: y ** -1.0, lambda p: 1 + 0 * p, 0.0),
    (lambda y, t: 3 * y ** -2, lambda p: 3 * p, 1.0),
    (lambda y, t: y ** (-4 / 3), lambda p: p ** (1 / 3) / gamma(4 / 3), 1 / 3),
])
def test_contour_matches_closed_forms(g_fn, exact, sigma):
    grid = make_grid(0.2, 6.0, 64, 2.0)
    F = ilt_contour(g_fn, grid, sigma=sigma)
    ref = exact(grid.points)
    assert np.max(np.abs(F.values()[0] - ref) / np.abs(ref)) < 1e-6


def test_contour_gamma_value():
    """Coefficient c = -g(g-2)/(g-1)^2 at g = 1/2 is 3."""
    g = 0.5
    assert -g * (g - 2) / (g - 1) ** 2 == pytest.approx(3.0)


def test_contour_spec_validation():
    with pytest.raises(ValueError):
        ContourSpec(apex=-1)
    with pytest.raises(ValueError):
        ContourSpec(phi=0.7)
    with pytest.raises(ArithmeticError):
        ilt_contour(lambda y, t: y ** -2, make_grid(0.0, 2.0, 32), spec=ContourSpec(r_max=1.0, apex=0.25))


@pytest.mark.parametrize("beta, delta", [(1.5, 2.0), (3.5, -1.0), (2.5, 1 / 3)])
def test_scaled_transform_at_t0(beta, delta):
    grid = make_grid(0.0, 5.0, 64, 3.0)
    spec = ScaledILTSpec(beta, delta)
    F = ilt_scaled_ex2(spec, grid, [0.0])
    ap = spec.alpha_prime
    ref = 1.5 ** (-2 * beta / 3) * grid.points ** (ap - 1) / gamma(ap)
    assert np.max(np.abs(F.values()[0] / ref - 1)) < 1e-10


def test_scaled_transform_laplace_back():
    grid = make_grid(0.0, 5.0, 256, 3.0)
    tg = make_time_grid(0.05, 2)
    spec = ScaledILTSpec(2.5, 1.0)
    F = ilt_scaled_ex2(spec, grid, tg.times, time_grid=tg)
    y = np.array([10.0, 20.0])
    for i, t in enumerate(tg.times):
        x = t + (1.5 * y) ** (2 / 3)
        got = laplace_back(F, y, 0.0, i).value
        assert np.max(np.abs(got / (x ** -2.5 / y) - 1)) < 1e-8


def test_scaled_transform_subtracted_limit():
    grid = make_grid(0.0, 5.0, 256, 3.0)
    tg = make_time_grid(0.05, 2)
    spec = ScaledILTSpec(1.5, -1.0, subtract_limit=True)
    assert spec.sigma == pytest.approx(-1 / 3)
    F = ilt_scaled_ex2(spec, grid, tg.times, time_grid=tg)
    y = np.array([10.0, 20.0])
    x = 0.05 + (1.5 * y) ** (2 / 3)
    got = laplace_back(F, y, 0.0, 2).value
    exact = x ** -1.5 * y - spec.h0
    assert np.max(np.abs(got - exact) / np.abs(exact)) < 1e-7
    with pytest.raises(ValueError):
        ScaledILTSpec(1.5, -1.0)
