import numpy as np
import pytest
from scipy.special import gamma

from borelpde.core import make_grid
from borelpde.properties import (SuiteReport, implied_kernel_constant, kernel_constant,
                                 norm_inequality_suite, power_kernel_suite, random_smooth_function)


def test_random_functions_are_seeded():
    g = make_grid(0.1, 10.0, 64)
    a = random_smooth_function(g, np.random.default_rng(3))
    b = random_smooth_function(g, np.random.default_rng(3))
    assert a.sigma == b.sigma and np.array_equal(a.samples, b.samples)


def test_report_counts_violations():
    rep = SuiteReport()
    rep.record("x", 0.5, None)
    rep.record("x", 1.2, "bad")
    assert rep.checks == 2 and rep.violations == 1 and not rep.ok
    assert rep.worst_ratio["x"] == 1.2


def test_small_norm_suite():
    rep = norm_inequality_suite(n_pairs=5, seed=7)
    assert rep.checks == 5 * 3 * 5 and rep.ok


def test_kernel_constant_alpha_one():
    # alpha = 1: large nu gives sup (1+P^2)(1-e^{-nu P})/nu ~ (1 + 1/nu^2...)/nu behaviour
    K = kernel_constant(1.0, 8.0)
    assert 1 / 8 <= K < 0.2
    with pytest.raises(ValueError):
        kernel_constant(0.0, 1.0)


def test_implied_constant_is_moderate():
    c = implied_kernel_constant(1 / 3, 4.0)
    assert 1.0 < c < 3.0
    assert implied_kernel_constant(2.0, 8.0) == pytest.approx(kernel_constant(2.0, 8.0) * 64 / gamma(2.0))


def test_power_kernel_suite_small():
    rep = power_kernel_suite(n_funcs=3, seed=5)
    assert rep.ok and rep.checks == 3 * 3 * 3
