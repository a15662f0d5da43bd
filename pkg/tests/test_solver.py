import numpy as np
import pytest
from scipy.integrate import quad

from borelpde.coefficients import CoefficientSet, Monomial
from borelpde.core import BorelFunction, norm
from borelpde.oracles import brute_convolution, ex1_form, far_field_state
from borelpde.problems import Custom, Ex1
from borelpde.solver import (DivergenceError, MaxIterationsError, NonlinearOperator, ProblemSpec,
                             SolverError, apply_N, build_F0, default_y_points, phi_weights,
                             picard_solve, recover_physical)
from borelpde.transforms import laplace_back


def custom_problem(entries, r_terms=(), K=0, T=0.05, **kw):
    full = {(j, k): () for j in range(4) for k in range(K + 1)}
    full.update(entries)
    cset = CoefficientSet("custom", full, K, 2.0, tuple(r_terms))
    return ProblemSpec(Custom(cset), T=T, n_nodes=128, time_steps=8, nu_run=8.0, **kw)


@pytest.mark.parametrize("kwargs", [dict(phi=0.6), dict(theta=0.5, phi=0.4), dict(picard_tol=0.0),
                                    dict(T=-1.0), dict(ball_factor=1.0), dict(max_iter=0)])
def test_problem_spec_invariants(kwargs):
    with pytest.raises(ValueError):
        ProblemSpec(Ex1(0.5), **kwargs)


def test_phi_weights_continuous_across_series_switch():
    z = np.array([0.99e-4, 1.01e-4, 1e-4 * (1 + 1j)])
    w0, w1 = phi_weights(z)
    zl = z.astype(complex)
    assert np.allclose(w0, -np.expm1(-zl) / zl, rtol=1e-12)
    assert np.allclose(w1, (1 - np.exp(-zl) * (1 + zl)) / zl ** 2, rtol=1e-7)
    w0, w1 = phi_weights(np.array([0.0]))
    assert w0[0] == 1 and w1[0] == 0.5


def test_F0_closed_form_ex1():
    problem = ProblemSpec(Ex1(0.5), T=0.05, n_nodes=128, time_steps=8)
    F0 = build_F0(problem)
    p = problem.grid().points
    for i, t in enumerate(problem.time_grid().times[1:], 1):
        ref = -3 * p * np.expm1(-p ** 3 * t) / p ** 3
        assert np.allclose(F0.values()[i], ref, rtol=1e-10, atol=1e-300)
    assert np.allclose(F0.values()[0], 0)


def test_zero_forcing_gives_zero_F0():
    problem = custom_problem({(0, 0): (Monomial(1.0, 2),)})
    assert norm(build_F0(problem), 8.0) == 0


def test_single_term_against_nested_quadrature():
    # only B_{2,0} = 1 (b_{2,0} = 1/y), F = 1: source (p^2 * 1) * 1 = p^3/3
    problem = custom_problem({(2, 0): (Monomial(1.0, 1),)})
    op = NonlinearOperator(problem)
    one = BorelFunction(op.grid, 0.0, np.ones(op.grid.n))
    N = apply_N(one, problem, op)
    T = problem.T
    for i in (10, 60, 127):
        p = op.grid.points[i]
        conv = brute_convolution(lambda s: s ** 2, lambda s: np.ones_like(s), p, 10000)
        re = quad(lambda tau: np.exp(-(p ** 3).real * (T - tau)), 0, T, epsabs=0, epsrel=1e-12)[0]
        assert N.values()[-1, i] == pytest.approx(conv * re, rel=1e-6)


def test_linear_problem_neumann_series():
    problem = custom_problem({(0, 0): (Monomial(0.5, 2),), (1, 0): (Monomial(-0.3, 1),)},
                             r_terms=(Monomial(1.0, 2),), T=0.2)
    op = NonlinearOperator(problem)
    G = lambda X: op.apply(X) - op.F0
    F0 = op.F0
    neumann = F0 + G(F0) + G(G(F0))
    it = op.apply(op.apply(F0))
    assert np.allclose(it.values(), neumann.values(), rtol=1e-12, atol=1e-14)
    res = picard_solve(problem, operator=op)
    fixed = res.F - G(res.F)
    assert norm(fixed - F0, 8.0) <= 1e-9 * norm(F0, 8.0)
    assert res.certificate is None


def test_ex1_solve(ex1_run):
    problem, res = ex1_run
    assert res.iterations <= 30
    assert max(res.contraction_ratios) < 1
    assert res.residual < 1e-8
    assert res.certified and res.certificate.satisfied
    assert res.nu_norm_history[0] == pytest.approx(res.F0_norm)


def test_state_at_matches_nodes_and_derivative(ex1_run):
    problem, res = ex1_run
    tg = problem.time_grid()
    F, _ = res.state_at(tg.times[5])
    assert np.allclose(F.values()[0], res.F.values()[5], rtol=1e-12, atol=1e-300)
    t, h = 0.031, 1e-6
    Fp, _ = res.state_at(t + h)
    Fm, _ = res.state_at(t - h)
    _, Ft = res.state_at(t)
    fd = (Fp.values() - Fm.values()) / (2 * h)
    assert np.max(np.abs(fd - Ft.values())) < 1e-5 * np.max(np.abs(Ft.values()))
    with pytest.raises(ValueError):
        res.state_at(1.0)


def test_recover_physical_ex1(ex1_run):
    problem, res = ex1_run
    y = default_y_points(problem)
    tab = recover_physical(res, problem, y, [0.0, problem.T])
    assert np.allclose(tab.f[0], 0)
    # error column is the rigorous Laplace tail bound, largest near |y| = rho
    assert np.all(tab.error < 1e-5 * np.max(np.abs(tab.f)))
    assert np.allclose(tab.H[0], tab.x[0] ** 0.5)


def test_tilted_ray_against_far_field_series():
    problem = ProblemSpec(Ex1(0.5), T=0.05, theta=0.2, nu_run=8.0, n_nodes=128, time_steps=8)
    res = picard_solve(problem)
    y = default_y_points(problem)
    F, _ = res.state_at(problem.T)
    f = laplace_back(F, y, 8.0).value
    x = problem.example.x_of_y(y, problem.T)
    H = problem.example.H_from_f(f, y, problem.T)
    form = ex1_form(0.5)
    T = problem.T
    ref = np.array([T ** form.a * far_field_state(form, xx * T ** -form.b, 12)[0][0] for xx in x])
    corr = (H / x ** 0.5 - 1) / (ref / x ** 0.5 - 1) - 1
    assert np.max(np.abs(corr)) < 1e-6


def test_divergence_is_reported():
    problem = ProblemSpec(Ex1(0.5), T=2.0, nu_run=0.5, n_nodes=64, time_steps=8, max_iter=8)
    with pytest.raises(DivergenceError) as info:
        picard_solve(problem)
    assert "ratios" in info.value.history


def test_max_iterations_is_reported():
    problem = ProblemSpec(Ex1(0.5), T=0.05, nu_run=8.0, n_nodes=64, time_steps=4, max_iter=2,
                          picard_tol=1e-15)
    with pytest.raises(MaxIterationsError):
        picard_solve(problem)
    assert issubclass(MaxIterationsError, SolverError)
