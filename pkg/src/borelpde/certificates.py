"""Numerical evaluation of the ball-mapping and contraction conditions.

All unknown constants (``C``, ``C_j``) are inputs with default 1, so every
certificate is relative to the configured constant.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import BorelFunction, make_grid, make_time_grid, norm


@dataclass(frozen=True)
class Certificate:
    example: str
    b: float
    nu: float
    T: float
    ball_lhs: float
    contraction_lhs: float
    satisfied: bool
    margin: float
    C: float = 1.0
    reason: str = ""
    details: dict = field(default_factory=dict)

    @property
    def ball_ok(self) -> bool:
        return self.ball_lhs < 1

    @property
    def contraction_ok(self) -> bool:
        return self.contraction_lhs < 1


def _finish(example, b, nu, T, ball, contraction, C, reason="", **details) -> Certificate:
    ok = bool(ball < 1 and contraction < 1 and not reason)
    margin = float(min(1 - ball, 1 - contraction))
    return Certificate(example, float(b), float(nu), float(T), float(ball), float(contraction),
                       ok, margin, float(C), reason, details)


def _failed(example, b, nu, T, C, reason, **details) -> Certificate:
    return Certificate(example, float(b), float(nu), float(T), np.inf, np.inf, False, -np.inf,
                       float(C), reason, details)


def _check_b(b):
    if not b > 1:
        raise ValueError("ball factor b must exceed 1")


def general_certificate(alpha_js, beta, A_b, A_r, T, nu, b, C_js=(1.0, 1.0, 1.0, 1.0),
                        alpha_r=1.0, A_fI=0.0, C_phi=1.0, F0_norm=None) -> Certificate:
    """Generic ball and contraction conditions.

    ``F0_norm`` replaces the a-priori bound ``C_phi (T A_r + A_fI)(nu/2)^(1-alpha_r)``
    when a measured value is available.
    """
    _check_b(b)
    bound = C_phi * (T * A_r + A_fI) * (nu / 2) ** (1 - alpha_r)
    f0 = bound if F0_norm is None else F0_norm
    q = (nu / 2) ** (-beta) * b * f0
    if q >= 1:
        return _failed("general", b, nu, T, C_phi, "(nu/2)^-beta b |F0| >= 1",
                       q=q, F0_norm=f0, F0_bound=bound)
    S = A_b * sum(c * (nu / 2) ** (-a) * T ** ((3 - j) / 3)
                  for j, (a, c) in enumerate(zip(alpha_js, C_js)))
    return _finish("general", b, nu, T, 1 / b + S / (1 - q), S / (1 - q) ** 2, C_phi,
                   q=q, F0_norm=f0, F0_bound=bound)


# --- measured forcing norms ---------------------------------------------------

def measured_F0_norm(example, T, nu, n=256, time_steps=8, theta=0.0) -> float:
    """Discrete nu-norm of F0 for a built-in example (closed form or stepped)."""
    from .problems import Ex2
    from .solver import ProblemSpec, NonlinearOperator
    if T == 0:
        return 0.0
    if isinstance(example, Ex2):
        spec = ProblemSpec(example, T=T, theta=theta, n_nodes=n, time_steps=time_steps, nu_run=nu)
        return norm(NonlinearOperator(spec).F0, nu)
    from .solver import phi_weights
    from .transforms import ilt_power_law
    grid = make_grid(theta, 40.0 / nu, n, 2.0)
    tg = make_time_grid(T, time_steps)
    (term,) = example.coefficients().r_terms
    R = ilt_power_law(term.power, term.c, grid)
    w0, _ = phi_weights(np.outer(tg.times, grid.points ** 3))
    F0 = BorelFunction(grid, R.sigma, R.samples * tg.times[:, None] * w0, tg)
    return norm(F0, nu)


# --- example-specific conditions ----------------------------------------------

def _primed_pairs(kmax=3):
    return [(j, k) for j in range(4) for k in range(kmax + 1) if (j, k) != (3, 0)]


def ex1_certificate(gamma, T, nu, b=2.0, C=1.0, A_r=None, F0_norm=None) -> Certificate:
    """Example 1 sums with the forcing constant ``A_r = |F0|_nu nu / T``."""
    from .problems import Ex1
    _check_b(b)
    if T == 0:
        return _finish("ex1", b, nu, T, 1 / b, 0.0, C, A_r=0.0)
    if A_r is None:
        f0 = F0_norm if F0_norm is not None else measured_F0_norm(Ex1(gamma), T, nu)
        A_r = f0 * nu / T
    ball = contraction = 0.0
    for j, k in _primed_pairs():
        term = (b * A_r * T) ** k * nu ** (-2 * k + j - 3) * T ** ((3 - j) / 3)
        ball += term
        contraction += (k + 1) * term
    return _finish("ex1", b, nu, T, 1 / b + C * ball, C * contraction, C,
                   A_r=A_r, scaling=T ** (1 / 3) / nu)


def ex2_certificate(T, nu, b=2.0, C=1.0, eps=None) -> Certificate:
    """Conditions in the single variable ``x = T nu^(-2/3)``."""
    _check_b(b)
    x = T * nu ** (-2.0 / 3)
    ball = contraction = 0.0
    for j, k in _primed_pairs():
        term = x ** ((3 - j) / 3) * (b * x) ** k
        ball += term
        contraction += (k + 1) * b ** k * term
    reason = ""
    if eps is not None and not x < eps:
        reason = f"T nu^(-2/3) = {x:.4g} not below eps = {eps}"
    return _finish("ex2", b, nu, T, 1 / b + C * ball + C * x, C * contraction + C * x, C,
                   reason, scaling=x)


def ex3_certificate(delta, T, nu, b=2.0, C=1.0, K_F0=None, F0_norm=None) -> Certificate:
    """Infinite-k sums with ``q = b |F0|_nu / nu`` summed in closed form."""
    from .problems import Ex3
    _check_b(b)
    if T == 0:
        return _finish("ex3", b, nu, T, 1 / b, 0.0, C, q=0.0, T_nu2=0.0, T_nu3=0.0)
    if K_F0 is None:
        f0 = F0_norm if F0_norm is not None else measured_F0_norm(Ex3(delta), T, nu)
        K_F0 = f0 * nu / T
    q = b * K_F0 * T / nu ** 2
    details = dict(K=K_F0, q=q, T_nu2=T / nu ** 2, T_nu3=T / nu ** 3)
    if q >= 1:
        return _failed("ex3", b, nu, T, C, "b K T nu^-2 >= 1", **details)
    x = T / nu ** 3
    head = sum(x ** ((3 - j) / 3) for j in range(3))
    ball = head / (1 - q) + q / (1 - q)
    contraction = head / (1 - q) ** 2 + (1 / (1 - q) ** 2 - 1)
    return _finish("ex3", b, nu, T, 1 / b + C * ball, C * contraction, C, **details)


def certificate_for(problem, F0_norm=None):
    """Certificate matching a ProblemSpec, or None for custom problems."""
    ex = problem.example
    name = getattr(ex, "name", "")
    T, nu, b, C = problem.T, problem.nu_run, problem.ball_factor, problem.C
    if name == "ex1":
        return ex1_certificate(ex.gamma, T, nu, b, C, F0_norm=F0_norm)
    if name == "ex2":
        return ex2_certificate(T, nu, b, C)
    if name == "ex3":
        return ex3_certificate(ex.delta, T, nu, b, C, F0_norm=F0_norm)
    return None


def least_certified_nu(cert_fn, T, nu_lo=1e-3, nu_hi=1e6, rtol=1e-6) -> float:
    """Smallest nu with ``cert_fn(T, nu).satisfied``, by bisection in log nu."""
    if not cert_fn(T, nu_hi).satisfied:
        raise ValueError("no certified nu below the search bound")
    if cert_fn(T, nu_lo).satisfied:
        return nu_lo
    lo, hi = np.log(nu_lo), np.log(nu_hi)
    while hi - lo > rtol:
        mid = (lo + hi) / 2
        if cert_fn(T, np.exp(mid)).satisfied:
            hi = mid
        else:
            lo = mid
    return float(np.exp(hi))


def certificate_sweep(cert_fn, Ts, nus):
    """Certificates on the tensor grid ``Ts x nus`` (row-major in T)."""
    if len(Ts) == 0 or len(nus) == 0:
        raise ValueError("empty sweep range")
    return [cert_fn(T, nu) for T in Ts for nu in nus]
