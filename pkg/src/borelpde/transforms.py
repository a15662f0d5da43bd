"""Inverse Laplace transforms into the Borel plane and the transform back.

* ``ilt_power_law``: closed form ``y**-alpha -> p**(alpha-1)/Gamma(alpha)``.
* ``ilt_contour``: ``(1/2 pi i) int e^{p y} g(y) dy`` over a two-leg contour
  ``y = a + i r e^{i phi sgn r}`` with apex ``a = rho1 + 1/|p|``.
* ``ilt_scaled_ex2``: transforms of ``x**-beta y**-delta`` with
  ``x = t + (3y/2)**(2/3)``, after scaling ``y = s/p``.
* ``laplace_back``: ``int_0^{p_max} e^{-p y} F(p) dp`` along the ray.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gamma, roots_jacobi, roots_legendre

from .core import BorelFunction, RayGrid, TimeGrid, interpolation_matrix

TAIL_DECAY = 32.0   # e^{-32} ~ 1e-14


@dataclass(frozen=True)
class ContourSpec:
    """Two-leg contour: apex ``apex (+ 1/|p| if scale_apex)``, legs at ``pi/2 + phi``."""

    apex: float = 1.0
    phi: float = 0.5
    r_max: float | None = None
    n_quad: int = 384
    scale_apex: bool = True
    tol: float = 1e-10

    def __post_init__(self):
        if not self.apex > 0:
            raise ValueError("contour apex must be positive")
        if not 0 < self.phi < np.pi / 6 + 1e-12:
            raise ValueError("leg angle must lie in (0, pi/6)")
        if self.n_quad < 32:
            raise ValueError("n_quad too small")


@dataclass(frozen=True)
class ScaledILTSpec:
    """Term ``x**-beta * y**-delta``; ``subtract_limit`` removes its t-free
    large-y value ``(3/2)**(-2 beta/3) y**-(2 beta/3 + delta)`` first."""

    beta: float
    delta: float
    subtract_limit: bool = False

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        ap = self.alpha_prime
        if ap < -1e-12 or (ap <= 1e-12 and not self.subtract_limit):
            raise ValueError("need 2*beta/3 + delta > 0")

    @property
    def alpha_prime(self) -> float:
        return 2 * self.beta / 3 + self.delta

    @property
    def sigma(self) -> float:
        return self.alpha_prime - 1 + (2.0 / 3 if self.subtract_limit else 0.0)

    @property
    def h0(self) -> float:
        return 1.5 ** (-2 * self.beta / 3)


@dataclass(frozen=True)
class LaplaceResult:
    value: np.ndarray
    tail: np.ndarray


def ilt_power_law(alpha: float, c: complex, grid: RayGrid,
                  time_grid: TimeGrid | None = None) -> BorelFunction:
    """Transform of ``c y**-alpha``: ``c p**(alpha-1)/Gamma(alpha)``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return BorelFunction(grid, alpha - 1, np.full((1, grid.n), c / gamma(alpha), complex), time_grid)


def _leg_rule(length: float, n_quad: int):
    """Composite Gauss-Legendre on [0, length], panels graded toward 0."""
    order = 16
    npan = max(2, n_quad // order)
    edges = length * (np.arange(npan + 1) / npan) ** 2
    x, w = roots_legendre(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (a + (b - a) * (x + 1) / 2).ravel()
    weights = ((b - a) / 2 * w).ravel()
    return nodes, weights


def ilt_contour(g, grid: RayGrid, t: float = 0.0, spec: ContourSpec | None = None,
                sigma: float = 0.0) -> BorelFunction:
    """Numerical inverse Laplace transform of ``g(y, t)`` at the grid nodes.

    ``g`` must accept a complex array ``y`` and a scalar ``t``. The result is
    stored with origin exponent ``sigma`` (the caller's knowledge of the
    small-p behaviour).
    """
    spec = spec or ContourSpec(apex=0.25)
    theta = grid.theta
    decay = np.sin(spec.phi - abs(theta))
    if decay <= 0:
        raise ValueError("leg angle must exceed |theta| for the contour integral to converge")
    s = grid.nodes
    p = grid.points
    length = spec.r_max if spec.r_max is not None else TAIL_DECAY / decay
    rho, wq = _leg_rule(length, spec.n_quad)
    apex = spec.apex + (1.0 / s if spec.scale_apex else 0.0)
    apex = np.broadcast_to(apex, s.shape)
    psi = np.pi / 2 + spec.phi
    total = np.zeros(s.size, complex)
    edge = np.zeros(s.size)
    for sign in (1, -1):
        dirn = np.exp(sign * 1j * psi)
        y = apex[:, None] + (rho[None, :] / s[:, None]) * dirn
        f = np.exp(p[:, None] * y) * g(y, t)
        total += sign * dirn / s * (f @ wq)
        edge = np.maximum(edge, np.abs(f[:, -1]) / s)
    total /= 2j * np.pi
    scale = np.maximum(np.abs(total), 1e-300)
    if np.any(edge / decay > spec.tol * np.maximum(scale, 1.0)):
        raise ArithmeticError("contour tail not negligible; increase r_max")
    return BorelFunction(grid, sigma, total / p ** sigma)


def _scaled_integrand_factor(spec: ScaledILTSpec, z):
    c = (2.0 / 3) ** (2.0 / 3)
    b = spec.beta
    if not spec.subtract_limit:
        return spec.h0 * np.exp(-b * np.log1p(c * z))
    # (h(z) - h(0)) / z, stable at small z
    out = np.empty_like(z)
    small = np.abs(c * z) < 1e-8
    zs = z[small]
    out[small] = -b * c * (1 - (b + 1) * c * zs / 2)
    zl = z[~small]
    out[~small] = np.expm1(-b * np.log1p(c * zl)) / zl
    return spec.h0 * out


def ilt_scaled_ex2(spec: ScaledILTSpec, grid: RayGrid, times, contour: ContourSpec | None = None,
                   time_grid: TimeGrid | None = None) -> BorelFunction:
    """Transform of ``x**-beta y**-delta`` with ``x = t + (3y/2)**(2/3)``.

    With ``y = s/p`` the transform is
    ``p**(a'-1) (1/2 pi i) int_C e^s s**-a' h(t p**(2/3) s**(-2/3)) ds``,
    ``a' = 2 beta/3 + delta``, over a contour with apex 1. With
    ``subtract_limit`` the integrand uses ``h - h(0)`` and the factor
    ``t p**(2/3)`` is pulled out, so sigma becomes ``a' - 1/3``.
    """
    contour = contour or ContourSpec(apex=1.0, scale_apex=False)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    psi = np.pi / 2 + contour.phi
    length = contour.r_max if contour.r_max is not None else (TAIL_DECAY + 1) / np.sin(contour.phi)
    r, wq = _leg_rule(length, contour.n_quad)
    p = grid.points
    ap = spec.alpha_prime
    out = np.zeros((times.size, grid.n), complex)
    extra = 2.0 / 3 if spec.subtract_limit else 0.0
    p23 = p ** (2.0 / 3)
    for sign in (1, -1):
        dirn = np.exp(sign * 1j * psi)
        sv = contour.apex + r * dirn
        base = np.exp(sv) * sv ** (-ap - extra) * wq * dirn * sign
        sm23 = sv ** (-2.0 / 3)
        for it, t in enumerate(times):
            z = t * p23[:, None] * sm23[None, :]
            out[it] += _scaled_integrand_factor(spec, z) @ base
    out /= 2j * np.pi
    if spec.subtract_limit:
        out *= times[:, None]
    return BorelFunction(grid, spec.sigma, out, time_grid)


_LAPLACE_PLANS: dict = {}


def _laplace_plan(grid: RayGrid, sigma: float, order: int = 8):
    key = grid.key + (round(sigma, 12), order)
    plan = _LAPLACE_PLANS.get(key)
    if plan is not None:
        return plan
    g, n = grid.grading, grid.n
    lam = g * (sigma + 1) - 1
    xj, wj = roots_jacobi(order, 0.0, lam)
    u0 = (xj + 1) / 2
    w0 = wj * 2.0 ** (-lam - 1)          # int_0^1 u^lam f(u) du
    xl, wl = roots_legendre(order)
    left = np.arange(1, n)[:, None]
    u1 = (left + (xl[None, :] + 1) / 2).ravel()
    w1 = np.tile(wl / 2, n - 1) * u1 ** lam
    u = np.concatenate([u0, u1])
    w = np.concatenate([w0, w1])
    # s = p_max (u/n)^g, s^sigma ds = p_max^(sigma+1) g n^{-g(sigma+1)} u^lam du
    s = grid.p_max * (u / n) ** g
    w = w * grid.p_max ** (sigma + 1) * g * float(n) ** (-g * (sigma + 1))
    phase = np.exp(1j * grid.theta * (sigma + 1))
    plan = (s, w * phase, interpolation_matrix(grid, s))
    if len(_LAPLACE_PLANS) > 64:
        _LAPLACE_PLANS.clear()
    _LAPLACE_PLANS[key] = plan
    return plan


def laplace_back(F: BorelFunction, y, nu_min: float = 0.0, t_index: int = 0) -> LaplaceResult:
    """``int_0^{p_max} e^{-p y} F(p) dp`` along the ray, with a tail bound.

    ``tail`` bounds the neglected part beyond ``p_max`` for any function
    whose weighted magnitude ``(1+s^2) e^{-nu_min s} |F|`` stays below its
    maximum over the grid.
    """
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    grid = F.grid
    ey = np.real(np.exp(1j * grid.theta) * y)
    if np.any(ey <= nu_min):
        raise ValueError("y lies outside the half-plane of convergence")
    s, w, E = _laplace_plan(grid, F.sigma)
    phi = E @ F.at_time(t_index)
    kern = np.exp(-np.outer(y * np.exp(1j * grid.theta), s))
    value = kern @ (w * phi)
    s_n = grid.nodes
    row = 0 if F.static else t_index
    weighted = np.max(F.magnitudes()[row] * (1 + s_n * s_n) * np.exp(-nu_min * s_n))
    gap = ey - nu_min
    tail = weighted * np.exp(-gap * grid.p_max) / ((1 + grid.p_max ** 2) * gap)
    return LaplaceResult(value, tail)
