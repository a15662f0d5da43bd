"""Ray convolutions with exact treatment of the endpoint weights.

For ``F = p**a phi`` and ``G = p**b psi`` on the same ray,

    (F*G)(p) = p**(a+b+1) * int_0^1 v**a (1-v)**b phi(|p|v) psi(|p|(1-v)) dv,

so the result has origin exponent ``a+b+1`` and the phase factors cancel.
The ``v`` integral is split at 1/2 and each half is mapped with
``v = w**g / 2`` (``g`` the grid grading), which makes the singular weight a
Jacobi weight in ``w`` and keeps interpolation stencils equispaced. Each half
is integrated with composite Gauss rules (Gauss-Jacobi on the first panel).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.special import roots_jacobi, roots_legendre

from .core import BorelFunction, RayGrid, interpolation_matrix

PANEL_CELLS = 4
PANEL_ORDER = 10


@dataclass(frozen=True)
class HalfPlan:
    """Quadrature for ``sum_q W_q a(s_a) b(s_b)`` grouped by target node."""

    sum_matrix: sparse.csr_matrix   # (n, npts) weights
    interp_a: sparse.csr_matrix     # singular side
    interp_b: sparse.csr_matrix

    def apply(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        va = self.interp_a @ a.T
        vb = self.interp_b @ b.T
        return (self.sum_matrix @ (va * vb)).T


def _first_panel_rule(lam: float, order: int):
    """Nodes/weights on [0, 1] for the weight ``w**lam``."""
    x, wts = roots_jacobi(order, 0.0, lam)
    return (x + 1) / 2, wts * 2.0 ** (-lam - 1)


def _build_half(grid: RayGrid, sig_a: float, sig_b: float) -> HalfPlan:
    g = grid.grading
    lam = g * (sig_a + 1) - 1
    xl, wl = roots_legendre(PANEL_ORDER)
    xl, wl = (xl + 1) / 2, wl / 2
    zj, wj = _first_panel_rule(lam, PANEL_ORDER)
    rows, pts_w, sa_all = [], [], []
    for i in range(1, grid.n + 1):
        P = grid.nodes[i - 1]
        span = i * 2.0 ** (-1.0 / g)
        npan = max(1, int(np.ceil(span / PANEL_CELLS)))
        h = 1.0 / npan
        w_nodes = [h * zj]
        weights = [wj * h ** (lam + 1)]
        if npan > 1:
            left = h * np.arange(1, npan)
            wn = (left[:, None] + h * xl[None, :]).ravel()
            w_nodes.append(wn)
            weights.append(np.tile(wl * h, npan - 1) * wn ** lam)
        w = np.concatenate(w_nodes)
        wt = np.concatenate(weights)
        v = w ** g / 2
        wt = wt * (g / 2) * 2.0 ** (-sig_a) * (1 - v) ** sig_b
        rows.append(np.full(w.size, i - 1))
        pts_w.append(wt)
        sa_all.append(P * v)
    rows = np.concatenate(rows)
    wt = np.concatenate(pts_w)
    sa = np.concatenate(sa_all)
    P = grid.nodes[rows]
    sb = P - sa
    S = sparse.csr_matrix((wt, (rows, np.arange(wt.size))), shape=(grid.n, wt.size))
    return HalfPlan(S, interpolation_matrix(grid, sa), interpolation_matrix(grid, sb))


_PLANS: dict = {}


def half_plan(grid: RayGrid, sig_a: float, sig_b: float) -> HalfPlan:
    key = grid.key + (round(sig_a, 12), round(sig_b, 12))
    plan = _PLANS.get(key)
    if plan is None:
        if len(_PLANS) > 64:
            _PLANS.clear()
        plan = _PLANS[key] = _build_half(grid, sig_a, sig_b)
    return plan


def convolve(F: BorelFunction, G: BorelFunction) -> BorelFunction:
    """Convolution along the common ray; result sigma is ``sF + sG + 1``."""
    if not F.grid.same_as(G.grid):
        raise ValueError("convolution of functions on different grids")
    if F.sigma <= -1 or G.sigma <= -1:
        raise ValueError("origin exponents must exceed -1")
    a, b = F.sigma, G.sigma
    chi = half_plan(F.grid, a, b).apply(F.samples, G.samples)
    chi = chi + half_plan(F.grid, b, a).apply(G.samples, F.samples)
    tg = F.time_grid if not F.static else G.time_grid
    return BorelFunction(F.grid, a + b + 1, chi, tg)


def conv_power(F: BorelFunction, k: int, cache: dict | None = None) -> BorelFunction:
    """``F`` convolved with itself ``k`` times (``k >= 1``).

    The zeroth power is the Dirac unit and only makes sense inside a
    star-product, so it is rejected here. ``cache`` maps k to F^{*k}.
    """
    if k < 1:
        raise ValueError("F^{*0} is the convolution identity; use it only inside star-products")
    if cache is None:
        cache = {}
    cache.setdefault(1, F)
    top = max(c for c in cache if c <= k)
    result = cache[top]
    for kk in range(top + 1, k + 1):
        result = convolve(result, F)
        cache[kk] = result
    return result


def monomial_times(F: BorelFunction, j: int) -> BorelFunction:
    """Multiply by ``p**j``; only the origin exponent changes."""
    if not 0 <= j <= 3:
        raise ValueError("monomial order must be in 0..3")
    if j == 0:
        return F
    return BorelFunction(F.grid, F.sigma + j, F.samples, F.time_grid)
