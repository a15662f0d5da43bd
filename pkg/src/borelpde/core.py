"""Ray grids, sampled Borel-plane functions and the weighted sup norm.

A Borel-plane function is stored on a single ray ``arg p = theta`` as

    F(p, t) = p**sigma * phi(|p|, t)

with ``phi`` sampled at the grid radii. The origin exponent ``sigma`` is kept
explicitly so that quadratures can treat ``s**sigma`` as an exact weight.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import optimize, sparse

SECTOR_LIMIT = np.pi / 6
MIN_NODES = 16


@dataclass(frozen=True, eq=False)
class RayGrid:
    """Graded radii ``s_i = p_max (i/n)**grading`` on the ray ``arg p = theta``."""

    theta: float
    p_max: float
    n: int
    grading: float
    nodes: np.ndarray = field(repr=False)

    @property
    def points(self) -> np.ndarray:
        """Complex grid points ``s_i e^{i theta}``."""
        return self.nodes * np.exp(1j * self.theta)

    @property
    def key(self) -> tuple:
        return (float(self.theta), float(self.p_max), int(self.n), float(self.grading))

    def same_as(self, other: "RayGrid") -> bool:
        return self is other or self.key == other.key

    def index_coordinate(self, s) -> np.ndarray:
        """Continuous node index of radius ``s`` (node i sits at i, i = 1..n)."""
        s = np.asarray(s, dtype=float)
        return self.n * (s / self.p_max) ** (1.0 / self.grading)

    def radius_of(self, index_coord) -> np.ndarray:
        return self.p_max * (np.asarray(index_coord, dtype=float) / self.n) ** self.grading


def make_grid(theta: float, p_max: float, n: int, grading_exponent: float = 2.0,
              phi: float = SECTOR_LIMIT) -> RayGrid:
    """Build a ray grid; ``phi`` is the sector half-angle the ray must lie inside."""
    if not 0 < phi <= SECTOR_LIMIT:
        raise ValueError(f"sector half-angle phi={phi} must lie in (0, pi/6]")
    if not abs(theta) < phi:
        raise ValueError(f"ray angle theta={theta} lies outside the sector |theta| < {phi:.6f}")
    if not p_max > 0:
        raise ValueError("p_max must be positive")
    if int(n) < MIN_NODES:
        raise ValueError(f"node count n={n} is below the minimum {MIN_NODES}")
    if grading_exponent < 1:
        raise ValueError("grading_exponent must be >= 1")
    n = int(n)
    nodes = p_max * (np.arange(1, n + 1) / n) ** grading_exponent
    nodes[-1] = p_max
    nodes.setflags(write=False)
    return RayGrid(float(theta), float(p_max), n, float(grading_exponent), nodes)


@dataclass(frozen=True)
class TimeGrid:
    T: float
    times: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return len(self.times) - 1

    @property
    def dt(self) -> float:
        return self.T / self.m


def make_time_grid(T: float, m: int) -> TimeGrid:
    if T < 0:
        raise ValueError("final time T must be non-negative")
    if m < 1:
        raise ValueError("need at least one time step")
    times = np.linspace(0.0, T, m + 1)
    times[-1] = T
    times.setflags(write=False)
    return TimeGrid(float(T), times)


def interpolation_matrix(grid: RayGrid, s) -> sparse.csr_matrix:
    """Sparse matrix mapping node samples to values at radii ``s``.

    Local four-point Lagrange interpolation in the index coordinate, where
    the graded nodes are equispaced. Exact at nodes; points below the first
    node use the first stencil.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    pos = grid.index_coordinate(s)
    start = np.clip(np.floor(pos).astype(int) - 1, 1, grid.n - 3)
    xi = pos - start
    w = np.empty((s.size, 4))
    w[:, 0] = -(xi - 1) * (xi - 2) * (xi - 3) / 6
    w[:, 1] = xi * (xi - 2) * (xi - 3) / 2
    w[:, 2] = -xi * (xi - 1) * (xi - 3) / 2
    w[:, 3] = xi * (xi - 1) * (xi - 2) / 6
    rows = np.repeat(np.arange(s.size), 4)
    cols = (start[:, None] - 1 + np.arange(4)[None, :]).ravel()
    return sparse.csr_matrix((w.ravel(), (rows, cols)), shape=(s.size, grid.n))


@dataclass(frozen=True, eq=False)
class BorelFunction:
    """Samples of the smooth factor ``phi`` with ``F = p**sigma * phi``.

    ``samples`` has shape ``(nt, n)`` where ``nt`` is 1 for time-independent
    functions and ``len(time_grid.times)`` otherwise.
    """

    grid: RayGrid
    sigma: float
    samples: np.ndarray = field(repr=False)
    time_grid: TimeGrid | None = None

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.samples, dtype=complex))
        if a.shape[-1] != self.grid.n:
            raise ValueError("samples do not match the grid size")
        if self.sigma <= -1:
            raise ValueError(f"origin exponent sigma={self.sigma} must exceed -1")
        if not np.all(np.isfinite(a)):
            raise FloatingPointError("non-finite samples in Borel function")
        if self.time_grid is not None and a.shape[0] not in (1, len(self.time_grid.times)):
            raise ValueError("samples do not match the time grid")
        a.setflags(write=False)
        object.__setattr__(self, "samples", a)

    @property
    def static(self) -> bool:
        return self.samples.shape[0] == 1

    def values(self) -> np.ndarray:
        """Full values ``F(s_i e^{i theta}, t)`` at the nodes."""
        return self.samples * self.grid.points ** self.sigma

    def magnitudes(self) -> np.ndarray:
        return np.abs(self.samples) * self.grid.nodes ** self.sigma

    def with_samples(self, samples, sigma=None, time_grid=None) -> "BorelFunction":
        tg = time_grid if time_grid is not None else self.time_grid
        return BorelFunction(self.grid, self.sigma if sigma is None else sigma, samples, tg)

    def rebase(self, sigma: float) -> "BorelFunction":
        """Same function stored with a smaller (or equal) origin exponent."""
        if sigma > self.sigma + 1e-12:
            raise ValueError("can only lower the origin exponent")
        if abs(sigma - self.sigma) < 1e-14:
            return self
        factor = self.grid.points ** (self.sigma - sigma)
        return BorelFunction(self.grid, sigma, self.samples * factor, self.time_grid)

    def at_time(self, index: int) -> np.ndarray:
        return self.samples[0 if self.static else index]

    def __add__(self, other):
        if other == 0:
            return self
        return add_functions([self, other])

    __radd__ = __add__

    def __neg__(self):
        return self.with_samples(-self.samples)

    def __sub__(self, other):
        return add_functions([self, -other])

    def __mul__(self, c):
        if isinstance(c, BorelFunction):
            raise TypeError("use convolve() for products in the Borel plane")
        return self.with_samples(self.samples * c)

    __rmul__ = __mul__


def add_functions(functions) -> BorelFunction:
    """Sum Borel functions on one grid, rebasing to the smallest sigma."""
    functions = list(functions)
    if not functions:
        raise ValueError("nothing to add")
    grid = functions[0].grid
    for f in functions[1:]:
        if not f.grid.same_as(grid):
            raise ValueError("grid mismatch")
    sigma = min(f.sigma for f in functions)
    tg = next((f.time_grid for f in functions if not f.static), functions[0].time_grid)
    total = 0
    for f in functions:
        total = total + f.rebase(sigma).samples
    return BorelFunction(grid, sigma, total, tg)


def zeros(grid: RayGrid, sigma: float = 0.0, time_grid: TimeGrid | None = None) -> BorelFunction:
    nt = 1 if time_grid is None else len(time_grid.times)
    return BorelFunction(grid, sigma, np.zeros((nt, grid.n), complex), time_grid)


def from_callable(grid: RayGrid, func, sigma: float = 0.0, time_grid: TimeGrid | None = None):
    """Sample ``func(p)`` (or ``func(p, t)`` when a time grid is given) on the ray."""
    p = grid.points
    if time_grid is None:
        vals = np.asarray(func(p), dtype=complex)[None, :]
    else:
        vals = np.array([func(p, t) for t in time_grid.times], dtype=complex)
    return BorelFunction(grid, sigma, vals / p ** sigma, time_grid)


def eval_at(F: BorelFunction, s, t_index: int = 0):
    """Interpolated value of ``F`` at radius ``s`` (scalar or array) on its ray."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr <= 0) or np.any(s_arr > F.grid.p_max * (1 + 1e-12)):
        raise ValueError("radius outside (0, p_max]")
    phi = interpolation_matrix(F.grid, s_arr) @ F.at_time(t_index)
    out = phi * (s_arr * np.exp(1j * F.grid.theta)) ** F.sigma
    return out[0] if np.ndim(s) == 0 else out


@dataclass(frozen=True)
class NormReport:
    nu: float
    value: float
    sup_node: int
    sup_time: int = 0


def weight_profile(s, nu: float) -> np.ndarray:
    return (1 + s * s) * np.exp(-nu * s)


def nu_norm(F: BorelFunction, nu: float) -> NormReport:
    """Discrete weighted sup norm ``M0 max (1+s^2) e^{-nu s} |F|`` on the ray."""
    if not nu > 0:
        raise ValueError("nu must be positive")
    w = M0() * F.magnitudes() * weight_profile(F.grid.nodes, nu)
    flat = int(np.argmax(w))
    ti, si = np.unravel_index(flat, w.shape)
    return NormReport(float(nu), float(w[ti, si]), int(si), int(ti))


def norm(F: BorelFunction, nu: float) -> float:
    return nu_norm(F, nu).value


def m0_objective(s):
    s = np.asarray(s, dtype=float)
    return 2 * (1 + s * s) * (np.log1p(s * s) + s * np.arctan(s)) / (s * (s * s + 4))


def compute_M0(tol: float = 1e-6) -> float:
    """Maximum of the convolution-kernel ratio that normalizes the nu-norm."""
    s = np.geomspace(1e-3, 1e4, 2001)
    i = int(np.argmax(m0_objective(s)))
    lo, hi = s[max(i - 1, 0)], s[min(i + 1, s.size - 1)]
    res = optimize.minimize_scalar(lambda x: -m0_objective(x), bounds=(lo, hi),
                                   method="bounded", options={"xatol": tol})
    return float(-res.fun)


@lru_cache(maxsize=1)
def M0() -> float:
    return compute_M0(1e-10)
