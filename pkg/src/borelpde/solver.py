"""Picard iteration for the Borel-plane integral equation.

The transformed problem reads

    F(p,t) = F0(p,t) + sum_{j,k} (-1)^j int_0^t e^{-p^3 (t-tau)}
             [(p^j F) * B_{j,k} * F^{*k}](p, tau) dtau,

with ``F0 = int_0^t e^{-p^3 (t-tau)} R(p,tau) dtau`` (zero initial data for
all built-in examples). The tau-integral is done panel by panel with the
star-product source linear in tau, which integrates the stiff factor
exactly.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .coefficients import ex3_tail_bound, forcing, materialize
from .convolution import conv_power, convolve, monomial_times
from .core import (BorelFunction, RayGrid, TimeGrid, add_functions, make_grid,
                   make_time_grid, norm, SECTOR_LIMIT)
from .transforms import laplace_back

log = logging.getLogger(__name__)

SERIES_THRESHOLD = 1e-4


class SolverError(RuntimeError):
    """Numerical failure of the fixed-point iteration."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history or {}


class DivergenceError(SolverError):
    pass


class MaxIterationsError(SolverError):
    pass


@dataclass(frozen=True)
class ProblemSpec:
    example: object
    T: float = 0.05
    theta: float = 0.0
    phi: float = 0.5
    K: int | None = None
    n_nodes: int = 256
    grading: float | None = None
    p_max: float | None = None
    time_steps: int = 16
    picard_tol: float = 1e-10
    max_iter: int = 30
    nu_run: float = 8.0
    ball_factor: float = 2.0
    C: float = 1.0

    def __post_init__(self):
        if not 0 < self.phi < SECTOR_LIMIT:
            raise ValueError(f"sector half-angle phi={self.phi} must lie in (0, pi/6)")
        if not abs(self.theta) < self.phi:
            raise ValueError(f"ray angle theta={self.theta} must satisfy |theta| < phi={self.phi}")
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be positive")
        if not self.T >= 0:
            raise ValueError("T must be non-negative")
        if not self.nu_run > 0:
            raise ValueError("nu_run must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.ball_factor > 1:
            raise ValueError("ball factor b must exceed 1")

    @property
    def effective_p_max(self) -> float:
        return self.p_max if self.p_max is not None else 40.0 / self.nu_run

    @property
    def effective_grading(self) -> float:
        return self.grading if self.grading is not None else self.example.default_grading

    def grid(self) -> RayGrid:
        return make_grid(self.theta, self.effective_p_max, self.n_nodes,
                         self.effective_grading, self.phi)

    def time_grid(self) -> TimeGrid:
        return make_time_grid(self.T, self.time_steps)


def phi_weights(z):
    """``w0 = (1-e^{-z})/z`` and ``w1 = (1-e^{-z}(1+z))/z^2`` (stable near 0)."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < SERIES_THRESHOLD
    zs = np.where(small, 1.0, z)
    ez = np.exp(-zs)
    w0 = -np.expm1(-zs) / zs
    w1 = (1 - ez * (1 + zs)) / zs ** 2
    w0s = 1 - z / 2 + z * z / 6 - z ** 3 / 24
    w1s = 0.5 - z / 3 + z * z / 8 - z ** 3 / 30
    return np.where(small, w0s, w0), np.where(small, w1s, w1)


class NonlinearOperator:
    """Materialized coefficients plus the map F -> F0 + integral of sources."""

    def __init__(self, problem: ProblemSpec, contour=None):
        self.problem = problem
        self.grid = problem.grid()
        self.time_grid = problem.time_grid()
        self.cset = problem.example.coefficients(problem.K)
        coeff_tg = self.time_grid if self.cset.time_dependent() else None
        self.coeffs = materialize(self.cset, self.grid, coeff_tg, contour)
        self.R = forcing(self.cset, self.grid, coeff_tg, contour)
        self.lam = self.grid.points ** 3
        self.F0 = self.build_F0()

    # -- time integration ----------------------------------------------------
    def build_F0(self) -> BorelFunction:
        R = self.R
        tg = self.time_grid
        if R.static:
            w0, _ = phi_weights(np.outer(tg.times, self.lam))
            samples = R.samples * tg.times[:, None] * w0
            return BorelFunction(self.grid, R.sigma, samples, tg)
        return self.integrate(R)

    def integrate(self, S: BorelFunction) -> BorelFunction:
        """``int_0^t e^{-p^3 (t-tau)} S(p,tau) dtau`` at every time node."""
        tg = self.time_grid
        m, dt = tg.m, tg.dt
        src = np.broadcast_to(S.samples, (m + 1, self.grid.n))
        z = self.lam * dt
        w0, w1 = phi_weights(z)
        decay = np.exp(-z)
        out = np.zeros((m + 1, self.grid.n), complex)
        for n in range(1, m + 1):
            out[n] = decay * out[n - 1] + dt * (src[n - 1] * w1 + src[n] * (w0 - w1))
        return BorelFunction(self.grid, S.sigma, out, tg)

    # -- star products -------------------------------------------------------
    def source(self, F: BorelFunction) -> BorelFunction | None:
        """``sum_{j,k} (-1)^j (p^j F) * B_{j,k} * F^{*k}``; None when empty."""
        powers: dict = {}
        terms = []
        for j in range(4):
            parts, dirac0 = [], 0.0
            for k in range(self.cset.K + 1):
                mat = self.coeffs.get((j, k))
                if mat is None:
                    continue
                if k == 0:
                    dirac0 = mat.dirac
                    if mat.regular is not None:
                        parts.append(mat.regular)
                    continue
                Pk = conv_power(F, k, powers)
                if mat.regular is not None:
                    parts.append(convolve(mat.regular, Pk))
                if mat.dirac:
                    parts.append(Pk * mat.dirac)
            if not parts and not dirac0:
                continue
            pjF = monomial_times(F, j)
            sign = (-1) ** j
            if parts:
                terms.append(convolve(pjF, add_functions(parts)) * sign)
            if dirac0:
                terms.append(pjF * (sign * dirac0))
        return add_functions(terms) if terms else None

    def apply(self, F: BorelFunction) -> BorelFunction:
        Q = self.source(F)
        if Q is None:
            return self.F0
        return add_functions([self.F0, self.integrate(Q)])

    def full_source(self, F: BorelFunction) -> BorelFunction:
        """``Q(F) + R`` on the time grid."""
        Q = self.source(F)
        parts = [self.R] if Q is None else [Q, self.R]
        total = add_functions(parts)
        if total.static:
            total = BorelFunction(self.grid, total.sigma,
                                  np.repeat(total.samples, len(self.time_grid.times), 0),
                                  self.time_grid)
        return total

    def state_at(self, F: BorelFunction, S: BorelFunction, t: float):
        """Solution and its time derivative at any ``t`` in [0, T].

        Uses the same panel rule as the time stepping, so the values agree
        with ``F`` at the nodes; ``S`` is ``full_source(F)``.
        """
        tg = self.time_grid
        if not -1e-14 <= t <= tg.T * (1 + 1e-12):
            raise ValueError("time outside [0, T]")
        sigma = min(F.sigma, S.sigma)
        Fs = F.rebase(sigma).samples
        Ss = S.rebase(sigma).samples
        if tg.T == 0:
            k, h = 0, 0.0
        else:
            k = min(int(np.floor(t / tg.dt)), tg.m - 1)
            h = max(t - tg.times[k], 0.0)
        s_t = Ss[k] + (h / tg.dt if tg.dt > 0 else 0.0) * (Ss[min(k + 1, tg.m)] - Ss[k])
        w0, w1 = phi_weights(self.lam * h)
        value = np.exp(-self.lam * h) * Fs[k] + h * (Ss[k] * w1 + s_t * (w0 - w1))
        deriv = -self.lam * value + s_t
        return (BorelFunction(self.grid, sigma, value[None, :]),
                BorelFunction(self.grid, sigma, deriv[None, :]))


def build_F0(problem: ProblemSpec, operator: NonlinearOperator | None = None) -> BorelFunction:
    return (operator or NonlinearOperator(problem)).F0


def apply_N(F: BorelFunction, problem: ProblemSpec,
            operator: NonlinearOperator | None = None) -> BorelFunction:
    return (operator or NonlinearOperator(problem)).apply(F)


@dataclass
class SolveResult:
    F: BorelFunction
    iterations: int
    nu_norm_history: list
    differences: list
    contraction_ratios: list
    residual: float
    F0_norm: float
    certificate: object = None
    certified: bool = False
    tail_bound: float = 0.0
    operator: NonlinearOperator = field(default=None, repr=False)
    source: BorelFunction = field(default=None, repr=False)

    def state_at(self, t: float):
        return self.operator.state_at(self.F, self.source, t)


def picard_solve(problem: ProblemSpec, initial: BorelFunction | None = None,
                 operator: NonlinearOperator | None = None, certify: bool = True) -> SolveResult:
    """Iterate ``F <- N F`` from ``F0`` (or ``initial``) to the fixed point."""
    op = operator or NonlinearOperator(problem)
    nu = problem.nu_run
    F = op.F0 if initial is None else initial
    F0_norm = norm(op.F0, nu)
    history = [norm(F, nu)]
    diffs, ratios = [], []
    converged = False
    iterations = 0
    for iterations in range(1, problem.max_iter + 1):
        Fn = op.apply(F)
        d = norm(Fn - F, nu)
        nF = norm(Fn, nu)
        if not (np.isfinite(d) and np.isfinite(nF)) or nF > 1e150:
            raise DivergenceError("nu-norm overflow during Picard iteration",
                                  {"norms": history, "diffs": diffs})
        if diffs:
            ratios.append(d / diffs[-1] if diffs[-1] > 0 else 0.0)
        diffs.append(d)
        history.append(nF)
        F = Fn
        log.debug("picard %d: |F|=%.6e diff=%.3e", iterations, nF, d)
        if d <= max(problem.picard_tol * nF, 1e-14):
            converged = True
            break
        if len(ratios) >= 3 and all(r >= 1 for r in ratios[-3:]):
            raise DivergenceError("Picard ratios >= 1 on three consecutive steps",
                                  {"norms": history, "diffs": diffs, "ratios": ratios})
    if not converged:
        raise MaxIterationsError(f"no convergence in {problem.max_iter} iterations",
                                 {"norms": history, "diffs": diffs, "ratios": ratios})
    S = op.full_source(F)
    FN = op.apply(F)
    nF = norm(F, nu)
    residual = norm(FN - F, nu) / nF if nF > 0 else norm(FN - F, nu)
    cert = None
    certified = all(r < 1 for r in ratios)
    if certify:
        from .certificates import certificate_for
        cert = certificate_for(problem, F0_norm=F0_norm)
        if cert is not None:
            certified = certified and cert.satisfied
    tail = ex3_tail_bound(op.cset, nF / nu) if op.cset.name == "ex3" else 0.0
    return SolveResult(F, iterations, history, diffs, ratios, residual, F0_norm,
                       cert, certified, tail, op, S)


# --- physical space -------------------------------------------------------

@dataclass
class PhysicalTable:
    """``f`` and ``H`` on a (time, y) tensor grid; ``error`` holds tail bounds."""

    t: np.ndarray
    y: np.ndarray
    x: np.ndarray
    f: np.ndarray
    H: np.ndarray | None
    error: np.ndarray


def default_y_points(problem: ProblemSpec, count: int = 8, margin: float = 1.25) -> np.ndarray:
    """``count`` points with ``|y|`` in ``[rho, 4 rho]``, ``rho = margin * nu_run``.

    The points lie on ``arg y = -theta`` so that ``p y`` is real and positive.
    """
    rho = margin * problem.nu_run
    return np.geomspace(rho, 4 * rho, count) * np.exp(-1j * problem.theta)


def recover_physical(result: SolveResult, problem: ProblemSpec, y_points, t_points) -> PhysicalTable:
    y = np.atleast_1d(np.asarray(y_points, dtype=complex))
    ts = np.atleast_1d(np.asarray(t_points, dtype=float))
    nu = problem.nu_run
    f = np.zeros((ts.size, y.size), complex)
    err = np.zeros((ts.size, y.size))
    for i, t in enumerate(ts):
        Ft, _ = result.state_at(t)
        lb = laplace_back(Ft, y, nu)
        f[i], err[i] = lb.value, lb.tail
    ex = problem.example
    if hasattr(ex, "H_from_f"):
        x = np.array([ex.x_of_y(y, t) for t in ts])
        H = np.array([ex.H_from_f(f[i], y, t) for i, t in enumerate(ts)])
    else:
        x, H = np.full((ts.size, y.size), np.nan + 0j), None
    return PhysicalTable(ts, y, x, f, H, err)
