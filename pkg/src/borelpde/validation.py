"""Checks of solver output in physical space.

The PDE residual uses exact transforms of the Borel-plane data: the
y-derivatives are ``L[(-p)^j F]`` and ``f_t = L[F_t]`` with ``F_t`` from
the time-stepping rule evaluated off the nodes. A finite-difference
variant with Richardson refinement is available as a cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convolution import monomial_times
from .core import BorelFunction, eval_at
from .oracles import similarity_ode_ex1, similarity_ode_ex3
from .solver import ProblemSpec, SolveResult, default_y_points
from .transforms import laplace_back


@dataclass
class ResidualReport:
    t: np.ndarray
    y: np.ndarray
    residual: np.ndarray        # (nt, ny) absolute
    scale: np.ndarray           # largest retained term at each point
    tail: np.ndarray

    @property
    def relative(self) -> np.ndarray:
        return np.abs(self.residual) / self.scale

    @property
    def max_relative(self) -> float:
        return float(self.relative.max())


def transform_derivatives(F: BorelFunction, y, nu_min: float):
    """``f, f', f'', f'''`` at ``y`` by Laplace transforms of ``(-p)^j F``."""
    out, tail = [], 0.0
    for j in range(4):
        lb = laplace_back(monomial_times(F, j), y, nu_min)
        out.append((-1) ** j * lb.value)
        tail = np.maximum(tail, lb.tail)
    return out, tail


def _rhs_terms(cset, y, t, derivs):
    f = derivs[0]
    terms = [cset.b_full(j, y, t, f) * derivs[j] for j in range(4)]
    terms.append(cset.r(y, t))
    return terms


def pde_residual(result: SolveResult, problem: ProblemSpec, y_points=None, t_points=None,
                 method: str = "transform", fd_step: float = 0.05) -> ResidualReport:
    """Residual of ``f_t - f_yyy - sum_j b_j f^(j) - r`` on a (t, y) grid."""
    y = default_y_points(problem) if y_points is None else np.asarray(y_points, dtype=complex)
    T = problem.T
    if t_points is None:
        t_points = np.linspace(0, T, 5)[1:] if T > 0 else np.array([0.0])
        # include panel midpoints so that nothing is checked only at the nodes
        t_points = np.unique(np.concatenate([t_points, t_points - T / 8]))
    ts = np.asarray(t_points, dtype=float)
    cset = result.operator.cset
    nu = problem.nu_run
    res = np.zeros((ts.size, y.size), complex)
    scale = np.zeros((ts.size, y.size))
    tails = np.zeros((ts.size, y.size))
    for i, t in enumerate(ts):
        F, Ft = result.state_at(t)
        if method == "transform":
            derivs, tail = transform_derivatives(F, y, nu)
        elif method == "fd":
            derivs, tail = fd_derivatives(F, y, nu, fd_step)
        else:
            raise ValueError(f"unknown method '{method}'")
        ft = laplace_back(Ft, y, nu)
        terms = _rhs_terms(cset, y, t, derivs)
        res[i] = ft.value - derivs[3] - sum(terms)
        scale[i] = np.max(np.abs(np.array([ft.value, derivs[3]] + terms)), axis=0)
        tails[i] = np.maximum(tail, ft.tail)
    return ResidualReport(ts, y, res, scale, tails)


def _fd_stencil(F, y, nu, h):
    e = y / np.abs(y)
    off = np.arange(-3, 4)
    vals = np.array([laplace_back(F, y + k * h * e, nu).value for k in off])
    d1 = (vals[1] - 8 * vals[2] + 8 * vals[4] - vals[5]) / (12 * h)
    d2 = (-vals[1] + 16 * vals[2] - 30 * vals[3] + 16 * vals[4] - vals[5]) / (12 * h * h)
    d3 = (vals[0] - 8 * vals[1] + 13 * vals[2] - 13 * vals[4] + 8 * vals[5] - vals[6]) / (8 * h ** 3)
    return [vals[3], d1 / e, d2 / e ** 2, d3 / e ** 3]


def fd_derivatives(F: BorelFunction, y, nu_min: float, step: float = 0.05):
    """Fourth-order central differences along ``arg y`` with one Richardson step."""
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    if np.any(np.real(y) - 3 * step <= nu_min):
        raise ValueError("finite-difference stencil leaves the convergence half-plane")
    coarse = _fd_stencil(F, y, nu_min, step)
    fine = _fd_stencil(F, y, nu_min, step / 2)
    out = [fine[0]] + [(16 * fine[j] - coarse[j]) / 15 for j in range(1, 4)]
    tail = laplace_back(F, y - 3 * step, nu_min).tail
    return out, tail


def loglog_slope(x, v) -> float:
    """Least-squares slope of ``log|v|`` against ``log|x|``."""
    x, v = np.abs(np.asarray(x)), np.abs(np.asarray(v))
    if x.size < 2 or np.any(v == 0):
        raise ValueError("need at least two points with nonzero values")
    return float(np.polyfit(np.log(x), np.log(v), 1)[0])


def small_p_slope(F: BorelFunction, t_index: int = -1, s_range=(1e-3, 1e-2), count: int = 12) -> float:
    """Log-log slope of ``|F(p)|`` near the origin."""
    s = np.geomspace(max(s_range[0], F.grid.nodes[0]), s_range[1], count)
    ti = t_index % F.samples.shape[0]
    return loglog_slope(s, eval_at(F, s, ti))


def far_field_slope(result: SolveResult, problem: ProblemSpec, y_points=None, t: float | None = None) -> float:
    """Decay exponent of ``|f(y, t)|`` along the validation ray."""
    y = default_y_points(problem) if y_points is None else np.asarray(y_points, dtype=complex)
    F, _ = result.state_at(problem.T if t is None else t)
    return loglog_slope(y, laplace_back(F, y, problem.nu_run).value)


@dataclass
class SimilarityComparison:
    t: float
    y: np.ndarray
    x: np.ndarray
    H_solver: np.ndarray
    H_oracle: np.ndarray
    correction_solver: np.ndarray   # H / x^lam - 1
    correction_oracle: np.ndarray
    overlap: np.ndarray             # T / |x|^(1/b)

    @property
    def H_error(self) -> np.ndarray:
        return np.abs(self.H_solver - self.H_oracle) / np.abs(self.H_oracle)

    @property
    def correction_error(self) -> np.ndarray:
        return np.abs(self.correction_solver - self.correction_oracle) / np.abs(self.correction_oracle)


def similarity_profile_for(problem: ProblemSpec, x, t):
    """ODE profile covering ``x t^-b`` for the given points."""
    return _profile_window(problem, np.atleast_1d(np.asarray(x, dtype=complex)), t)


def _b_exponent(ex):
    if ex.name == "ex1":
        return 1 / (3 * (1 - ex.gamma))
    if ex.name == "ex3":
        return 1 / (3 * (1 + ex.delta))
    raise ValueError(f"no similarity oracle for '{ex.name}'")


def _far_exponent(ex):
    return ex.gamma if ex.name == "ex1" else -9 * ex.delta


def compare_similarity(result: SolveResult, problem: ProblemSpec, y_points=None,
                       t: float | None = None) -> SimilarityComparison:
    """Solver ``H(x, t)`` against ``t^a h(x t^-b)`` from the ODE oracle."""
    ex = problem.example
    t = problem.T if t is None else t
    if not t > 0:
        raise ValueError("similarity comparison needs t > 0")
    y = default_y_points(problem) if y_points is None else np.asarray(y_points, dtype=complex)
    F, _ = result.state_at(t)
    f = laplace_back(F, y, problem.nu_run).value
    x = ex.x_of_y(y, t)
    H = ex.H_from_f(f, y, t)
    prof = similarity_profile_for(problem, x, t)
    H_or = prof.H(x, t)
    lam = _far_exponent(ex)
    base = x ** lam
    overlap = problem.T / np.abs(x) ** (1 / _b_exponent(ex))
    return SimilarityComparison(t, y, x, H, H_or, H / base - 1, H_or / base - 1, overlap)


def _profile_window(problem: ProblemSpec, x, t):
    ex = problem.example
    r = np.abs(x) * t ** (-_b_exponent(ex))
    angle = float(np.angle(x[0]))
    if ex.name == "ex1":
        return similarity_ode_ex1(ex.gamma, angle, r.max() * 4, r.min() / 1.5)
    return similarity_ode_ex3(ex.delta, angle, r.max() * 4, r.min() / 1.5)


def time_consistency(problem: ProblemSpec, x, t1: float, t2: float) -> float:
    """Agreement of ``H(x, t)`` built from profiles integrated for two times.

    Each profile is started on its own far-field window (that of ``t1`` or
    ``t2``); since the similarity form is exact, both must give the same
    ``H`` wherever their windows overlap. Returns the largest relative
    difference over ``t in (t1, t2)`` and the common points.
    """
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    b = _b_exponent(problem.example)
    p1, p2 = _profile_window(problem, x, t1), _profile_window(problem, x, t2)
    lo = max(p1.eta_grid[0], p2.eta_grid[0])
    hi = min(p1.eta_grid[-1], p2.eta_grid[-1])
    worst, count = 0.0, 0
    for t in (t1, t2):
        r = np.abs(x) * t ** (-b)
        keep = (r >= lo) & (r <= hi)
        if not keep.any():
            continue
        H1, H2 = p1.H(x[keep], t), p2.H(x[keep], t)
        worst = max(worst, float(np.max(np.abs(H1 - H2) / np.abs(H2))))
        count += int(keep.sum())
    if count == 0:
        raise ValueError("profile windows do not overlap")
    return worst


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    target: float
    tol: float
    passed: bool


def _abs_check(name, value, target, tol):
    return Check(name, float(value), float(target), float(tol), bool(abs(value - target) <= tol))


def _bound_check(name, value, tol):
    return Check(name, float(value), 0.0, float(tol), bool(value < tol))


FAR_SLOPE = {"ex1": -2.0, "ex2": -4.0 / 3, "ex3": -2.0}


def h_correction_slope(result: SolveResult, problem: ProblemSpec, y_points=None, t=None) -> float:
    """Exponent of ``H - x^-1/2`` in x for Example 2."""
    ex = problem.example
    t = problem.T if t is None else t
    y = default_y_points(problem) if y_points is None else np.asarray(y_points, dtype=complex)
    F, _ = result.state_at(t)
    f = laplace_back(F, y, problem.nu_run).value
    x = ex.x_of_y(y, t)
    return loglog_slope(x, ex.H_from_f(f, y, t) - x ** -0.5)


def validate_problem(result: SolveResult, problem: ProblemSpec, pde_tol: float = 1e-3,
                     slope_tol: float = 0.05, similarity_tol: float = 1e-4):
    """All physical-space checks for a built-in example.

    Returns ``(checks, tables)`` where tables hold the per-point data.
    """
    ex = problem.example
    cset = result.operator.cset
    checks, tables = [], {}
    checks.append(_bound_check("fixed_point_residual", result.residual, 10 * problem.picard_tol))
    rep = pde_residual(result, problem)
    tables["pde_residual"] = rep
    checks.append(_bound_check("pde_residual", rep.max_relative, pde_tol))
    if ex.name in FAR_SLOPE:
        checks.append(_abs_check("far_field_slope", far_field_slope(result, problem),
                                 FAR_SLOPE[ex.name], slope_tol))
    checks.append(_abs_check("small_p_slope", small_p_slope(result.F), cset.alpha_r - 1, slope_tol))
    if ex.name == "ex2":
        checks.append(_abs_check("H_correction_slope", h_correction_slope(result, problem), -5.0, 0.1))
    if ex.name in ("ex1", "ex3") and problem.T > 0:
        cmp = compare_similarity(result, problem)
        tables["similarity"] = cmp
        inside = cmp.overlap < 1e-2
        worst = float(cmp.H_error[inside].max()) if inside.any() else np.inf
        checks.append(_bound_check("similarity_H", worst, similarity_tol))
    return checks, tables


@dataclass(frozen=True)
class AuditEntry:
    j: int
    k: int
    rel_error: float
    slope: float | None


def audit_coefficients(cset, grid, T: float, ys=(10.0, 20.0), contour=None,
                       s_range=(1e-3, 1e-2)) -> dict:
    """Laplace-transform every B_{j,k} back and compare with ``b_{j,k}``.

    Times are ``0, T/2, T``; returns ``{(j, k): AuditEntry}`` with the
    worst relative error and the small-p slope of the regular part at ``T``.
    """
    from .coefficients import materialize
    from .core import make_time_grid
    tg = make_time_grid(T, 2)
    coeff_tg = tg if cset.time_dependent() else None
    mats = materialize(cset, grid, coeff_tg, contour)
    ys = np.asarray(ys, dtype=complex) * np.exp(-1j * grid.theta)
    out = {}
    for key, mat in mats.items():
        j, k = key
        worst = 0.0
        for i, t in enumerate(tg.times):
            val = np.full(ys.size, mat.dirac, complex)
            if mat.regular is not None:
                ti = i if not mat.regular.static else 0
                val = val + laplace_back(mat.regular, ys, 0.0, ti).value
            exact = cset.b(j, k, ys, t)
            # entries that cancel exactly (b_{3,0} of Example 2 at t = 0, or a
            # vanishing prefactor) are measured against their term sizes
            size = sum(np.abs(term.physical(ys, t)) for term in cset.terms(j, k))
            scale = np.where(np.abs(exact) > 1e-6 * size, np.abs(exact), size)
            scale = np.where(scale == 0, 1.0, scale)
            worst = max(worst, float(np.max(np.abs(val - exact) / scale)))
        slope = None
        if mat.regular is not None and np.any(mat.regular.samples[-1] != 0):
            slope = small_p_slope(mat.regular, -1, s_range)
        out[key] = AuditEntry(j, k, worst, slope)
    return out
