"""Independent reference solutions used by validation and tests.

* Similarity profiles for Examples 1 and 3. With ``H = t^a h(eta)``,
  ``eta = x t^-b`` the PDE ``H_t = H^m H_xxx`` becomes
  ``a h - b eta h' = h^m h'''``. The profile is integrated inward along a
  ray from a large radius, started on the far-field power series
  ``h = eta^lam sum_n c_n eta^(-n mu)``.
* ``brute_convolution``: direct Gauss-Legendre quadrature of a single
  ray convolution value, sharing no code with the convolution engine.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import roots_legendre


class SingularityError(ArithmeticError):
    """The profile ODE blew up before reaching the inner radius."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


@dataclass(frozen=True)
class SimilarityForm:
    """``a h - b eta h' = h^m h'''`` with far field ``h ~ eta^lam``."""

    a: float
    b: float
    m: float
    lam: float

    @property
    def mu(self) -> float:
        # spacing of the far-field series: eta^(lam(m+1) - 3) = eta^(lam - mu)
        return 3 - self.m * self.lam

    def residual(self, eta, h, h1, h3):
        return self.a * h - self.b * eta * h1 - h ** self.m * h3


def ex1_form(gamma: float) -> SimilarityForm:
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    return SimilarityForm(gamma / (3 * (1 - gamma)), 1 / (3 * (1 - gamma)), 3.0, gamma)


def ex3_form(delta: float) -> SimilarityForm:
    if not delta > 0:
        raise ValueError("delta must be positive")
    return SimilarityForm(-3 * delta / (1 + delta), 1 / (3 * (1 + delta)), 1.0 / 3, -9 * delta)


def _power_series(c, m):
    """Coefficients of ``S^m`` for ``S = sum c_n z^n`` with ``c_0 = 1``."""
    n = len(c)
    d = np.zeros(n, complex)
    d[0] = 1.0
    for k in range(1, n):
        j = np.arange(1, k + 1)
        d[k] = np.sum(((m + 1) * j - k) * c[j] * d[k - j]) / k
    return d


def far_field_coefficients(form: SimilarityForm, order: int) -> np.ndarray:
    """Coefficients ``c_0..c_order`` of the far-field series (``c_0 = 1``)."""
    lam, mu = form.lam, form.mu
    P = lambda e: e * (e - 1) * (e - 2)
    c = np.zeros(order + 1, complex)
    c[0] = 1.0
    for n in range(1, order + 1):
        d = _power_series(c[:n], form.m)
        k = np.arange(n)
        c[n] = np.sum(d[n - 1 - k] * c[k] * P(lam - k * mu)) / (form.b * n * mu)
    return c


def far_field_state(form: SimilarityForm, eta, order: int = 12):
    """``(h, h', h'')`` from the truncated series, plus the last-term size."""
    c = far_field_coefficients(form, order)
    e = form.lam - np.arange(order + 1) * form.mu
    eta = complex(eta)
    terms = c * eta ** e
    h = terms.sum()
    h1 = (terms * e).sum() / eta
    h2 = (terms * e * (e - 1)).sum() / eta ** 2
    return np.array([h, h1, h2]), abs(terms[-1])


@dataclass
class SimilarityProfile:
    example: str
    form: SimilarityForm
    angle: float
    eta_grid: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray
    exponents: tuple
    params: dict = field(default_factory=dict)
    _dense: object = field(default=None, repr=False)

    def __call__(self, eta):
        """Profile at complex ``eta`` on the integration ray."""
        eta = np.atleast_1d(np.asarray(eta, dtype=complex))
        r = np.abs(eta)
        if np.any(r < self.eta_grid[0] * (1 - 1e-12)) or np.any(r > self.eta_grid[-1] * (1 + 1e-12)):
            raise ValueError("eta outside the integrated range")
        if np.any(np.abs(np.angle(eta) - self.angle) > 1e-9):
            raise ValueError("eta not on the integration ray")
        return self._dense(r)[0]

    def H(self, x, t):
        """Similarity solution ``t^a h(x t^-b)``."""
        a, b = self.exponents
        x = np.asarray(x, dtype=complex)
        return t ** a * self(x * t ** (-b))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["eta_abs", "eta_re", "eta_im", "h_re", "h_im"])
            for r, h in zip(self.eta_grid, self.values):
                z = r * np.exp(1j * self.angle)
                w.writerow([f"{r:.16e}", f"{z.real:.16e}", f"{z.imag:.16e}",
                            f"{h.real:.16e}", f"{h.imag:.16e}"])


def integrate_profile(form: SimilarityForm, angle: float, eta_max: float, eta_min: float,
                      order: int = 12, rtol: float = 1e-12, n_out: int = 400,
                      example: str = "", params=None) -> SimilarityProfile:
    if not 0 < eta_min < eta_max:
        raise ValueError("need 0 < eta_min < eta_max")
    e = np.exp(1j * angle)
    y0, _ = far_field_state(form, eta_max * e, order)

    def rhs(r, u):
        h, h1, h2 = u[0] + 1j * u[1], u[2] + 1j * u[3], u[4] + 1j * u[5]
        eta = r * e
        h3 = (form.a * h - form.b * eta * h1) / h ** form.m
        dv = e * np.array([h1, h2, h3])
        return np.concatenate([[z.real, z.imag] for z in dv])

    def blowup(r, u):
        # |h / eta^lam| leaving [1e-6, 1e6] marks a zero or a pole of h
        return abs(np.log10(np.hypot(u[0], u[1]) * r ** (-form.lam) + 1e-300)) - 6
    blowup.terminal = True

    u0 = np.concatenate([[z.real, z.imag] for z in y0])
    sol = solve_ivp(rhs, (eta_max, eta_min), u0, method="DOP853", rtol=rtol,
                    atol=1e-14 * max(abs(y0[0]), 1e-300), dense_output=True, events=blowup)
    if sol.status == 1 or not np.all(np.isfinite(sol.y)):
        loc = sol.t_events[0][0] * e if sol.t_events and len(sol.t_events[0]) else sol.t[-1] * e
        raise SingularityError(f"profile singular near eta = {loc:.6g}", loc)
    if sol.status != 0:
        raise SingularityError(sol.message, sol.t[-1] * e)

    def dense(r):
        u = sol.sol(r)
        return np.array([u[0] + 1j * u[1], u[2] + 1j * u[3], u[4] + 1j * u[5]])

    grid = np.geomspace(eta_min, eta_max, n_out)
    vals = dense(grid)
    return SimilarityProfile(example, form, angle, grid, vals[0], vals[1:].T,
                             (form.a, form.b), dict(params or {}), dense)


def similarity_ode_ex1(gamma, eta_ray_angle, eta_max, eta_min, **kw) -> SimilarityProfile:
    return integrate_profile(ex1_form(gamma), eta_ray_angle, eta_max, eta_min,
                             example="ex1", params={"gamma": gamma}, **kw)


def similarity_ode_ex3(delta, eta_ray_angle, eta_max, eta_min, **kw) -> SimilarityProfile:
    return integrate_profile(ex3_form(delta), eta_ray_angle, eta_max, eta_min,
                             example="ex3", params={"delta": delta}, **kw)


def _d1(f, r, h, e):
    return (f(r + h) - f(r - h)) / (2 * h) / e


def profile_ode_residual(profile: SimilarityProfile, step: float = 2e-3):
    """Pointwise ODE residual from central differences of the dense output.

    ``h'`` is differenced from ``h`` and ``h'''`` from the integrated ``h''``
    component, so only first-derivative stencils are needed; third-order
    stencils amplify the interpolant's step-to-step noise. One Richardson
    step removes the second-order error. Returns the residual divided by
    the size of ``a h``.
    """
    e = np.exp(1j * profile.angle)
    r = profile.eta_grid[2:-2]
    f = lambda rr: profile._dense(rr)[0]
    g = lambda rr: profile._dense(rr)[2]
    h1 = (4 * _d1(f, r, step * r / 2, e) - _d1(f, r, step * r, e)) / 3
    h3 = (4 * _d1(g, r, step * r / 2, e) - _d1(g, r, step * r, e)) / 3
    h = f(r)
    res = profile.form.residual(r * e, h, h1, h3)
    return r * e, np.abs(res) / np.abs(profile.form.a * h)


def brute_convolution(F, G, p, n_oracle: int = 20000) -> complex:
    """``int_0^|p| F(s e^{i theta}) G(p - s e^{i theta}) ds`` by brute quadrature.

    ``F`` and ``G`` are callables of a complex argument; the integral is
    split at the midpoint and each half uses ``s = P u^2`` to soften
    endpoint singularities.
    """
    if n_oracle < 10000:
        raise ValueError("n_oracle must be at least 1e4")
    p = complex(p)
    P, e = abs(p), p / abs(p)
    x, w = roots_legendre(n_oracle // 2)
    u = (x + 1) / 2 * np.sqrt(0.5)
    wu = w / 2 * np.sqrt(0.5)
    s = P * u ** 2
    ds = 2 * P * u * wu
    left = np.sum(F(s * e) * G(p - s * e) * ds)
    right = np.sum(F(p - s * e) * G(s * e) * ds)
    return complex((left + right) * e)
