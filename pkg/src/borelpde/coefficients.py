"""Coefficient families b_{j,k}(y, t) and their Borel-plane images B_{j,k}.

The model equation is ``f_t - f_yyy = sum_j b_j(y,t;f) d^j f/dy^j + r`` with
``b_j = sum_k b_{j,k} f**k``. Each ``b_{j,k}`` is a short list of terms:

* ``Monomial(c, power)``: ``c y**-power``, transformed in closed form;
* ``Dirac(c)``: a constant, whose transform is ``c`` times the convolution
  identity and is never sampled;
* ``ScaledTerm(prefactor, beta, delta)``: ``prefactor x**-beta y**-delta``
  with ``x = t + (3y/2)**(2/3)``, transformed by contour quadrature.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np
from scipy.special import binom

from .core import BorelFunction, RayGrid, TimeGrid, add_functions, zeros
from .transforms import ContourSpec, ScaledILTSpec, ilt_power_law, ilt_scaled_ex2


@dataclass(frozen=True)
class Monomial:
    c: complex
    power: float

    @property
    def p_exponent(self) -> float:
        return self.power - 1

    def physical(self, y, t):
        return self.c * np.asarray(y, dtype=complex) ** (-self.power)


@dataclass(frozen=True)
class Dirac:
    c: complex

    def physical(self, y, t):
        return self.c + 0 * np.asarray(y, dtype=complex)


def ex2_x(y, t):
    return t + (1.5 * np.asarray(y, dtype=complex)) ** (2.0 / 3)


@dataclass(frozen=True)
class ScaledTerm:
    prefactor: float
    beta: float
    delta: float

    @property
    def alpha_prime(self) -> float:
        return 2 * self.beta / 3 + self.delta

    @property
    def p_exponent(self) -> float:
        ap = self.alpha_prime
        return ap - 1 if ap > 1e-12 else -1.0 / 3

    def physical(self, y, t):
        y = np.asarray(y, dtype=complex)
        return self.prefactor * ex2_x(y, t) ** (-self.beta) * y ** (-self.delta)


@dataclass(frozen=True)
class CoefficientSet:
    """Terms of every b_{j,k} and of the forcing r.

    ``exact_b`` optionally gives the untruncated ``b_j(y, t; f)`` (used by
    physical-space residual checks when the series is infinite).
    """

    name: str
    entries: dict
    K: int
    alpha_r: float
    r_terms: tuple
    params: dict = field(default_factory=dict)
    exact_b: object = None

    def terms(self, j: int, k: int) -> tuple:
        if not (0 <= j <= 3 and 0 <= k <= self.K):
            raise IndexError(f"(j, k) = ({j}, {k}) out of range")
        return self.entries.get((j, k), ())

    def b(self, j, k, y, t):
        total = 0 * np.asarray(y, dtype=complex)
        for term in self.terms(j, k):
            total = total + term.physical(y, t)
        return total

    def r(self, y, t):
        total = 0 * np.asarray(y, dtype=complex)
        for term in self.r_terms:
            total = total + term.physical(y, t)
        return total

    def b_full(self, j, y, t, f):
        """``b_j(y, t; f)``, exact when available, else the truncated sum."""
        if self.exact_b is not None:
            return self.exact_b(j, y, t, f)
        return sum(self.b(j, k, y, t) * f ** k for k in range(self.K + 1))

    def time_dependent(self) -> bool:
        every = [t for ts in self.entries.values() for t in ts] + list(self.r_terms)
        return any(isinstance(t, ScaledTerm) for t in every)

    def nonzero(self):
        return sorted(key for key, ts in self.entries.items() if ts)

    def expected_exponent(self, j, k):
        """Leading small-p exponent of B_{j,k} (None when it has no regular part)."""
        exps = [t.p_exponent for t in self.terms(j, k) if not isinstance(t, Dirac)]
        return min(exps) if exps else None

    def export_records(self):
        """One record per (j, k, term) for audit files."""
        rows = []
        for (j, k) in sorted(self.entries):
            for i, term in enumerate(self.entries[(j, k)]):
                rows.append(_term_record(f"b{j}{k}", j, k, i, term))
        for i, term in enumerate(self.r_terms):
            rows.append(_term_record("r", -1, -1, i, term))
        return rows


def _term_record(label, j, k, i, term):
    rec = {"entry": label, "j": j, "k": k, "term": i, "kind": type(term).__name__,
           "coefficient": 0.0, "y_power": 0.0, "x_power": 0.0}
    if isinstance(term, Monomial):
        rec.update(coefficient=complex(term.c).real, y_power=term.power)
    elif isinstance(term, Dirac):
        rec.update(coefficient=complex(term.c).real)
    else:
        rec.update(coefficient=term.prefactor, y_power=term.delta, x_power=term.beta)
    return rec


# --- Example 1 -------------------------------------------------------------

def ex1_coefficients(gamma_: float) -> CoefficientSet:
    """``H_t = H^3 H_xxx`` with ``H = x^gamma (1 + f/y)``, ``y = x^(1-gamma)/(1-gamma)``."""
    g = float(gamma_)
    if not 0 < g < 1:
        raise ValueError("gamma must lie in (0, 1)")
    d = (g - 1) ** 2
    e1 = (7 * g * g - 14 * g + 6) / d
    table = {
        (0, 0): Monomial((22 * g - 11 * g * g - 6) / d, 3),
        (0, 1): Monomial(9 * (6 * g - 3 * g * g - 2) / d, 4),
        (0, 2): Monomial((50 * g - 25 * g * g - 18) / d, 5),
        (0, 3): Monomial(2 * (1 - 2 * g) * (2 * g - 3) / d, 6),
        (1, 0): Monomial(e1, 2),
        (1, 1): Monomial(3 * e1, 3),
        (1, 2): Monomial(3 * e1, 4),
        (1, 3): Monomial(e1, 5),
        (2, 0): Monomial(-3.0, 1),
        (2, 1): Monomial(-9.0, 2),
        (2, 2): Monomial(-9.0, 3),
        (2, 3): Monomial(-3.0, 4),
        (3, 1): Monomial(3.0, 1),
        (3, 2): Monomial(3.0, 2),
        (3, 3): Monomial(1.0, 3),
    }
    entries = {key: (term,) for key, term in table.items()}
    entries[(3, 0)] = ()
    r = (Monomial(-g * (g - 2) / d, 2),)
    return CoefficientSet("ex1", entries, 3, 2.0, r, {"gamma": g})


# --- Example 2 -------------------------------------------------------------

_C12 = 12 ** (1 / 3)
_C18 = 18 ** (1 / 3)

# (prefactor, beta, delta) for prefactor * x^-beta * y^-delta
_EX2_TABLE = {
    (0, 0): [(-35 / 6, 1.5, 2), (-75 / 4, 4.5, 0), (-45 / 8 * _C12, 3.5, 2 / 3),
             (-15 / 4 * _C18, 2.5, 4 / 3)],
    (0, 1): [(-35 / 2, 2.5, 3), (-45, 5.5, 1), (-3 / 2, 2, 1), (-45 / 4 * _C18, 3.5, 7 / 3),
             (-135 / 8 * _C12, 4.5, 5 / 3)],
    (0, 2): [(-165 / 4, 6.5, 2), (-135 / 8 * _C12, 5.5, 8 / 3), (-1 / 2, 3, 2),
             (-35 / 2, 3.5, 4), (-45 / 4 * _C18, 4.5, 10 / 3)],
    (0, 3): [(-45 / 8 * _C12, 6.5, 11 / 3), (-35 / 6, 4.5, 5), (-105 / 8, 7.5, 3),
             (-15 / 4 * _C18, 5.5, 13 / 3)],
    (1, 0): [(15 / 4 * _C18, 2.5, 1 / 3), (45 / 8 * _C12, 3.5, -1 / 3), (35 / 6, 1.5, 1)],
    (1, 1): [(35 / 2, 2.5, 2), (45 / 4 * _C18, 3.5, 4 / 3), (135 / 8 * _C12, 4.5, 2 / 3)],
    (1, 2): [(35 / 2, 3.5, 3), (135 / 8 * _C12, 5.5, 5 / 3), (45 / 4 * _C18, 4.5, 7 / 3)],
    (1, 3): [(35 / 6, 4.5, 4), (15 / 4 * _C18, 5.5, 10 / 3), (45 / 8 * _C12, 6.5, 8 / 3)],
    (2, 0): [(-3, 1.5, 0), (-9 / 4 * _C18, 2.5, -2 / 3)],
    (2, 1): [(-9, 2.5, 1), (-27 / 4 * _C18, 3.5, 1 / 3)],
    (2, 2): [(-9, 3.5, 2), (-27 / 4 * _C18, 4.5, 4 / 3)],
    (2, 3): [(-3, 4.5, 3), (-9 / 4 * _C18, 5.5, 7 / 3)],
    (3, 0): [(1.5, 1.5, -1)],
    (3, 1): [(4.5, 2.5, 0)],
    (3, 2): [(4.5, 3.5, 1)],
    (3, 3): [(1.5, 4.5, 2)],
}


def ex2_coefficients() -> CoefficientSet:
    """Coefficients after ``H = x^-1/2 + x^-3/2 f/y``, ``x = t + (3y/2)^(2/3)``."""
    entries = {key: tuple(ScaledTerm(*row) for row in rows) for key, rows in _EX2_TABLE.items()}
    entries[(3, 0)] = (Dirac(-1.0),) + entries[(3, 0)]
    r = (ScaledTerm(-15 / 8, 3.5, -1),)
    return CoefficientSet("ex2", entries, 3, 4.0 / 3, r, {})


# --- Example 3 -------------------------------------------------------------

def ex3_constants(delta: float) -> dict:
    d = float(delta)
    return {
        "c1": 9 * d * (9 * d + 1) * (9 * d + 2) / (d + 1) ** 3,
        "c1p": (271 * d * d + 86 * d + 6) / (d + 1) ** 2,
        "c2": -3 * (9 * d + 1) / (d + 1),
        "c3": (10 * d + 1) * (10 * d + 2) * (10 * d + 3) / (d + 1) ** 3,
    }


def ex3_coefficients(delta: float, K: int = 24) -> CoefficientSet:
    """``H_t = H^(1/3) H_xxx`` with ``H = x^(-9 delta)(1 + f/y)``, ``y = x^(1+delta)/(1+delta)``.

    With ``W = (1 + f/y)^(1/3)`` the exact coefficients are
    ``b_3 = W - 1``, ``b_2 = c2 W/y``, ``b_1 = c1' W/y^2`` and
    ``b_0 f + r = -c1 W/y^2 - c3 W f/y^3``; the series in ``f/y`` is cut at K.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if K < 4:
        raise ValueError("series truncation K must be at least 4")
    c = ex3_constants(delta)
    entries = {}
    for k in range(K + 1):
        b13 = binom(1 / 3, k)
        entries[(0, k)] = (Monomial(-(c["c1"] * binom(1 / 3, k + 1) + c["c3"] * b13), k + 3),)
        entries[(1, k)] = (Monomial(c["c1p"] * b13, k + 2),)
        entries[(2, k)] = (Monomial(c["c2"] * b13, k + 1),)
        entries[(3, k)] = (Monomial(b13, k),) if k >= 1 else ()
    r = (Monomial(-c["c1"], 2),)

    def exact_b(j, y, t, f):
        y = np.asarray(y, dtype=complex)
        w = (1 + f / y) ** (1 / 3)
        if j == 3:
            return w - 1
        if j == 2:
            return c["c2"] * w / y
        if j == 1:
            return c["c1p"] * w / y ** 2
        # b_0 f + r = -c1 W/y^2 - c3 W f/y^3 with r = -c1/y^2
        u = np.asarray(f / y, dtype=complex)
        tiny = np.abs(u) < 1e-12
        safe = np.where(tiny, 1.0, u)
        q = np.where(tiny, 1 / 3, np.expm1(np.log1p(safe) / 3) / safe)
        return -(c["c1"] * q + c["c3"] * w) / y ** 3

    return CoefficientSet("ex3", entries, K, 2.0, r, {"delta": float(delta)}, exact_b)


def ex3_tail_bound(cset: CoefficientSet, ratio: float, extra: int = 400) -> float:
    """Bound on the discarded part of the Example 3 series.

    ``ratio`` is ``||F||_nu / nu``; the bound sums ``|B_{j,k}| nu^{-k}``-type
    majorants for ``k > K`` using the binomial coefficients.
    """
    if cset.name != "ex3":
        return 0.0
    c = ex3_constants(cset.params["delta"])
    ks = np.arange(cset.K + 1, cset.K + 1 + extra)
    b = np.abs(binom(1 / 3, ks))
    b1 = np.abs(binom(1 / 3, ks + 1))
    weights = (abs(c["c1"]) * b1 + abs(c["c3"]) * b) + abs(c["c1p"]) * b + abs(c["c2"]) * b + b
    return float(np.sum(weights * ratio ** ks))


# --- materialization ---------------------------------------------------------

@dataclass(frozen=True)
class Materialized:
    """Regular part (or None) and Dirac mass of one B_{j,k}."""

    regular: BorelFunction | None
    dirac: complex = 0.0


def _term_function(term, grid: RayGrid, time_grid: TimeGrid | None, contour: ContourSpec | None):
    if isinstance(term, Monomial):
        return ilt_power_law(term.power, term.c, grid, time_grid), 0.0
    if isinstance(term, Dirac):
        return None, complex(term.c)
    times = time_grid.times if time_grid is not None else np.array([0.0])
    ap = term.alpha_prime
    if ap > 1e-12:
        spec = ScaledILTSpec(term.beta, term.delta)
        fn = ilt_scaled_ex2(spec, grid, times, contour, time_grid)
        return fn * term.prefactor, 0.0
    # y^0 growth: split off the Dirac part of the t-free limit
    spec = ScaledILTSpec(term.beta, term.delta, subtract_limit=True)
    fn = ilt_scaled_ex2(spec, grid, times, contour, time_grid)
    return fn * term.prefactor, term.prefactor * spec.h0


def materialize_terms(terms, grid: RayGrid, time_grid: TimeGrid | None = None,
                      contour: ContourSpec | None = None) -> Materialized:
    parts, dirac = [], 0.0
    for term in terms:
        fn, d = _term_function(term, grid, time_grid, contour)
        dirac += d
        if fn is not None:
            parts.append(fn)
    if abs(dirac) < 1e-13:
        dirac = 0.0
    regular = add_functions(parts) if parts else None
    return Materialized(regular, dirac)


def materialize(cset: CoefficientSet, grid: RayGrid, time_grid: TimeGrid | None = None,
                contour: ContourSpec | None = None) -> dict:
    """All nonzero B_{j,k} on the grid, keyed by (j, k)."""
    out = {}
    for key in cset.nonzero():
        out[key] = materialize_terms(cset.entries[key], grid, time_grid, contour)
    return out


def eval_coefficient(cset: CoefficientSet, j: int, k: int, grid: RayGrid,
                     time_grid: TimeGrid | None = None, contour: ContourSpec | None = None) -> BorelFunction:
    """Regular part of B_{j,k} on the grid (zero function when absent)."""
    mat = materialize_terms(cset.terms(j, k), grid, time_grid, contour)
    if mat.regular is None:
        return zeros(grid, 0.0, time_grid)
    return mat.regular


def dirac_mass(cset: CoefficientSet, j: int, k: int) -> complex:
    """Coefficient of the convolution identity in B_{j,k}."""
    total = 0.0
    for term in cset.terms(j, k):
        if isinstance(term, Dirac):
            total += complex(term.c)
        elif isinstance(term, ScaledTerm) and term.alpha_prime <= 1e-12:
            total += term.prefactor * 1.5 ** (-2 * term.beta / 3)
    return 0.0 if abs(total) < 1e-13 else total


def forcing(cset: CoefficientSet, grid: RayGrid, time_grid: TimeGrid | None = None,
            contour: ContourSpec | None = None) -> BorelFunction:
    mat = materialize_terms(cset.r_terms, grid, time_grid, contour)
    if mat.dirac:
        raise ValueError("forcing with a constant part is not transformable")
    return mat.regular if mat.regular is not None else zeros(grid, 0.0, time_grid)

