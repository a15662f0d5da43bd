"""The three model problems and their changes of variables.

Each example knows its coefficient set, the map between the original
variable ``x`` and the transformed variable ``y``, and how to rebuild
``H(x, t)`` from ``f(y, t)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientSet, ex1_coefficients, ex2_coefficients, ex3_coefficients


@dataclass(frozen=True)
class Ex1:
    """``H_t = H^3 H_xxx``, ``H(x, 0) = x^gamma``."""

    gamma: float = 0.5
    name = "ex1"
    default_grading = 2.0

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")

    def coefficients(self, K=None) -> CoefficientSet:
        return ex1_coefficients(self.gamma)

    def x_of_y(self, y, t):
        g = self.gamma
        return ((1 - g) * np.asarray(y, dtype=complex)) ** (1 / (1 - g))

    def y_of_x(self, x, t):
        g = self.gamma
        return np.asarray(x, dtype=complex) ** (1 - g) / (1 - g)

    def H_from_f(self, f, y, t):
        return self.x_of_y(y, t) ** self.gamma * (1 + f / y)

    def H_initial(self, x):
        return np.asarray(x, dtype=complex) ** self.gamma

    def params(self) -> dict:
        return {"gamma": self.gamma}


@dataclass(frozen=True)
class Ex2:
    """``H = x^-1/2 + x^-3/2 f/y`` with ``x = t + (3y/2)^(2/3)``."""

    name = "ex2"
    default_grading = 3.0

    def coefficients(self, K=None) -> CoefficientSet:
        return ex2_coefficients()

    def x_of_y(self, y, t):
        return t + (1.5 * np.asarray(y, dtype=complex)) ** (2.0 / 3)

    def y_of_x(self, x, t):
        return (2.0 / 3) * (np.asarray(x, dtype=complex) - t) ** 1.5

    def H_from_f(self, f, y, t):
        x = self.x_of_y(y, t)
        return x ** -0.5 + x ** -1.5 * f / y

    def H_initial(self, x):
        return np.asarray(x, dtype=complex) ** -0.5

    def params(self) -> dict:
        return {}


@dataclass(frozen=True)
class Ex3:
    """``H_t = H^(1/3) H_xxx``, ``H(x, 0) = x^(-9 delta)``."""

    delta: float = 1.0
    name = "ex3"
    default_grading = 2.0

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")

    def coefficients(self, K=None) -> CoefficientSet:
        return ex3_coefficients(self.delta, 24 if K is None else K)

    def x_of_y(self, y, t):
        d = self.delta
        return ((1 + d) * np.asarray(y, dtype=complex)) ** (1 / (1 + d))

    def y_of_x(self, x, t):
        d = self.delta
        return np.asarray(x, dtype=complex) ** (1 + d) / (1 + d)

    def H_from_f(self, f, y, t):
        return self.x_of_y(y, t) ** (-9 * self.delta) * (1 + f / y)

    def H_initial(self, x):
        return np.asarray(x, dtype=complex) ** (-9 * self.delta)

    def params(self) -> dict:
        return {"delta": self.delta}


@dataclass(frozen=True)
class Custom:
    """A user-supplied coefficient set without a physical back-transformation."""

    cset: CoefficientSet
    grading: float = 2.0
    name = "custom"

    @property
    def default_grading(self):
        return self.grading

    def coefficients(self, K=None) -> CoefficientSet:
        return self.cset

    def params(self) -> dict:
        return {}


def make_example(name: str, gamma: float = 0.5, delta: float = 1.0):
    name = name.lower()
    if name == "ex1":
        return Ex1(gamma)
    if name == "ex2":
        return Ex2()
    if name == "ex3":
        return Ex3(delta)
    raise ValueError(f"unknown example '{name}'")
