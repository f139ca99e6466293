"""Objective functions with analytic derivative providers.

The series formulas in :mod:`fracgrad.fraccalc` need i-th derivatives for
arbitrary i, so every objective carries its own exact derivatives instead of
relying on automatic differentiation.  Multivariate objectives expose
per-coordinate sections (all other coordinates frozen), which is all the
coordinate-wise optimizers ever need; mixed partials never appear.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Sequence

import numpy as np

__all__ = [
    "DifferentiableFunction",
    "MultivariateFunction",
    "Polynomial",
    "ShiftedQuadratic",
    "SumOfShiftedQuadratics",
    "Rosenbrock",
    "make_polynomial",
    "make_shifted_quadratic",
    "make_rosenbrock",
]


class DifferentiableFunction(ABC):
    """A scalar objective exposing its value and i-th derivative.

    ``degree_bound`` is the polynomial degree for polynomial instances and
    None otherwise; series evaluators use it to terminate exactly.
    ``known_minimum`` is the recorded minimum value when available (used to
    sanity-check order-law loss choices), None when unknown.
    """

    degree_bound: int | None = None
    known_minimum: float | None = None

    @abstractmethod
    def value(self, x: float) -> float:
        ...

    @abstractmethod
    def deriv(self, i: int, x: float) -> float:
        """i-th derivative at x; deriv(0, x) == value(x)."""


class Polynomial(DifferentiableFunction):
    """Polynomial with coefficients in ascending power order."""

    def __init__(self, coeffs: Sequence[float]):
        if len(coeffs) == 0:
            raise ValueError("coefficient list must be nonempty")
        coeffs = np.asarray(coeffs, dtype=float)
        trimmed = np.polynomial.polynomial.polytrim(coeffs)
        self.coeffs = trimmed
        self.degree_bound = len(trimmed) - 1

    def value(self, x: float) -> float:
        return float(np.polynomial.polynomial.polyval(x, self.coeffs))

    def deriv(self, i: int, x: float) -> float:
        if i < 0:
            raise ValueError(f"derivative order must be >= 0, got {i}")
        if i == 0:
            return self.value(x)
        if i > self.degree_bound:
            return 0.0
        d = np.polynomial.polynomial.polyder(self.coeffs, i)
        return float(np.polynomial.polynomial.polyval(x, d))

    def __repr__(self) -> str:
        return f"Polynomial({self.coeffs.tolist()})"


class ShiftedQuadratic(Polynomial):
    """f(x) = a (x - x*)^2 + fm with a > 0; minimum fm at x*."""

    def __init__(self, a: float, xstar: float, fm: float = 0.0):
        if a <= 0:
            raise ValueError(f"leading coefficient must be positive, got {a}")
        super().__init__([a * xstar**2 + fm, -2 * a * xstar, a])
        self.a = a
        self.xstar = xstar
        self.known_minimum = fm
        # polytrim drops nothing here; the quadratic term is nonzero
        self.degree_bound = 2

    def __repr__(self) -> str:
        return (f"ShiftedQuadratic(a={self.a}, xstar={self.xstar}, "
                f"fm={self.known_minimum})")


class MultivariateFunction(ABC):
    """Objective on R^d exposing per-coordinate sections.

    ``section(j, v)`` freezes every coordinate except j and returns the
    resulting scalar :class:`DifferentiableFunction`; ``partial(j, i, v)``
    is its i-th derivative evaluated at ``v[j]``.
    """

    dimension: int
    known_minimum: float | None = None

    @abstractmethod
    def value(self, v: Sequence[float]) -> float:
        ...

    @abstractmethod
    def section(self, coord: int, v: Sequence[float]) -> DifferentiableFunction:
        ...

    def partial(self, coord: int, i: int, v: Sequence[float]) -> float:
        return self.section(coord, v).deriv(i, v[coord])

    def gradient(self, v: Sequence[float]) -> np.ndarray:
        return np.array([self.partial(j, 1, v) for j in range(self.dimension)])


class SumOfShiftedQuadratics(MultivariateFunction):
    """f(v) = sum_j a_j (v_j - m_j)^2 + fm, the separable quadratic family."""

    def __init__(self, a: Sequence[float], centers: Sequence[float],
                 fm: float = 0.0):
        a = np.asarray(a, dtype=float)
        centers = np.asarray(centers, dtype=float)
        if a.shape != centers.shape or a.ndim != 1:
            raise ValueError("coefficients and centers must be 1-D and equal length")
        if np.any(a <= 0):
            raise ValueError("all quadratic coefficients must be positive")
        self.a = a
        self.centers = centers
        self.fm = fm
        self.dimension = len(a)
        self.known_minimum = fm

    def value(self, v: Sequence[float]) -> float:
        v = np.asarray(v, dtype=float)
        return float(np.sum(self.a * (v - self.centers) ** 2) + self.fm)

    def section(self, coord: int, v: Sequence[float]) -> ShiftedQuadratic:
        v = np.asarray(v, dtype=float)
        rest = self.value(v) - self.a[coord] * (v[coord] - self.centers[coord]) ** 2
        return ShiftedQuadratic(self.a[coord], self.centers[coord], rest)

    def __repr__(self) -> str:
        return (f"SumOfShiftedQuadratics(a={self.a.tolist()}, "
                f"centers={self.centers.tolist()}, fm={self.fm})")


class Rosenbrock(MultivariateFunction):
    """f(x, y) = (1 - x)^2 + 100 (y - x^2)^2, minimum 0 at (1, 1).

    Coordinate sections are polynomials (degree 4 in x, degree 2 in y), so
    the fractional series evaluate exactly.
    """

    dimension = 2
    known_minimum = 0.0

    def value(self, v: Sequence[float]) -> float:
        x, y = v
        return float((1 - x) ** 2 + 100 * (y - x * x) ** 2)

    def section(self, coord: int, v: Sequence[float]) -> Polynomial:
        x, y = float(v[0]), float(v[1])
        if coord == 0:
            # (1-x)^2 + 100 (y - x^2)^2 expanded in powers of x
            return Polynomial([
                1 + 100 * y * y,
                -2.0,
                1 - 200 * y,
                0.0,
                100.0,
            ])
        if coord == 1:
            return Polynomial([
                (1 - x) ** 2 + 100 * x**4,
                -200 * x * x,
                100.0,
            ])
        raise IndexError(f"coordinate index {coord} out of range for dimension 2")

    def __repr__(self) -> str:
        return "Rosenbrock()"


def make_polynomial(coeffs: Sequence[float]) -> Polynomial:
    """Polynomial from ascending-power coefficients."""
    return Polynomial(coeffs)


def make_shifted_quadratic(a: float, xstar: float, fm: float = 0.0) -> ShiftedQuadratic:
    """f(x) = a (x - x*)^2 + fm."""
    return ShiftedQuadratic(a, xstar, fm)


def make_rosenbrock() -> Rosenbrock:
    """The classic banana-valley benchmark."""
    return Rosenbrock()
