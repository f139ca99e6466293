"""Fractional derivative evaluation: series expansions, closed forms and a
quadrature oracle.

All evaluation paths compute the Caputo or Riemann-Liouville derivative of
order ``alpha`` with lower terminal ``c``.  The production paths are the
series expansions around the evaluation point (``caputo_series_at_x``,
``rl_series_at_x``) and around the terminal (``series_at_c``); they need the
objective to expose analytic derivatives of arbitrary order (see
:mod:`fracgrad.functions`).  The quadrature path integrates the defining
weakly-singular integral directly and exists only as an independent
cross-check.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

from scipy.integrate import quad
from scipy.special import rgamma

__all__ = [
    "FracDef",
    "TruncationPolicy",
    "FracDerivParams",
    "DomainError",
    "PoleError",
    "QuadratureError",
    "TruncationWarning",
    "gamma",
    "gen_binomial",
    "caputo_series_at_x",
    "rl_series_at_x",
    "series_at_c",
    "quadratic_closed_form",
    "quadrature_oracle",
    "frac_fixed_points_quadratic",
    "QuadraticFixedPoints",
]


class DomainError(ValueError):
    """Evaluation point outside the validity domain (e.g. x <= c)."""


class PoleError(ValueError):
    """Gamma function evaluated at a non-positive integer."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the accuracy budget."""


class TruncationWarning(UserWarning):
    """Series hit the term budget before the tail fell below tolerance."""


class FracDef(enum.Enum):
    """Which definition of the fractional derivative to use."""

    CAPUTO = "caputo"
    RIEMANN_LIOUVILLE = "riemann-liouville"


@dataclass(frozen=True)
class TruncationPolicy:
    """How to cut the (formally infinite) series expansions.

    ``max_terms`` caps the number of summed terms, ``term_tol`` stops the sum
    once a term's magnitude drops below it, and ``exact_if_polynomial`` sums
    exactly up to the degree bound for polynomial objectives, where higher
    derivatives vanish identically and the series is finite.
    """

    max_terms: int = 30
    term_tol: float = 1e-12
    exact_if_polynomial: bool = True

    def __post_init__(self) -> None:
        if self.max_terms < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms}")
        if self.term_tol < 0:
            raise ValueError(f"term_tol must be >= 0, got {self.term_tol}")


@dataclass(frozen=True)
class FracDerivParams:
    """Order, lower terminal, definition and truncation of a fractional
    derivative evaluation."""

    alpha: float
    c: float = 0.0
    definition: FracDef = FracDef.CAPUTO
    truncation: TruncationPolicy = field(default_factory=TruncationPolicy)

    def __post_init__(self) -> None:
        if not math.isfinite(self.alpha):
            raise ValueError(f"alpha must be finite, got {self.alpha}")
        if not math.isfinite(self.c):
            raise ValueError(f"terminal c must be finite, got {self.c}")

    @property
    def n(self) -> int:
        """Smallest integer n with n - 1 < alpha <= n."""
        return max(1, math.ceil(self.alpha))

    def require_series_order(self) -> None:
        # series paths are stated for n = 1 or 2; alpha = 1 must reduce to
        # the classical derivative, other integers are not supported
        if not 0 < self.alpha < 2:
            raise ValueError(
                f"series evaluation requires 0 < alpha < 2, got {self.alpha}"
            )
        if self.alpha == int(self.alpha) and self.alpha != 1:
            raise ValueError(
                f"series evaluation requires non-integer alpha or alpha = 1, "
                f"got {self.alpha}"
            )


def gamma(x: float) -> float:
    """Gamma function, rejecting the poles at 0, -1, -2, ...

    Negative non-integer arguments are handled through the reflection
    identity inside :func:`math.gamma`.
    """
    if x <= 0 and x == int(x):
        raise PoleError(f"gamma has a pole at {x}")
    return math.gamma(x)


def gen_binomial(p: float, q: int) -> float:
    """Generalized binomial coefficient with real upper index.

    Computed by the multiplicative recurrence
    ``binom(p, q) = binom(p, q - 1) * (p - q + 1) / q`` instead of the gamma
    ratio, which hits poles at negative integer arguments for q > p + 1.
    """
    if q < 0:
        raise ValueError(f"lower index must be a nonnegative integer, got {q}")
    out = 1.0
    for j in range(1, q + 1):
        out *= (p - j + 1) / j
    return out


def _check_point(x: float, p: FracDerivParams, caputo: bool) -> float | None:
    """Validate x against the terminal; returns the x = c value if defined."""
    if x < p.c:
        raise DomainError(f"evaluation point {x} lies below the terminal {p.c}")
    if x == p.c:
        # the Caputo integral runs over an empty interval; the RL value
        # carries a (x - c)^(-alpha) term that diverges
        if caputo and 0 < p.alpha < 1:
            return 0.0
        raise DomainError(
            f"evaluation at the terminal x = c = {x} is undefined for "
            f"{'RL' if not caputo else f'alpha = {p.alpha}'}"
        )
    return None


def _sum_series(f, x: float, p: FracDerivParams, *, start: int,
                binom_upper: float, deriv_at: float) -> float:
    """Shared series kernel: sum binom(binom_upper, i - start) *
    f^(i)(deriv_at) / Gamma(i + 1 - alpha) * (x - c)^(i - alpha)."""
    trunc = p.truncation
    dx = x - p.c
    degree = getattr(f, "degree_bound", None)
    exact = trunc.exact_if_polynomial and degree is not None

    total = 0.0
    n_terms = 0
    i = start
    last_term = math.inf
    while n_terms < trunc.max_terms:
        if exact and i > degree:
            return total
        term = (
            gen_binomial(binom_upper, i - start)
            * f.deriv(i, deriv_at)
            * rgamma(i + 1 - p.alpha)
            * dx ** (i - p.alpha)
        )
        total += term
        last_term = abs(term)
        n_terms += 1
        i += 1
        if not exact and last_term <= trunc.term_tol:
            return total
    if last_term > trunc.term_tol:
        warnings.warn(
            f"series truncated after {trunc.max_terms} terms with last term "
            f"{last_term:.3e} above term_tol {trunc.term_tol:.3e}",
            TruncationWarning,
            stacklevel=3,
        )
    return total


def caputo_series_at_x(f, x: float, p: FracDerivParams) -> float:
    """Caputo derivative via the series expanded at the evaluation point."""
    p.require_series_order()
    at_terminal = _check_point(x, p, caputo=True)
    if at_terminal is not None:
        return at_terminal
    n = p.n
    return _sum_series(f, x, p, start=n, binom_upper=p.alpha - n, deriv_at=x)


def rl_series_at_x(f, x: float, p: FracDerivParams) -> float:
    """Riemann-Liouville derivative via the series expanded at the
    evaluation point."""
    p.require_series_order()
    _check_point(x, p, caputo=False)
    return _sum_series(f, x, p, start=0, binom_upper=p.alpha, deriv_at=x)


def series_at_c(f, x: float, p: FracDerivParams) -> float:
    """Either definition via the Taylor-at-terminal expansion.

    Same sums as the at-x forms but with derivatives taken at ``c`` and unit
    coefficients; exact for polynomials, exposed for comparison only.
    """
    p.require_series_order()
    caputo = p.definition is FracDef.CAPUTO
    at_terminal = _check_point(x, p, caputo=caputo)
    if at_terminal is not None:
        return at_terminal

    trunc = p.truncation
    dx = x - p.c
    start = p.n if caputo else 0
    degree = getattr(f, "degree_bound", None)
    exact = trunc.exact_if_polynomial and degree is not None

    total = 0.0
    n_terms = 0
    i = start
    last_term = math.inf
    while n_terms < trunc.max_terms:
        if exact and i > degree:
            return total
        term = f.deriv(i, p.c) * rgamma(i + 1 - p.alpha) * dx ** (i - p.alpha)
        total += term
        last_term = abs(term)
        n_terms += 1
        i += 1
        if not exact and last_term <= trunc.term_tol:
            return total
    if last_term > trunc.term_tol:
        warnings.warn(
            f"series truncated after {trunc.max_terms} terms with last term "
            f"{last_term:.3e} above term_tol {trunc.term_tol:.3e}",
            TruncationWarning,
            stacklevel=2,
        )
    return total


def quadratic_closed_form(a: float, xstar: float, fm: float, x: float,
                          p: FracDerivParams) -> float:
    """Closed-form fractional derivative of f(x) = a (x - x*)^2 + fm.

    Valid for 0 < alpha < 1.  The constant part contributes only under the
    Riemann-Liouville definition.
    """
    if not 0 < p.alpha < 1:
        raise ValueError(
            f"closed form is stated for 0 < alpha < 1, got {p.alpha}"
        )
    caputo = p.definition is FracDef.CAPUTO
    at_terminal = _check_point(x, p, caputo=caputo)
    if at_terminal is not None:
        return at_terminal
    dx = x - p.c
    alpha = p.alpha
    value = (
        2 * a * rgamma(3 - alpha) * dx ** (2 - alpha)
        + 2 * a * (p.c - xstar) * rgamma(2 - alpha) * dx ** (1 - alpha)
    )
    if not caputo:
        value += (a * (p.c - xstar) ** 2 + fm) * rgamma(1 - alpha) * dx ** -alpha
    return value


_QUAD_LIMIT = 200
_QUAD_TOL = 1e-10


def _weighted_integral(func, c: float, upper: float, alpha: float) -> float:
    """Integral of func(t) * (upper - t)^(-alpha) over [c, upper]."""
    val, err = quad(
        func, c, upper,
        weight="alg", wvar=(0.0, -alpha),
        epsabs=1e-13, epsrel=_QUAD_TOL, limit=_QUAD_LIMIT,
    )
    if err > max(1e-8, 1e-7 * abs(val)):
        raise QuadratureError(
            f"quadrature error estimate {err:.3e} too large for value {val:.6e}"
        )
    return val


def quadrature_oracle(f, x: float, p: FracDerivParams) -> float:
    """Fractional derivative straight from the defining integral.

    Caputo: integrate f'(t) against the kernel (x - t)^(-alpha) with a
    singularity-absorbing weighted quadrature.  Riemann-Liouville:
    numerically differentiate the fractional integral of f (Richardson
    extrapolated central differences).  Only 0 < alpha < 1 is supported;
    intended as an independent oracle, not a production path.
    """
    if not 0 < p.alpha < 1:
        raise ValueError(
            f"quadrature oracle is implemented for 0 < alpha < 1, got {p.alpha}"
        )
    caputo = p.definition is FracDef.CAPUTO
    at_terminal = _check_point(x, p, caputo=caputo)
    if at_terminal is not None:
        return at_terminal
    alpha = p.alpha

    if caputo:
        integral = _weighted_integral(lambda t: f.deriv(1, t), p.c, x, alpha)
        return integral * rgamma(1 - alpha)

    def frac_integral(y: float) -> float:
        return _weighted_integral(f.value, p.c, y, alpha) * rgamma(1 - alpha)

    h = min(0.01, 0.25 * (x - p.c))

    def central(step: float) -> float:
        return (frac_integral(x + step) - frac_integral(x - step)) / (2 * step)

    d1 = central(h)
    d2 = central(h / 2)
    return (4 * d2 - d1) / 3


class QuadraticFixedPoints(NamedTuple):
    """Roots of the fractional derivative of a shifted quadratic."""

    riemann_liouville: tuple[float, float]
    caputo: float


def frac_fixed_points_quadratic(xstar: float, c: float,
                                alpha: float) -> QuadraticFixedPoints:
    """Fractional extreme points of f(x) = a (x - x*)^2 + fm (independent
    of a and fm for the Caputo case, fm = 0 assumed for RL).

    These are the points the naive fractional iteration settles on instead
    of the true minimizer x*.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"fixed points are stated for 0 < alpha < 1, got {alpha}")
    if c == xstar:
        return QuadraticFixedPoints((xstar, xstar), xstar)
    disc = math.sqrt((2 - alpha) ** 2 - 2 * (2 - alpha) * (1 - alpha))
    rl = tuple(
        c - (c - xstar) * ((2 - alpha) + s * disc) / 2 for s in (+1, -1)
    )
    cap = c - (c - xstar) * (2 - alpha)
    return QuadraticFixedPoints(rl, cap)
