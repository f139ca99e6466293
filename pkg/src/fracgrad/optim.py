"""Gradient descent variants: classical, naive fractional and the three
convergence-repaired fractional methods.

The naive method replaces the gradient with a fractional derivative anchored
at a constant terminal and therefore settles on a fractional extreme point
away from the true minimizer.  The repaired methods restore convergence by
(1) sliding the terminal with the iterate window (fixed memory step),
(2) keeping only the first series term (higher order truncation), or
(3) driving the order toward 1 through a loss-dependent order law
(variable order).

Scalar runs operate on :class:`~fracgrad.functions.DifferentiableFunction`;
multivariate runs lift any of the methods coordinate-wise with simultaneous
(Jacobi-style) updates.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.special import rgamma

from .fraccalc import (
    DomainError,
    FracDef,
    FracDerivParams,
    TruncationPolicy,
    caputo_series_at_x,
    gen_binomial,
    rl_series_at_x,
)
from .functions import DifferentiableFunction, MultivariateFunction

__all__ = [
    "Algorithm",
    "OrderLaw",
    "LossKind",
    "Coupling",
    "MemoryStyle",
    "Termination",
    "OptimizerConfig",
    "Trajectory",
    "step_classical",
    "step_naive_fractional",
    "run_classical",
    "run_naive_fractional",
    "run_fixed_memory",
    "run_truncated",
    "run_variable_order",
    "run_multivariate",
    "run",
    "seed_warmup",
    "mu_bound_truncated",
    "order_law",
    "loss_for_order",
]

DIVERGENCE_BOUND = 1e12


class Algorithm(enum.Enum):
    CLASSICAL = "classical"
    NAIVE_FRACTIONAL = "naive-fractional"
    FIXED_MEMORY = "fixed-memory"
    TRUNCATED = "truncated"
    VARIABLE_ORDER = "variable-order"


class OrderLaw(enum.Enum):
    RECIPROCAL = "reciprocal"
    SIGMOID = "sigmoid"
    TANH = "tanh"


class LossKind(enum.Enum):
    OBJECTIVE_VALUE = "objective-value"
    GRAD_SQUARED = "grad-squared"


class Coupling(enum.Enum):
    PER_COORDINATE = "per-coordinate"
    UNIFORM = "uniform"


class MemoryStyle(enum.Enum):
    """Base of the power term in the memory series.

    SIGNED uses the raw difference (complex-valued for negative bases, hence
    restricted orders), ABS its absolute value, ABS_EPS the absolute value
    plus a regularizer.
    """

    SIGNED = "signed"
    ABS = "abs"
    ABS_EPS = "abs-eps"


class Termination(enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    DIVERGED = "Diverged"
    DOMAIN_ERROR = "DomainError"


@dataclass(frozen=True)
class OptimizerConfig:
    """Every knob of the five methods in one place.

    ``mu`` may be a scalar or a per-coordinate sequence for multivariate
    runs.  ``alpha`` is the constant order for the constant-order methods;
    the variable-order method derives its per-step order from ``order_law``,
    ``beta`` and ``loss_kind`` instead.  ``K`` is the memory step of the
    fixed memory method, ``c`` the lower terminal, ``epsilon`` the
    regularizer of the truncated method and the ABS_EPS style.
    """

    algorithm: Algorithm
    mu: float | Sequence[float] = 0.1
    alpha: float = 0.7
    order_law: OrderLaw = OrderLaw.TANH
    beta: float = 0.1
    loss_kind: LossKind = LossKind.OBJECTIVE_VALUE
    coupling: Coupling = Coupling.PER_COORDINATE
    gamma: float = 1.0
    K: int = 1
    c: float = 0.0
    epsilon: float = 0.0
    definition: FracDef = FracDef.CAPUTO
    memory_term_style: MemoryStyle = MemoryStyle.ABS
    truncation: TruncationPolicy = field(default_factory=TruncationPolicy)
    max_iters: int = 100
    stop_tol: float = 0.0

    def __post_init__(self) -> None:
        if np.any(np.asarray(self.mu, dtype=float) <= 0):
            raise ValueError("learning rate mu must be positive")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.K < 1:
            raise ValueError(f"memory step K must be >= 1, got {self.K}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.stop_tol < 0:
            raise ValueError(f"stop_tol must be >= 0, got {self.stop_tol}")
        alg = self.algorithm
        if alg is Algorithm.VARIABLE_ORDER:
            if self.beta <= 0:
                raise ValueError(f"beta must be positive, got {self.beta}")
        elif alg is Algorithm.TRUNCATED:
            if not 0 < self.alpha < 2:
                raise ValueError(
                    f"truncated method requires 0 < alpha < 2, got {self.alpha}"
                )
        elif alg is Algorithm.FIXED_MEMORY:
            if self.memory_term_style is MemoryStyle.SIGNED:
                if not 0.5 < self.alpha < 1.5:
                    raise ValueError(
                        "fixed-memory with signed memory term requires "
                        f"0.5 < alpha < 1.5, got {self.alpha}"
                    )
            elif not 0 < self.alpha < 2:
                raise ValueError(
                    f"fixed-memory requires 0 < alpha < 2, got {self.alpha}"
                )

    def mu_vector(self, dim: int) -> np.ndarray:
        mu = np.asarray(self.mu, dtype=float)
        if mu.ndim == 0:
            return np.full(dim, float(mu))
        if mu.shape != (dim,):
            raise ValueError(f"mu has shape {mu.shape}, expected ({dim},)")
        return mu


@dataclass(frozen=True)
class Trajectory:
    """Record of one optimization run.

    ``iterates`` has shape (L, d); ``orders`` (L - 1, d) holds the effective
    per-coordinate order of each step (1.0 for classical steps); ``steps``
    (L - 1,) the max-norm of each step; ``values`` (L,) the objective along
    the way.
    """

    iterates: np.ndarray
    orders: np.ndarray
    steps: np.ndarray
    values: np.ndarray
    termination: Termination

    def __post_init__(self) -> None:
        L = len(self.iterates)
        if not (len(self.values) == L
                and len(self.steps) == L - 1
                and len(self.orders) == L - 1):
            raise ValueError("inconsistent trajectory array lengths")

    @property
    def dimension(self) -> int:
        return self.iterates.shape[1]

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]

    def __len__(self) -> int:
        return len(self.iterates)


def _finish(iterates, orders, values, termination) -> Trajectory:
    it = np.asarray(iterates, dtype=float)
    if it.ndim == 1:
        it = it[:, None]
    steps = np.max(np.abs(np.diff(it, axis=0)), axis=1) if len(it) > 1 else np.zeros(0)
    d = it.shape[1]
    ords = (np.asarray(orders, dtype=float).reshape(len(it) - 1, -1)
            if len(it) > 1 else np.zeros((0, d)))
    return Trajectory(
        iterates=it,
        orders=ords,
        steps=steps,
        values=np.asarray(values, dtype=float),
        termination=termination,
    )


def _diverged(x) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.any(~np.isfinite(x)) or np.any(np.abs(x) > DIVERGENCE_BOUND))


# ---------------------------------------------------------------------------
# single steps

def step_classical(f: DifferentiableFunction, x: float,
                   cfg: OptimizerConfig) -> float:
    """One classical gradient step x - mu f'(x)."""
    return x - float(np.asarray(cfg.mu).reshape(-1)[0]) * f.deriv(1, x)


def step_naive_fractional(f: DifferentiableFunction, x: float,
                          cfg: OptimizerConfig) -> float:
    """One naive fractional step: the gradient is swapped for the
    fractional derivative anchored at the constant terminal c."""
    p = FracDerivParams(cfg.alpha, cfg.c, cfg.definition, cfg.truncation)
    series = caputo_series_at_x if cfg.definition is FracDef.CAPUTO else rl_series_at_x
    return x - float(np.asarray(cfg.mu).reshape(-1)[0]) * series(f, x, p)


# ---------------------------------------------------------------------------
# building blocks

def order_law(J: float, law: OrderLaw, beta: float) -> float:
    """Map a nonnegative loss value to an order in (0, 1]."""
    if J < 0:
        raise ValueError(f"loss must be nonnegative, got {J}")
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if law is OrderLaw.RECIPROCAL:
        return 1.0 / (1.0 + beta * J)
    if law is OrderLaw.SIGMOID:
        # overflow-safe form of 2 / (1 + exp(beta J))
        z = math.exp(-min(beta * J, 745.0))
        return 2.0 * z / (1.0 + z)
    if law is OrderLaw.TANH:
        return 1.0 - math.tanh(beta * J)
    raise ValueError(f"unknown order law {law!r}")


def loss_for_order(f: DifferentiableFunction, x: float, kind: LossKind) -> float:
    """Loss fed to the order law: the objective itself, or the squared
    gradient when the objective's minimum is not zero."""
    if kind is LossKind.OBJECTIVE_VALUE:
        minimum = getattr(f, "known_minimum", None)
        if minimum is not None and minimum != 0:
            warnings.warn(
                "objective-value loss drives the order law correctly only "
                f"for functions with zero minimum; recorded minimum is {minimum}. "
                "Consider grad-squared loss.",
                UserWarning,
                stacklevel=2,
            )
        return f.value(x)
    if kind is LossKind.GRAD_SQUARED:
        return f.deriv(1, x) ** 2
    raise ValueError(f"unknown loss kind {kind!r}")


def mu_bound_truncated(rho: float, d: float, alpha: float) -> float:
    """Supremal learning rate guaranteeing descent of the truncated method
    for a rho-Lipschitz gradient and iterates within distance d of the
    terminal: 2 Gamma(2 - alpha) / (rho d^(1 - alpha))."""
    if rho <= 0 or d <= 0:
        raise ValueError("rho and d must be positive")
    return 2 * math.gamma(2 - alpha) / (rho * d ** (1 - alpha))


def _memory_base(diff: float, style: MemoryStyle, epsilon: float) -> float:
    if style is MemoryStyle.SIGNED:
        if diff <= 0:
            raise DomainError(
                f"signed memory term requires a positive difference, got {diff}"
            )
        return diff
    if style is MemoryStyle.ABS:
        return abs(diff)
    return abs(diff) + epsilon


def _memory_series(f: DifferentiableFunction, x: float, base: float,
                   alpha: float, trunc: TruncationPolicy) -> float:
    """sum_i binom(alpha - 1, i - 1) f^(i)(x) / Gamma(i + 1 - alpha) *
    base^(i - alpha), the memory form of the fractional derivative."""
    if base == 0.0:
        # every power term vanishes for alpha < 1; the iteration halts
        return 0.0
    degree = f.degree_bound
    exact = trunc.exact_if_polynomial and degree is not None
    total = 0.0
    n_terms = 0
    i = 1
    while n_terms < trunc.max_terms:
        if exact and i > degree:
            return total
        term = (
            gen_binomial(alpha - 1, i - 1)
            * f.deriv(i, x)
            * rgamma(i + 1 - alpha)
            * base ** (i - alpha)
        )
        total += term
        n_terms += 1
        i += 1
        if not exact and abs(term) <= trunc.term_tol:
            return total
    return total


def seed_warmup(f: DifferentiableFunction, x0: float, K: int,
                cfg: OptimizerConfig) -> list[float]:
    """Seed window x_0 .. x_{K-1} for the fixed memory method, generated by
    classical gradient steps from x_0."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    seeds = [float(x0)]
    for _ in range(K - 1):
        seeds.append(step_classical(f, seeds[-1], cfg))
    return seeds


# ---------------------------------------------------------------------------
# scalar runs

def _run_scalar(f: DifferentiableFunction, history: list[float],
                cfg: OptimizerConfig,
                stepper: Callable[[float], tuple[float, float]],
                orders: list[float],
                values: list[float]) -> Trajectory:
    """Common driver: repeatedly apply stepper(x) -> (x_next, order_used)."""
    while len(history) <= cfg.max_iters:
        x = history[-1]
        try:
            x_next, alpha_used = stepper(x)
        except DomainError:
            return _finish(history, orders, values, Termination.DOMAIN_ERROR)
        if _diverged(x_next):
            return _finish(history, orders, values, Termination.DIVERGED)
        history.append(x_next)
        orders.append(alpha_used)
        values.append(f.value(x_next))
        if cfg.stop_tol > 0 and abs(x_next - x) <= cfg.stop_tol:
            return _finish(history, orders, values, Termination.CONVERGED)
    return _finish(history, orders, values, Termination.MAX_ITERS)


def run_classical(f: DifferentiableFunction, x0: float,
                  cfg: OptimizerConfig) -> Trajectory:
    def stepper(x: float) -> tuple[float, float]:
        return step_classical(f, x, cfg), 1.0

    return _run_scalar(f, [float(x0)], cfg, stepper, [], [f.value(x0)])


def run_naive_fractional(f: DifferentiableFunction, x0: float,
                         cfg: OptimizerConfig) -> Trajectory:
    def stepper(x: float) -> tuple[float, float]:
        return step_naive_fractional(f, x, cfg), cfg.alpha

    return _run_scalar(f, [float(x0)], cfg, stepper, [], [f.value(x0)])


def run_fixed_memory(f: DifferentiableFunction, seeds: Sequence[float],
                     cfg: OptimizerConfig) -> Trajectory:
    """Fixed memory step method: the terminal slides with the iterate
    window, x_{k+1} = x_k - mu * memory series with base x_k - x_{k-K}.

    ``seeds`` supplies x_0 .. x_{K-1} (see :func:`seed_warmup`).  One
    classical bootstrap step extends the history to K + 1 points so the
    first memory difference exists.
    """
    if cfg.algorithm is not Algorithm.FIXED_MEMORY:
        raise ValueError("config algorithm must be FIXED_MEMORY")
    K = cfg.K
    if len(seeds) != K:
        raise ValueError(f"expected {K} seeds, got {len(seeds)}")
    history = [float(s) for s in seeds]
    orders = [1.0] * (len(history) - 1)
    values = [f.value(s) for s in history]
    if len(history) <= cfg.max_iters:
        history.append(step_classical(f, history[-1], cfg))
        orders.append(1.0)
        values.append(f.value(history[-1]))

    mu = float(np.asarray(cfg.mu).reshape(-1)[0])

    def stepper(x: float) -> tuple[float, float]:
        base = _memory_base(x - history[-1 - K], cfg.memory_term_style,
                            cfg.epsilon)
        h = _memory_series(f, x, base, cfg.alpha, cfg.truncation)
        return x - mu * h, cfg.alpha

    return _run_scalar(f, history, cfg, stepper, orders, values)


def run_truncated(f: DifferentiableFunction, x0: float,
                  cfg: OptimizerConfig) -> Trajectory:
    """Higher order truncation method: only the first series term is kept,
    x_{k+1} = x_k - mu f'(x_k) / Gamma(2 - alpha) * (|x_k - c| + eps)^(1 - alpha)."""
    if cfg.algorithm is not Algorithm.TRUNCATED:
        raise ValueError("config algorithm must be TRUNCATED")
    mu = float(np.asarray(cfg.mu).reshape(-1)[0])
    scale = rgamma(2 - cfg.alpha)

    def stepper(x: float) -> tuple[float, float]:
        base = abs(x - cfg.c) + cfg.epsilon
        h = f.deriv(1, x) * scale * base ** (1 - cfg.alpha)
        return x - mu * h, cfg.alpha

    return _run_scalar(f, [float(x0)], cfg, stepper, [], [f.value(x0)])


def run_variable_order(f: DifferentiableFunction, x0: float,
                       cfg: OptimizerConfig) -> Trajectory:
    """Variable order method: each step evaluates the order law on the
    current loss, then takes a fractional step of that order anchored at c."""
    if cfg.algorithm is not Algorithm.VARIABLE_ORDER:
        raise ValueError("config algorithm must be VARIABLE_ORDER")
    mu = float(np.asarray(cfg.mu).reshape(-1)[0])

    def stepper(x: float) -> tuple[float, float]:
        alpha_k = order_law(loss_for_order(f, x, cfg.loss_kind),
                            cfg.order_law, cfg.beta)
        base = _memory_base(x - cfg.c, cfg.memory_term_style, cfg.epsilon)
        h = _memory_series(f, x, base, alpha_k, cfg.truncation)
        return x - mu * h, alpha_k

    return _run_scalar(f, [float(x0)], cfg, stepper, [], [f.value(x0)])


def run(f: DifferentiableFunction, x0: float, cfg: OptimizerConfig) -> Trajectory:
    """Dispatch on cfg.algorithm; generates fixed-memory seeds by warmup."""
    alg = cfg.algorithm
    if alg is Algorithm.CLASSICAL:
        return run_classical(f, x0, cfg)
    if alg is Algorithm.NAIVE_FRACTIONAL:
        return run_naive_fractional(f, x0, cfg)
    if alg is Algorithm.FIXED_MEMORY:
        return run_fixed_memory(f, seed_warmup(f, x0, cfg.K, cfg), cfg)
    if alg is Algorithm.TRUNCATED:
        return run_truncated(f, x0, cfg)
    if alg is Algorithm.VARIABLE_ORDER:
        return run_variable_order(f, x0, cfg)
    raise ValueError(f"unknown algorithm {alg!r}")


# ---------------------------------------------------------------------------
# multivariate runs

def _multivariate_order(f: MultivariateFunction, v: np.ndarray,
                        cfg: OptimizerConfig) -> np.ndarray:
    """Per-coordinate effective orders for the variable-order method."""
    d = f.dimension
    if cfg.coupling is Coupling.UNIFORM:
        if cfg.loss_kind is LossKind.OBJECTIVE_VALUE:
            J = f.value(v)
        else:
            parts = [f.partial(j, 1, v) ** 2 for j in range(d)]
            weights = [1.0] + [cfg.gamma] * (d - 1)
            J = float(np.dot(weights, parts))
        return np.full(d, order_law(J, cfg.order_law, cfg.beta))
    alphas = np.empty(d)
    for j in range(d):
        if cfg.loss_kind is LossKind.OBJECTIVE_VALUE:
            J = f.value(v)
        else:
            J = f.partial(j, 1, v) ** 2
        alphas[j] = order_law(J, cfg.order_law, cfg.beta)
    return alphas


def run_multivariate(f: MultivariateFunction, x0: Sequence[float],
                     cfg: OptimizerConfig,
                     warmup_mu: float | Sequence[float] | None = None) -> Trajectory:
    """Coordinate-wise lift of the scalar methods with simultaneous
    (Jacobi-style) updates.

    Every coordinate j is updated by the scalar rule applied to the
    coordinate section at the current point.  For the fixed-memory method
    the history is seeded by K classical vector steps; ``warmup_mu``
    overrides the warmup learning rate when the configured rate is too
    aggressive for plain gradient steps (the memory update self-damps, the
    classical warmup does not).
    """
    d = f.dimension
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (d,):
        raise ValueError(f"x0 has shape {x0.shape}, expected ({d},)")
    mu = cfg.mu_vector(d)
    alg = cfg.algorithm

    history = [x0.copy()]
    orders: list[np.ndarray] = []
    values = [f.value(x0)]

    def record(v: np.ndarray, a: np.ndarray) -> None:
        history.append(v)
        orders.append(a)
        values.append(f.value(v))

    if alg is Algorithm.FIXED_MEMORY:
        wmu = mu if warmup_mu is None else np.broadcast_to(
            np.asarray(warmup_mu, dtype=float), (d,)).copy()
        while len(history) <= min(cfg.K, cfg.max_iters):
            v = history[-1]
            record(v - wmu * f.gradient(v), np.ones(d))

    while len(history) <= cfg.max_iters:
        v = history[-1]
        try:
            if alg is Algorithm.CLASSICAL:
                v_next = v - mu * f.gradient(v)
                alphas = np.ones(d)
            elif alg is Algorithm.NAIVE_FRACTIONAL:
                alphas = np.full(d, cfg.alpha)
                steps = np.empty(d)
                scalar_cfg = replace(cfg, mu=1.0)
                for j in range(d):
                    sec = f.section(j, v)
                    steps[j] = v[j] - step_naive_fractional(sec, v[j], scalar_cfg)
                v_next = v - mu * steps
            elif alg is Algorithm.TRUNCATED:
                alphas = np.full(d, cfg.alpha)
                scale = rgamma(2 - cfg.alpha)
                h = np.array([
                    f.partial(j, 1, v) * scale
                    * (abs(v[j] - cfg.c) + cfg.epsilon) ** (1 - cfg.alpha)
                    for j in range(d)
                ])
                v_next = v - mu * h
            elif alg is Algorithm.FIXED_MEMORY:
                old = history[-1 - cfg.K]
                alphas = np.full(d, cfg.alpha)
                h = np.array([
                    _memory_series(
                        f.section(j, v), v[j],
                        _memory_base(v[j] - old[j], cfg.memory_term_style,
                                     cfg.epsilon),
                        cfg.alpha, cfg.truncation,
                    )
                    for j in range(d)
                ])
                v_next = v - mu * h
            elif alg is Algorithm.VARIABLE_ORDER:
                alphas = _multivariate_order(f, v, cfg)
                h = np.array([
                    _memory_series(
                        f.section(j, v), v[j],
                        _memory_base(v[j] - cfg.c, cfg.memory_term_style,
                                     cfg.epsilon),
                        alphas[j], cfg.truncation,
                    )
                    for j in range(d)
                ])
                v_next = v - mu * h
            else:
                raise ValueError(f"unknown algorithm {alg!r}")
        except DomainError:
            return _finish(history, orders, values, Termination.DOMAIN_ERROR)
        if _diverged(v_next):
            return _finish(history, orders, values, Termination.DIVERGED)
        record(v_next, alphas)
        if cfg.stop_tol > 0 and np.max(np.abs(v_next - v)) <= cfg.stop_tol:
            return _finish(history, orders, values, Termination.CONVERGED)
    return _finish(history, orders, values, Termination.MAX_ITERS)
