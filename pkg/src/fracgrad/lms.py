"""Transverse-filter identification with fractional LMS updates.

A three-tap FIR filter with unknown weights is identified from its input and
noisy output.  The instantaneous squared error e_k^2 is quadratic in each
tap (with the others frozen), so the fractional series updates are exact
with two terms.  Any of the optimizers from :mod:`fracgrad.optim` can drive
the per-tap updates; the variable-order method designs a separate order per
tap from the shared instantaneous error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import rgamma

from .optim import (
    Algorithm,
    LossKind,
    OptimizerConfig,
    Termination,
    _memory_base,
    order_law,
)
from .fraccalc import DomainError, gen_binomial

__all__ = ["FilterScenario", "TapTrajectory", "generate_signals", "run_lms"]

DEFAULT_TRUE_WEIGHTS = (2.0, -3.0, 1.0)
DEFAULT_NOISE_STD = 0.1  # variance 0.01


@dataclass(frozen=True)
class FilterScenario:
    """Deterministic synthetic identification problem.

    The desired output is d_k = w1 u_k + w2 u_{k-1} + w3 u_{k-2} + v_k with
    u_j = 0 for j < 0.  Signals are regenerated bit-identically from the
    seed.
    """

    true_weights: tuple[float, ...] = DEFAULT_TRUE_WEIGHTS
    horizon: int = 2000
    seed: int = 0
    noise_std: float = DEFAULT_NOISE_STD

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.noise_std < 0:
            raise ValueError(f"noise_std must be >= 0, got {self.noise_std}")

    @property
    def n_taps(self) -> int:
        return len(self.true_weights)

    def signals(self) -> tuple[np.ndarray, np.ndarray]:
        return generate_signals(self.seed, self.horizon,
                                noise_std=self.noise_std)


@dataclass(frozen=True)
class TapTrajectory:
    """Per-sample weight estimates, errors, effective orders."""

    weights: np.ndarray      # (horizon + 1, n_taps)
    errors: np.ndarray       # (horizon,)
    orders: np.ndarray       # (horizon, n_taps)
    termination: Termination

    def __post_init__(self) -> None:
        if not (len(self.weights) == len(self.errors) + 1 == len(self.orders) + 1):
            raise ValueError("inconsistent tap trajectory lengths")

    @property
    def final(self) -> np.ndarray:
        return self.weights[-1]


def generate_signals(seed: int, horizon: int,
                     noise_std: float = DEFAULT_NOISE_STD
                     ) -> tuple[np.ndarray, np.ndarray]:
    """White unit-variance input and small white noise, reproducible from
    the seed."""
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(horizon)
    v = noise_std * rng.standard_normal(horizon)
    return u, v


def _tap_step(alg: Algorithm, w: float, g1: float, g2: float, base: float,
              alpha: float, mu: float) -> float:
    """One scalar update of a single tap.

    g1, g2 are the first and second derivatives of the instantaneous loss
    with respect to this tap; the loss is quadratic, so the memory series
    has exactly two terms.
    """
    if alg is Algorithm.CLASSICAL:
        return w - mu * g1
    scale1 = rgamma(2 - alpha)
    if alg is Algorithm.TRUNCATED:
        return w - mu * g1 * scale1 * base ** (1 - alpha)
    if base == 0.0:
        return w
    h = (g1 * scale1 * base ** (1 - alpha)
         + gen_binomial(alpha - 1, 1) * g2 * rgamma(3 - alpha)
         * base ** (2 - alpha))
    return w - mu * h


def run_lms(scenario: FilterScenario, cfg: OptimizerConfig,
            w0: tuple[float, ...] = (0.1, -0.1, 0.1)) -> TapTrajectory:
    """Identify the filter taps sample by sample with the configured
    algorithm.

    Each tap is updated from the instantaneous squared error with the other
    taps frozen (coordinate-section view); updates within one sample are
    simultaneous.  The fixed-memory method seeds its per-tap history with K
    classical LMS updates.
    """
    n = scenario.n_taps
    if len(w0) != n:
        raise ValueError(f"w0 has {len(w0)} entries, expected {n}")
    u, v = scenario.signals()
    w_true = np.asarray(scenario.true_weights, dtype=float)
    mu = cfg.mu_vector(n)
    alg = cfg.algorithm

    w = np.asarray(w0, dtype=float).copy()
    weights = [w.copy()]
    errors = []
    orders = []
    termination = Termination.MAX_ITERS
    for k in range(scenario.horizon):
        u_vec = np.array([u[k - i] if k - i >= 0 else 0.0 for i in range(n)])
        d = float(w_true @ u_vec) + v[k]
        e = d - float(w @ u_vec)
        g1 = -2.0 * e * u_vec          # d(e^2)/dw_i
        g2 = 2.0 * u_vec * u_vec       # d2(e^2)/dw_i2

        alphas = np.ones(n)
        new_w = w.copy()
        try:
            for i in range(n):
                if alg is Algorithm.CLASSICAL:
                    base, alpha = 0.0, 1.0
                elif alg is Algorithm.FIXED_MEMORY:
                    if len(weights) <= cfg.K:
                        # classical warmup until the memory window exists
                        new_w[i] = w[i] - mu[i] * g1[i]
                        continue
                    alpha = cfg.alpha
                    base = _memory_base(w[i] - weights[-1 - cfg.K][i],
                                        cfg.memory_term_style, cfg.epsilon)
                elif alg is Algorithm.TRUNCATED:
                    alpha = cfg.alpha
                    base = abs(w[i] - cfg.c) + cfg.epsilon
                elif alg is Algorithm.VARIABLE_ORDER:
                    J = e * e if cfg.loss_kind is LossKind.OBJECTIVE_VALUE \
                        else g1[i] ** 2
                    alpha = order_law(J, cfg.order_law, cfg.beta)
                    base = _memory_base(w[i] - cfg.c, cfg.memory_term_style,
                                        cfg.epsilon)
                elif alg is Algorithm.NAIVE_FRACTIONAL:
                    alpha = cfg.alpha
                    base = _memory_base(w[i] - cfg.c, cfg.memory_term_style,
                                        cfg.epsilon)
                else:
                    raise ValueError(f"unknown algorithm {alg!r}")
                alphas[i] = alpha
                new_w[i] = _tap_step(alg, w[i], g1[i], g2[i], base, alpha, mu[i])
        except DomainError:
            termination = Termination.DOMAIN_ERROR
            break
        if not np.all(np.isfinite(new_w)) or np.abs(new_w).max() > 1e12:
            termination = Termination.DIVERGED
            break
        w = new_w
        weights.append(w.copy())
        errors.append(e)
        orders.append(alphas)
    return TapTrajectory(
        weights=np.asarray(weights),
        errors=np.asarray(errors, dtype=float),
        orders=(np.asarray(orders, dtype=float)
                if orders else np.zeros((0, n))),
        termination=termination,
    )
