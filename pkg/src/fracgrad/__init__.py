"""Fractional-order gradient descent with convergence repair.

The naive fractional gradient method replaces the gradient with a fractional
derivative and, as a result, settles on a "fractional extreme point" away
from the true minimizer.  This package implements the three repairs (fixed
memory step, higher order truncation, variable fractional order) together
with the fractional-derivative machinery, benchmark objectives, an LMS
filter identification application and a reproducible experiment harness.
"""

from .fraccalc import (
    DomainError,
    FracDef,
    FracDerivParams,
    PoleError,
    QuadratureError,
    TruncationPolicy,
    TruncationWarning,
    caputo_series_at_x,
    frac_fixed_points_quadratic,
    gamma,
    gen_binomial,
    quadratic_closed_form,
    quadrature_oracle,
    rl_series_at_x,
    series_at_c,
)
from .functions import (
    DifferentiableFunction,
    MultivariateFunction,
    Polynomial,
    Rosenbrock,
    ShiftedQuadratic,
    SumOfShiftedQuadratics,
    make_polynomial,
    make_rosenbrock,
    make_shifted_quadratic,
)
from .lms import FilterScenario, TapTrajectory, generate_signals, run_lms
from .optim import (
    Algorithm,
    Coupling,
    LossKind,
    MemoryStyle,
    OptimizerConfig,
    OrderLaw,
    Termination,
    Trajectory,
    loss_for_order,
    mu_bound_truncated,
    order_law,
    run,
    run_classical,
    run_fixed_memory,
    run_multivariate,
    run_naive_fractional,
    run_truncated,
    run_variable_order,
    seed_warmup,
    step_classical,
    step_naive_fractional,
)

__version__ = "0.1.0"
