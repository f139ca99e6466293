"""Declarative experiment harness reproducing the six benchmark studies.

Each built-in experiment freezes the exact parameter values of one study
(learning rates, orders, memory steps, terminals, starts) as constants; they
are reproduction artifacts, not defaults to tweak.  ``run_experiment``
executes every run of a spec, exports one CSV trajectory file per run, a
JSON summary, and (optionally) rendered figures.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import optim
from .fraccalc import FracDef, TruncationPolicy
from .functions import (
    MultivariateFunction,
    Polynomial,
    Rosenbrock,
    ShiftedQuadratic,
    SumOfShiftedQuadratics,
)
from .lms import FilterScenario, TapTrajectory, run_lms
from .optim import (
    Algorithm,
    Coupling,
    LossKind,
    MemoryStyle,
    OptimizerConfig,
    OrderLaw,
    Termination,
    Trajectory,
)

__all__ = [
    "ExperimentSpec",
    "RunDef",
    "RunResult",
    "RunReport",
    "band_entry",
    "build_function",
    "builtin_experiment",
    "builtin_ids",
    "contour_grid",
    "load_spec",
    "run_experiment",
    "trajectory_to_csv",
    "trajectory_from_csv",
    "write_contour_csv",
]


# ---------------------------------------------------------------------------
# declarative pieces

@dataclass(frozen=True)
class RunDef:
    """One run: a function descriptor, a start, and a full config."""

    label: str
    function: dict[str, Any]
    config: OptimizerConfig
    x0: tuple[float, ...] = ()
    band_target: tuple[float, ...] | None = None
    band_tol: float | None = None
    warmup_mu: float | None = None   # multivariate fixed-memory seeding rate
    w0: tuple[float, ...] | None = None  # LMS initial taps


@dataclass(frozen=True)
class ExperimentSpec:
    id: str
    description: str
    runs: tuple[RunDef, ...]

    def __post_init__(self) -> None:
        if not self.runs:
            raise ValueError(f"experiment {self.id!r} has an empty run grid")
        labels = [r.label for r in self.runs]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate run labels in experiment {self.id!r}")


@dataclass
class RunResult:
    label: str
    trajectory: Trajectory | TapTrajectory | None
    final: np.ndarray | None
    termination: str | None
    band_entry: int | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class RunReport:
    experiment_id: str
    results: list[RunResult]

    def result(self, label: str) -> RunResult:
        for r in self.results:
            if r.label == label:
                return r
        raise KeyError(f"no run labelled {label!r}")

    @property
    def n_failed(self) -> int:
        return sum(not r.ok for r in self.results)


def build_function(desc: dict[str, Any]):
    """Instantiate a function (or LMS scenario) from its descriptor."""
    kind = desc.get("kind")
    if kind == "shifted_quadratic":
        return ShiftedQuadratic(desc["a"], desc["xstar"], desc.get("fm", 0.0))
    if kind == "polynomial":
        return Polynomial(desc["coeffs"])
    if kind == "sum_quadratics":
        return SumOfShiftedQuadratics(desc["a"], desc["centers"],
                                      desc.get("fm", 0.0))
    if kind == "rosenbrock":
        return Rosenbrock()
    if kind == "lms":
        return FilterScenario(
            true_weights=tuple(desc.get("true_weights", (2.0, -3.0, 1.0))),
            horizon=desc.get("horizon", 2000),
            seed=desc.get("seed", 0),
            noise_std=desc.get("noise_std", 0.1),
        )
    raise ValueError(f"unknown function kind {kind!r}")


def band_entry(iterates: np.ndarray, target: Sequence[float],
               tol: float) -> int | None:
    """First index from which every coordinate stays within tol of the
    target for the rest of the recorded trajectory."""
    arr = np.atleast_2d(np.asarray(iterates, dtype=float))
    target = np.asarray(target, dtype=float)
    inside = np.all(np.abs(arr - target) <= tol, axis=1)
    # last index where we are outside; entry is the next one
    outside = np.nonzero(~inside)[0]
    if len(outside) == 0:
        return 0
    entry = int(outside[-1]) + 1
    return entry if entry < len(arr) else None


# ---------------------------------------------------------------------------
# execution

def _execute(rd: RunDef) -> RunResult:
    obj = build_function(rd.function)
    cfg = rd.config
    if isinstance(obj, FilterScenario):
        tap = run_lms(obj, cfg, w0=rd.w0 or (0.1, -0.1, 0.1))
        entry = (band_entry(tap.weights, rd.band_target, rd.band_tol)
                 if rd.band_target is not None else None)
        return RunResult(rd.label, tap, tap.final, tap.termination.value, entry)
    if isinstance(obj, MultivariateFunction):
        traj = optim.run_multivariate(obj, rd.x0, cfg, warmup_mu=rd.warmup_mu)
    else:
        traj = optim.run(obj, rd.x0[0], cfg)
    entry = (band_entry(traj.iterates, rd.band_target, rd.band_tol)
             if rd.band_target is not None else None)
    return RunResult(rd.label, traj, traj.final, traj.termination.value, entry)


def run_experiment(spec: ExperimentSpec, out_dir: str | Path | None = None,
                   fmt: str = "csv", figures: bool = True) -> RunReport:
    """Execute every run of the spec; per-run failures are recorded in the
    report instead of aborting the batch.

    With ``out_dir`` set, writes ``<label>.csv`` per run, ``summary.json``,
    and PNG figures (unless disabled).
    """
    if fmt != "csv":
        raise ValueError(f"unsupported export format {fmt!r}")
    results = []
    for rd in spec.runs:
        try:
            results.append(_execute(rd))
        except Exception as exc:  # noqa: BLE001 - batch isolation
            results.append(RunResult(rd.label, None, None, None, None,
                                     error=f"{type(exc).__name__}: {exc}"))
    report = RunReport(spec.id, results)

    if out_dir is not None:
        out = Path(out_dir) / spec.id
        out.mkdir(parents=True, exist_ok=True)
        for rd, res in zip(spec.runs, results):
            if res.trajectory is None:
                continue
            path = out / f"{_safe(rd.label)}.csv"
            if isinstance(res.trajectory, TapTrajectory):
                _taps_to_csv(res.trajectory, path)
            else:
                trajectory_to_csv(res.trajectory, path)
        _write_summary(report, out / "summary.json")
        if figures:
            from . import plotting

            plotting.render_experiment_figures(spec, report, out)
    return report


def _safe(label: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-._" else "_" for ch in label)


def _write_summary(report: RunReport, path: Path) -> None:
    payload = {
        "experiment": report.experiment_id,
        "results": [
            {
                "label": r.label,
                "status": "ok" if r.ok else "error",
                "final": None if r.final is None else [repr(v) for v in r.final],
                "termination": r.termination,
                "band_entry": r.band_entry,
                "iterations": (None if r.trajectory is None
                               else len(r.trajectory.weights) - 1
                               if isinstance(r.trajectory, TapTrajectory)
                               else len(r.trajectory) - 1),
                "error": r.error,
            }
            for r in report.results
        ],
    }
    path.write_text(json.dumps(payload, indent=2) + "\n")


# ---------------------------------------------------------------------------
# CSV export

def trajectory_to_csv(traj: Trajectory, path: str | Path) -> None:
    """Delimited export: header ``k,x_1..x_d,f,alpha_1..alpha_d,step``.

    Row k carries the iterate, its objective value, and the order / step
    magnitude of the step leaving it (blank on the last row).  Floats are
    written with repr so the round trip is exact.
    """
    d = traj.dimension
    cols = (["k"] + [f"x_{j + 1}" for j in range(d)] + ["f"]
            + [f"alpha_{j + 1}" for j in range(d)] + ["step"])
    lines = [f"# termination: {traj.termination.value}", ",".join(cols)]
    for k in range(len(traj)):
        row = [str(k)] + [repr(float(v)) for v in traj.iterates[k]]
        row.append(repr(float(traj.values[k])))
        if k < len(traj) - 1:
            row += [repr(float(a)) for a in traj.orders[k]]
            row.append(repr(float(traj.steps[k])))
        else:
            row += [""] * (d + 1)
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def trajectory_from_csv(path: str | Path) -> Trajectory:
    """Inverse of :func:`trajectory_to_csv`."""
    lines = Path(path).read_text().strip().splitlines()
    termination = Termination(lines[0].split(":", 1)[1].strip())
    header = lines[1].split(",")
    d = sum(1 for h in header if h.startswith("x_"))
    iterates, values, orders, steps = [], [], [], []
    for line in lines[2:]:
        parts = line.split(",")
        iterates.append([float(v) for v in parts[1:1 + d]])
        values.append(float(parts[1 + d]))
        if parts[2 + d] != "":
            orders.append([float(v) for v in parts[2 + d:2 + 2 * d]])
            steps.append(float(parts[2 + 2 * d]))
    return Trajectory(
        iterates=np.asarray(iterates),
        orders=(np.asarray(orders) if orders
                else np.zeros((0, d))),
        steps=np.asarray(steps),
        values=np.asarray(values),
        termination=termination,
    )


def _taps_to_csv(tap: TapTrajectory, path: str | Path) -> None:
    n = tap.weights.shape[1]
    cols = (["k"] + [f"w_{j + 1}" for j in range(n)] + ["e"]
            + [f"alpha_{j + 1}" for j in range(n)])
    lines = [f"# termination: {tap.termination.value}", ",".join(cols)]
    for k in range(len(tap.weights)):
        row = [str(k)] + [repr(float(v)) for v in tap.weights[k]]
        if k < len(tap.weights) - 1:
            row.append(repr(float(tap.errors[k])))
            row += [repr(float(a)) for a in tap.orders[k]]
        else:
            row += [""] * (n + 1)
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# contour grids

def contour_grid(f: MultivariateFunction, bounds: Sequence[Sequence[float]],
                 resolution: int | Sequence[int]
                 ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rectangular grid of f values for external contour plotting.

    ``bounds`` is ((x_lo, x_hi), (y_lo, y_hi)); resolution is points per
    axis (scalar or pair), at least 2.
    """
    res = np.broadcast_to(np.asarray(resolution, dtype=int), (2,))
    if np.any(res < 2):
        raise ValueError(f"resolution must be >= 2 per axis, got {resolution}")
    (x_lo, x_hi), (y_lo, y_hi) = bounds
    xs = np.linspace(x_lo, x_hi, res[0])
    ys = np.linspace(y_lo, y_hi, res[1])
    X, Y = np.meshgrid(xs, ys)
    Z = np.array([[f.value((x, y)) for x in xs] for y in ys])
    return X, Y, Z


def write_contour_csv(f: MultivariateFunction,
                      bounds: Sequence[Sequence[float]],
                      resolution: int | Sequence[int],
                      path: str | Path) -> None:
    X, Y, Z = contour_grid(f, bounds, resolution)
    lines = ["x,y,f"]
    for i in range(Z.shape[0]):
        for j in range(Z.shape[1]):
            lines.append(f"{X[i, j]!r},{Y[i, j]!r},{Z[i, j]!r}")
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# built-in experiments (frozen reproduction parameters)

_QUAD = {"kind": "shifted_quadratic", "a": 1.0, "xstar": 5.0, "fm": 0.0}
_QUAD2D = {"kind": "sum_quadratics", "a": [2.0, 3.0], "centers": [5.0, 6.0],
           "fm": 10.0}
_ROSEN = {"kind": "rosenbrock"}


def _motivation() -> ExperimentSpec:
    base = dict(mu=0.5, alpha=0.7, c=0.0, max_iters=50)
    runs = (
        RunDef("classical", _QUAD,
               OptimizerConfig(Algorithm.CLASSICAL, **base), (1.0,),
               band_target=(5.0,), band_tol=0.05),
        RunDef("naive-rl", _QUAD,
               OptimizerConfig(Algorithm.NAIVE_FRACTIONAL,
                               definition=FracDef.RIEMANN_LIOUVILLE, **base),
               (1.0,)),
        RunDef("naive-caputo", _QUAD,
               OptimizerConfig(Algorithm.NAIVE_FRACTIONAL,
                               definition=FracDef.CAPUTO, **base), (1.0,)),
    )
    return ExperimentSpec(
        "motivation",
        "Classical vs naive fractional descent on (x-5)^2: the naive "
        "methods settle on fractional extreme points away from 5.",
        runs,
    )


def _example1_ksweep() -> ExperimentSpec:
    runs = tuple(
        RunDef(f"K{K}", _QUAD,
               OptimizerConfig(Algorithm.FIXED_MEMORY, mu=0.5, alpha=0.7,
                               K=K, memory_term_style=MemoryStyle.ABS,
                               max_iters=50),
               (1.0,), band_target=(5.0,), band_tol=0.05)
        for K in (5, 3, 1)
    )
    return ExperimentSpec(
        "example1-ksweep",
        "Fixed memory step method with K in {5, 3, 1}; smaller K converges "
        "faster.",
        runs,
    )


def _example1_musweep() -> ExperimentSpec:
    runs = tuple(
        RunDef(f"mu{mu:g}", _QUAD,
               OptimizerConfig(Algorithm.FIXED_MEMORY, mu=mu, alpha=0.7,
                               K=1, memory_term_style=MemoryStyle.ABS,
                               max_iters=50),
               (1.0,), band_target=(5.0,), band_tol=0.05)
        for mu in (0.1, 0.2, 0.3, 0.4, 0.5)
    )
    return ExperimentSpec(
        "example1-musweep",
        "Fixed memory step method (K = 1) under a learning-rate sweep.",
        runs,
    )


def _example2_alphasweep() -> ExperimentSpec:
    runs = tuple(
        RunDef(f"alpha{a:g}", _QUAD,
               OptimizerConfig(Algorithm.TRUNCATED, mu=0.2, alpha=a, c=0.0,
                               epsilon=0.0, max_iters=200),
               (1.0,), band_target=(5.0,), band_tol=0.01)
        for a in np.round(np.arange(0.1, 2.0, 0.2), 1)
    )
    return ExperimentSpec(
        "example2-alphasweep",
        "Higher order truncation method for orders 0.1 .. 1.9.",
        runs,
    )


def _example2_x0sweep() -> ExperimentSpec:
    runs = tuple(
        RunDef(f"x0_{x0:g}", _QUAD,
               OptimizerConfig(Algorithm.TRUNCATED, mu=0.2, alpha=0.7, c=0.0,
                               epsilon=0.0, max_iters=200),
               (x0,), band_target=(5.0,), band_tol=0.01)
        for x0 in np.round(np.arange(1.0, 6.5, 0.5), 1)
    )
    return ExperimentSpec(
        "example2-x0sweep",
        "Higher order truncation method from a grid of starting points.",
        runs,
    )


_ORDER_LAW_CASES = (
    ("reciprocal", OrderLaw.RECIPROCAL, 0.03),
    ("sigmoid", OrderLaw.SIGMOID, 0.10),
    ("tanh", OrderLaw.TANH, 0.10),
)


def _example3_orderlaws() -> ExperimentSpec:
    runs = tuple(
        RunDef(label, _QUAD,
               OptimizerConfig(Algorithm.VARIABLE_ORDER, mu=0.2, c=0.0,
                               order_law=law, beta=beta,
                               loss_kind=LossKind.OBJECTIVE_VALUE,
                               memory_term_style=MemoryStyle.ABS,
                               max_iters=200),
               (1.0,), band_target=(5.0,), band_tol=0.01)
        for label, law, beta in _ORDER_LAW_CASES
    )
    return ExperimentSpec(
        "example3-orderlaws",
        "Variable order method under the three order laws.",
        runs,
    )


def _example3_csweep() -> ExperimentSpec:
    runs = tuple(
        RunDef(f"c{c:g}", _QUAD,
               OptimizerConfig(Algorithm.VARIABLE_ORDER, mu=0.2, c=c,
                               order_law=OrderLaw.TANH, beta=0.10,
                               loss_kind=LossKind.OBJECTIVE_VALUE,
                               memory_term_style=MemoryStyle.ABS,
                               max_iters=200),
               (1.0,), band_target=(5.0,), band_tol=0.01)
        for c in np.round(np.arange(0.0, 1.0, 0.1), 1)
    )
    return ExperimentSpec(
        "example3-csweep",
        "Variable order method (tanh law) as the lower terminal increases; "
        "larger terminals slow the search.",
        runs,
    )


def _example4_quadratic2d() -> ExperimentSpec:
    band = dict(band_target=(5.0, 6.0), band_tol=0.05)
    common = dict(mu=0.05, alpha=0.7, c=0.0, epsilon=0.0, max_iters=800)
    runs = (
        RunDef("fixed-memory", _QUAD2D,
               OptimizerConfig(Algorithm.FIXED_MEMORY, K=3,
                               memory_term_style=MemoryStyle.ABS, **common),
               (1.0, 1.0), **band),
        RunDef("truncated", _QUAD2D,
               OptimizerConfig(Algorithm.TRUNCATED, **common),
               (1.0, 1.0), **band),
        RunDef("variable-order", _QUAD2D,
               OptimizerConfig(Algorithm.VARIABLE_ORDER, mu=0.05, c=0.0,
                               order_law=OrderLaw.TANH, beta=0.005,
                               loss_kind=LossKind.GRAD_SQUARED,
                               coupling=Coupling.PER_COORDINATE,
                               memory_term_style=MemoryStyle.ABS,
                               max_iters=800),
               (1.0, 1.0), **band),
        RunDef("naive-caputo", _QUAD2D,
               OptimizerConfig(Algorithm.NAIVE_FRACTIONAL, **common),
               (1.0, 1.0), **band),
    )
    return ExperimentSpec(
        "example4-quadratic2d",
        "All three repaired methods reach (5, 6) of a nonzero-minimum "
        "quadratic; the naive method does not.",
        runs,
    )


def _example5_rosenbrock() -> ExperimentSpec:
    band = dict(band_target=(1.0, 1.0), band_tol=0.02)  # the 2% error band
    runs = (
        RunDef("fixed-memory", _ROSEN,
               OptimizerConfig(Algorithm.FIXED_MEMORY, mu=0.0182, alpha=0.7,
                               K=2, memory_term_style=MemoryStyle.ABS,
                               max_iters=10000),
               (-0.2, -0.2), warmup_mu=0.001, **band),
        RunDef("truncated", _ROSEN,
               OptimizerConfig(Algorithm.TRUNCATED, mu=0.0018, alpha=0.7,
                               c=0.0, epsilon=0.0, max_iters=10000),
               (-0.2, -0.2), **band),
        RunDef("variable-order", _ROSEN,
               OptimizerConfig(Algorithm.VARIABLE_ORDER, mu=0.002, c=0.0,
                               order_law=OrderLaw.TANH, beta=0.01,
                               loss_kind=LossKind.OBJECTIVE_VALUE,
                               coupling=Coupling.UNIFORM,
                               memory_term_style=MemoryStyle.ABS,
                               max_iters=10000),
               (-0.2, -0.2), **band),
    )
    return ExperimentSpec(
        "example5-rosenbrock",
        "Rosenbrock valley descent with per-method learning rates "
        "(0.0182 / 0.0018 / 0.002).",
        runs,
    )


def _example6_lms(seed: int = 0) -> ExperimentSpec:
    scenario = {"kind": "lms", "true_weights": [2.0, -3.0, 1.0],
                "horizon": 2000, "seed": seed, "noise_std": 0.1}
    w0 = (0.1, -0.1, 0.1)
    band = dict(band_target=(2.0, -3.0, 1.0), band_tol=0.15)
    runs = (
        RunDef("fixed-memory", scenario,
               OptimizerConfig(Algorithm.FIXED_MEMORY, mu=0.02, alpha=0.7,
                               K=3, memory_term_style=MemoryStyle.ABS,
                               max_iters=2000),
               w0=w0, **band),
        RunDef("truncated", scenario,
               OptimizerConfig(Algorithm.TRUNCATED, mu=0.02, alpha=0.7,
                               c=0.0, epsilon=0.0, max_iters=2000),
               w0=w0, **band),
        RunDef("variable-order", scenario,
               OptimizerConfig(Algorithm.VARIABLE_ORDER, mu=0.02, c=0.0,
                               order_law=OrderLaw.TANH, beta=0.005,
                               loss_kind=LossKind.OBJECTIVE_VALUE,
                               memory_term_style=MemoryStyle.ABS,
                               max_iters=2000),
               w0=w0, **band),
    )
    return ExperimentSpec(
        "example6-lms",
        "Three-tap transverse filter identification with the three methods.",
        runs,
    )


_BUILTINS = {
    "motivation": _motivation,
    "example1-ksweep": _example1_ksweep,
    "example1-musweep": _example1_musweep,
    "example2-alphasweep": _example2_alphasweep,
    "example2-x0sweep": _example2_x0sweep,
    "example3-orderlaws": _example3_orderlaws,
    "example3-csweep": _example3_csweep,
    "example4-quadratic2d": _example4_quadratic2d,
    "example5-rosenbrock": _example5_rosenbrock,
    "example6-lms": _example6_lms,
}


def builtin_ids() -> list[str]:
    return list(_BUILTINS)


def builtin_experiment(exp_id: str, seed: int | None = None) -> ExperimentSpec:
    try:
        builder = _BUILTINS[exp_id]
    except KeyError:
        raise KeyError(
            f"unknown experiment id {exp_id!r}; known: {', '.join(_BUILTINS)}"
        ) from None
    if exp_id == "example6-lms" and seed is not None:
        return builder(seed)
    return builder()


# ---------------------------------------------------------------------------
# config files

_ENUM_FIELDS = {
    "algorithm": Algorithm,
    "order_law": OrderLaw,
    "loss_kind": LossKind,
    "coupling": Coupling,
    "definition": FracDef,
    "memory_term_style": MemoryStyle,
}


def _config_from_dict(raw: dict[str, Any]) -> OptimizerConfig:
    kwargs: dict[str, Any] = {}
    for key, value in raw.items():
        if key in _ENUM_FIELDS:
            kwargs[key] = _ENUM_FIELDS[key](value)
        elif key == "truncation":
            kwargs[key] = TruncationPolicy(**value)
        elif key == "mu" and isinstance(value, list):
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    return OptimizerConfig(**kwargs)


def load_spec(path: str | Path) -> ExperimentSpec:
    """Parse a declarative JSON experiment file.

    Schema: ``{"id", "description", "runs": [{"label", "function",
    "config", "x0", "band_target", "band_tol", "warmup_mu", "w0"}]}``;
    enum-valued config fields use their string values (e.g.
    ``"algorithm": "truncated"``).
    """
    raw = json.loads(Path(path).read_text())
    runs = tuple(
        RunDef(
            label=r["label"],
            function=r["function"],
            config=_config_from_dict(r["config"]),
            x0=tuple(np.atleast_1d(r.get("x0", ()))),
            band_target=(tuple(r["band_target"])
                         if r.get("band_target") is not None else None),
            band_tol=r.get("band_tol"),
            warmup_mu=r.get("warmup_mu"),
            w0=tuple(r["w0"]) if r.get("w0") is not None else None,
        )
        for r in raw["runs"]
    )
    return ExperimentSpec(raw["id"], raw.get("description", ""), runs)
