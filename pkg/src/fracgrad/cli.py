"""Command line interface.

Subcommands:

* ``list`` - enumerate the built-in experiments.
* ``run <id|config.json>`` - execute an experiment, export CSV trajectories,
  a JSON summary and figures under ``--out``.
* ``deriv`` - evaluate a fractional derivative of a polynomial at a point.
* ``check`` - run the oracle-agreement suite (series vs closed form vs
  quadrature).

Exit codes: 0 success, 1 partial failure (some runs or checks failed),
2 fatal (bad arguments or configuration).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiments, fraccalc
from .fraccalc import FracDef, FracDerivParams
from .functions import make_polynomial, make_shifted_quadratic

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_FATAL = 2

_DEFAULT_COEFFS = "25,-10,1"  # (x - 5)^2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracgrad",
        description="Fractional-order gradient descent experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list built-in experiment ids")

    p_run = sub.add_parser("run", help="run an experiment")
    p_run.add_argument("experiment",
                       help="built-in experiment id or path to a JSON spec")
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.add_argument("--seed", type=int, default=None,
                       help="signal seed for experiments that synthesize data")
    p_run.add_argument("--format", default="csv", choices=["csv"],
                       help="trajectory export format")
    p_run.add_argument("--no-figures", action="store_true",
                       help="skip figure rendering")

    p_deriv = sub.add_parser(
        "deriv", help="evaluate a fractional derivative of a polynomial")
    p_deriv.add_argument("--def", dest="definition", default="caputo",
                         choices=["caputo", "rl"], help="derivative definition")
    p_deriv.add_argument("--alpha", type=float, required=True)
    p_deriv.add_argument("--c", type=float, default=0.0, help="lower terminal")
    p_deriv.add_argument("--at", type=float, required=True,
                         help="evaluation point")
    p_deriv.add_argument("--coeffs", default=_DEFAULT_COEFFS,
                         help="ascending-power polynomial coefficients, "
                              f"comma separated (default {_DEFAULT_COEFFS})")
    p_deriv.add_argument("--oracle", action="store_true",
                         help="also evaluate the quadrature oracle")

    p_check = sub.add_parser(
        "check", help="oracle-agreement suite on the benchmark quadratic")
    p_check.add_argument("--rtol", type=float, default=1e-5)

    return parser


def _cmd_list() -> int:
    for exp_id in experiments.builtin_ids():
        spec = experiments.builtin_experiment(exp_id)
        print(f"{exp_id:24s} {spec.description}")
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    name = args.experiment
    try:
        if name.endswith(".json") or Path(name).is_file():
            spec = experiments.load_spec(name)
        else:
            spec = experiments.builtin_experiment(name, seed=args.seed)
    except (KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    report = experiments.run_experiment(
        spec, out_dir=args.out, fmt=args.format, figures=not args.no_figures)
    for res in report.results:
        if res.ok:
            final = ", ".join(f"{v:.6g}" for v in res.final)
            entry = "" if res.band_entry is None else f"  band@{res.band_entry}"
            print(f"  {res.label:20s} -> [{final}]  {res.termination}{entry}")
        else:
            print(f"  {res.label:20s} -> FAILED: {res.error}")
    print(f"outputs written under {Path(args.out) / spec.id}")
    if report.n_failed == len(report.results):
        return EXIT_FATAL
    return EXIT_PARTIAL if report.n_failed else EXIT_OK


def _cmd_deriv(args: argparse.Namespace) -> int:
    try:
        coeffs = [float(v) for v in args.coeffs.split(",")]
        f = make_polynomial(coeffs)
        definition = (FracDef.CAPUTO if args.definition == "caputo"
                      else FracDef.RIEMANN_LIOUVILLE)
        p = FracDerivParams(args.alpha, args.c, definition)
        series = (fraccalc.caputo_series_at_x if definition is FracDef.CAPUTO
                  else fraccalc.rl_series_at_x)
        value = series(f, args.at, p)
    except (ValueError, fraccalc.DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    print(repr(float(value)))
    if args.oracle:
        oracle = fraccalc.quadrature_oracle(f, args.at, p)
        print(f"quadrature oracle: {float(oracle)!r}")
    return EXIT_OK


def _cmd_check(rtol: float) -> int:
    """Cross-check every evaluation path on the benchmark quadratic."""
    f = make_shifted_quadratic(1.0, 5.0, 0.0)
    failures = 0
    for definition in (FracDef.CAPUTO, FracDef.RIEMANN_LIOUVILLE):
        series = (fraccalc.caputo_series_at_x
                  if definition is FracDef.CAPUTO else fraccalc.rl_series_at_x)
        for alpha in (0.3, 0.5, 0.7, 0.9):
            for x in (0.5, 1.0, 2.0, 5.5, 8.0):
                p = FracDerivParams(alpha, 0.0, definition)
                ref = fraccalc.quadratic_closed_form(1.0, 5.0, 0.0, x, p)
                checks = {
                    "series_at_x": series(f, x, p),
                    "series_at_c": fraccalc.series_at_c(f, x, p),
                    "quadrature": fraccalc.quadrature_oracle(f, x, p),
                }
                for name, val in checks.items():
                    rel = abs(val - ref) / max(1.0, abs(ref))
                    ok = rel <= rtol
                    failures += not ok
                    status = "ok  " if ok else "FAIL"
                    print(f"{status} {definition.value:17s} alpha={alpha:.1f} "
                          f"x={x:<4g} {name:12s} rel={rel:.2e}")
    print(f"{'all checks passed' if failures == 0 else f'{failures} checks failed'}")
    return EXIT_OK if failures == 0 else EXIT_PARTIAL


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_FATAL if exc.code not in (0, None) else EXIT_OK
    if args.command == "list":
        return _cmd_list()
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "deriv":
        return _cmd_deriv(args)
    if args.command == "check":
        return _cmd_check(args.rtol)
    return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
