"""Command-line front end.

Exit codes: 0 on success, 1 for invalid input or a failed validation, 2 when
a solver or feasibility problem stops the computation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .bloch import state_from_bloch
from .bounds import BellScenario, PMScenario, bell_bound, min_entropy, pm_bound
from .certify import (
    CertificationResult,
    OptimizerConfig,
    OverlapScenario,
    TernaryParams,
    certify_params,
    curve_csv,
    entropy_curve,
    fitted_params,
    guessing_probability,
    optimize_entropy,
)
from .decompose import decompose_extremal
from .errors import DecompositionError, InfeasibleError, OptimizationFailedError, QboundError, SolverError
from .povm import povm_from_json, validate

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 1, 2

_SOLVER_ERRORS = (InfeasibleError, SolverError, OptimizationFailedError, DecompositionError)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; here that code is reserved for solver failures."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def cmd_validate(args) -> int:
    report = validate(povm_from_json(_load_json(args.povm)), tol=args.tol)
    print("valid" if report.ok else str(report))
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_decompose(args) -> int:
    povm = povm_from_json(_load_json(args.povm))
    report = validate(povm, tol=args.tol)
    if not report.ok:
        print(str(report), file=sys.stderr)
        return EXIT_INVALID
    states = None
    if args.span:
        data = _load_json(args.span)
        states = [state_from_bloch(int(data["dim"]), s["bloch"]) for s in data["states"]]
    dec = decompose_extremal(povm, states)
    _emit(_dumps(dec.to_json(povm)), args.output)
    return EXIT_OK


def cmd_bound(args) -> int:
    if args.kind == "pm":
        bits = pm_bound(PMScenario(k=args.k, m=args.m, l=args.l))
    else:
        bits = bell_bound(BellScenario(nx=args.nx, na=args.na, nb=args.nb))
    print(f"{bits:.13g}")
    return EXIT_OK


def _config(args) -> OptimizerConfig:
    return OptimizerConfig(
        restarts=args.restarts, seed=args.seed, ansatz=args.ansatz, tol=args.tol, guess_input=args.guess_input
    )


def cmd_certify(args) -> int:
    scenario = OverlapScenario(args.delta, args.guess_input)
    if args.delta >= 1.0:
        print("error: certification needs delta < 1", file=sys.stderr)
        return EXIT_INVALID
    if args.stats:
        stats = np.asarray(_load_json(args.stats)["stats"], dtype=float)
        sol = guessing_probability(stats, scenario, tol=args.tol)
        result = CertificationResult(
            delta=args.delta,
            p_guess=sol.p_guess,
            h_min=min_entropy(min(sol.p_guess, 1.0)),
            params=None,
            statistics=stats,
            dual_gap=sol.dual_gap,
            solver_iterations=sol.iterations,
        )
    elif args.params == "auto":
        result = optimize_entropy(args.delta, _config(args))
    elif args.params == "fit":
        result = certify_params(fitted_params(args.delta), scenario, tol=args.tol)
    else:
        result = certify_params(TernaryParams.from_json(_load_json(args.params)), scenario, tol=args.tol)
    _emit(_dumps(result.to_json()), args.output)
    return EXIT_OK


def cmd_curve(args) -> int:
    if args.steps < 1:
        print("error: --steps must be at least 1", file=sys.stderr)
        return EXIT_INVALID
    grid = np.linspace(args.delta_min, args.delta_max, args.steps)
    if grid.min() < 0.0 or grid.max() >= 1.0:
        print("error: curve grid must lie in [0, 1)", file=sys.stderr)
        return EXIT_INVALID
    results = entropy_curve(grid, _config(args))
    for r in results:
        if r.error:
            print(f"warning: delta={r.delta:.12g}: {r.error}", file=sys.stderr)
    _emit(curve_csv(results), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9, help="numerical tolerance (default 1e-9)")
    common.add_argument("--seed", type=int, default=42, help="optimizer seed; QBOUND_SEED overrides")
    common.add_argument("--restarts", type=int, default=20, help="random optimizer restarts")
    common.add_argument("-o", "--output", help="write the result here instead of stdout")

    parser = _Parser(prog="qbound", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", parents=[common], help="check a POVM JSON file")
    p.add_argument("povm")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("decompose", parents=[common], help="split a POVM into extremal POVMs")
    p.add_argument("povm")
    p.add_argument("--span", help="states JSON whose Bloch span restricts the split")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("bound", help="closed-form randomness bounds in bits")
    kinds = p.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    pm = kinds.add_parser("pm", help="prepare-and-measure: log2 min(l, k + 1)")
    pm.add_argument("--k", type=int, required=True)
    pm.add_argument("--l", type=int, required=True)
    pm.add_argument("--m", type=int, default=1)
    bell = kinds.add_parser("bell", help="Bell scenario: log2 min(nb, nx na + 1)")
    bell.add_argument("--nx", type=int, required=True)
    bell.add_argument("--na", type=int, required=True)
    bell.add_argument("--nb", type=int, required=True)
    p.set_defaults(func=cmd_bound)

    for name, func, text in (
        ("certify", cmd_certify, "certified min-entropy at one overlap"),
        ("curve", cmd_curve, "optimized min-entropy over a grid of overlaps (CSV)"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--guess-input", type=int, default=0, choices=(0, 1))
        p.add_argument("--ansatz", default="free", choices=("free", "symmetric"))
        p.set_defaults(func=func)
        if name == "certify":
            p.add_argument("--delta", type=float, required=True)
            p.add_argument("--params", default="auto", help="auto (optimize), fit (symmetric rational fit), or a parameter JSON file")
            p.add_argument("--stats", help='JSON {"stats": [[p(b|x0), p(b|x1)], ...]} to certify directly')
        else:
            p.add_argument("--delta-min", type=float, required=True)
            p.add_argument("--delta-max", type=float, required=True)
            p.add_argument("--steps", type=int, required=True)
    return parser


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return int(exc.code or 0)
    if hasattr(args, "seed") and os.environ.get("QBOUND_SEED"):
        try:
            args.seed = int(os.environ["QBOUND_SEED"])
        except ValueError:
            print("error: QBOUND_SEED must be an integer", file=sys.stderr)
            return EXIT_INVALID
    try:
        return args.func(args)
    except _SOLVER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (QboundError, ValueError, KeyError, TypeError, OSError) as exc:
        # json.JSONDecodeError is a ValueError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())
