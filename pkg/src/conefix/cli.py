"""
Command-line front end.

Exit codes: 0 converged, 1 iteration limit reached, 2 bad input or usage,
3 a fixed-point hypothesis failed (start point, order certificate, or a
2-cycle), 4 kernel validation failed without ``--override``.

Flags may also come from a JSON file given by ``--config``; its keys use
the flag names with dashes replaced by underscores. Explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import maps
from .delta_distance import delta, read_points_csv
from .errors import (ConefixError, DimensionMismatchError, DomainNotClosedError, KernelValidationError,
                     PreconditionError)
from .integral_eq import (BUILTIN_KERNELS, IntegralProblem, Quadrature, TabulatedKernel,
                          builtin_problem, solve)
from .order_core import ConeOrder
from .solvers import (FiniteSetValuedMap, Selector, Termination, check_h2_equivalence,
                      enumerate_fixed_points, iterate_decreasing, iterate_increasing,
                      iterate_setvalued, write_json)

EXIT_OK, EXIT_MAX_ITER, EXIT_USAGE, EXIT_HYPOTHESIS, EXIT_KERNEL = 0, 1, 2, 3, 4

EXIT_FOR = {
    Termination.CONVERGED: EXIT_OK,
    Termination.MAX_ITER: EXIT_MAX_ITER,
    Termination.ORDER_VIOLATION: EXIT_HYPOTHESIS,
    Termination.H1_VIOLATION: EXIT_HYPOTHESIS,
}

DEFAULTS = {
    "tol": 1e-10,
    "max_iter": 10_000,
    "seed": 0,
    "out": "conefix-out",
    "norm": "sup",
    "selector": Selector.LEXICOGRAPHIC.value,
    "grid_size": 257,
    "quadrature": Quadrature.MIDPOINT_DIAGONAL_SKIP.value,
    "override": False,
    "param": [],
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    tol: float
    max_iter: int
    seed: int
    out: Path
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.tol > 0:
            raise UsageError("--tol must be positive")
        if self.max_iter < 1:
            raise UsageError("--max-iter must be at least 1")
        for key in ("a", "b", "map_file", "kernel_csv"):
            path = self.options.get(key)
            if path is not None and not Path(path).is_file():
                raise UsageError(f"input file does not exist: {path}")

    def get(self, key, default=None):
        value = self.options.get(key)
        return default if value is None else value


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    d = argparse.SUPPRESS if suppress else None
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--tol", type=float, default=d, help="absolute convergence tolerance (default 1e-10)")
    p.add_argument("--max-iter", type=int, default=d, help="iteration cap (default 10000)")
    p.add_argument("--seed", type=int, default=d, help="random seed (default 0)")
    p.add_argument("--config", default=d, help="JSON file with default values for any flag")
    p.add_argument("--out", default=d, help="output directory (default ./conefix-out)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conefix", parents=[_global_flags(True)],
                                     description="Order-theoretic fixed-point solvers on cone-ordered spaces.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _global_flags(True)

    p = sub.add_parser("delta", parents=[common], help="delta-distance between two point sets stored as CSV")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--norm", choices=["sup", "euclidean", "l1"], default=None)

    p = sub.add_parser("solve-increasing", parents=[common], help="iterate an increasing map from below")
    p.add_argument("--map", default=None, help=f"builtin: {', '.join(sorted(maps.INCREASING))}")
    p.add_argument("--x0", default=None, help="comma-separated start point")
    p.add_argument("--param", action="append", default=None, metavar="KEY=VALUE")

    p = sub.add_parser("solve-setvalued", parents=[common], help="iterate an isotone set-valued map")
    p.add_argument("--map", default=None, help=f"builtin: {', '.join(sorted(maps.SETVALUED))}")
    p.add_argument("--map-file", default=None, help="JSON finite map with 'domain' and 'values' lists")
    p.add_argument("--x0", default=None)
    p.add_argument("--selector", choices=[s.value for s in Selector], default=None)
    p.add_argument("--param", action="append", default=None, metavar="KEY=VALUE")

    p = sub.add_parser("solve-decreasing", parents=[common], help="alternating orbit of a decreasing cone map")
    p.add_argument("--map", default=None, help=f"builtin: {', '.join(sorted(maps.DECREASING))}")
    p.add_argument("--param", action="append", default=None, metavar="KEY=VALUE")

    p = sub.add_parser("solve-integral", parents=[common], help="solve the singular integral equation")
    p.add_argument("--kernel", default=None, help=f"builtin: {', '.join(sorted(BUILTIN_KERNELS))}")
    p.add_argument("--kernel-csv", default=None, help="tabulated kernel; header row is the y grid")
    p.add_argument("--nu", type=float, default=None, help="growth exponent for a tabulated kernel")
    p.add_argument("--M", type=float, default=None, help="growth constant for a tabulated kernel")
    p.add_argument("--grid-size", type=int, default=None)
    p.add_argument("--quadrature", choices=[q.value for q in Quadrature], default=None)
    p.add_argument("--override", action="store_true", default=None, help="solve even if validation fails")

    p = sub.add_parser("analyze-poset", parents=[common], help="all fixed points of a finite set-valued map")
    p.add_argument("--map", default=None)
    p.add_argument("--map-file", default=None)
    p.add_argument("--param", action="append", default=None, metavar="KEY=VALUE")

    p = sub.add_parser("check-h1h2", parents=[common], help="compare Fix(F) and Fix(F o F) on a finite map")
    p.add_argument("--map-file", default=None, help="JSON with 'domain' and 'mapping' lists")
    p.add_argument("--table", default=None, help="comma-separated images of 0..n-1")
    return parser


def make_config(argv=None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config = {}
    if args.get("config"):
        try:
            config = json.loads(Path(args.pop("config")).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config file: {exc}") from None
        if not isinstance(config, dict):
            raise UsageError("config file must hold a JSON object")
    args.pop("config", None)
    merged = dict(DEFAULTS)
    merged.update({k.replace("-", "_"): v for k, v in config.items()})
    merged.update({k: v for k, v in args.items() if v is not None})
    try:
        return RunConfig(command, float(merged.pop("tol")), int(merged.pop("max_iter")),
                         int(merged.pop("seed")), Path(merged.pop("out")), merged)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _params(cfg: RunConfig) -> dict:
    raw = cfg.get("param", [])
    if isinstance(raw, dict):
        return {k: float(v) for k, v in raw.items()}
    out = {}
    for item in raw:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects KEY=VALUE, got {item!r}")
        try:
            out[key] = float(value)
        except ValueError:
            raise UsageError(f"--param {key}: not a number: {value!r}") from None
    return out


def _vector(text, name):
    if isinstance(text, (list, tuple)):
        return np.array(text, dtype=float)
    try:
        return np.array([float(v) for v in str(text).split(",")])
    except ValueError:
        raise UsageError(f"{name}: expected comma-separated numbers, got {text!r}") from None


def _finite_map(cfg: RunConfig) -> FiniteSetValuedMap:
    if cfg.get("map_file"):
        try:
            return FiniteSetValuedMap.from_json(json.loads(Path(cfg.get("map_file")).read_text()))
        except (KeyError, ValueError, TypeError) as exc:
            raise UsageError(f"malformed map file: {exc}") from None
    name = cfg.get("map")
    if name not in maps.SETVALUED:
        raise UsageError(f"unknown set-valued map {name!r}; builtins are {sorted(maps.SETVALUED)}")
    params = {k: int(v) for k, v in _params(cfg).items()}
    try:
        return maps.SETVALUED[name](**params)
    except TypeError as exc:
        raise UsageError(str(exc)) from None


def _write_run(cfg: RunConfig, result) -> int:
    cfg.out.mkdir(parents=True, exist_ok=True)
    result.trace.to_csv(cfg.out / "trace.csv")
    write_json(result.to_json(), cfg.out / "result.json")
    print(f"{result.trace.terminated_by.value}: point={list(map(float, result.point))}")
    return EXIT_FOR[result.trace.terminated_by]


def cmd_delta(cfg: RunConfig) -> int:
    norm = cfg.get("norm", "sup")
    try:
        A = read_points_csv(cfg.get("a"), norm)
        B = read_points_csv(cfg.get("b"), norm)
        value = delta(A, B)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(repr(value))
    return EXIT_OK


def cmd_solve_increasing(cfg: RunConfig) -> int:
    name = cfg.get("map")
    if name not in maps.INCREASING:
        raise UsageError(f"unknown increasing map {name!r}; builtins are {sorted(maps.INCREASING)}")
    factory, dim, start = maps.INCREASING[name]
    F = factory(**_params(cfg))
    x0 = _vector(cfg.get("x0", start), "--x0")
    result = iterate_increasing(F, x0, ConeOrder.orthant(dim), cfg.tol, cfg.max_iter, cfg.get("norm"))
    return _write_run(cfg, result)


def cmd_solve_setvalued(cfg: RunConfig) -> int:
    T = _finite_map(cfg)
    x0 = _vector(cfg.get("x0", [0.0] * T.dimension), "--x0")
    result = iterate_setvalued(T, x0, ConeOrder.orthant(T.dimension), cfg.tol, cfg.max_iter,
                               cfg.get("selector"), T.norm)
    return _write_run(cfg, result)


def cmd_solve_decreasing(cfg: RunConfig) -> int:
    name = cfg.get("map")
    if name not in maps.DECREASING:
        raise UsageError(f"unknown decreasing map {name!r}; builtins are {sorted(maps.DECREASING)}")
    factory, dim = maps.DECREASING[name]
    try:
        F = factory(**_params(cfg))
    except TypeError as exc:
        raise UsageError(str(exc)) from None
    result = iterate_decreasing(F, ConeOrder.orthant(dim), cfg.tol, cfg.max_iter, cfg.get("norm"))
    return _write_run(cfg, result)


def cmd_solve_integral(cfg: RunConfig) -> int:
    quad = Quadrature(cfg.get("quadrature"))
    n = int(cfg.get("grid_size"))
    try:
        if cfg.get("kernel_csv"):
            R = TabulatedKernel.from_csv(cfg.get("kernel_csv"))
            problem = IntegralProblem(R, float(cfg.get("nu", 1.0)), float(cfg.get("M", 1.0)), n, quad,
                                      name=str(cfg.get("kernel_csv")))
        else:
            problem = builtin_problem(cfg.get("kernel"), n, quad)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    try:
        sol = solve(problem, cfg.tol, cfg.max_iter, validate=not cfg.get("override"), seed=cfg.seed)
    except KernelValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_KERNEL
    cfg.out.mkdir(parents=True, exist_ok=True)
    sol.to_csv(cfg.out / "solution.csv")
    summary = sol.summary()
    summary["kernel"] = problem.name
    write_json(summary, cfg.out / "summary.json")
    print(f"{sol.terminated_by.value}: analytic_gap={sol.analytic_gap!r} iterations={sol.iterations}")
    return EXIT_FOR[sol.terminated_by]


def cmd_analyze_poset(cfg: RunConfig) -> int:
    T = _finite_map(cfg)
    analysis = enumerate_fixed_points(T, ConeOrder.orthant(T.dimension))
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_json(analysis.to_json(), cfg.out / "poset.json")
    print(f"{analysis.fixed_points.shape[0]} fixed points, {analysis.maximal.shape[0]} maximal, "
          f"{analysis.minimal.shape[0]} minimal")
    return EXIT_OK


def cmd_check_h1h2(cfg: RunConfig) -> int:
    if cfg.get("map_file"):
        try:
            payload = json.loads(Path(cfg.get("map_file")).read_text())
            domain = [_hashable(v) for v in payload["domain"]]
            mapping = dict(zip(domain, (_hashable(v) for v in payload["mapping"])))
            if len(payload["mapping"]) != len(domain):
                raise ValueError("domain and mapping lists differ in length")
        except (KeyError, ValueError, TypeError) as exc:
            raise UsageError(f"malformed map file: {exc}") from None
    elif cfg.get("table"):
        images = [int(v) for v in _vector(cfg.get("table"), "--table")]
        domain = list(range(len(images)))
        mapping = dict(zip(domain, images))
    else:
        raise UsageError("check-h1h2 needs --map-file or --table")
    try:
        report = check_h2_equivalence(domain, mapping)
    except DomainNotClosedError as exc:
        raise UsageError(f"map leaves its domain: {exc}") from None
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_json({
        "fixed": sorted(map(repr, report.fixed)),
        "fixed_of_square": sorted(map(repr, report.fixed_of_square)),
        "two_cycles": [[repr(a), repr(b)] for a, b in report.two_cycles],
        "h1_holds": report.h1_holds,
        "h2_holds": report.h2_holds,
        "equivalent": report.equivalent,
    }, cfg.out / "h1h2.json")
    print(f"h1={report.h1_holds} h2={report.h2_holds} equivalent={report.equivalent}")
    if not report.equivalent:
        return EXIT_MAX_ITER
    return EXIT_OK if report.h1_holds else EXIT_HYPOTHESIS


def _hashable(v):
    return tuple(v) if isinstance(v, list) else v


COMMANDS = {
    "delta": cmd_delta,
    "solve-increasing": cmd_solve_increasing,
    "solve-setvalued": cmd_solve_setvalued,
    "solve-decreasing": cmd_solve_decreasing,
    "solve-integral": cmd_solve_integral,
    "analyze-poset": cmd_analyze_poset,
    "check-h1h2": cmd_check_h1h2,
}


def main(argv: Optional[list] = None) -> int:
    try:
        cfg = make_config(argv)
        return COMMANDS[cfg.command](cfg)
    except (UsageError, DimensionMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PreconditionError as exc:
        print(f"hypothesis failed: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except ConefixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS


if __name__ == "__main__":
    sys.exit(main())
