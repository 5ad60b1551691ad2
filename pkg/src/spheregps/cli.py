"""Command-line interface.

Subcommands::

    solve3          exact three-satellite solve on a sphere
    solve           closed-form / iterative solvers for >= 4 satellites
    gen-bad-config  write a scenario with two exact solutions
    experiment      run the method-comparison harness, write CSV

Exit codes: 0 success, 2 domain error (degenerate geometry, infeasible
request), 3 input error (malformed files, wrong arity, bad flags).
Numbers are printed with 12 significant digits.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import core, refine, three_sat
from .errors import PositioningError
from .experiment import ExperimentSpec, run_experiment, write_records
from .quadric import generate_bad_configuration
from .refine import Method, RefinementConfig
from .scenario import (
    Scenario,
    ScenarioFormatError,
    TruthSolution,
    load_scenario,
    save_scenario,
)

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_INPUT = 3


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage failures exit with the input-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(_fail(message, EXIT_INPUT))


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def _round12(value: float) -> float:
    return float(_fmt(value))


def _solution_dict(solution: core.Solution) -> dict:
    return {
        "position": [_round12(c) for c in solution.position],
        "offset": _round12(solution.offset),
        "max_residual": _round12(solution.max_residual),
        "satisfies_sign_constraint": solution.satisfies_sign_constraint,
    }


def _print_solutions(solutions) -> None:
    if not solutions:
        print("no solutions")
        return
    for i, sol in enumerate(solutions, start=1):
        pos = ", ".join(_fmt(c) for c in sol.position)
        print(
            f"solution {i}: position ({pos}) km, offset {_fmt(sol.offset)}, "
            f"max residual {_fmt(sol.max_residual)} km, "
            f"sign constraint {'ok' if sol.satisfies_sign_constraint else 'violated'}"
        )


def _load_scenario_or_fail(path: str) -> Scenario:
    try:
        return load_scenario(path)
    except FileNotFoundError as exc:
        raise _InputError(str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise _InputError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    except (ScenarioFormatError, ValueError) as exc:
        raise _InputError(f"{path}: {exc}") from exc


class _InputError(Exception):
    pass


def _cmd_solve3(args) -> int:
    scenario = _load_scenario_or_fail(args.scenario)
    if len(scenario.observations) != 3:
        raise _InputError(
            f"solve3 needs exactly 3 observations, got {len(scenario.observations)}"
        )
    inputs = three_sat.CayleyMengerInputs(
        sphere=scenario.sphere, observations=scenario.observations
    )
    poly = three_sat.extract_quartic(inputs)
    roots = three_sat.real_roots(poly)
    solutions = three_sat.solve_three_sat(inputs, strict_sign=args.strict_sign)

    if args.json:
        print(
            json.dumps(
                {
                    "quartic_coefficients_ascending": [
                        _round12(c) for c in poly.coefficients
                    ],
                    "real_roots": [_round12(r) for r in roots],
                    "solutions": [_solution_dict(s) for s in solutions],
                },
                indent=2,
            )
        )
        return EXIT_OK

    desc = poly.coefficients[::-1]
    powers = ["t^4", "t^3", "t^2", "t", ""]
    terms = " + ".join(
        f"{_fmt(c)} {p}".strip() for c, p in zip(desc, powers)
    )
    print(f"offset polynomial: {terms}")
    print(f"real roots: {', '.join(_fmt(r) for r in roots) if roots else 'none'}")
    _print_solutions(solutions)
    return EXIT_OK


def _cmd_solve(args) -> int:
    scenario = _load_scenario_or_fail(args.scenario)
    if len(scenario.observations) < 4:
        raise _InputError(
            f"solve needs at least 4 observations, got {len(scenario.observations)}"
        )
    reduced = core.reduce(scenario.observations)
    indicator = core.ambiguity_indicator(reduced)
    norm_u = float(np.linalg.norm(reduced.u))

    config = RefinementConfig(iterations=args.iterations)
    if args.method == "sos":
        solutions = core.solve_on_sphere(scenario.observations, scenario.sphere)
        converged = [True] * len(solutions)
        used_fallback = False
    elif args.method == "ils":
        result = refine.solve_ils(scenario.observations, config)
        solutions, converged, used_fallback = (
            list(result.solutions),
            list(result.converged),
            result.used_fallback,
        )
    else:
        result = refine.solve_rsos(scenario.observations, scenario.sphere, config)
        solutions, converged, used_fallback = (
            list(result.solutions),
            list(result.converged),
            result.used_fallback,
        )

    if args.json:
        print(
            json.dumps(
                {
                    "method": args.method,
                    "solutions": [_solution_dict(s) for s in solutions],
                    "converged": converged,
                    "used_fallback": used_fallback,
                    "ambiguity": {
                        "norm_u": _round12(norm_u),
                        "indicator": indicator.value,
                    },
                },
                indent=2,
            )
        )
        return EXIT_OK

    print(f"method: {args.method}")
    print(f"ambiguity indicator: |u| = {_fmt(norm_u)} -> {indicator.value}")
    if used_fallback:
        print("note: on-sphere quadratic had no real roots; fell back to ILS")
    _print_solutions(solutions)
    return EXIT_OK


def _cmd_gen_bad_config(args) -> int:
    if args.num_sats < 4:
        raise _InputError("gen-bad-config requires --num-sats >= 4")
    sphere = core.SphereConstraint(center=(0.0, 0.0, 0.0), radius=args.sphere_radius)
    bad = generate_bad_configuration(
        sphere, args.orbit_radius, args.num_sats, rng_seed=args.seed
    )
    scenario = Scenario(
        sphere=sphere,
        observations=bad.observations,
        truth=(
            TruthSolution(
                position=np.array(bad.solution_a.position),
                offset=bad.solution_a.offset,
            ),
            TruthSolution(
                position=np.array(bad.solution_b.position),
                offset=bad.solution_b.offset,
            ),
        ),
    )
    save_scenario(scenario, args.out)
    print(
        f"wrote {args.out}: {args.num_sats} satellites, two planted solutions "
        f"{_fmt(float(np.linalg.norm(bad.solution_a.position - bad.solution_b.position)))} km apart"
    )
    return EXIT_OK


def _cmd_experiment(args) -> int:
    path = Path(args.spec)
    try:
        spec = ExperimentSpec.from_json(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise _InputError(str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise _InputError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise _InputError(f"{path}: {exc}") from exc
    if args.seed is not None:
        spec = dataclasses.replace(spec, rng_seed=args.seed)

    out = Path(args.out)
    partial = out.with_name(out.name + ".partial")
    try:
        records = run_experiment(spec)
        write_records(records, partial)
        partial.replace(out)
    except BaseException:
        partial.unlink(missing_ok=True)
        raise

    for method in Method:
        rows = [r for r in records if r.method is method]
        errors = [r.mean_error_km for r in rows if not np.isnan(r.mean_error_km)]
        if errors:
            print(
                f"{method.value}: mean error min {_fmt(min(errors))} km, "
                f"max {_fmt(max(errors))} km over {len(rows)} steps"
            )
        else:
            print(f"{method.value}: no successful trials")
    print(f"wrote {out}")
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="spheregps", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p3 = sub.add_parser("solve3", help="exact three-satellite solve on a sphere")
    p3.add_argument("scenario", help="scenario JSON file with exactly 3 observations")
    p3.add_argument(
        "--strict-sign",
        action="store_true",
        help="keep only solutions with every t_i - t >= 0",
    )
    p3.add_argument("--json", action="store_true", help="machine-readable output")
    p3.set_defaults(handler=_cmd_solve3)

    ps = sub.add_parser("solve", help="solvers for four or more satellites")
    ps.add_argument("scenario", help="scenario JSON file with >= 4 observations")
    ps.add_argument(
        "--method", choices=("sos", "ils", "rsos"), default="sos", help="solver"
    )
    ps.add_argument(
        "--iterations", type=int, default=20, help="Gauss-Newton step count"
    )
    ps.add_argument("--json", action="store_true", help="machine-readable output")
    ps.set_defaults(handler=_cmd_solve)

    pg = sub.add_parser(
        "gen-bad-config", help="write a scenario with two exact solutions"
    )
    pg.add_argument("--sphere-radius", type=float, default=6400.0)
    pg.add_argument("--orbit-radius", type=float, default=26400.0)
    pg.add_argument("--num-sats", type=int, default=5)
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--out", required=True, help="output scenario path")
    pg.set_defaults(handler=_cmd_gen_bad_config)

    pe = sub.add_parser("experiment", help="run the comparison harness")
    pe.add_argument("spec", help="experiment spec JSON file")
    pe.add_argument("--out", required=True, help="output CSV path")
    pe.add_argument(
        "--seed", type=int, default=None, help="override the spec's rng_seed"
    )
    pe.set_defaults(handler=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except _InputError as exc:
        return _fail(str(exc), EXIT_INPUT)
    except PositioningError as exc:
        return _fail(f"{type(exc).__name__}: {exc}", EXIT_DOMAIN)
    except OSError as exc:
        return _fail(str(exc), EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
