from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import load_settings
from .errors import InputError, McConfigError, MethodDisagreement
from .growth import FertilityRule
from .introspect import build_enumerate_output, build_multi_info_output, build_tree_info_output, canonical_json
from .mc import CLOSED_FORMS, McConfig, closed_form_reference, euler_maruyama_estimate, tolerance
from .models import Settings
from .multiindex import parse_multiindex
from .sdefile import load_problem, problem_to_dict
from .series import METHODS, compare_methods, evaluate_series, expand
from .trees import parse_tree
from .verify import identity_suite


logger = logging.getLogger(__name__)


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="exotic-bseries")
    p.add_argument("--config", type=Path, default=None, help="Settings file (default: exotic-bseries.toml lookup)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="cmd", required=True)

    trees = sub.add_parser("trees", help="Inspect and enumerate exotic trees")
    trees_sub = trees.add_subparsers(dest="trees_cmd", required=True)

    en = trees_sub.add_parser("enumerate", help="List canonical trees by edge count")
    en.add_argument("--order", type=int, required=True, help="Maximal edge count")
    en.add_argument("--rule", type=str, default=None, help="Fertility caps, e.g. a:1,b:0,root:2")
    en.add_argument("--format", choices=["json", "text"], default="json")

    ti = trees_sub.add_parser("info", help="Gradings and weights of one tree")
    ti.add_argument("tree")
    ti.add_argument("--format", choices=["json", "text"], default="json")

    multi = sub.add_parser("multi", help="Inspect Feynman multi-indices")
    multi_sub = multi.add_subparsers(dest="multi_cmd", required=True)
    mi = multi_sub.add_parser("info", help="Gradings, trees and realization of one multi-index")
    mi.add_argument("index", help='e.g. "b.2 a1^2 B(0,0)"')
    mi.add_argument("--oracle", action="store_true", help="Also count leg pairings directly")
    mi.add_argument("--format", choices=["json", "text"], default="json")

    series = sub.add_parser("series", help="Truncated expansions of E[f(u_t)]")
    series_sub = series.add_subparsers(dest="series_cmd", required=True)

    ex = series_sub.add_parser("expand", help="Expand with one method")
    ex.add_argument("--sde", type=Path, required=True)
    ex.add_argument("--order", type=int, required=True)
    ex.add_argument("--method", choices=list(METHODS), default=None)

    cmp_ = series_sub.add_parser("compare", help="Expand with every method and compare coefficients")
    cmp_.add_argument("--sde", type=Path, required=True)
    cmp_.add_argument("--order", type=int, required=True)

    v = sub.add_parser("verify", help="Run the combinatorial identity suite")
    v.add_argument("--max-order", type=int, required=True, help="Maximal exotic order of the trees checked")
    v.add_argument("--format", choices=["json", "text"], default="json")

    mc = sub.add_parser("mc", help="Compare a truncated series with an Euler-Maruyama estimate")
    mc.add_argument("--sde", type=Path, required=True)
    mc.add_argument("--t", type=float, required=True)
    mc.add_argument("--paths", type=int, required=True)
    mc.add_argument("--step", type=float, required=True)
    mc.add_argument("--seed", type=int, required=True)
    mc.add_argument("--order", type=int, required=True)
    mc.add_argument("--closed-form", choices=list(CLOSED_FORMS), default=None)
    mc.add_argument("--a", type=float, default=None)
    mc.add_argument("--sigma", type=float, default=None)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)

    try:
        return _run(args)
    except MethodDisagreement as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def _require_order(value: int, flag: str) -> int:
    if value < 0:
        raise InputError(f"{flag} must be >= 0, got {value}")
    return value


def _run(args: argparse.Namespace) -> int:
    settings = load_settings(args.config)

    if args.cmd == "trees":
        if args.trees_cmd == "enumerate":
            rule = FertilityRule.parse(args.rule) if args.rule is not None else None
            order = _require_order(args.order, "--order")
            sys.stdout.write(build_enumerate_output(order, rule, fmt=args.format))
            return 0
        if args.trees_cmd == "info":
            sys.stdout.write(build_tree_info_output(parse_tree(args.tree), fmt=args.format))
            return 0
        raise AssertionError(f"unhandled trees cmd: {args.trees_cmd}")

    if args.cmd == "multi":
        if args.multi_cmd == "info":
            g = parse_multiindex(args.index)
            out = build_multi_info_output(
                g,
                oracle=args.oracle,
                max_legs=settings.verify.oracle_max_legs,
                max_length=settings.multi.max_length,
                fmt=args.format,
            )
            sys.stdout.write(out)
            return 0
        raise AssertionError(f"unhandled multi cmd: {args.multi_cmd}")

    if args.cmd == "series":
        problem = load_problem(args.sde)
        order = _require_order(args.order, "--order")
        if args.series_cmd == "expand":
            method = args.method or settings.series.default_method
            sys.stdout.write(canonical_json(expand(problem, order, method).to_json()))
            return 0
        if args.series_cmd == "compare":
            results = compare_methods(problem, order)
            payload = {
                "agree": True,
                "methods": list(results),
                "series": results[METHODS[0]].to_json(),
            }
            sys.stdout.write(canonical_json(payload))
            return 0
        raise AssertionError(f"unhandled series cmd: {args.series_cmd}")

    if args.cmd == "verify":
        max_order = _require_order(args.max_order, "--max-order")
        result = identity_suite(max_order, settings=settings.verify)
        sys.stdout.write(result.json_lines() if args.format == "json" else result.text())
        return 0 if result.ok else 1

    if args.cmd == "mc":
        return _run_mc(args, settings)

    raise AssertionError(f"unhandled cmd: {args.cmd}")


def _run_mc(args: argparse.Namespace, settings: Settings) -> int:
    config = McConfig(t_end=args.t, step=args.step, paths=args.paths, seed=args.seed)
    config.validate(settings.mc)
    order = _require_order(args.order, "--order")
    if args.closed_form is not None and (args.a is None or args.sigma is None):
        raise McConfigError(message="--closed-form needs --a and --sigma")

    problem = load_problem(args.sde)
    series = expand(problem, order, settings.series.default_method)
    series_value = float(evaluate_series(series, args.t if problem.mode == "float" else str(args.t)))
    est = euler_maruyama_estimate(problem.as_float(), config, settings=settings.mc)
    tol = tolerance(est, config.step, settings.mc.bias_constant)
    diff = abs(series_value - est.mean)
    passed = diff <= tol

    payload = {
        "difference": diff,
        "estimate": est.to_json(),
        "order": order,
        "problem": problem_to_dict(problem),
        "series_value": series_value,
        "status": "pass" if passed else "fail",
        "tolerance": tol,
    }
    if args.closed_form is not None:
        ref = closed_form_reference(args.closed_form, u0=float(problem.u0), a=args.a, sigma=args.sigma)
        payload["closed_form"] = {"name": args.closed_form, "value": ref(args.t)}
    if not passed:
        logger.info("mc: |series - estimate| = %g exceeds tolerance %g", diff, tol)
    sys.stdout.write(canonical_json(payload))
    return 0 if passed else 1
