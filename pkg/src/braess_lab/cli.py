"""``braess-lab`` command-line entry point.

Exit codes: 0 success / no paradox / matroid, 1 weak paradox only or
non-matroid, 2 invalid input, 3 solver did not converge, 4 strong paradox.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import instances
from .braess import PARADOX_TOL, compare_equilibria, apply_reduction, synthesize_counterexample, \
    synthesize_demand_counterexample
from .equilibrium import SolverConfig, solve
from .errors import BigMTooSmall, BraessLabError, NeedThreePopulations, NotANonMatroid, ValidationError
from .games import BIG_M
from .io import (
    counterexample_summary,
    dumps_json,
    family_from_doc,
    model_from_doc,
    model_to_doc,
    read_json,
    reduction_from_doc,
    reduction_to_doc,
    report_to_doc,
    result_to_doc,
    witness_to_doc,
    write_atomic,
    write_json,
)
from .set_systems import is_matroid_base_family, minimal_clutter, nonmatroid_witness

EXIT_OK, EXIT_WEAK, EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_STRONG = 0, 1, 2, 3, 4
EXIT_NON_MATROID = 1


def _err(msg: str):
    print(msg, file=sys.stderr)


def _emit(doc, out):
    text = dumps_json(doc)
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _config(args, gap_from_tol: bool) -> SolverConfig:
    kw = {"seed": args.seed}
    if args.max_iter is not None:
        kw["max_iterations"] = args.max_iter
    if gap_from_tol and args.tol is not None:
        kw["gap_tolerance"] = args.tol
    return SolverConfig(**kw)


def cmd_solve(args) -> int:
    model = model_from_doc(read_json(args.model))
    res = solve(model, _config(args, True), strict=False)
    _emit(result_to_doc(res), args.out)
    status = "converged" if res.converged else "NOT converged"
    _err(f"{status}: gap {res.gap:.3e}, {res.iterations} iterations, potential {res.potential:.9g}")
    for p, c in zip(model.populations, res.population_costs):
        _err(f"  population {p.id}: cost {c:.9g}")
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def cmd_check_matroid(args) -> int:
    model = model_from_doc(read_json(args.model))
    try:
        pop = model.population(args.population)
    except KeyError:
        _err(f"unknown population {args.population!r}")
        return EXIT_INVALID
    clut = minimal_clutter(pop.strategies)
    verdict = is_matroid_base_family(clut)
    doc = {"population": pop.id, "minimal_clutter": [list(s) for s in clut.named()], "matroid": verdict}
    _err(f"population {pop.id}: minimal clutter has {len(clut)} member(s)")
    for s in clut.named():
        _err("  {" + ", ".join(s) + "}")
    if verdict:
        _err("verdict: matroid base family")
    else:
        w = nonmatroid_witness(clut)
        doc["witness"] = witness_to_doc(w)
        _err("verdict: not a matroid base family")
        _err(f"witness: X={{{', '.join(w.X)}}} Y={{{', '.join(w.Y)}}} a={w.a} b={w.b} c={w.c}")
    _emit(doc, args.out)
    return EXIT_OK if verdict else EXIT_NON_MATROID


def _table(rep, model) -> str:
    lines = [f"{'population':<14}{'before':>14}{'after':>14}{'delta':>14}"]
    for p, a, b in zip(model.populations, rep.before.population_costs, rep.after.population_costs):
        lines.append(f"{p.id:<14}{a:>14.6g}{b:>14.6g}{b - a:>14.3g}")
    lines.append(f"{'total':<14}{rep.total_cost[0]:>14.6g}{rep.total_cost[1]:>14.6g}"
                 f"{rep.total_cost[1] - rep.total_cost[0]:>14.3g}")
    lines.append(f"weak paradox: {'yes' if rep.verdict_weak else 'no'}"
                 + (f" ({', '.join(r for r, _, _ in rep.weak)})" if rep.weak else ""))
    lines.append(f"strong paradox: {'yes' if rep.verdict_strong else 'no'}"
                 + (f" ({', '.join(p for p, _, _ in rep.strong)})" if rep.strong else ""))
    if rep.zero_demand_populations:
        lines.append("zero reduced demand (excluded from strong test): "
                     + ", ".join(rep.zero_demand_populations))
    return "\n".join(lines)


def cmd_paradox(args) -> int:
    model = model_from_doc(read_json(args.model))
    red = reduction_from_doc(read_json(args.reduction), model)
    cfg = _config(args, False)
    before = solve(model, cfg, strict=False)
    after = solve(apply_reduction(model, red), cfg, strict=False)
    rep = compare_equilibria(before, after, args.tol if args.tol is not None else PARADOX_TOL)
    _err(_table(rep, model))
    _emit(report_to_doc(rep), args.out)
    if not rep.reliable:
        _err("solver did not converge; verdicts are unreliable")
        return EXIT_NOT_CONVERGED
    if rep.verdict_strong:
        return EXIT_STRONG
    return EXIT_WEAK if rep.verdict_weak else EXIT_OK


def cmd_synthesize(args) -> int:
    systems = family_from_doc(read_json(args.family))
    big_m = args.big_m if args.big_m is not None else BIG_M
    try:
        if args.mode == "cost":
            cx = synthesize_counterexample(systems, big_m)
        else:
            cx = synthesize_demand_counterexample(systems, big_m)
    except NotANonMatroid:
        _err("first set system's clutter is a matroid base family: the family is immune, "
             "no counterexample exists")
        return EXIT_INVALID
    except NeedThreePopulations as exc:
        _err(str(exc))
        return EXIT_INVALID
    except BigMTooSmall as exc:
        _err(str(exc))
        return EXIT_INVALID
    out = Path(args.out or ".")
    write_json(out / "model.json", model_to_doc(cx.base_model))
    write_json(out / "reduction.json", reduction_to_doc(cx.reduction))
    write_json(out / "witness.json", counterexample_summary(cx))
    w = cx.witness
    _err(f"witness: X={{{', '.join(w.X)}}} Y={{{', '.join(w.Y)}}} a={w.a} b={w.b} c={w.c}")
    _err(f"marked resources e, f, g = {', '.join(cx.marked)}")
    _err(f"wrote model.json, reduction.json, witness.json to {out}")
    return EXIT_OK


def cmd_example(args) -> int:
    if args.name not in instances.EXAMPLES:
        _err(f"unknown example {args.name!r}; choose from {', '.join(instances.EXAMPLES)}")
        return EXIT_INVALID
    build, reduction = instances.EXAMPLES[args.name]
    model = build(args.big_m) if args.name == "fig1" and args.big_m is not None else build()
    out = Path(args.out or ".")
    write_json(out / f"{args.name}.json", model_to_doc(model))
    write_json(out / f"{args.name}-reduction.json", reduction_to_doc(reduction()))
    if args.name == "queue":
        err = max(instances.queue_fit_error(mu) for mu in instances.QUEUE_RATES.values())
        _err(f"queue delays are {instances.QUEUE_SEGMENTS}-segment fits of 1/(mu - x); "
             f"max relative error {err:.2e} on [0, {instances.QUEUE_SPAN} mu]")
    _err(f"wrote {args.name}.json and {args.name}-reduction.json to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None,
                        help="solve: Wardrop gap tolerance; paradox: verdict tolerance (default 1e-4)")
    common.add_argument("--max-iter", type=int, default=None)
    common.add_argument("--big-m", type=float, default=None)
    common.add_argument("--out", default=None, help="output file (solve, paradox, check-matroid) or directory")
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="braess-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="compute a Wardrop equilibrium")
    p.add_argument("model")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check-matroid", parents=[common], help="test a population for matroid structure")
    p.add_argument("model")
    p.add_argument("population")
    p.set_defaults(func=cmd_check_matroid)

    p = sub.add_parser("paradox", parents=[common], help="compare equilibria before and after a reduction")
    p.add_argument("model")
    p.add_argument("reduction")
    p.set_defaults(func=cmd_paradox)

    p = sub.add_parser("synthesize", parents=[common], help="build a counterexample for a non-matroid family")
    p.add_argument("family")
    p.add_argument("--mode", choices=("cost", "demand"), default="cost")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("example", parents=[common], help="write a built-in model and reduction")
    p.add_argument("name")
    p.set_defaults(func=cmd_example)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ValidationError, OSError) as exc:
        _err(f"error: {exc}")
        return EXIT_INVALID
    except BraessLabError as exc:
        _err(f"error: {exc}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
