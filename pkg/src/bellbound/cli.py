"""Command-line entry point: ``bellbound {lhv,qvalue,bounds,source-op,verify}``.

Exit codes: 0 success, 1 a verification check failed, 2 invalid input,
3 a size budget was exceeded.
"""

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__, kernels
from .bounds import BoundQuery, best_known, comparison_csv
from .config import DEFAULT_SEED, LHV_BUDGET, TOL
from .errors import BudgetError, ValidationError
from .quantum import SeesawConfig, model_from_json, model_to_json, quantum_behavior, seesaw
from .scenario import bell_value, builtin_functional, functional_from_json, lhv_constants
from .source import ghz_state, source_report
from .tensor import make_rng, matrix_from_json, random_pure_state
from .verify import run_suite


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    return x


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise ValidationError(f"{path}: {exc.strerror}") from exc


def _functional(args):
    if args.functional:
        return functional_from_json(_load_json(args.functional))
    if args.builtin:
        return builtin_functional(args.builtin, args.parties)
    raise ValidationError("pass --functional FILE or --builtin NAME")


def _tolerances():
    return {k: getattr(TOL, k) for k in TOL.__dataclass_fields__}


def cmd_lhv(args):
    f = _functional(args)
    c = lhv_constants(f, budget=args.budget)
    return {
        "scenario": f.scenario.to_json(),
        "sup": c.sup,
        "inf": c.inf,
        "lhv_norm": c.lhv_norm,
        "argsup": [list(x) for x in c.argsup],
        "arginf": [list(x) for x in c.arginf],
        "strategies": f.scenario.strategy_count,
    }, 0


def cmd_qvalue(args):
    f = _functional(args)
    norm = lhv_constants(f).lhv_norm
    if args.model:
        m = model_from_json(_load_json(args.model))
        value = bell_value(f, quantum_behavior(m, f.scenario))
        if norm <= 0:
            raise ValidationError("degenerate functional: LHV norm is 0")
        return {"mode": "model", "quantum_value": value, "lhv_norm": norm, "ratio": abs(value) / norm}, 0
    dims = args.dims or list(f.scenario.outcomes)
    cfg = SeesawConfig(restarts=args.restarts, max_iters=args.max_iters, tol=args.tol, seed=args.seed,
                       projective=args.projective)
    rep = seesaw(f, dims, cfg)
    out = {
        "mode": "seesaw",
        "dims": list(dims),
        "quantum_value": rep.quantum_value,
        "lhv_norm": rep.lhv_norm,
        "ratio": rep.ratio,
        "iterations": rep.iterations,
        "converged": rep.converged,
        "restart": rep.restart,
        "seesaw": {"restarts": cfg.restarts, "max_iters": cfg.max_iters, "tol": cfg.tol,
                   "seed": cfg.seed, "projective": cfg.projective},
    }
    if args.emit_model:
        out["model"] = model_to_json(rep.model)
    return out, 0


def cmd_bounds(args):
    S = None if args.S in (None, "unbounded") else int(args.S)
    rep = best_known(BoundQuery(args.d, args.N, S, args.measurements, args.state))
    out = rep.to_json()
    if args.csv:
        lo, hi = (int(x) for x in args.grid_d.split(":"))
        nlo, nhi = (int(x) for x in args.grid_N.split(":"))
        with open(args.csv, "w") as fh:
            fh.write(comparison_csv(range(lo, hi + 1), range(nlo, nhi + 1)))
        out["csv"] = args.csv
    return out, 0


def cmd_source_op(args):
    if args.state:
        psi = matrix_from_json(_load_json(args.state)).ravel()
        if args.d is None:
            raise ValidationError("--d is required with --state")
        d = args.d
    else:
        d = args.d or 2
        N = args.N or 2
        if args.random:
            psi = random_pure_state(make_rng(args.seed), d**N)
        else:
            psi = ghz_state(d, N)
    N = int(round(np.log(psi.size) / np.log(d)))
    settings = args.settings or [2] * (N - 1)
    out = source_report(psi, d, settings, args.pivot, args.trials, args.seed)
    return out, 0


def cmd_verify(args):
    checks = run_suite(args.suite, seed=args.seed)
    out = {
        "suite": args.suite,
        "passed": all(c.passed for c in checks),
        "checks": [{"name": c.name, "passed": c.passed, "tolerance": c.tolerance, "detail": c.detail}
                   for c in checks],
    }
    return out, 0 if out["passed"] else 1


def _add_functional_args(p):
    p.add_argument("--functional", help="functional JSON file")
    p.add_argument("--builtin", help="built-in functional: chsh, mermin_klyshko, mkN")
    p.add_argument("--parties", type=int, default=None, help="N for mermin_klyshko")


def build_parser():
    ap = argparse.ArgumentParser(prog="bellbound", description="Numerical checks for Bell-inequality violations.")
    ap.add_argument("--version", action="version", version=f"bellbound {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "text", "csv"), default="json")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lhv", parents=[common], help="exact LHV constants by enumeration")
    _add_functional_args(p)
    p.add_argument("--budget", type=int, default=LHV_BUDGET)
    p.set_defaults(func=cmd_lhv)

    p = sub.add_parser("qvalue", parents=[common], help="quantum value of a model, or see-saw search")
    _add_functional_args(p)
    p.add_argument("--model", help="model JSON file; omit to run the see-saw")
    p.add_argument("--dims", type=int, nargs="+")
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--projective", action="store_true", help="rank-1 projectors (dims must equal outcomes)")
    p.add_argument("--emit-model", action="store_true")
    p.set_defaults(func=cmd_qvalue)

    p = sub.add_parser("bounds", parents=[common], help="upper bounds on the maximal violation")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--S", default="unbounded")
    p.add_argument("--measurements", choices=("generalized", "projective"), default="generalized")
    p.add_argument("--state", choices=("arbitrary", "ghz"), default="arbitrary")
    p.add_argument("--csv", help="also write a (d, N) comparison table here")
    p.add_argument("--grid-d", default="2:10")
    p.add_argument("--grid-N", default="2:6")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("source-op", parents=[common], help="build and check a source operator for a pure state")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--state", help="state vector JSON (matrix format, cols = 1)")
    g.add_argument("--ghz", action="store_true", help="GHZ state (default)")
    g.add_argument("--random", action="store_true", help="seeded random pure state")
    p.add_argument("--d", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--settings", type=int, nargs="+", help="S_n for the non-collapsed sites")
    p.add_argument("--pivot", type=int, default=0, help="collapsed (single-setting) site")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_source_op)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("--suite", choices=("attainability", "all"), default="attainability")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_verify)
    return ap


def _config_echo(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "output", "format")}


def _render_text(doc):
    result = doc["result"]
    if "checks" in result:
        return "".join(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}\n" for c in result["checks"])
    return "".join(f"{k}: {json.dumps(v, sort_keys=True)}\n" for k, v in sorted(result.items()))


def _render_csv(doc):
    result = doc["result"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if "checks" in result:
        w.writerow(["name", "passed", "tolerance"])
        w.writerows([c["name"], c["passed"], c["tolerance"]] for c in result["checks"])
    elif "entries" in result:
        w.writerow(["label", "value", "exact", "applicable"])
        w.writerows([e["label"], e["value"], e["exact"], e["applicable"]] for e in result["entries"])
    else:
        w.writerow(["key", "value"])
        w.writerows([k, v if not isinstance(v, (dict, list)) else json.dumps(v, sort_keys=True)]
                    for k, v in sorted(result.items()))
    return buf.getvalue()


_RENDER = {
    "json": lambda doc: json.dumps(doc, indent=2, sort_keys=True) + "\n",
    "text": _render_text,
    "csv": _render_csv,
}


def run(argv=None):
    """Parse ``argv`` and dispatch.  Returns ``(exit_code, report_text, args)``."""
    args = build_parser().parse_args(argv)
    try:
        result, code = args.func(args)
    except ValidationError as exc:
        return 2, json.dumps({"error": "validation", "message": str(exc)}, indent=2) + "\n", args
    except BudgetError as exc:
        err = {"error": "budget", "message": str(exc), "required": exc.required, "budget": exc.budget}
        return 3, json.dumps(err, indent=2) + "\n", args
    doc = _jsonable({
        "tool": "bellbound",
        "version": __version__,
        "backend": kernels.BACKEND,
        "command": args.command,
        "config": _config_echo(args),
        "tolerances": _tolerances(),
        "result": result,
    })
    return code, _RENDER[args.format](doc), args


def main(argv=None):
    code, text, args = run(argv)
    if code in (2, 3):
        sys.stderr.write(text)
    elif args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
