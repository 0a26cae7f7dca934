"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 numeric or domain error, 3 a run hit
its iteration cap.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import dimensioning as dim
from . import scenario_math as sm
from .dimensioning import ScenarioConfig
from .engine import run_dvo, run_rvo
from .errors import RSDError
from .harness import ExperimentSpec, monte_carlo
from .problems import PROBLEMS, make_problem
from .solver import LinearProgram, lp_solve

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _emit(args, payload, text: str) -> None:
    out = json.dumps(payload, indent=2, sort_keys=True) + "\n" if args.json else text
    if args.out:
        Path(args.out).write_text(out)
    else:
        sys.stdout.write(out)


def _kv(d: dict) -> str:
    def fmt(v):
        return f"{v:.10g}" if isinstance(v, float) else str(v)

    return "".join(f"{k} = {fmt(v)}\n" for k, v in d.items())


def _khat(h: float) -> float:
    return math.inf if h >= 1.0 else 1.0 / (1.0 - h)


def cmd_dimension(args) -> int:
    report = dim.dimension_rsd(
        args.n, args.eps, args.beta, args.fraction, args.target, N=args.N, seed=args.seed
    )
    d = report.to_dict()
    _emit(args, d, _kv(d))
    return EXIT_OK


def cmd_tradeoff(args) -> int:
    pts = dim.tradeoff_curve(args.n, args.epsp, args.from_, args.to, args.points)
    rows = [{"N": p.N, "bound": p.expected_repetitions_bound} for p in pts]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "bound"])
    for r in rows:
        w.writerow([r["N"], repr(r["bound"])])
    _emit(args, rows, buf.getvalue())
    return EXIT_OK


def cmd_bounds(args) -> int:
    dims = sm.DesignDims(args.n, args.N, args.No)
    d = {
        "beta_eps": sm.beta_eps(args.N, args.n, args.eps),
        "beta_epsp": sm.beta_eps(args.N, args.n, args.epsp),
        "oracle_threshold": sm.oracle_threshold(args.epsp, args.No),
    }
    for conv in ("floor", "relaxed"):
        h1 = sm.h_one(dims, args.epsp, conv)
        general = sm.bad_exit_bound_general(dims, args.eps, args.epsp, conv)
        d[f"H1_{conv}"] = h1
        d[f"Khat_{conv}"] = _khat(h1)
        d[f"H_eps_{conv}"] = sm.h_eps(dims, args.eps, args.epsp, conv)
        d[f"bad_exit_general_{conv}"] = general.value
        d[f"bad_exit_general_{conv}_vacuous"] = general.vacuous
    d["bar_beta"] = sm.bar_beta(dims, args.eps, args.epsp)
    if args.k is not None:
        d["P_K_le_k_floor"] = sm.rvo_runtime_bounds(dims, args.epsp, args.k).cdf_bound_at_k
    _emit(args, d, _kv(d))
    return EXIT_OK


def _config_from_args(args, n: int) -> ScenarioConfig:
    if args.config:
        cfg = ScenarioConfig.from_dict(json.loads(Path(args.config).read_text()))
        return cfg.with_seed(args.seed) if args.seed_given else cfg
    missing = [f for f in ("N", "No", "eps", "epsp") if getattr(args, f) is None]
    if missing:
        raise UsageError(f"run: give --config or all of {', '.join('--' + m for m in missing)}")
    return ScenarioConfig.build(n, args.N, args.No, args.eps, args.epsp, args.beta, args.cap, args.seed)


def cmd_run(args) -> int:
    problem = make_problem(args.problem, args.instance)
    cfg = _config_from_args(args, problem.n)
    if args.algorithm == "dvo":
        result = run_dvo(problem, cfg.dims.N, cfg.levels.eps, cfg.iteration_cap, cfg.seed)
    else:
        result = run_rvo(problem, cfg, workers=args.workers)
    summary = {
        "status": result.status,
        "exit_iteration": result.exit_iteration,
        "objective": result.objective,
        "empirical_violation": result.empirical_violation,
        "theta_star": " ".join(f"{v:.10g}" for v in result.theta_star),
    }
    _emit(args, result.to_dict(), _kv(summary))
    return EXIT_OK if result.returned else EXIT_CAP


def cmd_montecarlo(args) -> int:
    spec = ExperimentSpec.from_json(args.spec)
    if args.seed_given:
        spec.config = spec.config.with_seed(args.seed)
    if args.trials is not None:
        spec.trials = args.trials
        spec.__post_init__()
    if args.workers is not None:
        spec.workers = args.workers
        spec.__post_init__()
    if args.csv:
        spec.output = args.csv
    stats = monte_carlo(spec)
    agg = stats.aggregates()
    text = _kv({k: v for k, v in agg.items() if not isinstance(v, dict)})
    text += "exit_histogram = " + " ".join(f"{k}:{v}" for k, v in agg["exit_histogram"].items()) + "\n"
    agg = {**agg, "exit_histogram": {str(k): v for k, v in agg["exit_histogram"].items()},
           "objective_quantiles": {str(k): v for k, v in agg["objective_quantiles"].items()}}
    _emit(args, agg, text)
    return EXIT_OK


def cmd_solve_lp(args) -> int:
    lp = LinearProgram.from_json(Path(args.lp).read_text())
    out = lp_solve(lp, method=args.method)
    d = {"status": out.status, "objective": out.objective, "iterations": out.iterations}
    payload = {**d, "x": None if out.x is None else np.asarray(out.x).tolist()}
    if out.x is not None:
        d["x"] = " ".join(f"{v:.10g}" for v in out.x)
    _emit(args, payload, _kv(d))
    return EXIT_OK if out.optimal else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="base seed (default 0)")
    common.add_argument("--json", action="store_true", help="emit JSON instead of text")
    common.add_argument("--out", help="write output to this file instead of stdout")

    parser = _Parser(prog="rsd", description="Repetitive scenario design toolkit", allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("dimension", parents=[common], allow_abbrev=False,
                       help="size N, N_o and the iteration cap")
    p.add_argument("--n", type=int, required=True, help="number of decision variables")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--beta", type=float, default=1e-12)
    p.add_argument("--fraction", type=float, default=0.7, help="eps' / eps")
    p.add_argument("--target", type=float, default=10.0, help="asymptotic expected repetitions")
    p.add_argument("--N", type=int, default=None, help="fix N instead of deriving it from --target")
    p.set_defaults(func=cmd_dimension)

    p = sub.add_parser("tradeoff", parents=[common], allow_abbrev=False,
                       help="CSV of (1 - beta_eps'(N))^-1 over a log grid of N")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--epsp", type=float, required=True)
    p.add_argument("--from", dest="from_", type=int, required=True)
    p.add_argument("--to", type=int, required=True)
    p.add_argument("--points", type=int, default=50)
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("bounds", parents=[common], allow_abbrev=False,
                       help="beta_eps, H-functions and bad-exit bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--No", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--epsp", type=float, required=True)
    p.add_argument("--k", type=int, default=None, help="also report P{K <= k} lower bound")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("run", parents=[common], allow_abbrev=False, help="one RSD execution")
    p.add_argument("--problem", choices=sorted(PROBLEMS), required=True)
    p.add_argument("--instance", help="JSON instance file")
    p.add_argument("--algorithm", choices=("rvo", "dvo"), default="rvo")
    p.add_argument("--config", help="JSON ScenarioConfig; replaces the sizing flags")
    p.add_argument("--N", type=int)
    p.add_argument("--No", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--epsp", type=float)
    p.add_argument("--beta", type=float, default=1e-12)
    p.add_argument("--cap", type=int, default=1000, help="iteration cap")
    p.add_argument("--workers", type=int, default=1, help="oracle threads")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("montecarlo", parents=[common], allow_abbrev=False,
                       help="repeated runs from an experiment JSON")
    p.add_argument("--spec", required=True, help="ExperimentSpec JSON file")
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int, help="parallel trial processes")
    p.add_argument("--csv", help="per-trial CSV path (overrides the spec)")
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("solve-lp", parents=[common], allow_abbrev=False,
                       help="solve a JSON linear program")
    p.add_argument("--lp", required=True)
    p.add_argument("--method", choices=("auto", "primal", "dual"), default="auto")
    p.set_defaults(func=cmd_solve_lp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.seed_given = args.seed is not None
        if args.seed is None:
            args.seed = 0
        return args.func(args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        sys.stderr.write(f"rsd: bad input: {exc}\n")
        return EXIT_USAGE
    except (RSDError, ArithmeticError, ValueError) as exc:
        sys.stderr.write(f"rsd: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
