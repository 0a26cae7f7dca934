"""Repeated RSD runs on the robust input design problem, with a one-shot comparison."""
import argparse
import json
import time

import numpy as np

from rsd.dimensioning import ScenarioConfig, iteration_cap_for, n_plain_exact
from rsd.harness import ExperimentSpec, monte_carlo
from rsd.problems import InputDesignProblem
from rsd.scenario_math import DesignDims, h_one


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--csv", default="input_design_trials.csv")
    ap.add_argument("--one-shot", action="store_true", help="also time a single solve with the plain scenario size")
    args = ap.parse_args()
    dims = DesignDims(11, 2000, 63000)
    cap = iteration_cap_for(h_one(dims, 0.0035), 1e-12)
    cfg = ScenarioConfig.build(11, 2000, 63000, 0.005, 0.0035, 1e-12, cap, args.seed)
    spec = ExperimentSpec("input-design", cfg, args.trials, output=args.csv, workers=args.workers, record_timings=True)
    stats = monte_carlo(spec)
    out = stats.aggregates()
    out["exit_histogram"] = {str(k): v for k, v in out["exit_histogram"].items()}
    out["objective_quantiles"] = {str(k): v for k, v in out["objective_quantiles"].items()}
    out["mean_solve_ms"] = float(np.mean([r.solve_ms for r in stats.rows]))
    out["mean_oracle_ms"] = float(np.mean([r.oracle_ms for r in stats.rows]))
    if args.one_shot:
        problem = InputDesignProblem()
        N = n_plain_exact(11, 0.005, 1e-12)
        samples = problem.sample_many(np.random.default_rng(args.seed), N)
        t0 = time.perf_counter()
        res = problem.solve(samples)
        out["one_shot"] = {"N": N, "gamma": res.objective, "seconds": time.perf_counter() - t0}
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
