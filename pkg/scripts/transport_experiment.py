"""Repeated RSD runs on the transport network, followed by out-of-sample checks."""
import argparse
import json

import numpy as np

from rsd.dimensioning import ScenarioConfig, iteration_cap_for
from rsd.harness import ExperimentSpec, monte_carlo, trial_seed
from rsd.engine import run_rvo
from rsd.problems import TransportNetwork
from rsd.scenario_math import DesignDims, h_one


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--csv", default="transport_trials.csv")
    ap.add_argument("--validate", type=int, default=100_000, help="fresh samples per check (0 skips)")
    args = ap.parse_args()
    dims = DesignDims(8, 1340, 62273)
    cap = iteration_cap_for(h_one(dims, 0.0035), 1e-12)
    cfg = ScenarioConfig.build(8, 1340, 62273, 0.005, 0.0035, 1e-12, cap, args.seed)
    spec = ExperimentSpec("transport", cfg, args.trials, output=args.csv, workers=args.workers, record_timings=True)
    stats = monte_carlo(spec)
    agg = stats.aggregates()
    if args.validate:
        problem = TransportNetwork()
        rng = np.random.default_rng([args.seed, 999])
        worst = 0.0
        for t in range(min(args.trials, 10)):
            run = run_rvo(problem, cfg.with_seed(trial_seed(args.seed, t)))
            draws = problem.sample_many(rng, args.validate)
            worst = max(worst, float(np.mean(problem.constraint_values(run.theta_star, draws) > 0)))
        agg["worst_validated_violation"] = worst
    agg["exit_histogram"] = {str(k): v for k, v in agg["exit_histogram"].items()}
    agg["objective_quantiles"] = {str(k): v for k, v in agg["objective_quantiles"].items()}
    print(json.dumps(agg, indent=2))


if __name__ == "__main__":
    main()
