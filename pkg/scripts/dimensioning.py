"""Dimension both worked examples and print the figures behind each choice."""
import argparse
import json

from rsd.dimensioning import dimension_rsd
from rsd.scenario_math import h_one


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=0.005)
    ap.add_argument("--beta", type=float, default=1e-12)
    ap.add_argument("--fraction", type=float, default=0.7)
    args = ap.parse_args()
    for n, N in ((11, 2000), (8, 1340)):
        rep = dimension_rsd(n, args.eps, args.beta, args.fraction, N=N)
        d = rep.to_dict()
        # same sizes under the real-valued acceptance threshold
        d["h_one_relaxed"] = h_one(rep.config.dims, rep.config.levels.eps_prime, "relaxed")
        print(json.dumps(d, indent=2))


if __name__ == "__main__":
    main()
