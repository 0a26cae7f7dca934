"""Write the expected-repetitions vs N tradeoff curve for n = 11 and n = 8 as CSV."""
import argparse
import csv
import sys

from rsd.dimensioning import tradeoff_curve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--epsp", type=float, default=0.0035)
    ap.add_argument("--low", type=int, default=1000)
    ap.add_argument("--high", type=int, default=20000)
    ap.add_argument("--points", type=int, default=80)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n", "N", "bound"])
    for n in (11, 8):
        for p in tradeoff_curve(n, args.epsp, args.low, args.high, args.points):
            w.writerow([n, p.N, repr(p.expected_repetitions_bound)])
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
