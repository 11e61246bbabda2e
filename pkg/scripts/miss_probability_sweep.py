#!/usr/bin/env python3
"""Sweep the all-frames-missed probability over per-frame detection rates.

For each per-frame detection probability p, estimates the chance that every
frame of a trigger burst misses (Monte-Carlo) and compares it against the
closed form (1-p)^frames. Prints a table; optionally writes CSV.

Example:
    python3 scripts/miss_probability_sweep.py --trials 200000 --frames 3 \
        --probs 0.90,0.95,0.967,0.99 --csv out.csv
"""

import argparse
import csv
import sys

from sls.sim.montecarlo import all_miss_probability, miss_probability_mc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--probs", default="0.80,0.90,0.95,0.967,0.99",
                        help="comma-separated per-frame detection probabilities")
    parser.add_argument("--frames", type=int, default=3)
    parser.add_argument("--trials", type=int, default=200_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--csv", metavar="PATH", help="also write results as CSV")
    args = parser.parse_args(argv)

    probs = [float(v) for v in args.probs.split(",")]
    rows = []
    header = f"{'p':>7} {'closed form':>13} {'MC estimate':>13} {'std err':>10} {'z':>6}"
    print(header)
    print("-" * len(header))
    for p in probs:
        closed = all_miss_probability(p, args.frames)
        result = miss_probability_mc(p, frames=args.frames,
                                     trials=args.trials, seed=args.seed)
        z = ((result.estimate - closed) / result.standard_error
             if result.standard_error else 0.0)
        print(f"{p:>7.4f} {closed:>13.4e} {result.estimate:>13.4e} "
              f"{result.standard_error:>10.2e} {z:>6.2f}")
        rows.append({"p": p, "frames": args.frames, "closed_form": closed,
                     "estimate": result.estimate,
                     "standard_error": result.standard_error,
                     "trials": args.trials})

    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
        print(f"\nwrote {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
