"""Sweep the myopic rule over cost and half-life, and dump g(t) curves for a few cases."""

import argparse
import csv
import sys

import numpy as np

from ckmsched.environment import DecayParams
from ckmsched.shortterm import MyopicProblem, g_curve, optimal_wait, threshold


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eta", type=float, default=0.1)
    ap.add_argument("--downtime", type=float, default=1.0)
    ap.add_argument("--sweep-out", default="shortterm_sweep.csv")
    ap.add_argument("--curves-out", default="shortterm_curves.csv")
    args = ap.parse_args(argv)

    with open(args.sweep_out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_half", "cost", "cost_over_d2", "threshold", "decision", "t_star", "g_at_decision"])
        for t_half in (2.0, 5.0, 10.0, 20.0, 50.0):
            for cost in np.geomspace(0.01, 10.0, 25):
                p = MyopicProblem(DecayParams(args.eta, t_half), args.downtime, float(cost))
                d = optimal_wait(p)
                w.writerow([t_half, cost, cost / args.downtime**2, threshold(p.decay), d.kind.value,
                            d.t_star, d.g_at_decision])

    with open(args.curves_out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_half", "cost", "t", "g", "g_prime"])
        for t_half, cost in ((5.0, 0.05), (5.0, 0.5), (5.0, 2.0), (20.0, 2.0)):
            p = MyopicProblem(DecayParams(args.eta, t_half), args.downtime, cost)
            for t, g, gp in g_curve(p, 301, 4 * t_half):
                w.writerow([t_half, cost, t, g, gp])
    print(f"wrote {args.sweep_out} and {args.curves_out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
