"""Monte-Carlo study of per-segment action classes for each environment type."""

import argparse
import json
import sys

from ckmsched.experiments import MonteCarloConfig, monte_carlo


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--types", default="A,B,C")
    ap.add_argument("--n-cases", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--solver", default="delta-l", choices=["delta-l", "delta-p"])
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="action_frequencies.json")
    args = ap.parse_args(argv)

    mc = MonteCarloConfig(env_types=tuple(args.types.split(",")), n_cases=args.n_cases, seed=args.seed,
                          solver=args.solver, jobs=args.jobs)
    out = monte_carlo(mc)
    for t in out["types"].values():
        t.pop("cases")
    with open(args.out, "w") as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
    print(f"{'type':>4}  {'ZeroWait':>8}  {'Delayed':>8}  {'NoUpdate':>8}  mean J ({args.solver})")
    for name, t in out["types"].items():
        f = t["action_frequency"]
        print(f"{name:>4}  {f['ZeroWait']:8.3f}  {f['Delayed']:8.3f}  {f['NoUpdate']:8.3f}  "
              f"{t['J'][args.solver]['mean']:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
