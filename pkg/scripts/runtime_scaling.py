"""Wall time of Delta-P and Delta-L, and DAG size, as the coarse grid step varies."""

import argparse
import sys
import time

from ckmsched.dag import GridConfig, build_dag_for
from ckmsched.environment import ScenarioSpec, sample_environment
from ckmsched.solvers import delta_l, delta_p


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--type", default="C")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--steps", default="2.5,5,10")
    ap.add_argument("--skip-delta-p", action="store_true")
    args = ap.parse_args(argv)

    env = sample_environment(ScenarioSpec(args.type, 6, 300.0, args.seed))
    delta_l(env)  # compile kernels before timing
    header = f"{'step':>5}  {'vertices':>8}  {'edges':>8}  {'t(L)':>7}  {'J(L)':>7}"
    print(header if args.skip_delta_p else header + f"  {'t(P)':>7}  {'J(P)':>7}")
    for step in (float(s) for s in args.steps.split(",")):
        g = GridConfig(coarse_step=step)
        grid, dag = build_dag_for(env, g)
        t0 = time.perf_counter()
        rl = delta_l(env, g)
        tl = time.perf_counter() - t0
        line = f"{step:5g}  {len(grid):8d}  {dag.num_update_edges:8d}  {tl:7.3f}  {rl.J:7.4f}"
        if not args.skip_delta_p:
            t0 = time.perf_counter()
            rp = delta_p(env, g)
            line += f"  {time.perf_counter() - t0:7.3f}  {rp.J:7.4f}"
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
