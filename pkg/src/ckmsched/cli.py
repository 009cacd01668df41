"""Command-line front end.

Exit codes: 0 ok, 2 input error, 3 numerical stall (the partial trace is written first).
Grid and solver settings resolve as flags > ``--config`` JSON file > defaults.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import fields
from pathlib import Path as FsPath

from .dag import GridConfig, build_candidate_times, build_dag, grid_from_times
from .efficacy import trajectory
from .environment import DecayParams, Environment, ScenarioSpec, sample_environment
from .errors import ScheduleError
from .experiments import COMPARE_COLUMNS, DEFAULT_POLICIES, MonteCarloConfig, compare, monte_carlo
from .oracle import brute_force_best
from .pareto import IncumbentBound, pareto_frontier_dp
from .shortterm import MyopicProblem, g_curve, optimal_wait
from .solvers import DinkelbachConfig, SolverKind, solve

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_STALL = 3


class InputError(Exception):
    """Bad flags, files or documents; maps to exit code 2."""


def fmt(x) -> str:
    """Numbers with 6 significant digits, everything else verbatim."""
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        return str(x)
    return f"{x:.6g}"


def write_csv(path: str | None, header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    text = buf.getvalue()
    if path:
        FsPath(path).write_text(text)
    return text


def emit(text: str, path: str | None) -> None:
    if path:
        FsPath(path).write_text(text)
    else:
        sys.stdout.write(text)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def read_json(path: str) -> dict:
    try:
        return json.loads(FsPath(path).read_text())
    except FileNotFoundError:
        raise InputError(f"no such file: {path}") from None
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def load_env(path: str) -> Environment:
    return Environment.from_dict(read_json(path))


# ---------------------------------------------------------------------------
# shared option groups

GRID_FLAGS = {
    "coarse_step": float, "fine_step": float, "fine_window": float,
    "refine_window": float, "refine_step": float, "max_span": float,
}
DINKELBACH_FLAGS = {"tol": float, "max_iter": int, "inner_tol": float, "inner_max": int, "eps_dominance": float}


def add_grid_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("grid")
    for name, typ in GRID_FLAGS.items():
        g.add_argument("--" + name.replace("_", "-"), type=typ, default=None)
    g.add_argument("--no-refine", dest="refine", action="store_const", const=False, default=None,
                   help="skip the refine-and-resolve pass")
    g.add_argument("--config", help="JSON file with 'grid' and 'solver' sections")


def add_solver_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("dinkelbach")
    for name, typ in DINKELBACH_FLAGS.items():
        g.add_argument("--" + name.replace("_", "-"), type=typ, default=None)
    g.add_argument("--max-labels", type=int, default=None, help="per-vertex label cap (voids exactness)")
    g.add_argument("--warm-start", action="store_const", const=True, default=None)
    g.add_argument("--no-incumbent-pruning", dest="incumbent_pruning", action="store_const",
                   const=False, default=None)


def _layer(args: argparse.Namespace, section: str, names) -> dict:
    conf = read_json(args.config).get(section, {}) if getattr(args, "config", None) else {}
    if not isinstance(conf, dict):
        raise InputError(f"config section {section!r} must be an object")
    unknown = set(conf) - set(names)
    if unknown:
        raise InputError(f"unknown {section} settings: {sorted(unknown)}")
    out = dict(conf)
    for name in names:
        v = getattr(args, name, None)
        if v is not None:
            out[name] = v
    return out


def grid_config(args: argparse.Namespace, extra_times: tuple[float, ...] = ()) -> GridConfig:
    names = [f.name for f in fields(GridConfig) if f.name != "extra_times"]
    kw = _layer(args, "grid", names)
    return GridConfig(**kw, extra_times=extra_times)


def solver_config(args: argparse.Namespace) -> DinkelbachConfig:
    names = [f.name for f in fields(DinkelbachConfig)]
    return DinkelbachConfig(**_layer(args, "solver", names))


def parse_times(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise InputError(f"bad time list: {text!r}") from None


# ---------------------------------------------------------------------------
# commands


def cmd_sample(args: argparse.Namespace) -> int:
    if args.spec:
        spec = ScenarioSpec.from_dict(read_json(args.spec))
    else:
        spec = ScenarioSpec(args.type, args.segments, args.t_end, args.seed)
    emit(sample_environment(spec).to_json(indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    env = load_env(args.env)
    gcfg = grid_config(args)
    cfg = solver_config(args)
    grid = grid_from_times(env, parse_times(args.times)) if args.times else None
    res = solve(env, SolverKind(args.solver), gcfg, cfg, grid)
    if args.trace_csv:
        write_csv(args.trace_csv, ("iteration", "phase", "lambda", "mu", "residual", "J", "inner_iters"),
                  [(k, t.phase, t.lam, t.mu, t.residual, t.J, t.inner_iters) for k, t in enumerate(res.trace)])
    emit(res.to_json(timing=not args.no_timing, indent=2) + "\n", args.out)
    if res.stalled:
        print("solver stalled: the same schedule was selected twice with |residual| above tolerance",
              file=sys.stderr)
        return EXIT_STALL
    if args.trajectory_csv:
        write_csv(args.trajectory_csv, ("t", "efficacy", "in_downtime", "segment"),
                  trajectory(env, res.schedule, args.trajectory_step))
    if args.dag_json or args.frontier_csv:
        base = grid or build_candidate_times(env, gcfg.coarse_step, gcfg.fine_step, gcfg.fine_window)
        dag = build_dag(env, base, gcfg.max_span)
        if args.dag_json:
            FsPath(args.dag_json).write_text(json.dumps(dag.to_dict(), indent=2) + "\n")
        if args.frontier_csv:
            bound = None
            if cfg.incumbent_pruning:
                # keep the labels that can still reach the first-pass J (a path on this DAG)
                j_first = max(t.J for t in res.trace if t.phase == 0)
                bound = IncumbentBound.build(dag, env.t_end, j_first)
            front = pareto_frontier_dp(dag, cfg.eps_dominance, cfg.max_labels, bound)
            rows = []
            for lab in front.sink.labels():
                F, G, C = lab.stats.as_tuple()
                sched = front.recover(lab)
                rows.append((F, G, C, F / G - C / env.t_end, " ".join(fmt(c) for c in sched.completions)))
            write_csv(args.frontier_csv, ("F", "G", "C", "J_at_default", "schedule"), rows)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    env = load_env(args.env)
    policies = tuple(p.strip() for p in args.policies.split(",") if p.strip())
    rows = compare(env, policies, grid_config(args), solver_config(args),
                   inject_baselines=not args.no_inject, classify_tol=args.classify_tol)
    timing = not args.no_timing
    table = [r.csv_fields() if timing else r.csv_fields()[:-1] for r in rows]
    header = COMPARE_COLUMNS if timing else COMPARE_COLUMNS[:-1]
    csv_text = write_csv(args.csv, header, table)
    if args.out:
        FsPath(args.out).write_text(dump_json({"rows": [r.to_dict(timing) for r in rows]}))
    if args.format == "csv":
        sys.stdout.write(csv_text)
    else:
        cells = [list(header)] + [[fmt(x) for x in r] for r in table]
        widths = [max(len(c[i]) for c in cells) for i in range(len(header))]
        for c in cells:
            print("  ".join(s.rjust(w) for s, w in zip(c, widths)))
    return EXIT_STALL if any(r.stalled for r in rows) else EXIT_OK


def cmd_montecarlo(args: argparse.Namespace) -> int:
    mc = MonteCarloConfig(
        env_types=tuple(t.strip() for t in args.types.split(",") if t.strip()),
        n_cases=args.n_cases, seed=args.seed, num_segments=args.segments, t_end=args.t_end,
        solver=args.solver, classify_tol=args.classify_tol, grid=grid_config(args), jobs=args.jobs)
    out = monte_carlo(mc)
    if not args.keep_cases:
        for t in out["types"].values():
            t.pop("cases")
    emit(dump_json(out), args.out)
    return EXIT_OK


def cmd_shortterm(args: argparse.Namespace) -> int:
    p = MyopicProblem(DecayParams(args.eta, args.t_half), args.D, args.C, args.horizon)
    d = optimal_wait(p)
    emit(dump_json(d.to_dict()), args.out)
    if args.curve_csv:
        write_csv(args.curve_csv, ("t", "g", "g_prime"), g_curve(p, args.points))
    return EXIT_OK


def cmd_oracle_check(args: argparse.Namespace) -> int:
    env = load_env(args.env)
    # both sides see the same candidates: the given times plus boundaries and t_end
    grid = grid_from_times(env, parse_times(args.times))
    _, _, j_oracle = brute_force_best(env, grid.times[1:])
    res = solve(env, SolverKind.DELTA_P, GridConfig(refine=False, max_span=float("inf")), solver_config(args), grid)
    gap = abs(res.J - j_oracle)
    print(f"oracle J {fmt(j_oracle)}  delta-p J {fmt(res.J)}  |diff| {gap:.3g}")
    return EXIT_OK if gap <= args.tol_check else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ckmsched", description="Update scheduling under decaying efficacy.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample a random environment")
    p.add_argument("--type", choices=["A", "B", "C"], default="C")
    p.add_argument("--segments", type=int, default=6)
    p.add_argument("--t-end", type=float, default=300.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spec", help="scenario spec JSON (overrides the flags above)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("solve", help="run Delta-P or Delta-L on an environment file")
    p.add_argument("env")
    p.add_argument("--solver", choices=[s.value for s in SolverKind], default="delta-l")
    p.add_argument("--times", help="explicit candidate times (comma separated) instead of the grid")
    p.add_argument("--out")
    p.add_argument("--trace-csv")
    p.add_argument("--trajectory-csv")
    p.add_argument("--trajectory-step", type=float, default=0.5)
    p.add_argument("--frontier-csv", help="sink frontier of the first grid; with incumbent pruning on it "
                   "holds only labels that can reach the first-pass J, use --no-incumbent-pruning "
                   "(and a coarser grid) for the whole frontier")
    p.add_argument("--dag-json")
    p.add_argument("--no-timing", action="store_true", help="omit wall-clock fields")
    add_grid_args(p)
    add_solver_args(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="solvers against static baselines")
    p.add_argument("env")
    p.add_argument("--policies", default=",".join(DEFAULT_POLICIES))
    p.add_argument("--no-inject", action="store_true", help="do not add baseline times to the grid")
    p.add_argument("--classify-tol", type=float, default=0.5)
    p.add_argument("--csv")
    p.add_argument("--out", help="JSON with schedules and per-segment actions")
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.add_argument("--no-timing", action="store_true")
    add_grid_args(p)
    add_solver_args(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("montecarlo", help="seeded study of J and action classes per type")
    p.add_argument("--types", default="A,B,C")
    p.add_argument("--n-cases", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--segments", type=int, default=6)
    p.add_argument("--t-end", type=float, default=300.0)
    p.add_argument("--solver", choices=[s.value for s in SolverKind], default="delta-l")
    p.add_argument("--classify-tol", type=float, default=0.5)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--keep-cases", action="store_true", help="include per-case records")
    p.add_argument("--out")
    add_grid_args(p)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("shortterm", help="myopic update-now-or-wait rule")
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--t-half", type=float, required=True)
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--D", type=float, required=True)
    p.add_argument("--horizon", type=float)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--curve-csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_shortterm)

    p = sub.add_parser("oracle-check", help="Delta-P against brute force on a small candidate set")
    p.add_argument("env")
    p.add_argument("--times", required=True)
    p.add_argument("--tol-check", type=float, default=1e-9)
    p.add_argument("--config")
    p.set_defaults(func=cmd_oracle_check)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, ScheduleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
