"""Policy comparison on one environment and seeded Monte-Carlo studies."""

from __future__ import annotations

import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import CLASSIFY_TOL, ActionClass, baseline_schedules, classify_actions
from .dag import GridConfig
from .efficacy import PathStats, Schedule, evaluate
from .environment import EnvType, Environment, ScenarioSpec, sample_environment
from .errors import BadSpec
from .solvers import DinkelbachConfig, SolverKind, solve

SOLVER_POLICIES = ("delta-p", "delta-l")
DEFAULT_POLICIES = ("delta-p", "delta-l", "zero-wait", "fixed-10m", "fixed-25m")


@dataclass
class PolicyRow:
    strategy: str
    schedule: Schedule
    stats: PathStats
    J: float
    compute_seconds: float
    actions: list[ActionClass]
    stalled: bool = False

    def csv_fields(self) -> list:
        return [self.strategy, self.stats.F, self.stats.G, self.stats.C, self.J, self.compute_seconds]

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "strategy": self.strategy,
            "efficacy": self.stats.F,
            "work_time": self.stats.G,
            "update_cost": self.stats.C,
            "objective": self.J,
            "schedule": list(self.schedule.completions),
            "actions": [a.value for a in self.actions],
        }
        if timing:
            d["compute_seconds"] = self.compute_seconds
        return d


COMPARE_COLUMNS = ("strategy", "efficacy", "work_time", "update_cost", "objective", "compute_seconds")


def _parse_period(name: str) -> float | None:
    if name.startswith("fixed-") and name.endswith("m"):
        try:
            return float(name[len("fixed-"):-1])
        except ValueError:
            return None
    return None


def baseline_for(env: Environment, name: str) -> Schedule:
    from .baselines import fixed_interval_schedule, zero_wait_schedule

    if name == "zero-wait":
        return zero_wait_schedule(env)
    period = _parse_period(name)
    if period is None:
        raise BadSpec(f"unknown policy {name!r}")
    return fixed_interval_schedule(env, period)


def with_baseline_candidates(env: Environment, grid_cfg: GridConfig,
                             names: tuple[str, ...] = ("zero-wait", "fixed-10m", "fixed-25m")) -> GridConfig:
    """Grid config whose extra candidates include every completion of the named baselines."""
    extra = set(grid_cfg.extra_times)
    for name in names:
        extra.update(baseline_for(env, name).completions)
    return replace(grid_cfg, extra_times=tuple(sorted(extra)))


def compare(env: Environment, policies: tuple[str, ...] = DEFAULT_POLICIES,
            grid_cfg: GridConfig | None = None, cfg: DinkelbachConfig | None = None,
            inject_baselines: bool = True, classify_tol: float = CLASSIFY_TOL) -> list[PolicyRow]:
    """One row per policy. Solver grids get the baseline completions as extra candidates
    (when ``inject_baselines``), so the solvers optimise over a superset of them."""
    grid_cfg = grid_cfg or GridConfig()
    if inject_baselines:
        grid_cfg = with_baseline_candidates(env, grid_cfg)
    rows = []
    for name in policies:
        if name in SOLVER_POLICIES:
            res = solve(env, SolverKind(name), grid_cfg, cfg)
            sched, stats, j, secs, stalled = res.schedule, res.stats, res.J, res.wall_time, res.stalled
            # report stats evaluated from the schedule itself, not the DAG sums
            stats, j = evaluate(env, sched)
        else:
            t0 = time.perf_counter()
            sched = baseline_for(env, name)
            stats, j = evaluate(env, sched)
            secs, stalled = time.perf_counter() - t0, False
        rows.append(PolicyRow(name, sched, stats, j, secs, classify_actions(env, sched, classify_tol), stalled))
    return rows


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class MonteCarloConfig:
    env_types: tuple[str, ...] = ("A", "B", "C")
    n_cases: int = 100
    seed: int = 0
    num_segments: int = 6
    t_end: float = 300.0
    # the policy whose schedules are classified per segment
    solver: str = "delta-l"
    policies: tuple[str, ...] = ("delta-l", "zero-wait", "fixed-10m", "fixed-25m")
    classify_tol: float = CLASSIFY_TOL
    grid: GridConfig = field(default_factory=GridConfig)
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.n_cases < 1:
            raise BadSpec("n_cases must be >= 1")
        for t in self.env_types:
            EnvType(t)
        if self.solver not in SOLVER_POLICIES:
            raise BadSpec(f"solver must be one of {SOLVER_POLICIES}")
        if self.jobs < 1:
            raise BadSpec("jobs must be >= 1")


def case_seeds(seed: int, n: int) -> list[int]:
    """Independent per-case seeds derived from one master seed."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n, dtype=np.uint32)]


def _run_case(args: tuple) -> dict:
    env_type, case_seed, mc = args
    env = sample_environment(ScenarioSpec(EnvType(env_type), mc.num_segments, mc.t_end, case_seed))
    policies = tuple(dict.fromkeys((mc.solver, *mc.policies)))
    rows = {r.strategy: r for r in compare(env, policies, mc.grid, classify_tol=mc.classify_tol)}
    return {
        "seed": case_seed,
        "J": {name: rows[name].J for name in mc.policies},
        "actions": [a.value for a in rows[mc.solver].actions],
        "num_updates": len(rows[mc.solver].schedule),
    }


def monte_carlo(mc: MonteCarloConfig) -> dict:
    """Aggregate J statistics and per-segment action frequencies for each environment type.

    Output depends only on the config (cases are collected in submission order).
    """
    out: dict = {"config": {"env_types": list(mc.env_types), "n_cases": mc.n_cases, "seed": mc.seed,
                            "num_segments": mc.num_segments, "t_end": mc.t_end, "solver": mc.solver,
                            "policies": list(mc.policies), "classify_tol": mc.classify_tol,
                            "grid": mc.grid.to_dict()},
                 "types": {}}
    for k, env_type in enumerate(mc.env_types):
        seeds = case_seeds(mc.seed * 1000 + k, mc.n_cases)
        tasks = [(env_type, s, mc) for s in seeds]
        if mc.jobs > 1:
            with ProcessPoolExecutor(max_workers=mc.jobs) as pool:
                cases = list(pool.map(_run_case, tasks))
        else:
            cases = [_run_case(t) for t in tasks]
        counts = Counter(a for c in cases for a in c["actions"])
        n_labels = sum(counts.values())
        js = {p: np.array([c["J"][p] for c in cases]) for p in mc.policies}
        out["types"][env_type] = {
            "J": {p: {"mean": float(v.mean()), "std": float(v.std())} for p, v in js.items()},
            "action_counts": {a.value: counts.get(a.value, 0) for a in ActionClass},
            "action_frequency": {a.value: counts.get(a.value, 0) / n_labels for a in ActionClass},
            "mean_updates": float(np.mean([c["num_updates"] for c in cases])),
            "cases": cases,
        }
    return out
