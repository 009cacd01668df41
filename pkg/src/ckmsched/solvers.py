"""Two-parameter Dinkelbach schemes for max J = F/G - C/H.

Delta-P solves each parametric subproblem exactly by selecting from a Pareto frontier
built once per grid. Delta-L linearises the G*C product around the current iterate
(first-order Taylor) so each inner step is a single-weight longest path on the DAG.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._kernels import longest_path_dp, tl_longest_path as _tl_longest_path
from .dag import CandidateGrid, Dag, Edge, EdgeKind, GridConfig, build_candidate_times, build_dag, refine_grid
from .efficacy import G_FLOOR_FRACTION, PathStats, Schedule
from .environment import Environment
from .errors import BadParam
from .pareto import IncumbentBound, ParetoResult, pareto_frontier_dp, score, select_best


class SolverKind(str, Enum):
    DELTA_P = "delta-p"
    DELTA_L = "delta-l"


@dataclass(frozen=True)
class DinkelbachConfig:
    tol: float = 1e-6
    max_iter: int = 60
    inner_tol: float = 1e-6
    inner_max: int = 25
    eps_dominance: float = 0.0
    # stop when consecutive J values agree to this absolute tolerance
    j_tol: float = 1e-12
    # initial (lambda, mu) from the best static baseline instead of (0, 0)
    warm_start: bool = False
    # Delta-P: discard labels that provably cannot beat an incumbent schedule
    incumbent_pruning: bool = True
    max_labels: int | None = None

    def __post_init__(self) -> None:
        if not (self.tol > 0 and self.inner_tol > 0):
            raise BadParam("tolerances must be > 0")
        if self.max_iter < 1 or self.inner_max < 1:
            raise BadParam("iteration caps must be >= 1")
        if self.eps_dominance < 0:
            raise BadParam("eps_dominance must be >= 0")


@dataclass(frozen=True)
class TraceEntry:
    lam: float
    mu: float
    residual: float
    J: float
    phase: int = 0  # 0: first grid, 1: after refine-and-resolve
    inner_iters: int = 0

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "mu": self.mu, "residual": self.residual, "J": self.J,
                "phase": self.phase, "inner_iters": self.inner_iters}


@dataclass
class SolveResult:
    schedule: Schedule
    stats: PathStats
    J: float
    trace: list[TraceEntry]
    wall_time: float
    solver: SolverKind
    stalled: bool = False
    refined: bool = False  # True when the refined grid produced the returned schedule
    grid_sizes: list[int] = field(default_factory=list)
    edge_counts: list[int] = field(default_factory=list)

    @property
    def residual(self) -> float:
        return self.trace[-1].residual if self.trace else float("nan")

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "solver": self.solver.value,
            "schedule": list(self.schedule.completions),
            "stats": self.stats.to_dict(),
            "J": self.J,
            "stalled": self.stalled,
            "refined": self.refined,
            "grid_sizes": self.grid_sizes,
            "edge_counts": self.edge_counts,
            "trace": [t.to_dict() for t in self.trace],
        }
        if timing:
            d["wall_time"] = round(self.wall_time, 3)
        return d

    def to_json(self, timing: bool = True, **kwargs) -> str:
        return json.dumps(self.to_dict(timing), **kwargs)


def phi(stats: PathStats, H: float, lam: float, mu: float) -> float:
    """Dinkelbach residual H (F - lam G) - G (C - mu H)."""
    return H * (stats.F - lam * stats.G) - stats.G * (stats.C - mu * H)


def j_of(stats: PathStats, H: float) -> float:
    return stats.F / stats.G - stats.C / H


# ---------------------------------------------------------------------------
# Single-weight longest path (Delta-L inner step)


def tl_edge_weight(edge: Edge, H: float, lam: float, mu: float, G_k: float, C_k: float) -> float:
    return H * edge.dF - (C_k + (lam - mu) * H) * edge.dG - G_k * edge.dC


def tl_weights(dag: Dag, H: float, lam: float, mu: float, G_k: float, C_k: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``tl_edge_weight`` for (update edges, terminal edges)."""
    slope = C_k + (lam - mu) * H
    w = H * dag.dF - slope * dag.dG - G_k * dag.dC
    w_term = H * dag.term_dF - slope * dag.term_dG
    return w, w_term


@dataclass(frozen=True)
class Path:
    """Edge ids from source to sink (the last one is the terminal edge)."""

    edges: tuple[int, ...]
    value: float

    def schedule(self, dag: Dag) -> Schedule:
        return Schedule(tuple(float(dag.times[dag.dst[e]]) for e in self.edges[:-1]))

    def stats(self, dag: Dag) -> PathStats:
        F = G = C = 0.0
        for e in self.edges[:-1]:
            F += dag.dF[e]
            G += dag.dG[e]
            C += dag.dC[e]
        u = self.edges[-1] - dag.num_update_edges
        return PathStats(float(F + dag.term_dF[u]), float(G + dag.term_dG[u]), float(C))


def longest_path(dag: Dag, w: np.ndarray, w_term: np.ndarray) -> Path:
    """Exact max-weight source-to-sink path; ties go to the earlier predecessor vertex."""
    dp, pred = longest_path_dp(dag.n, dag.src, dag.in_ptr, w, w_term)
    return _trace_back(dag, dp + w_term, pred)


def tl_longest_path(dag: Dag, H: float, lam: float, mu: float, G_k: float, C_k: float) -> Path:
    """``longest_path`` under ``tl_weights`` without materialising the weights."""
    final, pred = _tl_longest_path(dag.n, dag.src, dag.in_ptr, dag.dF, dag.dG, dag.dC,
                                   dag.term_dF, dag.term_dG, H, C_k + (lam - mu) * H, G_k)
    return _trace_back(dag, final, pred)


def _trace_back(dag: Dag, final: np.ndarray, pred: np.ndarray) -> Path:
    src = dag.src
    u = int(np.argmax(final))
    edges = [dag.terminal_edge_id(u)]
    while u != 0:
        e = int(pred[u])
        edges.append(e)
        u = int(src[e])
    return Path(tuple(reversed(edges)), float(final.max()))


# ---------------------------------------------------------------------------
# Outer loops on a fixed DAG


@dataclass
class _Pass:
    schedule: Schedule
    stats: PathStats
    J: float
    trace: list[TraceEntry]
    stalled: bool = False


def _dinkelbach_frontier(front: ParetoResult, H: float, cfg: DinkelbachConfig,
                         lam: float, mu: float, phase: int) -> _Pass:
    sink = front.sink
    g_floor = G_FLOOR_FRACTION * H
    trace: list[TraceEntry] = []
    prev_index = None
    prev_J = None
    stalled = False
    for _ in range(cfg.max_iter):
        lab = select_best(sink, lam, mu, H, g_floor)
        r = score(lab.stats, lam, mu, H)
        J = j_of(lab.stats, H)
        trace.append(TraceEntry(lam, mu, r, J, phase))
        if abs(r) < cfg.tol:
            break
        if prev_index == lab.index:
            stalled = True
            break
        if prev_J is not None and abs(J - prev_J) < cfg.j_tol:
            break
        prev_index, prev_J = lab.index, J
        lam, mu = lab.stats.F / lab.stats.G, lab.stats.C / H
    return _Pass(front.recover(lab), lab.stats, J, trace, stalled)


def _dinkelbach_tl(dag: Dag, H: float, cfg: DinkelbachConfig, lam: float, mu: float, phase: int) -> _Pass:
    trace: list[TraceEntry] = []
    prev: tuple[Path, PathStats] | None = None
    for _ in range(cfg.max_iter):
        G_k = C_k = 0.0
        last: Path | None = None
        last_phi = None
        best: tuple[float, Path, PathStats] | None = None
        inner = 0
        for inner in range(1, cfg.inner_max + 1):
            path = tl_longest_path(dag, H, lam, mu, G_k, C_k)
            stats = path.stats(dag)
            ph = phi(stats, H, lam, mu)
            if best is None or ph > best[0]:
                best = (ph, path, stats)
            if last is not None and (path.edges == last.edges or abs(ph - last_phi) < cfg.inner_tol):
                break
            last, last_phi = path, ph
            G_k, C_k = stats.G, stats.C
        _, path, stats = best
        # an inexact inner step may fail to ascend; the previous iterate has residual 0
        if prev is not None and phi(stats, H, lam, mu) <= phi(prev[1], H, lam, mu):
            path, stats = prev
        r = phi(stats, H, lam, mu)
        J = j_of(stats, H)
        trace.append(TraceEntry(lam, mu, r, J, phase, inner))
        if abs(r) < cfg.tol:
            break
        if prev is not None and abs(J - trace[-2].J) < cfg.j_tol:
            break
        prev = (path, stats)
        lam, mu = stats.F / stats.G, stats.C / H
    return _Pass(path.schedule(dag), stats, J, trace)


def _initial_params(env: Environment, cfg: DinkelbachConfig) -> tuple[float, float]:
    if not cfg.warm_start:
        return 0.0, 0.0
    from .baselines import best_baseline

    _, stats, _ = best_baseline(env)
    return stats.F / stats.G, stats.C / env.t_end


def _solve_on_grid(env: Environment, grid: CandidateGrid, max_span: float, solver: SolverKind,
                   cfg: DinkelbachConfig, phase: int,
                   incumbent: float | None) -> tuple[_Pass, Dag, _Pass | None]:
    """Solve on one grid. Delta-P also returns the Delta-L pass it used as incumbent."""
    H = env.t_end
    dag = build_dag(env, grid, max_span)
    lam, mu = _initial_params(env, cfg)
    if solver is SolverKind.DELTA_L:
        return _dinkelbach_tl(dag, H, cfg, lam, mu, phase), dag, None
    bound = tl = None
    if cfg.incumbent_pruning:
        # a Delta-L pass on the same DAG supplies a feasible incumbent
        tl = _dinkelbach_tl(dag, H, cfg, lam, mu, phase)
        j_lb = tl.J if incumbent is None else max(tl.J, incumbent)
        bound = IncumbentBound.build(dag, H, j_lb)
    front = pareto_frontier_dp(dag, cfg.eps_dominance, cfg.max_labels, bound)
    return _dinkelbach_frontier(front, H, cfg, lam, mu, phase), dag, tl


def solve(env: Environment, solver: SolverKind | str, grid_cfg: GridConfig | None = None,
          cfg: DinkelbachConfig | None = None, grid: CandidateGrid | None = None) -> SolveResult:
    """Run Delta-P or Delta-L with one optional refine-and-resolve pass.

    ``grid`` overrides the grid built from ``grid_cfg``.
    """
    solver = SolverKind(solver)
    grid_cfg = grid_cfg or GridConfig()
    cfg = cfg or DinkelbachConfig()
    t0 = time.perf_counter()
    if grid is None:
        grid = build_candidate_times(env, grid_cfg.coarse_step, grid_cfg.fine_step,
                                     grid_cfg.fine_window, grid_cfg.extra_times)
    first, dag, tl = _solve_on_grid(env, grid, grid_cfg.max_span, solver, cfg, 0, None)
    grid_sizes, edge_counts = [len(grid)], [dag.num_update_edges]
    best, refined, trace = first, False, list(first.trace)
    around = list(first.schedule.completions)
    if tl is not None:
        # Delta-P also refines around the Delta-L completions, so its refined grid
        # contains the one Delta-L would build and J(Delta-P) >= J(Delta-L) holds
        around += tl.schedule.completions
    if grid_cfg.refine and around:
        fine = refine_grid(grid, sorted(set(around)), grid_cfg.refine_window, grid_cfg.refine_step)
        if len(fine) > len(grid):
            second, dag2, _ = _solve_on_grid(env, fine, grid_cfg.max_span, solver, cfg, 1, first.J)
            grid_sizes.append(len(fine))
            edge_counts.append(dag2.num_update_edges)
            trace += second.trace
            if second.J > first.J:
                best, refined = second, True
    wall = time.perf_counter() - t0
    return SolveResult(best.schedule, best.stats, best.J, trace, wall, solver,
                       stalled=first.stalled or best.stalled, refined=refined,
                       grid_sizes=grid_sizes, edge_counts=edge_counts)


def delta_p(env: Environment, grid_cfg: GridConfig | None = None, cfg: DinkelbachConfig | None = None,
            grid: CandidateGrid | None = None) -> SolveResult:
    return solve(env, SolverKind.DELTA_P, grid_cfg, cfg, grid)


def delta_l(env: Environment, grid_cfg: GridConfig | None = None, cfg: DinkelbachConfig | None = None,
            grid: CandidateGrid | None = None) -> SolveResult:
    return solve(env, SolverKind.DELTA_L, grid_cfg, cfg, grid)
