"""Candidate-time grid and the DAG of admissible completions with additive increments."""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._kernels import dag_edges
from .efficacy import TIME_TOL, integrate_efficacy
from .environment import Environment, cost_at, downtime_at
from .errors import BadGridSpec, InfeasibleEdge

# increments are rounded to this many decimals so dominance tests compare clean floats
INCREMENT_DECIMALS = 12
# dominance keys are multiples of 2**-KEY_BITS, so their float sums are exact and
# independent of summation order
KEY_BITS = 30


def dominance_key(x: np.ndarray) -> np.ndarray:
    return np.ldexp(np.round(np.ldexp(np.asarray(x, dtype=float), KEY_BITS)), -KEY_BITS)


@dataclass(frozen=True)
class GridConfig:
    """Candidate grid and pruning settings. Defaults follow the reference simulation setup."""

    coarse_step: float = 5.0
    fine_step: float = 0.25
    fine_window: float = 12.0
    refine: bool = True
    refine_window: float = 6.0
    refine_step: float = 0.2
    max_span: float = 90.0
    extra_times: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not (self.coarse_step > 0 and self.fine_step > 0 and self.refine_step > 0):
            raise BadGridSpec("grid steps must be > 0")
        if self.fine_window < 0 or self.refine_window < 0:
            raise BadGridSpec("grid windows must be >= 0")
        if not (self.max_span > 0):
            raise BadGridSpec("max_span must be > 0")

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["extra_times"] = list(self.extra_times)
        if math.isinf(self.max_span):
            d["max_span"] = None
        return d


@dataclass(frozen=True)
class CandidateGrid:
    times: tuple[float, ...]
    t_end: float

    def __len__(self) -> int:
        return len(self.times)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.times, dtype=float)


def _union(exact: np.ndarray, new: np.ndarray, t_end: float) -> np.ndarray:
    """Sorted union; ``exact`` values are kept verbatim, ``new`` values within TIME_TOL of
    an already-kept value are dropped."""
    exact = np.unique(np.asarray(exact, dtype=float))
    new = np.asarray(new, dtype=float)
    new = np.sort(new[(new >= 0.0) & (new <= t_end)])
    if new.size:
        pos = np.searchsorted(exact, new)
        left = np.abs(new - exact[np.maximum(pos - 1, 0)])
        right = np.abs(exact[np.minimum(pos, exact.size - 1)] - new)
        new = new[(left > TIME_TOL) & (right > TIME_TOL)]
    if new.size:
        keep = np.ones(new.size, dtype=bool)
        keep[1:] = np.diff(new) > TIME_TOL
        new = new[keep]
    return np.sort(np.concatenate([exact, new]))


def _window_points(anchors: Iterable[float], window: float, step: float) -> np.ndarray:
    k = int(math.floor(window / step + 1e-9))
    offsets = step * np.arange(-k, k + 1)
    pts = [a + offsets for a in anchors]
    return np.concatenate(pts) if pts else np.empty(0)


def build_candidate_times(
    env: Environment,
    coarse_step: float = 5.0,
    fine_step: float = 0.25,
    fine_window: float = 12.0,
    extra: Iterable[float] = (),
) -> CandidateGrid:
    if not (coarse_step > 0 and fine_step > 0) or fine_window < 0:
        raise BadGridSpec("steps must be > 0 and window >= 0")
    t_end = env.t_end
    anchors = [0.0, *env.boundaries, t_end]
    extra = [float(x) for x in extra if 0.0 <= x <= t_end]
    n_coarse = int(math.floor(t_end / coarse_step + 1e-9))
    coarse = coarse_step * np.arange(n_coarse + 1)
    fine = _window_points(anchors, fine_window, fine_step) if fine_window > 0 else np.empty(0)
    times = _union(np.asarray(anchors + extra), np.concatenate([coarse, fine]), t_end)
    return CandidateGrid(tuple(float(t) for t in times), t_end)


def refine_grid(grid: CandidateGrid, around: Iterable[float], window: float, step: float) -> CandidateGrid:
    if not (step > 0) or window < 0:
        raise BadGridSpec("refine step must be > 0 and window >= 0")
    around = list(around)
    if not around:
        return grid
    times = _union(grid.as_array(), _window_points(around, window, step), grid.t_end)
    return CandidateGrid(tuple(float(t) for t in times), grid.t_end)


def grid_from_times(env: Environment, times: Iterable[float]) -> CandidateGrid:
    """Explicit grid; 0, every boundary and t_end are always added."""
    anchors = [0.0, *env.boundaries, env.t_end]
    arr = _union(np.asarray(anchors), np.asarray(list(times), dtype=float), env.t_end)
    return CandidateGrid(tuple(float(t) for t in arr), env.t_end)


class EdgeKind(str, Enum):
    UPDATE = "update"
    TERMINAL = "terminal"


@dataclass(frozen=True)
class Edge:
    from_index: int
    to_index: int  # the sink is index n (one past the last grid vertex)
    kind: EdgeKind
    dF: float
    dG: float
    dC: float


def edge_increments(env: Environment, u: float, v: float, kind: EdgeKind) -> tuple[float, float, float]:
    """Scalar (dF, dG, dC) for a single edge, straight from ``integrate_efficacy``."""
    if kind is EdgeKind.TERMINAL:
        if abs(v - env.t_end) > TIME_TOL or u > env.t_end:
            raise InfeasibleEdge(f"terminal edge must end at t_end, got {u}->{v}")
        return integrate_efficacy(env, u, u, env.t_end), env.t_end - u, 0.0
    d = downtime_at(env, v)
    if not (v > u and v - u >= d - TIME_TOL):
        raise InfeasibleEdge(f"update edge {u}->{v} violates spacing D(v)={d}")
    b = max(u, v - d)
    return integrate_efficacy(env, u, u, b), b - u, cost_at(env, v)


@dataclass
class Dag:
    """Update edges are stored flat, sorted by (dst, src); ``in_ptr[v]:in_ptr[v+1]`` spans
    the in-edges of vertex v. Vertex 0 is the source (t = 0); index ``n`` is the sink.

    ``key_down`` and ``key_cost`` hold D(v) and C(v) of each update edge rounded to
    dyadic keys. A path's working time is t - (sum of downtimes), so two paths with
    equal key sums have equal (G, C) and can be compared without rounding noise.
    """

    times: np.ndarray
    t_end: float
    src: np.ndarray
    dst: np.ndarray
    dF: np.ndarray
    dG: np.ndarray
    dC: np.ndarray
    in_ptr: np.ndarray
    term_dF: np.ndarray
    term_dG: np.ndarray
    key_down: np.ndarray
    key_cost: np.ndarray

    @property
    def n(self) -> int:
        return self.times.size

    @property
    def sink(self) -> int:
        return self.n

    @property
    def num_update_edges(self) -> int:
        return self.src.size

    @property
    def num_edges(self) -> int:
        return self.src.size + self.n

    def terminal_edge_id(self, u: int) -> int:
        return self.num_update_edges + u

    def edge(self, eid: int) -> Edge:
        if eid >= self.num_update_edges:
            u = eid - self.num_update_edges
            return Edge(u, self.sink, EdgeKind.TERMINAL, float(self.term_dF[u]), float(self.term_dG[u]), 0.0)
        return Edge(int(self.src[eid]), int(self.dst[eid]), EdgeKind.UPDATE,
                    float(self.dF[eid]), float(self.dG[eid]), float(self.dC[eid]))

    def edges(self) -> Iterator[Edge]:
        for eid in range(self.num_edges):
            yield self.edge(eid)

    def update_pairs(self) -> set[tuple[int, int]]:
        return set(zip(self.src.tolist(), self.dst.tolist()))

    def to_dict(self) -> dict:
        return {
            "t_end": self.t_end,
            "vertices": self.times.tolist(),
            "edges": [
                {"from": e.from_index, "to": e.to_index, "kind": e.kind.value,
                 "dF": e.dF, "dG": e.dG, "dC": e.dC}
                for e in self.edges()
            ],
        }


def build_dag(
    env: Environment,
    grid: CandidateGrid,
    max_span: float = math.inf,
    allow_completion: Callable[[float], bool] | None = None,
) -> Dag:
    """Feasibility-filtered DAG; ``allow_completion`` can veto completion times."""
    times = grid.as_array()
    if times.size < 2 or times[0] != 0.0 or times[-1] != env.t_end:
        raise BadGridSpec("grid must start at 0 and end at t_end")
    n = times.size
    D = np.array([downtime_at(env, t) for t in times])
    cost = np.array([cost_at(env, t) for t in times])
    allowed = np.ones(n, dtype=bool)
    if allow_completion is not None:
        allowed = np.array([bool(allow_completion(t)) for t in times])
    allowed[0] = False

    segs = env.segments
    src, dst, dF, dG, dC, down, term_dF = dag_edges(
        times, D, cost, allowed, float(max_span), TIME_TOL,
        np.array([s.start for s in segs]), np.array([s.end for s in segs]),
        np.array([s.decay.eta for s in segs]), np.array([s.decay.lam for s in segs]),
        np.array([s.entry_shock for s in segs]))
    dF, dG, dC = (np.round(x, INCREMENT_DECIMALS) for x in (dF, dG, dC))
    in_ptr = np.searchsorted(dst, np.arange(n + 1))
    term_dF = np.round(term_dF, INCREMENT_DECIMALS)
    term_dG = np.round(env.t_end - times, INCREMENT_DECIMALS)
    return Dag(times, env.t_end, src.astype(np.int64), dst.astype(np.int64), dF, dG, dC,
               in_ptr.astype(np.int64), term_dF, term_dG, dominance_key(down), dominance_key(dC))


def build_dag_for(env: Environment, cfg: GridConfig) -> tuple[CandidateGrid, Dag]:
    grid = build_candidate_times(env, cfg.coarse_step, cfg.fine_step, cfg.fine_window, cfg.extra_times)
    return grid, build_dag(env, grid, cfg.max_span)
