"""Map efficacy f(t), its closed-form integral, schedule statistics and the objective J."""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass

import numpy as np

from .environment import Environment, Segment, cost_at, downtime_at, segment_index_at
from .errors import BadInterval, InfeasibleSchedule, OutOfHorizon, ZeroWorkingTime

# absolute tolerance (minutes) for feasibility ties
TIME_TOL = 1e-9
# objective_J refuses working time below this fraction of the horizon
G_FLOOR_FRACTION = 1e-9


@dataclass(frozen=True)
class Schedule:
    """Strictly increasing completion times (minutes)."""

    completions: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "completions", tuple(float(c) for c in self.completions))

    def __len__(self) -> int:
        return len(self.completions)

    def __iter__(self):
        return iter(self.completions)

    def to_json(self) -> str:
        return json.dumps(list(self.completions))

    @classmethod
    def from_json(cls, text: str) -> Schedule:
        data = json.loads(text)
        if not isinstance(data, list):
            raise InfeasibleSchedule("a schedule document must be a JSON array of times")
        return cls(tuple(float(x) for x in data))


@dataclass(frozen=True)
class PathStats:
    """Additive triple: efficacy integral F, working time G, total update cost C."""

    F: float = 0.0
    G: float = 0.0
    C: float = 0.0

    def __add__(self, other: PathStats) -> PathStats:
        return PathStats(self.F + other.F, self.G + other.G, self.C + other.C)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.F, self.G, self.C)

    def to_dict(self) -> dict:
        return {"F": self.F, "G": self.G, "C": self.C}


@dataclass(frozen=True)
class Violation:
    kind: str  # "order" | "horizon" | "first_downtime" | "spacing"
    index: int
    detail: str


def validate_schedule(env: Environment, schedule: Schedule) -> list[Violation]:
    """Return every violated constraint; an empty list means feasible."""
    out: list[Violation] = []
    cs = schedule.completions
    for m, c in enumerate(cs):
        if not (0.0 <= c <= env.t_end):
            out.append(Violation("horizon", m, f"c={c} outside [0, {env.t_end}]"))
    if out:
        return out
    for m, c in enumerate(cs):
        d = downtime_at(env, c)
        if m == 0:
            if c < d - TIME_TOL:
                out.append(Violation("first_downtime", 0, f"c_1={c} < D(c_1)={d}"))
            continue
        gap = c - cs[m - 1]
        if gap <= 0.0:
            out.append(Violation("order", m, f"c_{m + 1}={c} not after c_{m}={cs[m - 1]}"))
        elif gap < d - TIME_TOL:
            out.append(Violation("spacing", m, f"gap {gap} < D(c_{m + 1})={d}"))
    return out


def is_feasible(env: Environment, schedule: Schedule) -> bool:
    return not validate_schedule(env, schedule)


def _require_feasible(env: Environment, schedule: Schedule) -> None:
    bad = validate_schedule(env, schedule)
    if bad:
        raise InfeasibleSchedule("; ".join(f"{v.kind}@{v.index}: {v.detail}" for v in bad))


def entry_loss(env: Environment, t_last: float, t: float) -> float:
    """Product of entry shocks over boundaries tau with t_last < tau <= t."""
    if not (0.0 <= t_last <= t <= env.t_end):
        raise OutOfHorizon(f"need 0 <= t_last={t_last} <= t={t} <= {env.t_end}")
    starts = env._starts
    lo = bisect.bisect_right(starts, t_last)
    hi = bisect.bisect_right(starts, t)
    loss = 1.0
    for seg in env.segments[lo:hi]:
        loss *= seg.entry_shock
    return loss


def _piece(seg: Segment, t_last: float, a: float, b: float) -> float:
    # integral of E_seg(t - t_last) over [a, b], no loss factor
    width = b - a
    if width <= 0.0:
        return 0.0
    eta, lam = seg.decay.eta, seg.decay.lam
    if lam == 0.0:
        return width
    return eta * width + (1.0 - eta) * math.exp(-lam * (a - t_last)) * (-math.expm1(-lam * width)) / lam


def integrate_efficacy(env: Environment, t_last: float, a: float, b: float) -> float:
    """Exact integral of L(t; t_last) * E_j(t)(t - t_last) over [a, b].

    The caller guarantees [a, b] holds no downtime.
    """
    if not (0.0 <= t_last <= a <= b <= env.t_end):
        raise BadInterval(f"need 0 <= t_last={t_last} <= a={a} <= b={b} <= {env.t_end}")
    if a == b:
        return 0.0
    j = segment_index_at(env, a)
    loss = entry_loss(env, t_last, a)
    total = 0.0
    x = a
    while True:
        seg = env.segments[j]
        hi = min(b, seg.end)
        total += loss * _piece(seg, t_last, x, hi)
        if hi >= b or j + 1 >= env.num_segments:
            break
        j += 1
        loss *= env.segments[j].entry_shock
        x = hi
    return total


def integrate_from(env: Environment, u: float, ends: np.ndarray) -> np.ndarray:
    """Vectorised ``integrate_efficacy(env, u, u, b)`` for every b in ``ends`` (all >= u)."""
    ends = np.asarray(ends, dtype=float)
    out = np.zeros_like(ends)
    if ends.size == 0:
        return out
    starts = np.asarray(env._starts)
    jb = np.minimum(np.searchsorted(starts, ends, side="right") - 1, env.num_segments - 1)
    ju = segment_index_at(env, u)
    cum = 0.0
    loss = 1.0
    last_needed = int(jb.max())
    for k in range(ju, last_needed + 1):
        seg = env.segments[k]
        if k > ju:
            loss *= seg.entry_shock
        lo = max(u, seg.start)
        mask = jb == k
        if mask.any():
            b = np.maximum(ends[mask], lo)
            width = b - lo
            eta, lam = seg.decay.eta, seg.decay.lam
            if lam == 0.0:
                piece = width
            else:
                piece = eta * width + (1.0 - eta) * math.exp(-lam * (lo - u)) * (-np.expm1(-lam * width)) / lam
            out[mask] = cum + loss * piece
        if k < last_needed:
            cum += loss * _piece(seg, u, lo, seg.end)
    return out


def working_intervals(env: Environment, schedule: Schedule) -> list[tuple[float, float, float]]:
    """(t_last, start, end) for each maximal working interval, in time order."""
    out = []
    prev = 0.0
    for c in schedule.completions:
        end = max(prev, c - downtime_at(env, c))
        out.append((prev, prev, end))
        prev = c
    out.append((prev, prev, env.t_end))
    return out


def efficacy_at(env: Environment, schedule: Schedule, t: float) -> float:
    _require_feasible(env, schedule)
    if not (0.0 <= t <= env.t_end):
        raise OutOfHorizon(f"t={t} outside [0, {env.t_end}]")
    t_last = 0.0
    for c in schedule.completions:
        if c - downtime_at(env, c) <= t < c:
            return 0.0
        if c <= t:
            t_last = c
    seg = env.segments[segment_index_at(env, t)]
    return entry_loss(env, t_last, t) * seg.decay.value(t - t_last)


def schedule_stats(env: Environment, schedule: Schedule) -> PathStats:
    _require_feasible(env, schedule)
    F = 0.0
    for t_last, a, b in working_intervals(env, schedule):
        F += integrate_efficacy(env, t_last, a, b)
    G = env.t_end - sum(downtime_at(env, c) for c in schedule.completions)
    C = sum(cost_at(env, c) for c in schedule.completions)
    return PathStats(F, G, C)


def objective_J(stats: PathStats, H: float) -> float:
    """F/G - C/H."""
    if not (H > 0.0):
        raise ZeroWorkingTime(f"horizon must be > 0, got {H}")
    if stats.G < G_FLOOR_FRACTION * H:
        raise ZeroWorkingTime(f"working time {stats.G} below floor")
    return stats.F / stats.G - stats.C / H


def evaluate(env: Environment, schedule: Schedule) -> tuple[PathStats, float]:
    stats = schedule_stats(env, schedule)
    return stats, objective_J(stats, env.t_end)


def trajectory(env: Environment, schedule: Schedule, step: float) -> list[tuple[float, float, int, int]]:
    """Rows (t, f, in_downtime, segment_index) sampled every ``step`` minutes."""
    if not (step > 0.0):
        raise BadInterval("step must be > 0")
    _require_feasible(env, schedule)
    n = int(math.floor(env.t_end / step + 1e-9))
    rows = []
    for i in range(n + 1):
        t = min(i * step, env.t_end)
        down = any(c - downtime_at(env, c) <= t < c for c in schedule.completions)
        rows.append((t, efficacy_at(env, schedule, t), int(down), segment_index_at(env, t)))
    return rows
