"""Static reference policies and per-segment action classification."""

from __future__ import annotations

import math
from enum import Enum

from .efficacy import TIME_TOL, PathStats, Schedule, evaluate
from .environment import Environment, downtime_at, segment_index_at
from .errors import BadPeriod

# default tolerance (minutes) for "the update begins at segment entry"
CLASSIFY_TOL = 0.5


class ActionClass(str, Enum):
    ZERO_WAIT = "ZeroWait"
    DELAYED = "Delayed"
    NO_UPDATE = "NoUpdate"


def _keep_feasible(env: Environment, times: list[float]) -> Schedule:
    # greedy left-to-right filter: drop any completion that breaks spacing
    out: list[float] = []
    for c in times:
        if not (0.0 <= c <= env.t_end):
            continue
        d = downtime_at(env, c)
        prev = out[-1] if out else 0.0
        if c - prev >= d - TIME_TOL and c > prev:
            out.append(c)
    return Schedule(tuple(out))


def zero_wait_completion(env: Environment, tau: float) -> float | None:
    """Completion c = tau + D(c) for an update starting at boundary tau.

    Segments from the one starting at tau onward are tried in turn; None when no
    fixed point lies within the horizon.
    """
    j0 = segment_index_at(env, tau)
    for j in range(j0, env.num_segments):
        c = tau + env.segments[j].downtime
        if c > env.t_end:
            return None
        if segment_index_at(env, c) == j:
            return c
    return None


def zero_wait_schedule(env: Environment) -> Schedule:
    """Start an update at every segment entry after t = 0 (the map starts fresh)."""
    times = [c for tau in env.boundaries if (c := zero_wait_completion(env, tau)) is not None]
    return _keep_feasible(env, times)


def fixed_interval_schedule(env: Environment, period: float) -> Schedule:
    if not (period > 0.0) or math.isinf(period):
        raise BadPeriod(f"period must be a positive finite number, got {period}")
    k = int(math.floor(env.t_end / period + 1e-9))
    times = [min(i * period, env.t_end) for i in range(1, k + 1)]
    return _keep_feasible(env, times)


def classify_actions(env: Environment, schedule: Schedule, tol: float = CLASSIFY_TOL) -> list[ActionClass]:
    """One label per segment from where each update's downtime begins."""
    out = [ActionClass.NO_UPDATE] * env.num_segments
    for c in schedule.completions:
        start = c - downtime_at(env, c)
        j = segment_index_at(env, max(start, 0.0))
        seg = env.segments[j]
        if start <= seg.start + tol and start >= seg.start - TIME_TOL:
            out[j] = ActionClass.ZERO_WAIT
        elif out[j] is ActionClass.NO_UPDATE:
            out[j] = ActionClass.DELAYED
    return out


BASELINE_PERIODS = (10.0, 25.0)


def baseline_schedules(env: Environment, periods: tuple[float, ...] = BASELINE_PERIODS) -> dict[str, Schedule]:
    out = {"zero-wait": zero_wait_schedule(env)}
    for p in periods:
        out[f"fixed-{p:g}m"] = fixed_interval_schedule(env, p)
    return out


def best_baseline(env: Environment) -> tuple[Schedule, PathStats, float]:
    """Best of the static baselines and the empty schedule, by J."""
    cands = [Schedule(), *baseline_schedules(env).values()]
    best = None
    for s in cands:
        stats, j = evaluate(env, s)
        if best is None or j > best[2]:
            best = (s, stats, j)
    return best
