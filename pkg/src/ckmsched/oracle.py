"""Brute-force ground truth over every feasible subset of a small candidate set.

Deliberately unoptimised: subsets are generated by size with ``itertools.combinations``
and each one is checked with ``validate_schedule`` and scored with ``schedule_stats``.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Iterator

from .efficacy import G_FLOOR_FRACTION, PathStats, Schedule, is_feasible, schedule_stats
from .environment import Environment
from .errors import TooManyCandidates

MAX_CANDIDATES = 20


def _prepare(candidates: Iterable[float]) -> list[float]:
    cands = sorted(set(float(c) for c in candidates))
    if len(cands) > MAX_CANDIDATES:
        raise TooManyCandidates(f"{len(cands)} candidates exceeds the cap of {MAX_CANDIDATES}")
    return cands


def enumerate_feasible(env: Environment, candidates: Iterable[float]) -> Iterator[Schedule]:
    """Every feasible subset (the empty schedule first), lazily."""
    cands = _prepare(candidates)
    for k in range(len(cands) + 1):
        for combo in itertools.combinations(cands, k):
            s = Schedule(combo)
            if is_feasible(env, s):
                yield s


def brute_force_best(env: Environment, candidates: Iterable[float]) -> tuple[Schedule, PathStats, float]:
    """argmax J; ties prefer smaller C, then larger G, then the first schedule enumerated.

    Schedules whose working time falls below the objective's floor are skipped.
    """
    floor = G_FLOOR_FRACTION * env.t_end
    best: tuple[Schedule, PathStats, float] | None = None
    for s in enumerate_feasible(env, candidates):
        stats = schedule_stats(env, s)
        if stats.G < floor:
            continue
        j = stats.F / stats.G - stats.C / env.t_end
        if best is None or (j, -stats.C, stats.G) > (best[2], -best[1].C, best[1].G):
            best = (s, stats, j)
    assert best is not None  # the empty schedule always has G = t_end
    return best


def count_feasible_recursive(env: Environment, candidates: Iterable[float]) -> int:
    """Independent count: extend a feasible prefix by every later candidate."""
    cands = _prepare(candidates)

    def extend(prefix: tuple[float, ...], start: int) -> int:
        total = 1
        for i in range(start, len(cands)):
            s = prefix + (cands[i],)
            if is_feasible(env, Schedule(s)):
                total += extend(s, i + 1)
        return total

    return extend((), 0)
