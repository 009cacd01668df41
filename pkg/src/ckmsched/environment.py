"""Piecewise environment: segments with exponential-to-floor decay, entry shocks
and per-segment update overheads (downtime, cost)."""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import BadBounds, BadParam, BadSpec, GapOrOverlap, OutOfHorizon

LN2 = math.log(2.0)

# minimum sampled segment length as a fraction of the horizon
MIN_SEGMENT_FRACTION = 0.05


@dataclass(frozen=True)
class DecayParams:
    """E(s) = eta + (1 - eta) * exp(-lam * s) with lam = ln 2 / t_half.

    ``t_half = math.inf`` is accepted and gives a constant (non-decaying) map.
    """

    eta: float
    t_half: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.eta < 1.0):
            raise BadParam(f"eta must lie in [0, 1), got {self.eta}")
        if not (self.t_half > 0.0):
            raise BadParam(f"t_half must be > 0, got {self.t_half}")

    @property
    def lam(self) -> float:
        return LN2 / self.t_half

    def value(self, age: float) -> float:
        return self.eta + (1.0 - self.eta) * math.exp(-self.lam * age)


@dataclass(frozen=True)
class Segment:
    start: float
    end: float
    decay: DecayParams
    entry_shock: float = 1.0
    downtime: float = 1.0
    cost: float = 0.0

    def __post_init__(self) -> None:
        if not (self.start < self.end):
            raise BadBounds(f"segment start {self.start} must be < end {self.end}")
        if not (0.0 < self.entry_shock <= 1.0):
            raise BadParam(f"entry_shock must lie in (0, 1], got {self.entry_shock}")
        if not (self.downtime > 0.0):
            raise BadParam(f"downtime must be > 0, got {self.downtime}")
        if not (self.cost >= 0.0):
            raise BadParam(f"cost must be >= 0, got {self.cost}")

    @property
    def eta(self) -> float:
        return self.decay.eta

    @property
    def lam(self) -> float:
        return self.decay.lam

    def to_dict(self) -> dict:
        return {
            "start": self.start,
            "end": self.end,
            "eta": self.decay.eta,
            "t_half": self.decay.t_half,
            "entry_shock": self.entry_shock,
            "downtime": self.downtime,
            "cost": self.cost,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Segment:
        try:
            return cls(
                start=float(d["start"]),
                end=float(d["end"]),
                decay=DecayParams(eta=float(d["eta"]), t_half=float(d["t_half"])),
                entry_shock=float(d.get("entry_shock", 1.0)),
                downtime=float(d["downtime"]),
                cost=float(d["cost"]),
            )
        except KeyError as exc:
            raise BadParam(f"segment is missing field {exc}") from None


@dataclass(frozen=True)
class Environment:
    """Contiguous segments covering [0, t_end]. Build through ``build_environment``."""

    segments: tuple[Segment, ...]
    t_end: float
    _starts: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_starts", tuple(s.start for s in self.segments))

    @property
    def num_segments(self) -> int:
        return len(self.segments)

    @property
    def boundaries(self) -> tuple[float, ...]:
        """Interior boundaries tau_2 < ... < tau_M (where entry shocks can fire)."""
        return self._starts[1:]

    @property
    def horizon(self) -> float:
        return self.t_end

    def to_dict(self) -> dict:
        return {"t_end": self.t_end, "segments": [s.to_dict() for s in self.segments]}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> Environment:
        try:
            segs = [Segment.from_dict(s) for s in d["segments"]]
            t_end = float(d["t_end"])
        except (KeyError, TypeError) as exc:
            raise BadParam(f"malformed environment document: {exc}") from None
        return build_environment(segs, t_end)

    @classmethod
    def from_json(cls, text: str) -> Environment:
        return cls.from_dict(json.loads(text))


def build_environment(segments: list[Segment], t_end: float) -> Environment:
    if not segments:
        raise BadBounds("an environment needs at least one segment")
    if not (t_end > 0.0):
        raise BadBounds(f"t_end must be > 0, got {t_end}")
    if segments[0].start != 0.0:
        raise GapOrOverlap(f"first segment must start at 0, got {segments[0].start}")
    for prev, nxt in zip(segments, segments[1:]):
        if prev.end != nxt.start:
            raise GapOrOverlap(f"segments not contiguous: end {prev.end} vs start {nxt.start}")
    if segments[-1].end != t_end:
        raise BadBounds(f"last segment ends at {segments[-1].end}, horizon is {t_end}")
    return Environment(segments=tuple(segments), t_end=float(t_end))


def segment_index_at(env: Environment, t: float) -> int:
    """Index j with start_j <= t < end_j; t == t_end maps to the last segment."""
    if t < 0.0 or t > env.t_end:
        raise OutOfHorizon(f"t={t} outside [0, {env.t_end}]")
    return min(bisect.bisect_right(env._starts, t) - 1, env.num_segments - 1)


def downtime_at(env: Environment, c: float) -> float:
    return env.segments[segment_index_at(env, c)].downtime


def cost_at(env: Environment, c: float) -> float:
    return env.segments[segment_index_at(env, c)].cost


def short_term_threshold(seg: Segment) -> float:
    """-f'(0)/2 for the segment's decay law: (1 - eta) * lam / 2."""
    return (1.0 - seg.decay.eta) * seg.decay.lam / 2.0


# ---------------------------------------------------------------------------
# Scenario sampling


class EnvType(str, Enum):
    A = "A"
    B = "B"
    C = "C"


@dataclass(frozen=True)
class ScenarioSpec:
    env_type: EnvType
    num_segments: int = 6
    t_end: float = 300.0
    seed: int = 0

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "env_type", EnvType(self.env_type))
        except ValueError:
            raise BadSpec(f"unknown environment type {self.env_type!r}") from None
        if self.num_segments < 1:
            raise BadSpec("num_segments must be >= 1")
        if not (self.t_end > 0.0):
            raise BadSpec("t_end must be > 0")
        if self.num_segments * MIN_SEGMENT_FRACTION > 1.0:
            raise BadSpec(
                f"num_segments={self.num_segments} cannot respect the "
                f"{MIN_SEGMENT_FRACTION:.0%} minimum segment length"
            )

    def to_dict(self) -> dict:
        return {
            "type": self.env_type.value,
            "num_segments": self.num_segments,
            "t_end": self.t_end,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ScenarioSpec:
        try:
            return cls(
                env_type=d["type"],
                num_segments=int(d["num_segments"]),
                t_end=float(d["t_end"]),
                seed=int(d["seed"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, BadSpec):
                raise
            raise BadSpec(f"malformed scenario spec: {exc}") from None


# Table of sampling bands per environment type.
TYPE_A_DOWNTIMES = (0.8, 1.0, 1.2, 1.5)
BANDS = {
    EnvType.A: dict(shock=(0.2, 0.5), t_half=(2.5, 5.0), eta=(0.0, 0.08), cost=(0.05, 0.2)),
    EnvType.B: dict(shock=(0.9, 1.0), t_half=(50.0, 80.0), eta=(0.2, 0.35),
                    downtime=(2.0, 3.5), cost=(0.8, 1.8)),
    EnvType.C: dict(eta=(0.05, 0.30), downtime=(2.0, 3.5), cost=(0.8, 1.8)),
}
# Type C draws one (shock band, half-life band) pair per segment.
TYPE_C_PAIRS = (((0.6, 0.8), (50.0, 80.0)), ((0.9, 1.0), (8.0, 18.0)))


def _partition(rng: np.random.Generator, m: int, t_end: float) -> list[float]:
    min_len = MIN_SEGMENT_FRACTION * t_end
    lengths = min_len + (t_end - m * min_len) * rng.dirichlet(np.ones(m))
    cuts = np.cumsum(lengths)[:-1]
    return [0.0] + [float(c) for c in cuts] + [float(t_end)]


def sample_environment(spec: ScenarioSpec) -> Environment:
    rng = np.random.default_rng(spec.seed)
    edges = _partition(rng, spec.num_segments, spec.t_end) if spec.num_segments > 1 else [0.0, spec.t_end]
    bands = BANDS[spec.env_type]
    segments = []
    for j in range(spec.num_segments):
        if spec.env_type is EnvType.C:
            shock_band, half_band = TYPE_C_PAIRS[int(rng.integers(2))]
        else:
            shock_band, half_band = bands["shock"], bands["t_half"]
        shock = float(rng.uniform(*shock_band))
        t_half = float(rng.uniform(*half_band))
        eta = float(rng.uniform(*bands["eta"]))
        if spec.env_type is EnvType.A:
            downtime = float(TYPE_A_DOWNTIMES[int(rng.integers(len(TYPE_A_DOWNTIMES)))])
        else:
            downtime = float(rng.uniform(*bands["downtime"]))
        cost = float(rng.uniform(*bands["cost"]))
        segments.append(
            Segment(
                start=edges[j],
                end=edges[j + 1],
                decay=DecayParams(eta=eta, t_half=t_half),
                entry_shock=shock,
                downtime=downtime,
                cost=cost,
            )
        )
    return build_environment(segments, spec.t_end)


def single_segment_env(
    eta: float, t_half: float, t_end: float, downtime: float = 1.0, cost: float = 0.0
) -> Environment:
    """Convenience constructor for the stationary M=1 case."""
    seg = Segment(0.0, t_end, DecayParams(eta, t_half), 1.0, downtime, cost)
    return build_environment([seg], t_end)
