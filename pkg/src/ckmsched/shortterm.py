"""Myopic single-update rule for an unpredictable environment.

The map is fresh at t = 0 and decays as f(x) = eta + (1 - eta) exp(-lam x). Updating
at time t costs downtime D and cost C, and the quantity traded off is

    g(t) = (1/t) int_0^t f - C / (t + D).

Updating immediately is optimal iff C / D^2 <= -f'(0) / 2; otherwise the update waits
until the first stationary point of g.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .environment import DecayParams
from .errors import BadParam, NegativeTime

# below this value of lam * t the bracket term of g' is summed as a power series
SERIES_CUTOFF = 1e-2
_SERIES_TERMS = 10


@dataclass(frozen=True)
class MyopicProblem:
    decay: DecayParams
    downtime: float
    cost: float
    horizon: float | None = None  # search cap; None -> 20 half-lives (100 D if f is constant)

    def __post_init__(self) -> None:
        if not (self.downtime > 0.0):
            raise BadParam(f"downtime must be > 0, got {self.downtime}")
        if not (self.cost >= 0.0):
            raise BadParam(f"cost must be >= 0, got {self.cost}")
        if self.horizon is not None and not (self.horizon > 0.0):
            raise BadParam(f"horizon must be > 0, got {self.horizon}")

    @property
    def search_cap(self) -> float:
        if self.horizon is not None:
            return self.horizon
        if math.isinf(self.decay.t_half):
            return 100.0 * self.downtime
        return 20.0 * self.decay.t_half


class DecisionKind(str, Enum):
    UPDATE_NOW = "update_now"
    UPDATE_AT = "update_at"
    NO_UPDATE = "no_update_within_horizon"


@dataclass(frozen=True)
class MyopicDecision:
    kind: DecisionKind
    g_at_decision: float
    t_star: float | None = None
    # a later scanned time had a strictly larger g than the first stationary point
    later_maximum: bool = False

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "t_star": self.t_star,
                "g_at_decision": self.g_at_decision, "later_maximum": self.later_maximum}


def _check_time(t: float) -> None:
    if t < 0.0:
        raise NegativeTime(f"t must be >= 0, got {t}")


def mean_efficacy(decay: DecayParams, t: float) -> float:
    """(1/t) int_0^t f, with the t -> 0 limit f(0) = 1."""
    _check_time(t)
    lam = decay.lam
    if t == 0.0 or lam == 0.0:
        return 1.0
    x = lam * t
    return decay.eta + (1.0 - decay.eta) * (-math.expm1(-x)) / x


def g_value(p: MyopicProblem, t: float) -> float:
    """g(t); at t = 0 the right limit 1 - C/D."""
    return mean_efficacy(p.decay, t) - p.cost / (t + p.downtime)


def _q_over_x2(x: float) -> float:
    # (e^{-x}(1 + x) - 1) / x^2, which tends to -1/2 as x -> 0
    if x < SERIES_CUTOFF:
        total, term = 0.0, 1.0
        for n in range(2, _SERIES_TERMS + 2):
            # term tracks (-1)^n x^(n-2) / n!
            term = 0.5 if n == 2 else term * (-x) / n
            total += (1 - n) * term
        return total
    return (math.exp(-x) * (1.0 + x) - 1.0) / (x * x)


def decay_term(p: MyopicProblem, t: float) -> float:
    """(t f(t) - int_0^t f) / t^2; never positive for a nonincreasing f."""
    _check_time(t)
    lam = p.decay.lam
    if lam == 0.0:
        return 0.0
    return (1.0 - p.decay.eta) * lam * _q_over_x2(lam * t)


def cost_term(p: MyopicProblem, t: float) -> float:
    _check_time(t)
    return p.cost / (t + p.downtime) ** 2


def g_derivative(p: MyopicProblem, t: float) -> float:
    """g'(t); at t = 0 the limit f'(0)/2 + C/D^2."""
    return decay_term(p, t) + cost_term(p, t)


def threshold(decay: DecayParams) -> float:
    """-f'(0)/2 = (1 - eta) lam / 2."""
    return (1.0 - decay.eta) * decay.lam / 2.0


def should_update_now(p: MyopicProblem) -> bool:
    return p.cost / p.downtime**2 <= threshold(p.decay)


def scan_step(p: MyopicProblem) -> float:
    return min(p.downtime, p.decay.t_half) / 10.0


def optimal_wait(p: MyopicProblem, root_tol: float = 1e-12) -> MyopicDecision:
    """Scan g' on (0, cap] and polish the first + to - sign change with Brent's method."""
    if not (root_tol > 0.0):
        raise BadParam("root_tol must be > 0")
    if should_update_now(p):
        return MyopicDecision(DecisionKind.UPDATE_NOW, g_value(p, 0.0), 0.0)
    cap = p.search_cap
    step = scan_step(p)
    ts = np.append(step * np.arange(1, int(math.floor(cap / step)) + 1), cap)
    ts = ts[ts <= cap]
    lo = 0.0
    t_star = None
    for t in ts:
        d = g_derivative(p, float(t))
        if d <= 0.0:
            if d == 0.0:
                t_star = float(t)
            else:
                t_star = brentq(lambda s: g_derivative(p, s), lo, float(t),
                                xtol=root_tol, rtol=4 * np.finfo(float).eps)
            break
        lo = float(t)
    if t_star is None:
        return MyopicDecision(DecisionKind.NO_UPDATE, g_value(p, cap))
    g_star = g_value(p, t_star)
    later = any(g_value(p, float(t)) > g_star + 1e-12 for t in ts[ts > t_star])
    return MyopicDecision(DecisionKind.UPDATE_AT, g_star, t_star, later)


def g_curve(p: MyopicProblem, num: int = 201, t_max: float | None = None) -> list[tuple[float, float, float]]:
    """Rows (t, g, g') on an even grid over [0, t_max]."""
    t_max = p.search_cap if t_max is None else t_max
    return [(float(t), g_value(p, float(t)), g_derivative(p, float(t))) for t in np.linspace(0.0, t_max, num)]
