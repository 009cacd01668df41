import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ckmsched.environment import DecayParams, Segment, build_environment

settings.register_profile("default", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def make_env(bounds, t_half=10.0, eta=0.0, shock=1.0, downtime=1.0, cost=0.0):
    """Environment from boundary list [0, tau_2, ..., t_end]; scalars broadcast."""
    m = len(bounds) - 1

    def col(x):
        return list(x) if isinstance(x, (list, tuple)) else [x] * m

    th, et, sh, dt, co = col(t_half), col(eta), col(shock), col(downtime), col(cost)
    segs = [Segment(bounds[j], bounds[j + 1], DecayParams(et[j], th[j]), sh[j], dt[j], co[j]) for j in range(m)]
    return build_environment(segs, bounds[-1])


def random_env(rng: np.random.Generator, m: int | None = None, t_end: float = 60.0):
    """Small random environment with all parameters drawn across the legal ranges."""
    m = int(rng.integers(1, 5)) if m is None else m
    cuts = np.sort(rng.choice(np.arange(1, int(t_end)), size=m - 1, replace=False)).astype(float)
    bounds = [0.0, *cuts.tolist(), t_end]
    th = [float(rng.choice([rng.uniform(1, 30), math.inf])) if rng.random() < 0.1 else float(rng.uniform(1, 30))
          for _ in range(m)]
    return make_env(bounds, th, rng.uniform(0, 0.5, m).tolist(), rng.uniform(0.2, 1.0, m).tolist(),
                    rng.uniform(0.5, 3.0, m).tolist(), rng.uniform(0.0, 2.0, m).tolist())


_results: list[tuple[int, bool, str]] = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects (criterion, passed, detail); reported in the terminal summary."""
    return _results


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(_results):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
