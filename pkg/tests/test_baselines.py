import pytest

from ckmsched.baselines import (
    ActionClass, baseline_schedules, best_baseline, classify_actions, fixed_interval_schedule,
    zero_wait_completion, zero_wait_schedule,
)
from ckmsched.efficacy import Schedule, evaluate, is_feasible
from ckmsched.environment import ScenarioSpec, sample_environment, single_segment_env
from ckmsched.errors import BadPeriod

from conftest import make_env


def test_zero_wait_single_segment_is_empty():
    assert zero_wait_schedule(single_segment_env(0.1, 5.0, 100.0)) == Schedule()


def test_zero_wait_completions():
    env = make_env([0, 50, 100, 150], downtime=2.0)
    assert zero_wait_schedule(env) == Schedule((52.0, 102.0))


def test_zero_wait_skips_infeasible_neighbour():
    env = make_env([0, 10, 11, 30], downtime=2.0)
    assert zero_wait_schedule(env) == Schedule((12.0,))


def test_zero_wait_completion_falls_into_later_segment():
    # downtime of the entered segment overruns it, so the next segment's downtime applies
    env = make_env([0, 10, 11, 30], downtime=[1.0, 3.0, 1.5])
    assert zero_wait_completion(env, 10.0) == 11.5


def test_fixed_interval():
    env = make_env([0, 100, 300], downtime=2.0)
    s = fixed_interval_schedule(env, 25.0)
    assert s.completions == tuple(25.0 * k for k in range(1, 13))
    assert fixed_interval_schedule(env, 400.0) == Schedule()
    assert len(fixed_interval_schedule(make_env([0, 300], downtime=1.0), 10.0)) == 30
    with pytest.raises(BadPeriod):
        fixed_interval_schedule(env, 0.0)
    with pytest.raises(BadPeriod):
        fixed_interval_schedule(env, float("inf"))


def test_fixed_interval_drops_infeasible():
    env = make_env([0, 300], downtime=12.0)
    s = fixed_interval_schedule(env, 10.0)
    assert is_feasible(env, s)
    assert s.completions[:2] == (20.0, 40.0)


def test_classification():
    env = make_env([0, 50, 100, 150], downtime=2.0)
    assert classify_actions(env, Schedule()) == [ActionClass.NO_UPDATE] * 3
    got = classify_actions(env, zero_wait_schedule(env))
    assert got == [ActionClass.NO_UPDATE, ActionClass.ZERO_WAIT, ActionClass.ZERO_WAIT]
    mid = classify_actions(env, Schedule((70.0,)))
    assert mid == [ActionClass.NO_UPDATE, ActionClass.DELAYED, ActionClass.NO_UPDATE]
    # a zero-wait update outranks a later delayed one in the same segment
    both = classify_actions(env, Schedule((52.0, 80.0)))
    assert both[1] is ActionClass.ZERO_WAIT
    assert classify_actions(env, Schedule((52.4,)))[1] is ActionClass.ZERO_WAIT
    assert classify_actions(env, Schedule((52.6,)))[1] is ActionClass.DELAYED


def test_all_baselines_feasible():
    for seed in range(20):
        env = sample_environment(ScenarioSpec("A", 6, 300.0, seed))
        for s in baseline_schedules(env).values():
            assert is_feasible(env, s)


def test_best_baseline_is_max():
    env = sample_environment(ScenarioSpec("B", 6, 300.0, 3))
    _, _, j = best_baseline(env)
    assert j == max(evaluate(env, s)[1] for s in [Schedule(), *baseline_schedules(env).values()])
