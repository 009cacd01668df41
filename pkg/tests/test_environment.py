import json
import math

import pytest
from hypothesis import given, strategies as st

from ckmsched.environment import (
    MIN_SEGMENT_FRACTION, DecayParams, EnvType, ScenarioSpec, Segment, build_environment, cost_at, downtime_at,
    sample_environment, segment_index_at, short_term_threshold, single_segment_env,
)
from ckmsched.errors import BadBounds, BadParam, BadSpec, GapOrOverlap, OutOfHorizon

from conftest import make_env


def test_decay_value_and_half_life():
    d = DecayParams(0.2, 10.0)
    assert d.value(0.0) == 1.0
    assert d.value(10.0) == pytest.approx(0.2 + 0.8 * 0.5, abs=1e-15)
    assert DecayParams(0.3, math.inf).lam == 0.0
    assert DecayParams(0.3, math.inf).value(1e6) == 1.0


@pytest.mark.parametrize("eta,t_half", [(-0.1, 1.0), (1.0, 1.0), (0.0, 0.0), (0.0, -2.0)])
def test_decay_rejects_bad_params(eta, t_half):
    with pytest.raises(BadParam):
        DecayParams(eta, t_half)


@pytest.mark.parametrize("kw", [dict(entry_shock=0.0), dict(entry_shock=1.5), dict(downtime=0.0), dict(cost=-1.0)])
def test_segment_rejects_bad_params(kw):
    with pytest.raises(BadParam):
        Segment(0.0, 1.0, DecayParams(0.0, 1.0), **kw)


def test_build_environment_checks_cover():
    dec = DecayParams(0.0, 5.0)
    with pytest.raises(GapOrOverlap):
        build_environment([Segment(0, 5, dec), Segment(6, 10, dec)], 10)
    with pytest.raises(GapOrOverlap):
        build_environment([Segment(1, 10, dec)], 10)
    with pytest.raises(BadBounds):
        build_environment([Segment(0, 5, dec)], 10)
    with pytest.raises(BadBounds):
        build_environment([], 10)
    with pytest.raises(BadBounds):
        Segment(5, 5, dec)


def test_segment_lookup_boundary_convention():
    env = make_env([0, 10, 20, 30], downtime=[1, 2, 3], cost=[0.1, 0.2, 0.3])
    assert segment_index_at(env, 0.0) == 0
    assert segment_index_at(env, 9.999) == 0
    assert segment_index_at(env, 10.0) == 1  # a boundary belongs to the segment starting there
    assert segment_index_at(env, 30.0) == 2  # t_end maps to the last segment
    assert downtime_at(env, 20.0) == 3 and cost_at(env, 19.5) == 0.2
    assert env.boundaries == (10.0, 20.0)
    with pytest.raises(OutOfHorizon):
        segment_index_at(env, 30.5)
    with pytest.raises(OutOfHorizon):
        segment_index_at(env, -1e-3)


def test_short_term_threshold():
    env = single_segment_env(0.0, math.log(2), 10.0)
    assert short_term_threshold(env.segments[0]) == pytest.approx(0.5, abs=1e-15)


def test_environment_json_round_trip():
    env = sample_environment(ScenarioSpec("C", 4, 120.0, 3))
    again = type(env).from_json(env.to_json())
    assert again == env
    assert json.loads(env.to_json())["t_end"] == 120.0


@given(st.sampled_from(["A", "B", "C"]), st.integers(1, 8), st.integers(0, 10_000))
def test_sampled_environment_respects_bands(kind, m, seed):
    env = sample_environment(ScenarioSpec(kind, m, 300.0, seed))
    assert env.num_segments == m
    assert env.segments[0].start == 0.0 and env.segments[-1].end == 300.0
    for s in env.segments:
        assert s.end - s.start >= MIN_SEGMENT_FRACTION * 300.0 - 1e-9
        if kind == "A":
            assert 0.2 <= s.entry_shock <= 0.5 and 2.5 <= s.decay.t_half <= 5.0
            assert s.downtime in (0.8, 1.0, 1.2, 1.5)
        elif kind == "B":
            assert 0.9 <= s.entry_shock <= 1.0 and 50 <= s.decay.t_half <= 80
            assert 2.0 <= s.downtime <= 3.5 and 0.8 <= s.cost <= 1.8
        else:
            slow = 0.6 <= s.entry_shock <= 0.8 and 50 <= s.decay.t_half <= 80
            fast = 0.9 <= s.entry_shock <= 1.0 and 8 <= s.decay.t_half <= 18
            assert slow or fast


def test_sampling_is_seeded():
    a = sample_environment(ScenarioSpec(EnvType.B, 6, 300.0, 7))
    b = sample_environment(ScenarioSpec(EnvType.B, 6, 300.0, 7))
    c = sample_environment(ScenarioSpec(EnvType.B, 6, 300.0, 8))
    assert a == b and a != c


@pytest.mark.parametrize("kw", [dict(env_type="X"), dict(env_type="A", num_segments=0),
                                dict(env_type="A", num_segments=21), dict(env_type="A", t_end=0.0)])
def test_bad_scenario_spec(kw):
    with pytest.raises(BadSpec):
        ScenarioSpec(**kw)
