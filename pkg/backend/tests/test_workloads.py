from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from app.core.errors import ConfigError
from app.models.schemas import GeneratorSpec
from app.models.switch import SwitchConfig, Trace
from app.services.engine import simulate
from app.services.instances import validate_trace
from app.services.oracle import optimal_benefit
from app.services.policies import GreedyPolicy, make_policy
from app.services.workloads import (
    gen_bursty,
    gen_random,
    gen_two_valued,
    generate,
    random_general_config,
    random_restricted_config,
    random_values,
    tight_two_valued_trace,
    two_valued_config,
)


@hyp_settings(max_examples=100, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**63))
def test_random_traces_are_valid_and_drained(seed):
    powers_of_two = SwitchConfig.restricted([1, 2, 4], 2)
    trace = gen_random(powers_of_two, 25, 4, seed)
    check = validate_trace(powers_of_two, trace)
    assert check.ok and check.drained
    assert trace.trailing_sends >= trace.arrivals
    assert simulate(powers_of_two, trace, GreedyPolicy()).final_occupancy == (0, 0, 0)


def test_same_seed_same_trace(powers_of_two):
    assert gen_random(powers_of_two, 30, 3, 8) == gen_random(powers_of_two, 30, 3, 8)
    assert gen_bursty(powers_of_two, 30, 3, 2, 8) == gen_bursty(powers_of_two, 30, 3, 2, 8)


def _arrivals_per_step(trace):
    steps, current = [], []
    for e in trace.events:
        if e.kind == "arrive":
            current.append(e.queue)
        else:
            steps.append(current)
            current = []
    return steps


def test_bursty_alternates(powers_of_two):
    trace = gen_bursty(powers_of_two, 12, 3, 2, seed=1)
    steps = _arrivals_per_step(trace)
    for t in range(12):
        if (t // 3) % 2:
            assert steps[t] == []
        else:
            assert steps[t] and len(steps[t]) % 2 == 0


@pytest.mark.parametrize("policy", ["greedy", "round-robin", "lowest-first", "random:5"])
def test_bursts_beyond_capacity_overflow(powers_of_two, policy):
    trace = gen_bursty(powers_of_two, 8, 2, 3, seed=4)
    assert simulate(powers_of_two, trace, make_policy(policy, seed=5)).rejected_count > 0


def test_zero_burst_length_is_quiet(powers_of_two):
    trace = gen_bursty(powers_of_two, 5, 0, 3, seed=4)
    assert trace.arrivals == 0
    assert trace == Trace.from_steps([[]] * 5)


def test_zero_steps_is_empty(powers_of_two):
    assert gen_random(powers_of_two, 0, 3, seed=9) == Trace()
    assert gen_bursty(powers_of_two, 0, 2, 2, seed=9) == Trace()


def test_two_valued_share():
    config = two_valued_config(3, 2)
    all_priority = gen_two_valued(config, 10, 3, 1.0, seed=2)
    none_priority = gen_two_valued(config, 10, 3, 0.0, seed=2)
    assert all(e.queue == 1 for e in all_priority.events if e.kind == "arrive")
    assert all(e.queue == 0 for e in none_priority.events if e.kind == "arrive")


def test_two_valued_needs_two_values(powers_of_two):
    with pytest.raises(ConfigError):
        gen_two_valued(powers_of_two, 5, 2, 0.5, seed=0)
    with pytest.raises(ConfigError):
        two_valued_config(1, 1)


@pytest.mark.parametrize("alpha,capacity", [(2, 1), (2, 2), (3, 2), (10, 1), (10, 3)])
def test_tight_instance_attains_the_bound(alpha, capacity):
    config = two_valued_config(alpha, capacity)
    trace = tight_two_valued_trace(config)
    greedy = simulate(config, trace, GreedyPolicy()).benefit
    opt = optimal_benefit(config, trace).optimal_benefit
    assert greedy == capacity * (1 + alpha)
    assert opt == capacity * (2 + alpha)
    assert Fraction(opt, greedy) == Fraction(alpha + 2, alpha + 1)


def test_tight_instance_needs_two_values(powers_of_two):
    with pytest.raises(ConfigError):
        tight_two_valued_trace(powers_of_two)


def test_samplers_are_seeded():
    a = random_general_config(np.random.default_rng(3), 5, 3)
    b = random_general_config(np.random.default_rng(3), 5, 3)
    assert a == b
    values = random_values(np.random.default_rng(0), 4)
    assert values == sorted(set(values)) and len(values) == 4
    assert random_restricted_config(np.random.default_rng(1), 4, 2, m=2).m == 2


def test_generate_dispatches_on_kind():
    config = two_valued_config(2, 2)
    spec = GeneratorSpec(kind="two-valued", steps=6, arrivals_per_step_max=2, priority_share=0.5)
    assert generate(config, spec, 4) == gen_two_valued(config, 6, 2, 0.5, 4)
    bursty = GeneratorSpec(kind="bursty", steps=6, burst_len=2, burst_size=1)
    assert generate(config, bursty, 4) == gen_bursty(config, 6, 2, 1, 4)
    assert generate(config, GeneratorSpec(steps=6), 4) == gen_random(config, 6, 3, 4)
