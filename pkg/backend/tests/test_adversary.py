from fractions import Fraction

import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from app.core.errors import AdversaryError
from app.models.schemas import IDLE
from app.services.adversary import build_lower_bound_instance
from app.services.policies import GreedyPolicy, LowestValueFirstPolicy, RoundRobinPolicy, SeededRandomPolicy


def test_powers_of_two_against_greedy():
    transcript = build_lower_bound_instance([1, 2, 4], GreedyPolicy())
    assert transcript.observed_sends == (2, 1, 0)
    assert transcript.value_sets == ((0, 1, 2), (0, 1), (0,))
    assert transcript.alg_benefit == 7
    assert transcript.adv_benefit == 10
    assert transcript.ratio == Fraction(10, 7)
    assert transcript.lower_bound == Fraction(10, 7)
    assert transcript.adv_schedule == (1, 0, 2, 1, 0)
    assert transcript.alg_schedule == (2, 1, 0, IDLE, IDLE)
    assert transcript.config.common_capacity == 1


def test_two_values():
    transcript = build_lower_bound_instance([1, 3], GreedyPolicy())
    assert transcript.alg_benefit == 4
    assert transcript.adv_benefit == 5


def test_single_value():
    transcript = build_lower_bound_instance([5], LowestValueFirstPolicy())
    assert transcript.alg_benefit == transcript.adv_benefit == 5
    assert transcript.ratio == 1 == transcript.lower_bound


@pytest.mark.parametrize("policy", [LowestValueFirstPolicy(), RoundRobinPolicy()])
def test_policies_that_send_low_first(policy):
    transcript = build_lower_bound_instance([1, 2, 4], policy)
    assert transcript.observed_sends[0] == 0
    assert transcript.adv_benefit == 13


def test_randomized_policy_refused():
    with pytest.raises(AdversaryError):
        build_lower_bound_instance([1, 2], SeededRandomPolicy(1))


@hyp_settings(max_examples=50, deadline=None)
@given(values=st.lists(st.integers(min_value=1, max_value=100), min_size=1, max_size=6, unique=True).map(sorted))
def test_transcript_invariants(values):
    for policy in (GreedyPolicy(), LowestValueFirstPolicy(), RoundRobinPolicy()):
        transcript = build_lower_bound_instance(values, policy)
        m = len(values)
        assert [len(v) for v in transcript.value_sets] == list(range(m, 0, -1))
        for before, after, sent in zip(transcript.value_sets, transcript.value_sets[1:], transcript.observed_sends):
            assert set(after) == set(before) - {sent}
        assert transcript.alg_benefit == sum(values)
        assert transcript.adv_benefit == 2 * sum(values) - values[transcript.observed_sends[0]]
        assert transcript.ratio >= transcript.lower_bound
