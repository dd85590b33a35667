import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from app.core.errors import DecisionLogError, DiligenceViolation, TraceError
from app.models.schemas import IDLE
from app.models.switch import SEND, QueueSpec, SwitchConfig, Trace
from app.services.engine import (
    SimulationCursor,
    parse_decision_log,
    replay,
    serialize_decision_log,
    simulate,
)
from app.services.policies import GreedyPolicy, LowestValueFirstPolicy, RoundRobinPolicy, SeededRandomPolicy
from app.services.workloads import gen_random, random_general_config


class TestSimulate:
    def test_empty_trace(self, tight_config):
        result = simulate(tight_config, Trace(), GreedyPolicy())
        assert result.benefit == 0
        assert result.decision_log == ()
        assert result.occupancy_timeline == ()

    def test_tight_instance_under_greedy(self, tight_config, tight_trace):
        result = simulate(tight_config, tight_trace, GreedyPolicy())
        assert result.benefit == 3
        assert result.decision_log == (1, 0, IDLE, IDLE)
        assert result.accepted_per_value == (1, 1)
        assert result.sent_per_value == (1, 1)
        assert result.rejected_count == 1
        assert result.occupancy_timeline == (1, 2, 1, 1, 0, 0, 0)
        assert result.final_occupancy == (0, 0)

    def test_full_queue_rejects(self):
        config = SwitchConfig.restricted([1], 2)
        result = simulate(config, Trace.from_steps([[0, 0, 0]], trailing_sends=2), GreedyPolicy())
        assert result.rejected_count == 1
        assert result.benefit == 2

    def test_greedy_breaks_value_ties_by_index(self):
        config = SwitchConfig(
            values=(1, 5),
            queues=(QueueSpec(value_index=1, capacity=1), QueueSpec(value_index=1, capacity=1),
                    QueueSpec(value_index=0, capacity=1)),
        )
        result = simulate(config, Trace.from_steps([[2, 1, 0]], trailing_sends=2), GreedyPolicy())
        assert result.decision_log == (0, 1, 2)

    def test_same_policy_object_twice(self):
        config = SwitchConfig.restricted([1, 2, 3], 2)
        trace = gen_random(config, 15, 3, seed=4)
        policy = RoundRobinPolicy()
        assert simulate(config, trace, policy) == simulate(config, trace, policy)


class TestCursor:
    def test_step_by_step(self, tight_config):
        cursor = SimulationCursor(tight_config, GreedyPolicy())
        assert cursor.arrive(0) is True
        assert cursor.arrive(1) is True
        assert cursor.state.occupancy == (1, 1)
        assert cursor.send() == 1
        assert cursor.arrive(0) is False
        assert cursor.feed(SEND) == 0
        assert cursor.send() == IDLE
        assert cursor.result().benefit == 3

    def test_out_of_range_arrival(self, tight_config):
        cursor = SimulationCursor(tight_config, GreedyPolicy())
        with pytest.raises(TraceError):
            cursor.arrive(2)


class TestReplay:
    def test_replays_a_schedule(self, tight_config, tight_trace):
        result = replay(tight_config, tight_trace, [0, 0, 1, IDLE])
        assert result.benefit == 4

    def test_empty_queue_choice(self, tight_config, tight_trace):
        with pytest.raises(DiligenceViolation) as info:
            replay(tight_config, tight_trace, [0, 0, 0, IDLE])
        assert info.value.step == 3

    def test_idle_with_packets_waiting(self, tight_config, tight_trace):
        with pytest.raises(DiligenceViolation):
            replay(tight_config, tight_trace, [IDLE, 0, 1, IDLE])

    def test_send_when_everything_is_empty(self, tight_config, tight_trace):
        with pytest.raises(DiligenceViolation) as info:
            replay(tight_config, tight_trace, [0, 0, 1, 1])
        assert info.value.step == 4

    def test_wrong_length(self, tight_config, tight_trace):
        with pytest.raises(DecisionLogError):
            replay(tight_config, tight_trace, [0, 0, 1])


class TestDecisionLogFormat:
    def test_parse(self):
        assert parse_decision_log('{"send": 0}\n{"send": "idle"}\n\n{"send": 3}\n') == (0, IDLE, 3)

    def test_serialize(self):
        assert serialize_decision_log((0, IDLE)) == '{"send":0}\n{"send":"idle"}\n'

    def test_negative_index(self):
        with pytest.raises(DecisionLogError):
            parse_decision_log('{"send": -1}')

    def test_bad_entry(self):
        with pytest.raises(DecisionLogError) as info:
            parse_decision_log('{"send": 0}\n{"send": "later"}')
        assert "line 2" in str(info.value)

    @pytest.mark.parametrize("entry", ["true", '"1"', "1.0", "null"])
    def test_entries_are_not_coerced(self, entry):
        with pytest.raises(DecisionLogError) as info:
            parse_decision_log('{"send": %s}' % entry)
        assert "line 1" in str(info.value)


@hyp_settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_drained_traces_conserve_packets(seed):
    rng = np.random.default_rng(seed)
    config = random_general_config(rng, 4, 3)
    trace = gen_random(config, 12, 3, seed)
    for policy in (GreedyPolicy(), LowestValueFirstPolicy(), RoundRobinPolicy(), SeededRandomPolicy(seed)):
        result = simulate(config, trace, policy)
        assert result.sent_per_value == result.accepted_per_value
        assert result.final_occupancy == (0,) * config.n
        assert len(result.decision_log) == trace.sends
        assert len(result.occupancy_timeline) == len(trace.events)
        assert result.rejected_count + sum(result.accepted_per_value) == trace.arrivals
        assert replay(config, trace, result.decision_log) == result.model_copy(update={"policy": "replay"})
