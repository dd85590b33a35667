from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from app.core.errors import ConfigError, ConfigSyntaxError, TraceFormatError
from app.models.switch import SEND, QueueSpec, SwitchConfig, Trace, arrive
from app.services.instances import (
    compute_bounds,
    drain_extend,
    parse_config,
    parse_trace,
    serialize_config,
    serialize_trace,
    validate_trace,
)
from app.services.workloads import gen_bursty, gen_random, random_general_config

CONFIG_TEXT = """
{"values": [1, 2, 4],
 "queues": [{"value_index": 0, "capacity": 2},
            {"value_index": 1, "capacity": 2},
            {"value_index": 2, "capacity": 2}]}
"""


class TestParseConfig:
    def test_restricted_config(self):
        config = parse_config(CONFIG_TEXT)
        assert config.values == (1, 2, 4)
        assert config.m == 3 and config.n == 3
        assert config.is_restricted
        assert config.common_capacity == 2
        assert config == SwitchConfig.restricted([1, 2, 4], 2)

    def test_general_config_is_not_restricted(self):
        config = SwitchConfig(
            values=(1, 3),
            queues=(QueueSpec(value_index=0, capacity=1), QueueSpec(value_index=0, capacity=3)),
        )
        assert not config.is_restricted
        assert config.queues_of_value(0) == (0, 1)
        assert config.queues_of_value(1) == ()
        assert config.queue_values == (1, 1)

    def test_values_must_increase(self):
        with pytest.raises(ConfigError) as info:
            parse_config('{"values": [2, 2], "queues": [{"value_index": 0, "capacity": 1}]}')
        assert info.value.field == "values"
        assert "values not strictly increasing" in str(info.value)

    def test_value_index_out_of_range(self):
        with pytest.raises(ConfigError) as info:
            parse_config('{"values": [1], "queues": [{"value_index": 3, "capacity": 1}]}')
        assert info.value.field == "queues[0].value_index"

    def test_zero_capacity(self):
        with pytest.raises(ConfigError) as info:
            parse_config(
                '{"values": [1, 2], "queues": [{"value_index": 0, "capacity": 1}, {"value_index": 1, "capacity": 0}]}'
            )
        assert info.value.field == "queues[1].capacity"

    def test_non_positive_value(self):
        with pytest.raises(ConfigError) as info:
            parse_config('{"values": [0, 2], "queues": [{"value_index": 0, "capacity": 1}]}')
        assert info.value.field == "values[0]"

    @pytest.mark.parametrize("text,field", [
        ('{"values": ["1", 2], "queues": [{"value_index": 0, "capacity": 1}]}', "values[0]"),
        ('{"values": [1, 2.0], "queues": [{"value_index": 0, "capacity": 1}]}', "values[1]"),
        ('{"values": [1, 2], "queues": [{"value_index": true, "capacity": 1}]}', "queues[0].value_index"),
        ('{"values": [1, 2], "queues": [{"value_index": 0, "capacity": "2"}]}', "queues[0].capacity"),
    ])
    def test_integers_are_not_coerced(self, text, field):
        with pytest.raises(ConfigError) as info:
            parse_config(text)
        assert info.value.field == field

    def test_malformed_json(self):
        with pytest.raises(ConfigSyntaxError):
            parse_config('{"values": [1, 2')

    def test_serialized_config_parses_back(self):
        config = parse_config(CONFIG_TEXT)
        assert parse_config(serialize_config(config)) == config


class TestTraceFormat:
    def test_parse_and_skip_blank_lines(self):
        text = '{"event": "arrive", "queue": 1}\n\n{"event": "send"}\n'
        assert parse_trace(text).events == (arrive(1), SEND)

    def test_serialize_is_compact_jsonl(self):
        trace = Trace.from_steps([[0]])
        assert serialize_trace(trace) == '{"event":"arrive","queue":0}\n{"event":"send"}\n'

    def test_unknown_event_kind(self):
        with pytest.raises(TraceFormatError) as info:
            parse_trace('{"event": "send"}\n{"event": "drop"}\n')
        assert info.value.line == 2
        assert "unknown event kind 'drop'" in str(info.value)

    def test_missing_event_key(self):
        with pytest.raises(TraceFormatError) as info:
            parse_trace('{"queue": 0}')
        assert "missing 'event' key" in str(info.value)

    def test_malformed_line(self):
        with pytest.raises(TraceFormatError) as info:
            parse_trace('{"event": "send"}\nnot json\n')
        assert info.value.line == 2

    @pytest.mark.parametrize("queue", ["true", '"1"', "1.0", "-1"])
    def test_queue_must_be_a_non_negative_integer(self, queue):
        with pytest.raises(TraceFormatError) as info:
            parse_trace('{"event": "send"}\n{"event": "arrive", "queue": %s}\n' % queue)
        assert info.value.line == 2
        assert "queue" in str(info.value)

    def test_send_carries_no_queue(self):
        with pytest.raises(TraceFormatError):
            parse_trace('{"event": "send", "queue": 0}')

    @hyp_settings(max_examples=300, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**63), bursty=st.booleans())
    def test_generated_traces_survive_serialization(self, seed, bursty):
        config = random_general_config(np.random.default_rng(seed), 4, 3)
        if bursty:
            trace = gen_bursty(config, 15, 2, 3, seed)
        else:
            trace = gen_random(config, 15, 4, seed)
        assert parse_trace(serialize_trace(trace)) == trace

    def test_from_steps_counts(self):
        trace = Trace.from_steps([[0, 1], [], [2]], trailing_sends=1)
        assert trace.events == (arrive(0), arrive(1), SEND, SEND, arrive(2), SEND, SEND)
        assert trace.arrivals == 3 and trace.sends == 4
        assert trace.trailing_sends == 2


class TestValidateTrace:
    def test_empty_trace(self, tight_config):
        check = validate_trace(tight_config, Trace())
        assert check.ok and check.drained

    def test_queue_out_of_range(self, tight_config):
        check = validate_trace(tight_config, Trace(events=(arrive(5), SEND)))
        assert not check.ok
        assert check.violations == ("event 0: queue index out of range (queue 5, n = 2)",)

    def test_undrained_is_a_warning(self):
        config = SwitchConfig.restricted([1], 5)
        check = validate_trace(config, Trace(events=(arrive(0), arrive(0), arrive(0), SEND)))
        assert check.ok
        assert not check.drained
        assert check.warnings and check.warnings[0].startswith("not drained")


class TestDrainExtend:
    def test_appends_sends(self):
        config = SwitchConfig.restricted([1], 5)
        trace = Trace(events=(arrive(0), arrive(0), arrive(0), SEND))
        drained = drain_extend(config, trace)
        assert drained.events[:4] == trace.events
        assert drained.trailing_sends == 3
        assert drained.is_drained_for(config)

    def test_idempotent(self, tight_config, tight_trace):
        assert drain_extend(tight_config, tight_trace) == tight_trace
        once = drain_extend(tight_config, Trace.from_steps([[0, 0]]))
        assert drain_extend(tight_config, once) == once


class TestComputeBounds:
    def test_powers_of_two(self):
        bounds = compute_bounds(SwitchConfig.restricted([1, 2, 4], 1))
        assert bounds.r == Fraction(1, 2)
        assert bounds.alpha is None
        assert bounds.general_bound == 2
        assert bounds.restricted_bound == Fraction(3, 2)
        assert bounds.lower_bound == Fraction(10, 7)

    def test_uneven_ratios(self):
        bounds = compute_bounds(SwitchConfig.restricted([1, 3, 4], 1))
        assert bounds.r == Fraction(3, 4)
        assert bounds.restricted_bound == Fraction(7, 4)

    def test_two_values(self, tight_config):
        bounds = compute_bounds(tight_config)
        assert bounds.alpha == 2
        assert bounds.general_bound == Fraction(3, 2)
        assert bounds.restricted_bound == Fraction(4, 3)
        assert bounds.lower_bound == Fraction(4, 3)

    def test_single_value(self):
        bounds = compute_bounds(SwitchConfig.restricted([5], 1))
        assert bounds.r == 0
        assert bounds.lower_bound == 1

    def test_fractions_serialize_as_strings(self):
        dumped = compute_bounds(SwitchConfig.restricted([1, 2, 4], 1)).model_dump(mode="json")
        assert dumped["restricted_bound"] == "3/2"
        assert dumped["lower_bound"] == "10/7"
