"""Seeded workload generators, instance-shape samplers and equality fixtures."""
from typing import List, Optional

import numpy as np

from app.core.errors import ConfigError
from app.models.schemas import GeneratorSpec
from app.models.switch import SEND, Event, QueueSpec, SwitchConfig, Trace, arrive
from app.services.instances import drain_extend


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def gen_random(config: SwitchConfig, steps: int, arrivals_per_step_max: int, seed: int) -> Trace:
    """Each step draws 0..max arrivals to uniform random queues, then one send; drained."""
    rng = _rng(seed)
    events: List[Event] = []
    for _ in range(steps):
        count = int(rng.integers(0, arrivals_per_step_max + 1))
        events.extend(arrive(int(q)) for q in rng.integers(0, config.n, size=count))
        events.append(SEND)
    return drain_extend(config, Trace(events=tuple(events)))


def gen_bursty(config: SwitchConfig, steps: int, burst_len: int, burst_size: int, seed: int) -> Trace:
    """
    Alternating burst and quiet phases of `burst_len` steps each, starting with a
    burst. Each burst picks a random non-empty subset of queues; every burst step
    delivers `burst_size` packets to each queue of the subset. Quiet steps only send.
    """
    rng = _rng(seed)
    events: List[Event] = []
    targets: List[int] = []
    for t in range(steps):
        in_burst = burst_len > 0 and (t // burst_len) % 2 == 0
        if in_burst and t % burst_len == 0:
            size = int(rng.integers(1, config.n + 1))
            targets = sorted(int(q) for q in rng.choice(config.n, size=size, replace=False))
        if in_burst:
            for q in targets:
                events.extend([arrive(q)] * burst_size)
        events.append(SEND)
    return drain_extend(config, Trace(events=tuple(events)))


def two_valued_config(alpha: int, capacity: int, base: int = 1) -> SwitchConfig:
    """Restricted config with best-effort value `base` and priority value `base * alpha`."""
    if alpha < 2:
        raise ConfigError("alpha", f"alpha {alpha} must be an integer above 1")
    return SwitchConfig.restricted([base, base * alpha], capacity)


def gen_two_valued(
    config: SwitchConfig, steps: int, arrivals_per_step_max: int, priority_share: float, seed: int
) -> Trace:
    """Best-effort/priority traffic: each arrival is a v_2-packet with probability `priority_share`."""
    if config.m != 2 or not config.is_restricted:
        raise ConfigError("values", "two-valued workloads need a restricted config with two values")
    rng = _rng(seed)
    low, high = config.queues_of_value(0)[0], config.queues_of_value(1)[0]
    events: List[Event] = []
    for _ in range(steps):
        count = int(rng.integers(0, arrivals_per_step_max + 1))
        for is_priority in rng.random(count) < priority_share:
            events.append(arrive(high if is_priority else low))
        events.append(SEND)
    return drain_extend(config, Trace(events=tuple(events)))


def tight_two_valued_trace(config: SwitchConfig) -> Trace:
    """
    Equality instance for restricted two-valued configs with capacity B: B v_1- and
    B v_2-packets arrive together, then one v_1-packet arrives in each of the
    next B steps. GREEDY earns B(v_1 + v_2), the optimum B(2 v_1 + v_2).
    """
    if config.m != 2 or not config.is_restricted:
        raise ConfigError("values", "the tight instance needs a restricted config with two values")
    b = config.common_capacity
    low, high = config.queues_of_value(0)[0], config.queues_of_value(1)[0]
    # GREEDY's v_1-queue stays full through step B+1, so it rejects all B late arrivals
    steps = [[low] * b + [high] * b] + [[low] for _ in range(b)]
    return drain_extend(config, Trace.from_steps(steps))


# --- instance-shape samplers ---

def random_values(rng: np.random.Generator, m: int, max_value: int = 64) -> List[int]:
    picked = rng.choice(np.arange(1, max(max_value, m) + 1), size=m, replace=False)
    return sorted(int(v) for v in picked)


def random_restricted_config(
    rng: np.random.Generator, max_values: int, max_capacity: int, m: Optional[int] = None
) -> SwitchConfig:
    m = m if m is not None else int(rng.integers(1, max_values + 1))
    capacity = int(rng.integers(1, max_capacity + 1))
    return SwitchConfig.restricted(random_values(rng, m), capacity)


def random_general_config(
    rng: np.random.Generator, max_values: int, max_capacity: int, max_queues: int = 4, m: Optional[int] = None
) -> SwitchConfig:
    """Several queues may share a value, capacities differ, some values may have no queue."""
    m = m if m is not None else int(rng.integers(1, max_values + 1))
    n = int(rng.integers(1, max_queues + 1))
    queues = tuple(
        QueueSpec(value_index=int(rng.integers(0, m)), capacity=int(rng.integers(1, max_capacity + 1)))
        for _ in range(n)
    )
    return SwitchConfig(values=tuple(random_values(rng, m)), queues=queues)


def generate(config: SwitchConfig, spec: GeneratorSpec, seed: int) -> Trace:
    if spec.kind == "bursty":
        return gen_bursty(config, spec.steps, spec.burst_len, spec.burst_size, seed)
    if spec.kind == "two-valued":
        return gen_two_valued(config, spec.steps, spec.arrivals_per_step_max, spec.priority_share, seed)
    return gen_random(config, spec.steps, spec.arrivals_per_step_max, seed)
