"""
Exact offline optimum over diligent send schedules.

The DP runs backward over (event index, occupancy vector). Arrivals are forced
transitions (accept iff the queue has room); send events branch over every
non-empty queue. Occupancy vectors are mixed-radix integers with radix
B_k + 1 per queue. Schedules are rebuilt forward, taking the lowest queue
index among optimal choices, so the returned schedule is the lexicographically
smallest optimal one.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from app.core.config import settings
from app.core.errors import ConfigError, OracleLimitError, TraceError
from app.core.logger import activity_logger
from app.models.schemas import IDLE, Decision, OracleResult
from app.models.switch import SwitchConfig, Trace
from app.services.engine import replay
from app.services.instances import validate_trace

_INT64_HEADROOM = 1 << 62
_LOG_THRESHOLD = 10**6


@dataclass(frozen=True)
class _Solution:
    value: int
    schedule: Tuple[Decision, ...]
    state_count: int
    mode: str


def _strides(capacities: Sequence[int]) -> Tuple[List[int], int]:
    strides = []
    size = 1
    for b in capacities:
        strides.append(size)
        size *= b + 1
    return strides, size


@dataclass(frozen=True)
class _DenseTables:
    strides: np.ndarray
    arrive_next: Tuple[np.ndarray, ...]
    nonempty: np.ndarray  # (n, S)
    any_nonempty: np.ndarray  # (S,)
    send_prev: np.ndarray  # (n, S)


@lru_cache(maxsize=32)
def _dense_tables(capacities: Tuple[int, ...]) -> _DenseTables:
    strides, size = _strides(capacities)
    idx = np.arange(size, dtype=np.int64)
    stride_arr = np.array(strides, dtype=np.int64)
    digits = np.stack([(idx // s) % (b + 1) for s, b in zip(strides, capacities)])
    arrive_next = tuple(
        np.where(digits[k] < b, idx + strides[k], idx) for k, b in enumerate(capacities)
    )
    nonempty = digits > 0
    send_prev = np.where(nonempty, idx[None, :] - stride_arr[:, None], 0)
    return _DenseTables(stride_arr, arrive_next, nonempty, nonempty.any(axis=0), send_prev)


def _solve_dense(config: SwitchConfig, trace: Trace, weights: Sequence[int]) -> _Solution:
    tables = _dense_tables(config.capacities)
    size = tables.any_nonempty.shape[0]
    w = np.array(weights, dtype=np.int64)[:, None]
    choice_dtype = np.int8 if config.n < 127 else np.int16
    events = trace.events

    value = np.zeros(size, dtype=np.int64)
    choices: Dict[int, np.ndarray] = {}
    for e in range(len(events) - 1, -1, -1):
        event = events[e]
        if event.kind == "arrive":
            value = value[tables.arrive_next[event.queue]]
            continue
        cand = np.where(tables.nonempty, w + value[tables.send_prev], -1)
        choices[e] = np.where(tables.any_nonempty, cand.argmax(axis=0), -1).astype(choice_dtype)
        value = np.where(tables.any_nonempty, cand.max(axis=0), value)

    schedule: List[Decision] = []
    state = 0
    for e, event in enumerate(events):
        if event.kind == "arrive":
            state = int(tables.arrive_next[event.queue][state])
            continue
        k = int(choices[e][state])
        if k < 0:
            schedule.append(IDLE)
        else:
            schedule.append(k)
            state -= int(tables.strides[k])
    return _Solution(int(value[0]), tuple(schedule), len(events) * size, "dense")


def _solve_sparse(config: SwitchConfig, trace: Trace, weights: Sequence[int]) -> _Solution:
    capacities = config.capacities
    strides, _ = _strides(capacities)
    n = config.n
    events = trace.events

    def digit(state: int, k: int) -> int:
        return (state // strides[k]) % (capacities[k] + 1)

    # forward reachability
    reach: List[Set[int]] = [{0}]
    for event in events:
        nxt: Set[int] = set()
        if event.kind == "arrive":
            q = event.queue
            for s in reach[-1]:
                nxt.add(s + strides[q] if digit(s, q) < capacities[q] else s)
        else:
            for s in reach[-1]:
                moved = False
                for k in range(n):
                    if digit(s, k):
                        nxt.add(s - strides[k])
                        moved = True
                if not moved:
                    nxt.add(s)
        reach.append(nxt)

    value: Dict[int, int] = {s: 0 for s in reach[-1]}
    choices: Dict[int, Dict[int, int]] = {}
    for e in range(len(events) - 1, -1, -1):
        event = events[e]
        current: Dict[int, int] = {}
        if event.kind == "arrive":
            q = event.queue
            for s in reach[e]:
                current[s] = value[s + strides[q] if digit(s, q) < capacities[q] else s]
        else:
            picked: Dict[int, int] = {}
            for s in reach[e]:
                best, best_k = None, -1
                for k in range(n):
                    if digit(s, k):
                        cand = weights[k] + value[s - strides[k]]
                        if best is None or cand > best:
                            best, best_k = cand, k
                current[s] = value[s] if best is None else best
                picked[s] = best_k
            choices[e] = picked
        value = current

    schedule: List[Decision] = []
    state = 0
    for e, event in enumerate(events):
        if event.kind == "arrive":
            q = event.queue
            if digit(state, q) < capacities[q]:
                state += strides[q]
            continue
        k = choices[e][state]
        if k < 0:
            schedule.append(IDLE)
        else:
            schedule.append(k)
            state -= strides[k]
    return _Solution(value[0], tuple(schedule), sum(len(r) for r in reach), "sparse")


def _solve(config: SwitchConfig, trace: Trace, weights: Sequence[int], max_states: Optional[int]) -> _Solution:
    check = validate_trace(config, trace)
    if not check.ok:
        raise TraceError("; ".join(check.violations))
    cap = max_states or settings.MAX_STATES
    _, size = _strides(config.capacities)
    state_events = max(len(trace.events), 1) * size
    if state_events > cap:
        raise OracleLimitError(
            f"instance too large: {len(trace.events)} events x {size} states = {state_events} "
            f"exceeds the cap of {cap} state-events",
            state_events=state_events,
        )
    dense = size <= settings.DENSE_STATE_LIMIT and max(weights) * max(trace.sends, 1) < _INT64_HEADROOM
    if state_events > _LOG_THRESHOLD:
        activity_logger.log_event("Oracle", "START", f"{len(trace.events)} events", f"{size} states, {'dense' if dense else 'sparse'}")
    solution = (_solve_dense if dense else _solve_sparse)(config, trace, weights)
    if state_events > _LOG_THRESHOLD:
        activity_logger.log_event("Oracle", "SUCCESS", f"{len(trace.events)} events", f"value {solution.value}")
    return solution


def optimal_benefit(
    config: SwitchConfig,
    trace: Trace,
    *,
    max_states: Optional[int] = None,
    prefer_value_index: Optional[int] = None,
) -> OracleResult:
    """
    Maximum total sent value over all diligent schedules.

    With `prefer_value_index`, ties in benefit are broken toward schedules that
    send more packets of that value (then toward lower queue indices).
    """
    values = config.queue_values
    if prefer_value_index is None:
        weights = list(values)
    else:
        if not 0 <= prefer_value_index < config.m:
            raise ConfigError("value_index", f"index {prefer_value_index} out of range for {config.m} values")
        scale = trace.sends + 1
        weights = [v * scale + (q.value_index == prefer_value_index) for v, q in zip(values, config.queues)]
    solution = _solve(config, trace, weights, max_states)
    scored = replay(config, trace, solution.schedule)
    expected = solution.value if prefer_value_index is None else solution.value // (trace.sends + 1)
    if scored.benefit != expected:
        raise RuntimeError(f"oracle schedule replays to {scored.benefit}, DP claimed {expected}")
    return OracleResult(
        optimal_benefit=scored.benefit,
        schedule=solution.schedule,
        accepted_per_value=scored.accepted_per_value,
        sent_per_value=scored.sent_per_value,
        state_count=solution.state_count,
        mode=solution.mode,
    )


def max_count_for_value(
    config: SwitchConfig, trace: Trace, value_index: int, *, max_states: Optional[int] = None
) -> int:
    """Largest number of sent packets of one value over all diligent schedules."""
    if not 0 <= value_index < config.m:
        raise ConfigError("value_index", f"index {value_index} out of range for {config.m} values")
    weights = [int(q.value_index == value_index) for q in config.queues]
    return _solve(config, trace, weights, max_states).value


def brute_force_benefit(config: SwitchConfig, trace: Trace) -> int:
    """Enumerates every diligent send schedule; an oracle independent of the DP."""
    if trace.sends > settings.BRUTE_FORCE_MAX_SENDS or config.n > settings.BRUTE_FORCE_MAX_QUEUES:
        raise OracleLimitError(
            f"instance too large for brute force: {trace.sends} sends, {config.n} queues "
            f"(limits {settings.BRUTE_FORCE_MAX_SENDS}, {settings.BRUTE_FORCE_MAX_QUEUES})"
        )
    check = validate_trace(config, trace)
    if not check.ok:
        raise TraceError("; ".join(check.violations))
    events = trace.events
    capacities = config.capacities
    values = config.queue_values

    def explore(i: int, occupancy: Tuple[int, ...]) -> int:
        while i < len(events) and events[i].kind == "arrive":
            q = events[i].queue
            if occupancy[q] < capacities[q]:
                occupancy = occupancy[:q] + (occupancy[q] + 1,) + occupancy[q + 1:]
            i += 1
        if i == len(events):
            return 0
        options = [k for k, size in enumerate(occupancy) if size]
        if not options:
            return explore(i + 1, occupancy)
        return max(
            values[k] + explore(i + 1, occupancy[:k] + (occupancy[k] - 1,) + occupancy[k + 1:])
            for k in options
        )

    return explore(0, (0,) * config.n)
