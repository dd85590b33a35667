"""Competitive ratios and the check suites over seeded instances."""
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.core.config import settings
from app.core.errors import AdversaryError, OracleLimitError, SuiteError, TraceNotDrainedError
from app.core.logger import activity_logger
from app.models.schemas import CheckFailure, CheckReport, Decision, RatioRecord, SimulationResult, SuiteParams
from app.models.switch import SEND, SwitchConfig, Trace, arrive, format_fraction
from app.services.adversary import build_lower_bound_instance
from app.services.engine import SimulationCursor, replay, simulate
from app.services.instances import compute_bounds, drain_extend, serialize_trace
from app.services.oracle import brute_force_benefit, max_count_for_value, optimal_benefit
from app.services.policies import GreedyPolicy, LowestValueFirstPolicy, Policy, RoundRobinPolicy, SeededRandomPolicy
from app.services.workloads import (
    gen_bursty,
    gen_random,
    random_general_config,
    random_restricted_config,
    random_values,
    tight_two_valued_trace,
    two_valued_config,
)

SUITES = (
    "upper-bounds",
    "lower-bound",
    "lemma-vm",
    "lemma-central",
    "lemma-weighted",
    "lemma-queuesize",
    "lemma-two-valued",
    "oracle-cross",
)


def applicable_bound(config: SwitchConfig) -> Fraction:
    """GREEDY's proven bound for the config's shape."""
    bounds = compute_bounds(config)
    return bounds.restricted_bound if config.is_restricted else bounds.general_bound


def competitive_ratio(
    config: SwitchConfig,
    trace: Trace,
    policy: Policy,
    *,
    instance_id: str = "instance",
    seed: Optional[int] = None,
    max_states: Optional[int] = None,
    bound_override: Optional[Fraction] = None,
    record_runtime: Optional[bool] = None,
) -> RatioRecord:
    if not trace.is_drained_for(config):
        raise TraceNotDrainedError(
            f"trace has {trace.trailing_sends} trailing sends for {trace.arrivals} arrivals; drain it first"
        )
    started = time.perf_counter()
    alg = simulate(config, trace, policy)
    opt = optimal_benefit(config, trace, max_states=max_states)
    if alg.benefit:
        ratio = Fraction(opt.optimal_benefit, alg.benefit)
    elif opt.optimal_benefit == 0:
        ratio = Fraction(1)
    else:
        raise RuntimeError(f"{policy.name} earned nothing on a drained trace where OPT earned {opt.optimal_benefit}")

    bound = slack = None
    satisfied = True
    if isinstance(policy, GreedyPolicy):
        bound = bound_override if bound_override is not None else applicable_bound(config)
        satisfied = ratio <= bound
        slack = bound - ratio

    record = settings.RECORD_RUNTIME if record_runtime is None else record_runtime
    return RatioRecord(
        instance_id=instance_id,
        seed=seed,
        policy=policy.name,
        alg_benefit=alg.benefit,
        opt_benefit=opt.optimal_benefit,
        ratio=ratio,
        applicable_bound=bound,
        bound_satisfied=satisfied,
        slack=slack,
        states_explored=opt.state_count,
        runtime_ms=round((time.perf_counter() - started) * 1000, 3) if record else None,
    )


def partition_phases(config: SwitchConfig, trace: Trace) -> List[Trace]:
    """
    Cut the trace after every send that leaves GREEDY empty (once something has
    arrived since the last cut). Each piece is re-drained, so both GREEDY and any
    other diligent schedule start and end every phase with empty queues.
    """
    cursor = SimulationCursor(config, GreedyPolicy())
    phases: List[Trace] = []
    current = []
    seen_arrival = False
    for event in trace.events:
        current.append(event)
        cursor.feed(event)
        if event.kind == "arrive":
            seen_arrival = True
        elif seen_arrival and cursor.total == 0:
            phases.append(drain_extend(config, Trace(events=tuple(current))))
            current, seen_arrival = [], False
    if seen_arrival:
        phases.append(drain_extend(config, Trace(events=tuple(current))))
    return phases


# --- suite plumbing ---

@dataclass
class _Outcome:
    tested: int = 0
    skipped: int = 0
    failures: List[CheckFailure] = field(default_factory=list)


class _Checker:
    """Collects failures for one instance."""

    def __init__(self, outcome: _Outcome, instance_id: str, config: SwitchConfig, trace: Trace):
        self.outcome = outcome
        self.instance_id = instance_id
        self.config = config
        self.trace = trace
        self.schedules: Dict[str, Sequence[Decision]] = {}

    def require(self, holds: bool, inequality: str, **values) -> None:
        if holds:
            return
        witness = {
            "config": self.config.model_dump(mode="json"),
            "trace": serialize_trace(self.trace),
            "schedules": {name: list(log) for name, log in self.schedules.items()},
        }
        witness.update({k: _jsonable(v) for k, v in values.items()})
        self.outcome.failures.append(
            CheckFailure(instance_id=self.instance_id, inequality=inequality, witness=witness)
        )


def _jsonable(value):
    if isinstance(value, Fraction):
        return format_fraction(value)
    if isinstance(value, tuple):
        return list(value)
    return value


def _sample_trace(rng: np.random.Generator, config: SwitchConfig, params: SuiteParams) -> Trace:
    steps = int(rng.integers(1, params.max_steps + 1))
    seed = int(rng.integers(0, 2**32))
    if rng.random() < 0.25:
        burst_len = int(rng.integers(1, 4))
        burst_size = int(rng.integers(1, params.max_capacity + 2))
        return gen_bursty(config, steps, burst_len, burst_size, seed)
    return gen_random(config, steps, params.max_arrivals, seed)


def _foils(config: SwitchConfig, trace: Trace, rng: np.random.Generator, max_states: Optional[int]) -> Dict[str, SimulationResult]:
    """Diligent schedules to compare GREEDY against: the oracle's and the baselines'."""
    opt = optimal_benefit(config, trace, max_states=max_states)
    random_policy = SeededRandomPolicy(int(rng.integers(0, 2**32)))
    return {
        "opt": replay(config, trace, opt.schedule),
        "round-robin": simulate(config, trace, RoundRobinPolicy()),
        "lowest-first": simulate(config, trace, LowestValueFirstPolicy()),
        random_policy.name: simulate(config, trace, random_policy),
    }


def _alpha(params: SuiteParams, index: int) -> int:
    return params.alphas[index % len(params.alphas)] if params.alphas else 2


# --- suites ---

def _upper_bounds(index: int, rng: np.random.Generator, params: SuiteParams, out: _Outcome) -> None:
    shape = index % 4
    if shape == 0:
        config = random_restricted_config(rng, params.max_values, params.max_capacity)
    elif shape == 1:
        config = random_general_config(rng, params.max_values, params.max_capacity)
    elif shape == 2:
        config = two_valued_config(_alpha(params, index // 4), int(rng.integers(1, params.max_capacity + 1)))
    else:
        config = random_general_config(rng, 2, params.max_capacity, m=2)
    trace = _sample_trace(rng, config, params)
    record = competitive_ratio(
        config, trace, GreedyPolicy(), instance_id="", max_states=params.max_states,
        bound_override=params.bound_override, record_runtime=False,
    )
    out.tested += 1
    check = _Checker(out, "", config, trace)
    check.require(record.opt_benefit >= record.alg_benefit, "OPT >= GREEDY",
                  opt=record.opt_benefit, greedy=record.alg_benefit)
    check.require(record.bound_satisfied, f"OPT/GREEDY <= {format_fraction(record.applicable_bound)}",
                  opt=record.opt_benefit, greedy=record.alg_benefit, ratio=record.ratio)


def _upper_bounds_fixtures(params: SuiteParams, out: _Outcome) -> None:
    for alpha in params.alphas:
        for capacity in (1, 2):
            config = two_valued_config(alpha, capacity)
            trace = tight_two_valued_trace(config)
            record = competitive_ratio(config, trace, GreedyPolicy(), max_states=params.max_states,
                                       bound_override=params.bound_override, record_runtime=False)
            out.tested += 1
            check = _Checker(out, f"tight(alpha={alpha},B={capacity})", config, trace)
            check.require(record.bound_satisfied, f"OPT/GREEDY <= {format_fraction(record.applicable_bound)}",
                          ratio=record.ratio)
            check.require(record.ratio == compute_bounds(config).restricted_bound,
                          "tight instance attains (alpha+2)/(alpha+1)", ratio=record.ratio)


def _check_transcript(values: Sequence[int], params: SuiteParams, out: _Outcome, label: str) -> None:
    for policy in (GreedyPolicy(), RoundRobinPolicy(), LowestValueFirstPolicy()):
        instance_id = f"{label}[{policy.name}]"
        try:
            transcript = build_lower_bound_instance(values, policy)
        except AdversaryError as e:
            config = SwitchConfig.restricted(values, 1)
            _Checker(out, instance_id, config, Trace()).require(False, "transcript invariants", error=str(e))
            out.tested += 1
            continue
        try:
            opt = optimal_benefit(transcript.config, transcript.trace, max_states=params.max_states)
        except OracleLimitError:
            out.skipped += 1
            continue
        out.tested += 1
        check = _Checker(out, instance_id, transcript.config, transcript.trace)
        check.schedules = {"alg": transcript.alg_schedule, "adv": transcript.adv_schedule}
        check.require(transcript.ratio >= transcript.lower_bound, "ADV/ALG >= 2 - v_m/sum(v)",
                      ratio=transcript.ratio, lower_bound=transcript.lower_bound)
        check.require(opt.optimal_benefit >= transcript.adv_benefit, "OPT >= ADV",
                      opt=opt.optimal_benefit, adv=transcript.adv_benefit)


def _lower_bound(index: int, rng: np.random.Generator, params: SuiteParams, out: _Outcome) -> None:
    m = int(rng.integers(1, params.max_values + 1))
    _check_transcript(random_values(rng, m), params, out, f"values#{index}")


def _lower_bound_fixtures(params: SuiteParams, out: _Outcome) -> None:
    for values in params.value_sets:
        _check_transcript(values, params, out, f"values{list(values)}")


def _lemma_vm(index: int, rng: np.random.Generator, params: SuiteParams, out: _Outcome) -> None:
    config = random_restricted_config(rng, params.max_values, params.max_capacity)
    trace = _sample_trace(rng, config, params)
    top = config.m - 1
    greedy = simulate(config, trace, GreedyPolicy())
    best = max_count_for_value(config, trace, top, max_states=params.max_states)
    out.tested += 1
    check = _Checker(out, "", config, trace)
    check.schedules = {"greedy": greedy.decision_log}
    check.require(best == greedy.sent_per_value[top], "max v_m-count == GREEDY's v_m-count",
                  max_count=best, greedy_count=greedy.sent_per_value[top])


def _restricted_with_foils(rng, params: SuiteParams, out: _Outcome, m: Optional[int] = None):
    config = random_restricted_config(rng, params.max_values, params.max_capacity, m=m)
    if m is None and config.m == 1:
        config = SwitchConfig.restricted(random_values(rng, 2), config.common_capacity)
    trace = _sample_trace(rng, config, params)
    greedy = simulate(config, trace, GreedyPolicy())
    foils = _foils(config, trace, rng, params.max_states)
    out.tested += 1
    check = _Checker(out, "", config, trace)
    check.schedules = {"greedy": greedy.decision_log, **{k: r.decision_log for k, r in foils.items()}}
    return config, greedy, foils, check


def _lemma_central(index: int, rng: np.random.Generator, params: SuiteParams, out: _Outcome) -> None:
    config, greedy, foils, check = _restricted_with_foils(rng, params, out)
    a = greedy.accepted_per_value
    m = config.m
    for name, result in foils.items():
        s = result.accepted_per_value
        for i in range(m - 1):
            lhs = sum(s[j] - a[j] for j in range(i, m - 1))
            rhs = sum(a[j] for j in range(i + 1, m))
            check.require(lhs <= rhs, f"sum_{{j>={i + 1}}}^{{m-1}} (A^S_j - A_j) <= sum_{{j>={i + 2}}}^{{m}} A_j",
                          schedule=name, i=i + 1, lhs=lhs, rhs=rhs)


def _lemma_weighted(index: int, rng: np.random.Generator, params: SuiteParams, out: _Outcome) -> None:
    config, greedy, foils, check = _restricted_with_foils(rng, params, out)
    v = config.values
    a = greedy.accepted_per_value
    m = config.m
    shifted = sum(v[j] * a[j + 1] for j in range(m - 1))
    for name, result in foils.items():
        s = result.accepted_per_value
        gained = sum(v[j] * (s[j] - a[j]) for j in range(m - 1))
        check.require(gained <= shifted, "sum v_j (A^S_j - A_j) <= sum v_j A_{j+1}",
                      schedule=name, lhs=gained, rhs=shifted)
    r = compute_bounds(config).r
    top = sum(v[j + 1] * a[j + 1] for j in range(m - 1))
    check.require(shifted <= r * top, "sum v_j A_{j+1} <= r * sum v_{j+1} A_{j+1}",
                  lhs=shifted, rhs=r * top, r=r)


def _lemma_queuesize(index: int, rng: np.random.Generator, params: SuiteParams, out: _Outcome) -> None:
    config = two_valued_config(_alpha(params, index), int(rng.integers(1, params.max_capacity + 1)))
    trace = _sample_trace(rng, config, params)
    greedy = simulate(config, trace, GreedyPolicy())
    foils = _foils(config, trace, rng, params.max_states)
    out.tested += 1
    check = _Checker(out, "", config, trace)
    check.schedules = {"greedy": greedy.decision_log, **{k: r.decision_log for k, r in foils.items()}}
    b = config.common_capacity
    for name, result in foils.items():
        for t, (mine, theirs) in enumerate(zip(greedy.occupancy_timeline, result.occupancy_timeline)):
            if theirs > mine + b:
                check.require(False, "b^S(t) <= b(t) + B", schedule=name, event=t, b_s=theirs, b=mine, B=b)
                break


def _lemma_two_valued(index: int, rng: np.random.Generator, params: SuiteParams, out: _Outcome) -> None:
    config = two_valued_config(_alpha(params, index), int(rng.integers(1, params.max_capacity + 1)))
    trace = _sample_trace(rng, config, params)
    bound = params.bound_override if params.bound_override is not None else compute_bounds(config).restricted_bound
    greedy = simulate(config, trace, GreedyPolicy())
    opt = optimal_benefit(config, trace, max_states=params.max_states, prefer_value_index=1)
    out.tested += 1
    whole = _Checker(out, "", config, trace)
    whole.schedules = {"greedy": greedy.decision_log, "opt": opt.schedule}
    if greedy.benefit:
        whole.require(Fraction(opt.optimal_benefit, greedy.benefit) <= bound, f"OPT/GREEDY <= {format_fraction(bound)}",
                      opt=opt.optimal_benefit, greedy=greedy.benefit)
    for p, phase in enumerate(partition_phases(config, trace)):
        g = simulate(config, phase, GreedyPolicy())
        o = optimal_benefit(config, phase, max_states=params.max_states, prefer_value_index=1)
        check = _Checker(out, f"phase {p}", config, phase)
        check.schedules = {"greedy": g.decision_log, "opt": o.schedule}
        a, s = g.accepted_per_value, o.accepted_per_value
        check.require(s[1] == a[1], "A*_2 == A_2", opt=s[1], greedy=a[1])
        check.require(s[0] - a[0] <= a[0], "A*_1 - A_1 <= A_1", opt=s[0], greedy=a[0])
        check.require(Fraction(o.optimal_benefit, g.benefit) <= bound, f"phase OPT/GREEDY <= {format_fraction(bound)}",
                      opt=o.optimal_benefit, greedy=g.benefit)


def _oracle_cross(index: int, rng: np.random.Generator, params: SuiteParams, out: _Outcome) -> None:
    capacity = min(params.max_capacity, 2)
    if index % 2:
        config = random_general_config(rng, min(params.max_values, 3), capacity, max_queues=4)
    else:
        config = random_restricted_config(rng, min(params.max_values, 4), capacity)
    steps = int(rng.integers(1, 5))
    trace = gen_random(config, steps, 2, int(rng.integers(0, 2**32)))
    opt = optimal_benefit(config, trace, max_states=params.max_states)
    brute = brute_force_benefit(config, trace)
    out.tested += 1
    greedy = simulate(config, trace, GreedyPolicy())
    check = _Checker(out, "", config, trace)
    check.schedules = {"opt": opt.schedule, "greedy": greedy.decision_log}
    check.require(opt.optimal_benefit == brute, "DP == brute force", dp=opt.optimal_benefit, brute=brute)
    check.require(replay(config, trace, opt.schedule).benefit == opt.optimal_benefit,
                  "oracle schedule replays to its benefit")
    check.require(opt.optimal_benefit >= greedy.benefit, "OPT >= GREEDY", opt=opt.optimal_benefit, greedy=greedy.benefit)

    more_sends = trace.extended([SEND])
    extra = optimal_benefit(config, more_sends, max_states=params.max_states).optimal_benefit
    check.require(extra >= opt.optimal_benefit, "OPT non-decreasing under an appended send",
                  before=opt.optimal_benefit, after=extra)
    position = int(rng.integers(0, len(trace.events) + 1))
    queue = int(rng.integers(0, config.n))
    events = trace.events[:position] + (arrive(queue),) + trace.events[position:]
    extra = optimal_benefit(config, Trace(events=events), max_states=params.max_states).optimal_benefit
    check.require(extra >= opt.optimal_benefit, "OPT non-decreasing under an inserted arrival",
                  before=opt.optimal_benefit, after=extra, position=position, queue=queue)


_TRIALS: Dict[str, Callable[[int, np.random.Generator, SuiteParams, _Outcome], None]] = {
    "upper-bounds": _upper_bounds,
    "lower-bound": _lower_bound,
    "lemma-vm": _lemma_vm,
    "lemma-central": _lemma_central,
    "lemma-weighted": _lemma_weighted,
    "lemma-queuesize": _lemma_queuesize,
    "lemma-two-valued": _lemma_two_valued,
    "oracle-cross": _oracle_cross,
}

_FIXTURES: Dict[str, Callable[[SuiteParams, _Outcome], None]] = {
    "upper-bounds": _upper_bounds_fixtures,
    "lower-bound": _lower_bound_fixtures,
}


def _run_trial(args: Tuple[str, int, int, SuiteParams]) -> _Outcome:
    suite, seed, index, params = args
    out = _Outcome()
    rng = np.random.default_rng([seed, index])
    try:
        _TRIALS[suite](index, rng, params, out)
    except OracleLimitError:
        out.skipped += 1
    instance_id = f"{suite}#{seed}.{index}"
    out.failures = [
        f.model_copy(update={"instance_id": f"{instance_id} {f.instance_id}".rstrip()})
        for f in out.failures
    ]
    return out


def fan_out(tasks: Iterable, fn: Callable, workers: int) -> Iterable:
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            yield from pool.map(fn, tasks, chunksize=16)
    else:
        yield from map(fn, tasks)


def run_suite(suite_name: str, params: Optional[SuiteParams] = None, seed: int = 0) -> CheckReport:
    """Evaluate one suite's inequalities over seeded instances (plus its bundled fixtures)."""
    if suite_name not in _TRIALS:
        raise SuiteError(f"unknown suite {suite_name!r}; expected one of {', '.join(SUITES)}")
    if seed < 0:
        raise SuiteError(f"seed must be non-negative, got {seed}")
    params = params or SuiteParams()
    trials = params.trials if params.trials is not None else settings.DEFAULT_TRIALS
    workers = params.workers or settings.WORKERS
    activity_logger.log_event("Harness", "START", suite_name, f"{trials} trials, seed {seed}, {workers} worker(s)")

    total = _Outcome()
    if suite_name in _FIXTURES:
        _FIXTURES[suite_name](params, total)
        total.failures = [f.model_copy(update={"instance_id": f"{suite_name}:fixture {f.instance_id}"})
                          for f in total.failures]
    tasks = ((suite_name, seed, i, params) for i in range(trials))
    for outcome in fan_out(tasks, _run_trial, workers):
        total.tested += outcome.tested
        total.skipped += outcome.skipped
        total.failures.extend(outcome.failures)

    for failure in total.failures:
        activity_logger.log_check_failure(suite_name, failure.instance_id, failure.inequality,
                                          str(failure.witness))
    if total.skipped:
        activity_logger.log_event("Harness", "SKIP", suite_name, f"{total.skipped} instances over oracle limits")
    status = "FAIL" if total.failures else "SUCCESS"
    activity_logger.log_event("Harness", status, suite_name,
                              f"{total.tested} instances, {len(total.failures)} failures")
    return CheckReport(
        suite=suite_name,
        seed=seed,
        instances_tested=total.tested,
        skipped=total.skipped,
        failures=tuple(total.failures),
    )
