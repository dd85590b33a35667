from fractions import Fraction
from typing import List, Sequence

from app.core.errors import AdversaryError
from app.core.logger import activity_logger
from app.models.schemas import IDLE, AdversaryTranscript, Decision
from app.models.switch import SEND, Event, SwitchConfig, Trace, arrive
from app.services.engine import SimulationCursor, replay
from app.services.policies import Policy


def build_lower_bound_instance(values: Sequence[int], policy: Policy) -> AdversaryTranscript:
    """
    Plays the lower-bound construction against a deterministic policy.

    One unit-capacity queue per value. In step t the still-unsent values V_t
    arrive; the policy's send s_t is observed and V_{t+1} = V_t - {s_t}. The
    offline schedule sends s_{t+1} in step t < m and drains the rest in
    descending value order in steps m..2m-1.
    """
    if not policy.deterministic:
        raise AdversaryError(f"policy {policy.name} is randomized; the construction needs a deterministic policy")
    config = SwitchConfig.restricted(values, capacity=1)
    m = config.m
    activity_logger.log_event("Adversary", "START", policy.name, f"values {list(config.values)}")

    cursor = SimulationCursor(config, policy)
    events: List[Event] = []
    remaining = list(range(m))
    observed: List[int] = []
    value_sets = []
    for _ in range(m):
        value_sets.append(tuple(remaining))
        for i in remaining:
            events.append(arrive(i))
            cursor.arrive(i)
        events.append(SEND)
        sent = cursor.send()
        if sent == IDLE or sent not in remaining:
            raise AdversaryError(f"{policy.name} sent {sent!r}, expected one of the arriving values {remaining}")
        observed.append(sent)
        remaining.remove(sent)
    for _ in range(m - 1):
        events.append(SEND)
        cursor.send()

    trace = Trace(events=tuple(events))
    alg = cursor.result()
    adv_schedule: List[Decision] = list(observed[1:]) + list(range(m - 1, -1, -1))
    adv = replay(config, trace, adv_schedule)

    total = sum(config.values)
    expected_adv = 2 * total - config.values[observed[0]]
    late_arrivals = m * (m - 1) // 2
    if alg.benefit != total:
        raise AdversaryError(f"ALG earned {alg.benefit}, the construction forces {total}")
    if adv.benefit != expected_adv:
        raise AdversaryError(f"ADV earned {adv.benefit}, expected 2*sum - s_1 = {expected_adv}")
    if alg.rejected_count != late_arrivals:
        raise AdversaryError(f"ALG rejected {alg.rejected_count} packets, expected all {late_arrivals} late arrivals")

    transcript = AdversaryTranscript(
        policy=policy.name,
        config=config,
        trace=trace,
        observed_sends=tuple(observed),
        value_sets=tuple(value_sets),
        alg_schedule=alg.decision_log,
        adv_schedule=tuple(adv_schedule),
        alg_benefit=alg.benefit,
        adv_benefit=adv.benefit,
        ratio=Fraction(adv.benefit, alg.benefit),
        lower_bound=2 - Fraction(config.values[-1], total),
    )
    activity_logger.log_event("Adversary", "SUCCESS", policy.name, f"ratio {adv.benefit}/{alg.benefit}")
    return transcript
