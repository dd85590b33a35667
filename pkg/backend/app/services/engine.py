from dataclasses import dataclass
from typing import List, Literal, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, StrictInt, ValidationError

from app.core.errors import DecisionLogError, DiligenceViolation, TraceError
from app.models.schemas import IDLE, Decision, SimulationResult
from app.models.switch import Event, SwitchConfig, Trace
from app.services.policies import Policy, ReplayPolicy


@dataclass(frozen=True, slots=True)
class QueueState:
    occupancy: Tuple[int, ...]
    step: int  # 1-based index of the send event being decided

    @property
    def total(self) -> int:
        return sum(self.occupancy)


class SimulationCursor:
    """
    Resumable simulation: feed events one at a time and inspect the state in
    between. Arrivals are accepted iff the destination queue has room; the
    policy is only asked which non-empty queue serves a send event.
    """

    def __init__(self, config: SwitchConfig, policy: Policy):
        self.config = config
        self.policy = policy
        policy.reset()
        self._capacities = config.capacities
        self._value_index = tuple(q.value_index for q in config.queues)
        self._occupancy = [0] * config.n
        self._total = 0
        self._accepted = [0] * config.m
        self._sent = [0] * config.m
        self._rejected = 0
        self._benefit = 0
        self._timeline: List[int] = []
        self._log: List[Decision] = []
        self._events = 0

    @property
    def step(self) -> int:
        return len(self._log) + 1

    @property
    def total(self) -> int:
        return self._total

    @property
    def state(self) -> QueueState:
        return QueueState(tuple(self._occupancy), self.step)

    def arrive(self, queue_id: int) -> bool:
        if not 0 <= queue_id < self.config.n:
            raise TraceError(f"event {self._events}: queue index out of range (queue {queue_id}, n = {self.config.n})")
        self._events += 1
        accepted = self._occupancy[queue_id] < self._capacities[queue_id]
        if accepted:
            self._occupancy[queue_id] += 1
            self._total += 1
            self._accepted[self._value_index[queue_id]] += 1
        else:
            self._rejected += 1
        self._timeline.append(self._total)
        return accepted

    def send(self) -> Decision:
        step = self.step
        self._events += 1
        if self._total:
            choice = self.policy.choose(self.config, self.state)
            if choice == IDLE:
                raise DiligenceViolation(step, f"{self.policy.name} idled while a queue is non-empty")
            if isinstance(choice, bool) or not isinstance(choice, int) or not 0 <= choice < self.config.n:
                raise DiligenceViolation(step, f"{self.policy.name} chose out-of-range queue {choice!r}")
            if not self._occupancy[choice]:
                raise DiligenceViolation(step, f"{self.policy.name} chose empty queue {choice}")
            self._occupancy[choice] -= 1
            self._total -= 1
            vi = self._value_index[choice]
            self._sent[vi] += 1
            self._benefit += self.config.values[vi]
            decision: Decision = choice
        else:
            self.policy.on_idle(self.config, self.state)
            decision = IDLE
        self._log.append(decision)
        self._timeline.append(self._total)
        return decision

    def feed(self, event: Event) -> Union[bool, Decision]:
        if event.kind == "arrive":
            return self.arrive(event.queue)
        return self.send()

    def result(self) -> SimulationResult:
        return SimulationResult(
            policy=self.policy.name,
            benefit=self._benefit,
            accepted_per_value=tuple(self._accepted),
            sent_per_value=tuple(self._sent),
            rejected_count=self._rejected,
            occupancy_timeline=tuple(self._timeline),
            final_occupancy=tuple(self._occupancy),
            decision_log=tuple(self._log),
        )


def simulate(config: SwitchConfig, trace: Trace, policy: Policy) -> SimulationResult:
    cursor = SimulationCursor(config, policy)
    for event in trace.events:
        cursor.feed(event)
    return cursor.result()


def replay(config: SwitchConfig, trace: Trace, decision_log: Sequence[Decision]) -> SimulationResult:
    """Score a fixed schedule; raises DiligenceViolation if it is not a diligent schedule for the trace."""
    if len(decision_log) != trace.sends:
        raise DecisionLogError(f"decision log has {len(decision_log)} entries for {trace.sends} send events")
    return simulate(config, trace, ReplayPolicy(decision_log))


# --- Decision log JSON Lines ---

class _DecisionLine(BaseModel):
    model_config = ConfigDict(extra="forbid")
    send: Union[Literal["idle"], StrictInt] = Field(...)


def parse_decision_log(text: str) -> Tuple[Decision, ...]:
    log: List[Decision] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            entry = _DecisionLine.model_validate_json(line).send
        except ValidationError as exc:
            raise DecisionLogError(f"line {lineno}: {exc.errors()[0]['msg']}") from None
        if entry != IDLE and entry < 0:
            raise DecisionLogError(f"line {lineno}: negative queue index {entry}")
        log.append(entry)
    return tuple(log)


def serialize_decision_log(decision_log: Sequence[Decision]) -> str:
    return "".join(_DecisionLine(send=d).model_dump_json() + "\n" for d in decision_log)
