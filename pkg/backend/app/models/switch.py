from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Annotated, Iterable, List, Literal, Optional, Sequence, Tuple

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PlainSerializer,
    PlainValidator,
    StrictInt,
    WithJsonSchema,
    field_validator,
    model_serializer,
    model_validator,
)

from app.core.errors import ConfigError


def parse_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("expected a fraction, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ZeroDivisionError:
            raise ValueError(f"zero denominator in {value!r}") from None
    raise ValueError("expected a fraction as 'num/den' or an integer")


def format_fraction(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


# Exact rational, serialized as "num/den"
ExactFraction = Annotated[
    Fraction,
    PlainValidator(parse_fraction),
    PlainSerializer(format_fraction, return_type=str),
    WithJsonSchema({"type": "string", "pattern": r"^-?\d+(/\d+)?$", "examples": ["3/2"]}),
]


class QueueSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    value_index: StrictInt = Field(..., description="0-based index into SwitchConfig.values")
    capacity: StrictInt = Field(..., description="Queue capacity B_k")


class SwitchConfig(BaseModel):
    """
    A switch with n queues, each storing packets of exactly one value.

    `values` are strictly increasing positive integers v_1 < ... < v_m; queue k
    holds v_{value_index}-packets and has room for `capacity` of them.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    values: Tuple[StrictInt, ...]
    queues: Tuple[QueueSpec, ...]

    @field_validator("values")
    @classmethod
    def _check_values(cls, values: Tuple[int, ...]) -> Tuple[int, ...]:
        if not values:
            raise ConfigError("values", "must be non-empty")
        for i, v in enumerate(values):
            if v < 1:
                raise ConfigError(f"values[{i}]", f"value {v} is not a positive integer")
        for i in range(1, len(values)):
            if values[i] <= values[i - 1]:
                raise ConfigError("values", "values not strictly increasing")
        return values

    @model_validator(mode="after")
    def _check_queues(self) -> "SwitchConfig":
        if not self.queues:
            raise ConfigError("queues", "must be non-empty")
        for k, q in enumerate(self.queues):
            if not 0 <= q.value_index < len(self.values):
                raise ConfigError(
                    f"queues[{k}].value_index",
                    f"index {q.value_index} out of range for {len(self.values)} values",
                )
            if q.capacity < 1:
                raise ConfigError(f"queues[{k}].capacity", f"capacity {q.capacity} must be at least 1")
        return self

    @classmethod
    def restricted(cls, values: Sequence[int], capacity: int) -> "SwitchConfig":
        """One queue per value, all of capacity B."""
        return cls(
            values=tuple(values),
            queues=tuple(QueueSpec(value_index=i, capacity=capacity) for i in range(len(values))),
        )

    @property
    def m(self) -> int:
        return len(self.values)

    @property
    def n(self) -> int:
        return len(self.queues)

    @cached_property
    def capacities(self) -> Tuple[int, ...]:
        return tuple(q.capacity for q in self.queues)

    @cached_property
    def queue_values(self) -> Tuple[int, ...]:
        """Packet value served by each queue."""
        return tuple(self.values[q.value_index] for q in self.queues)

    @cached_property
    def common_capacity(self) -> Optional[int]:
        caps = set(self.capacities)
        return caps.pop() if len(caps) == 1 else None

    @cached_property
    def is_restricted(self) -> bool:
        indices = sorted(q.value_index for q in self.queues)
        return indices == list(range(self.m)) and self.common_capacity is not None

    def queues_of_value(self, value_index: int) -> Tuple[int, ...]:
        return tuple(k for k, q in enumerate(self.queues) if q.value_index == value_index)


class Event(BaseModel):
    """One trace event; dumps in the trace file's line shape, `{"event": ..., "queue": ...}`."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["arrive", "send"]
    queue: Optional[StrictInt] = None

    @model_validator(mode="before")
    @classmethod
    def _from_line(cls, data):
        if isinstance(data, dict) and "event" in data and "kind" not in data:
            data = {("kind" if key == "event" else key): v for key, v in data.items()}
        return data

    @model_serializer
    def _as_line(self) -> dict:
        if self.kind == "arrive":
            return {"event": "arrive", "queue": self.queue}
        return {"event": "send"}

    @model_validator(mode="after")
    def _check_shape(self) -> "Event":
        if self.kind == "arrive":
            if self.queue is None or self.queue < 0:
                raise ValueError("arrive events need a non-negative queue id")
        elif self.queue is not None:
            raise ValueError("send events carry no queue id")
        return self


SEND = Event(kind="send")


@lru_cache(maxsize=None)
def arrive(queue: int) -> Event:
    return Event(kind="arrive", queue=queue)


class Trace(BaseModel):
    """
    Ordered arrive/send events. The k-th send ends step k; arrivals between two
    sends belong to the step ended by the later send.
    """
    model_config = ConfigDict(frozen=True)

    events: Tuple[Event, ...] = ()

    @classmethod
    def from_steps(cls, steps: Iterable[Iterable[int]], trailing_sends: int = 0) -> "Trace":
        events: List[Event] = []
        for step in steps:
            events.extend(arrive(q) for q in step)
            events.append(SEND)
        events.extend([SEND] * trailing_sends)
        return cls(events=tuple(events))

    def extended(self, events: Iterable[Event]) -> "Trace":
        return Trace(events=self.events + tuple(events))

    @cached_property
    def arrivals(self) -> int:
        return sum(1 for e in self.events if e.kind == "arrive")

    @cached_property
    def sends(self) -> int:
        return len(self.events) - self.arrivals

    @cached_property
    def trailing_sends(self) -> int:
        """Send events after the last arrival."""
        count = 0
        for e in reversed(self.events):
            if e.kind == "arrive":
                break
            count += 1
        return count

    def is_drained_for(self, config: "SwitchConfig") -> bool:
        """Drained for a config: enough trailing sends to empty its whole buffer."""
        return self.trailing_sends >= min(self.arrivals, sum(config.capacities))


class BoundReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    r: ExactFraction = Field(..., description="max_i v_i/v_{i+1}; 0 when m = 1")
    alpha: Optional[ExactFraction] = Field(None, description="v_2/v_1, present iff m = 2")
    general_bound: ExactFraction
    restricted_bound: ExactFraction
    lower_bound: ExactFraction


class TraceValidation(BaseModel):
    model_config = ConfigDict(frozen=True)

    ok: bool
    drained: bool
    violations: Tuple[str, ...] = ()
    warnings: Tuple[str, ...] = ()
