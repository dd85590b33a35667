from fractions import Fraction
from typing import Annotated, List, Literal, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, StrictInt, TypeAdapter, ValidationError

from app.core.errors import ConfigError, ConfigSyntaxError, TraceFormatError
from app.models.switch import (
    SEND,
    BoundReport,
    Event,
    SwitchConfig,
    Trace,
    TraceValidation,
    arrive,
)


def _loc_to_field(loc: Tuple) -> str:
    field = ""
    for part in loc:
        if isinstance(part, int):
            field += f"[{part}]"
        else:
            field += f".{part}" if field else str(part)
    return field or "config"


def parse_config(text: str) -> SwitchConfig:
    """Parse and validate a JSON switch config."""
    try:
        return SwitchConfig.model_validate_json(text)
    except ValidationError as exc:
        err = exc.errors()[0]
        if err["type"] == "json_invalid":
            raise ConfigSyntaxError("config", f"malformed JSON ({err['msg']})") from None
        original = err.get("ctx", {}).get("error")
        if isinstance(original, ConfigError):
            raise original from None
        raise ConfigError(_loc_to_field(err["loc"]), err["msg"]) from None


def serialize_config(config: SwitchConfig) -> str:
    return config.model_dump_json()


# --- JSON Lines trace format ---

class _ArriveLine(BaseModel):
    model_config = ConfigDict(extra="forbid")
    event: Literal["arrive"]
    queue: StrictInt = Field(..., ge=0)


class _SendLine(BaseModel):
    model_config = ConfigDict(extra="forbid")
    event: Literal["send"]


_TRACE_LINE = TypeAdapter(Annotated[Union[_ArriveLine, _SendLine], Field(discriminator="event")])


def _line_error(err: dict) -> str:
    kind = err["type"]
    if kind == "json_invalid":
        return "malformed JSON"
    if kind == "union_tag_invalid":
        return f"unknown event kind {err.get('ctx', {}).get('tag')!r}"
    if kind == "union_tag_not_found":
        return "missing 'event' key"
    return f"{_loc_to_field(err['loc'][1:]) or 'event'}: {err['msg']}"


def parse_trace(text: str) -> Trace:
    events: List[Event] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            parsed = _TRACE_LINE.validate_json(line)
        except ValidationError as exc:
            raise TraceFormatError(lineno, _line_error(exc.errors()[0])) from None
        events.append(arrive(parsed.queue) if parsed.event == "arrive" else SEND)
    return Trace(events=tuple(events))


def serialize_trace(trace: Trace) -> str:
    return "".join(e.model_dump_json() + "\n" for e in trace.events)


def validate_trace(config: SwitchConfig, trace: Trace) -> TraceValidation:
    """Collects violations instead of raising; not being drained is only a warning."""
    violations = []
    for i, e in enumerate(trace.events):
        if e.kind == "arrive" and not 0 <= e.queue < config.n:
            violations.append(f"event {i}: queue index out of range (queue {e.queue}, n = {config.n})")
    warnings = []
    drained = trace.is_drained_for(config)
    if not drained:
        warnings.append(
            f"not drained: {trace.trailing_sends} trailing sends for {trace.arrivals} arrivals"
        )
    return TraceValidation(
        ok=not violations,
        drained=drained,
        violations=tuple(violations),
        warnings=tuple(warnings),
    )


def compute_bounds(config: SwitchConfig) -> BoundReport:
    v = config.values
    m = config.m
    r = max((Fraction(v[i], v[i + 1]) for i in range(m - 1)), default=Fraction(0))
    lower = 2 - Fraction(v[-1], sum(v))
    if m == 2:
        alpha = Fraction(v[1], v[0])
        # (alpha+1)/alpha needs at most one queue per value; same-valued queues can cost GREEDY up to 2
        single = all(len(config.queues_of_value(i)) <= 1 for i in range(m))
        return BoundReport(
            r=r,
            alpha=alpha,
            general_bound=(alpha + 1) / alpha if single else Fraction(2),
            restricted_bound=(alpha + 2) / (alpha + 1),
            lower_bound=lower,
        )
    return BoundReport(r=r, alpha=None, general_bound=Fraction(2), restricted_bound=1 + r, lower_bound=lower)


def drain_extend(config: SwitchConfig, trace: Trace) -> Trace:
    """
    Append sends until the sends after the last arrival match the total arrival
    count. The count does not depend on `config`; the result is drained for it.
    """
    missing = trace.arrivals - trace.trailing_sends
    if missing <= 0:
        return trace
    return trace.extended([SEND] * missing)
