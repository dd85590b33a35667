from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from app.models.switch import Event, SwitchConfig, Trace
from app.services.instances import drain_extend, parse_trace


class InstanceRequest(BaseModel):
    """A config plus a trace, given either as JSON Lines text or as an event list."""

    config: SwitchConfig
    trace_jsonl: Optional[str] = Field(None, description="Trace in the JSON Lines file format")
    events: Optional[List[Event]] = Field(None, description="Trace as a list of {\"event\": ..., \"queue\": ...} objects")
    drain: bool = Field(False, description="Append sends until the trace is drained")

    @model_validator(mode="after")
    def _one_trace(self) -> "InstanceRequest":
        if (self.trace_jsonl is None) == (self.events is None):
            raise ValueError("give exactly one of 'trace_jsonl' or 'events'")
        return self

    def trace(self) -> Trace:
        trace = parse_trace(self.trace_jsonl) if self.trace_jsonl is not None else Trace(events=tuple(self.events))
        return drain_extend(self.config, trace) if self.drain else trace
