
from pydantic import BaseModel, ConfigDict, Field, StrictInt, computed_field, model_validator
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from app.models.switch import ExactFraction, QueueSpec, SwitchConfig, Trace

IDLE = "idle"

# One entry per send event: the queue served, or "idle" when every queue was empty
Decision = Union[int, Literal["idle"]]


class SimulationResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    policy: str
    benefit: int = Field(..., description="Sum of values of the sent packets")
    accepted_per_value: Tuple[int, ...]
    sent_per_value: Tuple[int, ...]
    rejected_count: int
    occupancy_timeline: Tuple[int, ...] = Field(..., description="Total occupancy after each event")
    final_occupancy: Tuple[int, ...]
    decision_log: Tuple[Decision, ...]


class OracleResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    optimal_benefit: int
    schedule: Tuple[Decision, ...]
    accepted_per_value: Tuple[int, ...]
    sent_per_value: Tuple[int, ...]
    state_count: int = Field(..., description="DP states explored")
    mode: Literal["dense", "sparse"]


class AdversaryTranscript(BaseModel):
    model_config = ConfigDict(frozen=True)

    policy: str
    config: SwitchConfig
    trace: Trace
    observed_sends: Tuple[int, ...] = Field(..., description="Value index ALG sent in steps 1..m")
    value_sets: Tuple[Tuple[int, ...], ...] = Field(..., description="Arriving value indices V_1..V_m")
    alg_schedule: Tuple[Decision, ...]
    adv_schedule: Tuple[Decision, ...]
    alg_benefit: int
    adv_benefit: int
    ratio: ExactFraction
    lower_bound: ExactFraction


class RatioRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    instance_id: str
    seed: Optional[int] = None
    policy: str
    alg_benefit: int
    opt_benefit: int
    ratio: ExactFraction
    applicable_bound: Optional[ExactFraction] = None
    bound_satisfied: bool
    slack: Optional[ExactFraction] = None
    states_explored: int = 0
    runtime_ms: Optional[float] = None


class CheckFailure(BaseModel):
    model_config = ConfigDict(frozen=True)

    instance_id: str
    inequality: str
    witness: Dict[str, Any]


class CheckReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    suite: str
    seed: int
    instances_tested: int
    skipped: int = 0
    failures: Tuple[CheckFailure, ...] = ()

    @computed_field
    @property
    def passed(self) -> bool:
        return not self.failures


class SuiteParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    trials: Optional[int] = Field(None, ge=0, description="Defaults to settings.DEFAULT_TRIALS")
    max_values: int = Field(5, ge=1)
    max_capacity: int = Field(3, ge=1)
    max_steps: int = Field(30, ge=1)
    max_arrivals: int = Field(4, ge=0)
    alphas: Tuple[int, ...] = (2, 3, 10)
    value_sets: Tuple[Tuple[int, ...], ...] = ((1, 2), (1, 2, 4), (1, 3, 9, 27))
    max_states: Optional[int] = Field(None, ge=1)
    bound_override: Optional[ExactFraction] = Field(
        None, description="Replace every applicable bound (harness self-test)"
    )
    workers: Optional[int] = Field(None, ge=1)


class GeneratorSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["random", "bursty", "two-valued"] = "random"
    steps: int = Field(20, ge=0)
    arrivals_per_step_max: int = Field(3, ge=0)
    burst_len: int = Field(3, ge=0)
    burst_size: int = Field(2, ge=0)
    priority_share: float = Field(0.5, ge=0.0, le=1.0)


class SweepCell(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    values: Tuple[StrictInt, ...]
    capacity: Optional[int] = Field(None, ge=1, description="Restricted shape: one queue per value")
    queues: Optional[Tuple[QueueSpec, ...]] = None
    generator: GeneratorSpec = GeneratorSpec()
    policies: Tuple[str, ...] = ("greedy",)
    trials: int = Field(10, ge=0)
    seed: int = 0

    @model_validator(mode="after")
    def _check_shape(self) -> "SweepCell":
        if (self.capacity is None) == (self.queues is None):
            raise ValueError("give exactly one of 'capacity' or 'queues'")
        return self

    def config(self) -> SwitchConfig:
        if self.queues is None:
            return SwitchConfig.restricted(self.values, self.capacity)
        return SwitchConfig(values=self.values, queues=self.queues)


class SweepSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    cells: List[SweepCell]
    include_fixtures: bool = False
    max_states: Optional[int] = Field(None, ge=1)


class SweepReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    records: Tuple[RatioRecord, ...]
    skipped: int = Field(0, description="Instances over the oracle's state cap")
