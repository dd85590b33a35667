from typing import Optional

from fastapi import APIRouter
from pydantic import BaseModel, Field

from app.api.api_v1.inputs import InstanceRequest
from app.core.logger import activity_logger
from app.models.schemas import OracleResult, RatioRecord
from app.models.switch import BoundReport, SwitchConfig
from app.services.harness import competitive_ratio
from app.services.instances import compute_bounds
from app.services.oracle import optimal_benefit
from app.services.policies import make_policy

router = APIRouter()


class OptimalRequest(InstanceRequest):
    max_states: Optional[int] = Field(None, ge=1, description="Cap on events x occupancy states")
    prefer_value_index: Optional[int] = Field(None, ge=0, description="Among optimal schedules, send most of this value")


class RatioRequest(InstanceRequest):
    policy: str = "greedy"
    seed: Optional[int] = None
    max_states: Optional[int] = Field(None, ge=1)


class BoundsRequest(BaseModel):
    config: SwitchConfig


@router.post("/optimal", response_model=OracleResult)
def solve_optimal(request: OptimalRequest):
    trace = request.trace()
    activity_logger.log_event("Oracle", "START", "optimal", f"{len(trace.events)} events, {request.config.n} queues")
    result = optimal_benefit(
        request.config, trace, max_states=request.max_states, prefer_value_index=request.prefer_value_index
    )
    activity_logger.log_event("Oracle", "SUCCESS", "optimal", f"benefit {result.optimal_benefit}, {result.state_count} states")
    return result


@router.post("/ratio", response_model=RatioRecord)
def ratio(request: RatioRequest):
    """OPT/ALG on a drained trace, with GREEDY's bound when the policy is GREEDY."""
    policy = make_policy(request.policy, seed=request.seed)
    record = competitive_ratio(
        request.config, request.trace(), policy, seed=request.seed, max_states=request.max_states
    )
    activity_logger.log_event("Oracle", "SUCCESS", policy.name, f"ratio {record.ratio}")
    return record


@router.post("/bounds", response_model=BoundReport)
def bounds(request: BoundsRequest):
    return compute_bounds(request.config)
