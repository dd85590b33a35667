from typing import List, Optional

from fastapi import APIRouter, HTTPException
from pydantic import Field

from app.api.api_v1.inputs import InstanceRequest
from app.core.logger import activity_logger
from app.models.schemas import Decision, SimulationResult
from app.services.engine import replay, simulate
from app.services.policies import make_policy

router = APIRouter()


class SimulateRequest(InstanceRequest):
    policy: str = Field("greedy", description="greedy | round-robin | lowest-first | random:<seed>")
    seed: Optional[int] = Field(None, description="Seed for the plain 'random' policy")


class ReplayRequest(InstanceRequest):
    decision_log: List[Decision] = Field(..., description="One entry per send event: a queue index or 'idle'")


@router.post("/simulate", response_model=SimulationResult)
def simulate_trace(request: SimulateRequest):
    """Run an online policy over the trace."""
    if request.policy.startswith("replay:"):
        raise HTTPException(status_code=422, detail="use /simulation/replay to score a decision log")
    policy = make_policy(request.policy, seed=request.seed)
    trace = request.trace()
    activity_logger.log_event("Simulation", "START", policy.name, f"{len(trace.events)} events")
    result = simulate(request.config, trace, policy)
    activity_logger.log_event("Simulation", "SUCCESS", policy.name, f"benefit {result.benefit}")
    return result


@router.post("/replay", response_model=SimulationResult)
def replay_schedule(request: ReplayRequest):
    """Score a fixed send schedule; rejects schedules that are not diligent."""
    result = replay(request.config, request.trace(), request.decision_log)
    activity_logger.log_event("Simulation", "SUCCESS", "replay", f"benefit {result.benefit}")
    return result
