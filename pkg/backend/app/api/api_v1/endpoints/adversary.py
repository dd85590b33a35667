from typing import List

from fastapi import APIRouter
from pydantic import BaseModel, Field, StrictInt

from app.models.schemas import AdversaryTranscript
from app.services.adversary import build_lower_bound_instance
from app.services.policies import make_policy

router = APIRouter()


class AdversaryRequest(BaseModel):
    values: List[StrictInt] = Field(..., min_length=1, description="Strictly increasing packet values")
    policy: str = Field("greedy", description="Any deterministic policy name")


@router.post("/build", response_model=AdversaryTranscript)
def build(request: AdversaryRequest):
    """Play the lower-bound construction against the policy (unit-capacity queues, one per value)."""
    return build_lower_bound_instance(request.values, make_policy(request.policy))
