from fastapi import APIRouter
from pydantic import BaseModel, Field

from app.models.schemas import CheckReport, SuiteParams
from app.services.harness import run_suite

router = APIRouter()


class CheckRequest(BaseModel):
    suite: str = Field(..., description="upper-bounds | lower-bound | lemma-vm | lemma-central | lemma-weighted | lemma-queuesize | lemma-two-valued | oracle-cross")
    seed: int = 0
    params: SuiteParams = SuiteParams()


@router.post("/run", response_model=CheckReport)
def run_check(request: CheckRequest):
    """Evaluate a suite's inequalities; a report with failures is still a 200."""
    return run_suite(request.suite, request.params, request.seed)
