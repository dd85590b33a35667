from fastapi import APIRouter
from pydantic import BaseModel, Field

from app.core.logger import activity_logger
from app.models.schemas import GeneratorSpec
from app.models.switch import SwitchConfig
from app.services.instances import serialize_trace
from app.services.workloads import generate

router = APIRouter()


class GenerateRequest(BaseModel):
    config: SwitchConfig
    generator: GeneratorSpec = GeneratorSpec()
    seed: int = Field(0, ge=0)


class GenerateResponse(BaseModel):
    trace_jsonl: str
    arrivals: int
    sends: int


@router.post("/generate", response_model=GenerateResponse)
def generate_trace(request: GenerateRequest):
    trace = generate(request.config, request.generator, request.seed)
    activity_logger.log_event(
        "Workloads", "SUCCESS", request.generator.kind, f"seed {request.seed}: {trace.arrivals} arrivals, {trace.sends} sends"
    )
    return GenerateResponse(trace_jsonl=serialize_trace(trace), arrivals=trace.arrivals, sends=trace.sends)
