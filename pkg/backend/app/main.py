import sys
from pathlib import Path

# Injection to ensure 'app' is found
_HERE = Path(__file__).parent.parent
if str(_HERE) not in sys.path:
    sys.path.insert(0, str(_HERE))

from fastapi import FastAPI, Request
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from app.api.api_v1.endpoints import adversary, checks, oracle, simulation, workloads
from app.core.config import settings
from app.core.errors import (
    AdversaryError,
    ConfigError,
    DiligenceViolation,
    OracleLimitError,
    SegBufError,
    TraceFormatError,
)
from app.core.logger import activity_logger

app = FastAPI(title=settings.PROJECT_NAME)


@app.exception_handler(RequestValidationError)
async def validation_exception_handler(request: Request, exc: RequestValidationError):
    errors = jsonable_encoder(
        [{**e, "ctx": {k: str(v) for k, v in e["ctx"].items()}} if "ctx" in e else e for e in exc.errors()]
    )
    activity_logger.log_event("FastAPI", "VALIDATION_ERROR", request.url.path, f"422 Detail: {errors}")
    return JSONResponse(status_code=422, content={"detail": errors})


def _status_for(exc: SegBufError) -> int:
    if isinstance(exc, OracleLimitError):
        return 413
    if isinstance(exc, (DiligenceViolation, AdversaryError)):
        return 409
    return 422


@app.exception_handler(SegBufError)
async def domain_exception_handler(request: Request, exc: SegBufError):
    status = _status_for(exc)
    body = {"detail": str(exc), "error": type(exc).__name__}
    if isinstance(exc, ConfigError):
        body["field"] = exc.field
    elif isinstance(exc, TraceFormatError):
        body["line"] = exc.line
    elif isinstance(exc, DiligenceViolation):
        body["step"] = exc.step
    activity_logger.log_event("FastAPI", "ERROR", request.url.path, f"{status} {type(exc).__name__}: {exc}")
    return JSONResponse(status_code=status, content=body)


origins = [
    "http://localhost",
    "http://localhost:8080",
    "http://localhost:5173",
    "http://localhost:3000",
]

app.add_middleware(
    CORSMiddleware,
    allow_origins=origins,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(simulation.router, prefix=f"{settings.API_V1_STR}/simulation", tags=["Simulation"])
app.include_router(oracle.router, prefix=f"{settings.API_V1_STR}/oracle", tags=["Oracle"])
app.include_router(adversary.router, prefix=f"{settings.API_V1_STR}/adversary", tags=["Adversary"])
app.include_router(workloads.router, prefix=f"{settings.API_V1_STR}/workloads", tags=["Workloads"])
app.include_router(checks.router, prefix=f"{settings.API_V1_STR}/checks", tags=["Checks"])


@app.get("/")
def read_root():
    return {"message": f"Welcome to {settings.PROJECT_NAME}"}


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
