
from pydantic_settings import BaseSettings, SettingsConfigDict
from functools import lru_cache
from pathlib import Path
from dotenv import load_dotenv

# Calculate root .env path (4 levels up from backend/app/core/config.py)
ROOT_DIR = Path(__file__).resolve().parent.parent.parent.parent
ROOT_ENV_FILE = str(ROOT_DIR / ".env")

# Force-load the .env file into os.environ before Pydantic initializes
load_dotenv(ROOT_ENV_FILE)

class Settings(BaseSettings):
    API_V1_STR: str = "/api/v1"
    PROJECT_NAME: str = "Segregated Buffer Analysis API"

    # Oracle limits
    MAX_STATES: int = 10**8  # (#events) x prod(B_k + 1)
    DENSE_STATE_LIMIT: int = 2**20
    BRUTE_FORCE_MAX_SENDS: int = 12
    BRUTE_FORCE_MAX_QUEUES: int = 4

    # Harness
    DEFAULT_TRIALS: int = 1000
    WORKERS: int = 1
    RECORD_RUNTIME: bool = False

    # Activity logs
    LOG_DIR: str = "logs"
    ACTIVITY_LOG_ENABLED: bool = True

    @property
    def LOG_PATH(self) -> Path:
        path = Path(self.LOG_DIR)
        return path if path.is_absolute() else ROOT_DIR / path

    model_config = SettingsConfigDict(
        case_sensitive=True,
        extra="ignore"
    )

@lru_cache()
def get_settings():
    return Settings()

settings = get_settings()
