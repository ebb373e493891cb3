""" Runtime settings loaded from the environment. """
import os
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import BaseModel, Field

from lib.constants import CLOCK_TOLERANCE


class Settings(BaseModel):
    """Settings that are not part of a scenario."""
    log_level: str = "WARNING"
    protest_margin_hours: float = Field(default=12.0, gt=0)
    clock_tolerance: int = Field(default=CLOCK_TOLERANCE, ge=0)
    tamper_threshold: float = Field(default=0.125, ge=0, le=1)
    scenario_dir: str = "scenarios"
    default_cir: float = Field(default=125_000.0, gt=0)
    default_cbs: float = Field(default=125_000.0, gt=0)

    @property
    def protest_margin_seconds(self) -> float:
        """Return T_m in seconds."""
        return self.protest_margin_hours * 3600


# Environment variable for each settings field
_ENVIRONMENT = {
    "log_level": "FAIR_LOG_LEVEL",
    "protest_margin_hours": "FAIR_PROTEST_MARGIN_HOURS",
    "clock_tolerance": "FAIR_CLOCK_TOLERANCE",
    "tamper_threshold": "FAIR_TAMPER_THRESHOLD",
    "scenario_dir": "FAIR_SCENARIO_DIR",
    "default_cir": "FAIR_DEFAULT_CIR",
    "default_cbs": "FAIR_DEFAULT_CBS",
}


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """
    Load the settings.

    Values are read from the process environment after loading a `.env` file (if present).
    Unset variables keep their defaults; pydantic converts and validates the strings.

    returns: The validated settings.
    """
    load_dotenv()
    values = {field: os.getenv(name) for field, name in _ENVIRONMENT.items()}
    return Settings(**{field: value for field, value in values.items() if value is not None})
