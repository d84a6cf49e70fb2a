import os
import json
from pathlib import Path
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError

from utils.errors import ConfigError

# Load environment variables
load_dotenv()

CONFIG_PATH = Path(__file__).resolve().parent.parent / "scripts" / "solver_config.json"

# env var -> settings key
ENV_OVERRIDES = {
    "RECOGNET_SIZE_CAP": "size_cap",
    "RECOGNET_POWER_TOLERANCE": "power_tolerance",
    "RECOGNET_MAX_ITERATIONS": "max_iterations",
    "RECOGNET_SEPARABILITY_TOLERANCE": "separability_tolerance",
    "RECOGNET_EXPECT_TOLERANCE": "expect_tolerance",
    "RECOGNET_DEFAULT_EPSILON": "default_epsilon",
    "RECOGNET_QUIET": "quiet",
}


class SolverSettings(BaseModel):
    size_cap: int = Field(2 ** 20, gt=0)
    power_tolerance: float = Field(1e-12, gt=0)
    max_iterations: int = Field(10_000, gt=0)
    separability_tolerance: float = Field(1e-9, ge=0)
    expect_tolerance: float = Field(2e-3, ge=0)
    default_epsilon: float = Field(0.05, gt=0, lt=0.5)
    quiet: bool = False


def read_json_config(path: Path = CONFIG_PATH) -> dict:
    """Read the JSON defaults file; a missing file means built-in defaults."""
    if not path.exists():
        return {}
    try:
        with open(path, "r") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"failed to read {path}: {e}") from e


def get_solver_settings() -> SolverSettings:
    """Defaults from solver_config.json, overridden per key by RECOGNET_* env vars."""
    values = read_json_config()
    for env_name, key in ENV_OVERRIDES.items():
        raw = os.getenv(env_name)
        if raw is not None and raw.strip() != "":
            values[key] = raw.strip()
    try:
        return SolverSettings(**values)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(p) for p in first["loc"])
        raise ConfigError(f"invalid setting {field}: {first['msg']}", {"field": field}) from e
