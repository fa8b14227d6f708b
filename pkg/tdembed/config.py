from __future__ import annotations
import logging
import os
from typing import Mapping

from pydantic import BaseModel, ConfigDict, Field, ValidationError

log = logging.getLogger(__name__)

# ---------- settings ----------
# Read once from the environment; CLI flags override per invocation.
ENV_PREFIX = "TDEMBED_"


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True)

    jobs: int = Field(1, ge=1, le=64)
    search_bound: int = Field(250_000, ge=1)
    closure_bound: int = Field(5_000, ge=1)
    log_level: str = "WARNING"


def load_settings(env: Mapping[str, str] | None = None) -> Settings:
    """Build settings from TDEMBED_* variables; bad values fall back to the defaults."""
    env = os.environ if env is None else env
    raw = {}
    for name in Settings.model_fields:
        value = env.get(ENV_PREFIX + name.upper())
        if value not in (None, ""):
            raw[name] = value
    if "log_level" in raw:
        raw["log_level"] = raw["log_level"].upper()
    try:
        return Settings(**raw)
    except ValidationError as e:
        log.warning("ignoring malformed %s* settings: %s", ENV_PREFIX, e.errors()[0]["msg"])
        return Settings()


SETTINGS = load_settings()
