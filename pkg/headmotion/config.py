"""
Runtime settings read from HEADMOTION_* environment variables.

| Variable               | Values                  | Default          |
|------------------------|-------------------------|------------------|
| HEADMOTION_JOBS        | integer >= 1            | 1                |
| HEADMOTION_STD         | population, sample      | population       |
| HEADMOTION_AGGREGATE   | resubstitution, cv      | resubstitution   |
| HEADMOTION_LOG_LEVEL   | DEBUG, INFO, WARNING... | WARNING          |
| HEADMOTION_TRACEBACK   | 0, 1                    | 0                |

Settings are read on every load_settings() call rather than at import, so the
CLI flags and tests can override them.
"""

import logging
import os
from dataclasses import dataclass, replace
from typing import Mapping, Optional

from .errors import ConfigError

STD_CHOICES = {"population": 0, "sample": 1}
AGGREGATE_CHOICES = ("resubstitution", "cv")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

ENV_VARS = (
    "HEADMOTION_JOBS",
    "HEADMOTION_STD",
    "HEADMOTION_AGGREGATE",
    "HEADMOTION_LOG_LEVEL",
    "HEADMOTION_TRACEBACK",
)


@dataclass(frozen=True)
class Settings:
    jobs: int = 1
    std: str = "population"
    aggregate: str = "resubstitution"
    log_level: str = "WARNING"
    traceback: bool = False

    @property
    def ddof(self) -> int:
        """Delta degrees of freedom for the configured std convention."""
        return STD_CHOICES[self.std]

    def with_overrides(self, **changes) -> "Settings":
        """Copy with the non-None keyword arguments applied (CLI flags)."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def _jobs(raw: str) -> int:
    try:
        jobs = int(raw)
    except ValueError:
        jobs = 0
    if jobs < 1:
        raise ConfigError(f"HEADMOTION_JOBS must be an integer >= 1, got {raw!r}")
    return jobs


def _choice(name: str, raw: str, choices) -> str:
    value = raw.strip().lower()
    if value not in choices:
        raise ConfigError(f"{name} must be one of {', '.join(choices)}, got {raw!r}")
    return value


def load_settings(environ: Optional[Mapping[str, str]] = None) -> Settings:
    """Build Settings from the environment (os.environ by default).

    Raises:
        ConfigError: if a variable is set to a value outside its domain.
    """
    env = os.environ if environ is None else environ
    defaults = Settings()

    jobs = _jobs(env["HEADMOTION_JOBS"]) if env.get("HEADMOTION_JOBS") else defaults.jobs
    std = (
        _choice("HEADMOTION_STD", env["HEADMOTION_STD"], tuple(STD_CHOICES))
        if env.get("HEADMOTION_STD")
        else defaults.std
    )
    aggregate = (
        _choice("HEADMOTION_AGGREGATE", env["HEADMOTION_AGGREGATE"], AGGREGATE_CHOICES)
        if env.get("HEADMOTION_AGGREGATE")
        else defaults.aggregate
    )
    log_level = defaults.log_level
    if env.get("HEADMOTION_LOG_LEVEL"):
        log_level = env["HEADMOTION_LOG_LEVEL"].strip().upper()
        if log_level not in LOG_LEVELS:
            raise ConfigError(
                f"HEADMOTION_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}, "
                f"got {env['HEADMOTION_LOG_LEVEL']!r}"
            )
    traceback = env.get("HEADMOTION_TRACEBACK", "0") == "1"

    return Settings(
        jobs=jobs, std=std, aggregate=aggregate, log_level=log_level, traceback=traceback
    )


def configure_logging(level: str) -> None:
    """Route library logging to stderr. Only the CLI calls this."""
    root = logging.getLogger("headmotion")
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler()  # stderr
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root.addHandler(handler)
    root.setLevel(getattr(logging, level))
    root.propagate = False
