"""
Configuration Module

Workbench settings read from defaults, DIFQ_* environment variables (and
a .env file), and an optional key=value config file, in increasing order
of precedence. Command-line flags override all of them.
"""
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from dotenv import dotenv_values
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .errors import UsageError
from .numdiff import ExtrapConfig

logger = logging.getLogger(__name__)

ENV_PREFIX = "DIFQ_"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class WorkbenchSettings(BaseSettings):
    """Run-wide numeric defaults and output locations."""

    model_config = SettingsConfigDict(env_prefix=ENV_PREFIX, env_file=".env",
                                      env_file_encoding="utf-8", extra="ignore")

    t0: float = Field(0.1, gt=0)
    ratio: float = Field(0.5, gt=0, lt=1)
    max_levels: int = Field(12, ge=3)
    richardson_order: int = Field(4, ge=1)
    tol_conv: float = Field(1e-9, gt=0)
    max_order: int = Field(4, ge=1)
    order_tol_growth: float = Field(1e3, ge=1)
    monomial_cap: int = Field(10**6, ge=1)
    integrate_tol: float = Field(1e-10, gt=0)
    max_cells: int = Field(2**20, ge=16)
    stencil_cells: int = Field(2**12, ge=8)
    output_dir: Path = Path("out")
    log_level: str = "WARNING"

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"log_level must be one of {', '.join(LOG_LEVELS)}")
        return level

    @classmethod
    def from_env(cls, config_file: Optional[Union[str, Path]] = None,
                 **overrides: Any) -> "WorkbenchSettings":
        """
        Load settings.

        Args:
            config_file: Optional key=value file; keys are field names, with or
                without the DIFQ_ prefix, in any case
            **overrides: Values that win over everything else (CLI flags)

        Returns:
            WorkbenchSettings instance

        Raises:
            FileNotFoundError: If config_file does not exist
            UsageError: If the config file names an unknown setting
        """
        values: Dict[str, Any] = {}
        if config_file is not None:
            path = Path(config_file)
            if not path.is_file():
                raise FileNotFoundError(f"config file not found: {path}")
            for key, value in dotenv_values(path).items():
                name = key.strip().lower()
                if name.startswith(ENV_PREFIX.lower()):
                    name = name[len(ENV_PREFIX):]
                if name not in cls.model_fields:
                    raise UsageError(f"unknown setting {key!r} in {path}")
                if value is not None:
                    values[name] = value
            logger.debug("loaded %d settings from %s", len(values), path)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def extrap_config(self) -> ExtrapConfig:
        """The extrapolation parameters as a validated ExtrapConfig."""
        return ExtrapConfig(t0=self.t0, ratio=self.ratio, max_levels=self.max_levels,
                            richardson_order=self.richardson_order, tol_conv=self.tol_conv,
                            max_order=self.max_order, order_tol_growth=self.order_tol_growth)
