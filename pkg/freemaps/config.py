"""
Configuration models for freemaps: tolerances, environment settings and
per-invocation run configuration.
"""
import os
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator

ENV_PREFIX = "FREEMAPS_"
LOG_LEVELS = ("CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG")


class Tolerances(BaseModel):
    """Numerical tolerances shared by every module."""

    pivot_floor: float = Field(
        1e-12, gt=0, description="Relative pivot floor deciding strict definiteness"
    )
    hermitian: float = Field(
        1e-10, gt=0, description="Relative Hermitian-symmetry tolerance"
    )
    absolute_floor: float = Field(
        1e-14, gt=0, description="Absolute floor applied to every relative tolerance"
    )
    block_formula: float = Field(
        1e-10, gt=0, description="Direct-sum and block-formula identity tolerance"
    )
    similarity: float = Field(1e-9, gt=0, description="Similarity-respect tolerance")
    finite_difference: float = Field(
        1e-6, gt=0, description="Agreement with central finite differences"
    )
    eigen_match: float = Field(1e-8, gt=0, description="Greedy eigenvalue matching")
    probe: float = Field(
        1e-9, gt=0, description="Hypothesis tolerance of the injectivity probe"
    )
    terminal_gap: float = Field(
        1e-6, gt=0, description="Terminal codomain gap accepted as 'on the boundary'"
    )
    rank: float = Field(
        1e-8, gt=0, description="Smallest singular value accepted as full rank"
    )
    linearity: float = Field(
        1e-10, gt=0, description="Homogeneity defect accepted for linear maps"
    )

    def relative(self, value: float, scale: float) -> float:
        """Scale a relative tolerance, never going below the absolute floor."""
        return max(value * scale, self.absolute_floor)


DEFAULT_TOLERANCES = Tolerances()


class Settings(BaseModel):
    """Defaults that may be overridden from the environment or a .env file."""

    seed: int = Field(0, ge=0, description="Default seed for randomized sampling")
    trials: int = Field(50, ge=1, description="Default number of randomized trials")
    log_level: str = Field("WARNING", description="Logging level for the CLI")

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"must be one of {', '.join(LOG_LEVELS)}")
        return level

    @classmethod
    def from_env(cls, env_file: Optional[Path] = None) -> "Settings":
        """Build settings from FREEMAPS_* variables, loading a .env file first."""
        env_path = env_file or Path.cwd() / ".env"
        if env_path.exists():
            load_dotenv(dotenv_path=env_path)

        values: Dict[str, str] = {}
        for name in cls.model_fields:
            raw = os.getenv(f"{ENV_PREFIX}{name.upper()}")
            if raw is not None:
                values[name] = raw
        return cls(**values)


class OutputFormat(str, Enum):
    """Output formats of the CLI."""

    TEXT = "text"
    JSON = "json"


class RunConfig(BaseModel):
    """A single CLI invocation; identical configs give identical reports."""

    subcommand: str = Field(..., description="Name of the CLI subcommand")
    inputs: List[str] = Field(
        default_factory=list, description="Input file paths or expression strings"
    )
    tolerance: Optional[float] = Field(
        None, gt=0, description="Override of the subcommand's main tolerance"
    )
    seed: int = Field(0, ge=0, description="Seed for randomized sampling")
    trials: int = Field(50, ge=1, description="Number of randomized trials")
    output: Optional[Path] = Field(None, description="Where to write the JSON report")
    format: OutputFormat = Field(OutputFormat.TEXT, description="Output format")
