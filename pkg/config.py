"""
Configuration management using Pydantic Settings.
Loads environment variables (prefix POLYREAL_) from an optional .env file.
"""
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit defaults; every value can be overridden per call or per CLI flag."""

    # Reproducibility
    random_seed: int = 0

    # Lawrence extensions: any 0 < low < high works, fixed values keep runs reproducible
    lawrence_low_height: str = "1"
    lawrence_high_height: str = "2"

    # Connected sums: flattening parameters t = 1, 1/2, ..., 1/2^(length-1)
    placement_schedule_length: int = Field(default=21, ge=1)

    # Numerical realizer
    penalty_margin: float = Field(default=1e-3, gt=0)
    convergence_tolerance: float = Field(default=1e-9, gt=0)
    rank_tolerance: float = Field(default=1e-8, gt=0)
    max_iters: int = Field(default=4000, gt=0)
    restarts: int = Field(default=10, gt=0)
    step_rule: str = "lbfgs"
    max_denominator: int = Field(default=10**6, gt=0)
    snap_tolerance: float = Field(default=1e-4, gt=0)

    # Documents
    format_version: int = 1
    output_dir: str = "."

    model_config = SettingsConfigDict(
        env_prefix="POLYREAL_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )


# Global settings instance
settings = Settings()
