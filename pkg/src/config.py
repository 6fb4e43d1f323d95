from typing import Optional

from pydantic import BaseSettings, validator


class Settings(BaseSettings):
    """
    Configuration settings for the spin-state preparation toolkit.
    """

    log_level: str = "INFO"  # Default log level
    constants_path: Optional[str] = None  # None -> packaged src/data/constants.json
    numeric_tolerance: float = 1e-12
    synthesis_min_fidelity: float = 1.0 - 1e-9
    synthesis_max_evaluations: int = 2000
    curve_t_max_ns: float = 40.0
    curve_points: int = 1024
    workers: int = 1

    class Config:
        env_prefix = "SPINPREP_"
        env_file = ".env"
        env_file_encoding = "utf-8"

    @validator("numeric_tolerance", "curve_t_max_ns")
    def must_be_positive(cls, v):
        if v <= 0:
            raise ValueError("Value must be positive")
        return v

    @validator("synthesis_min_fidelity")
    def fidelity_threshold_in_range(cls, v):
        if not 0.0 < v <= 1.0:
            raise ValueError(f"Fidelity threshold must lie in (0, 1], got {v}")
        return v

    @validator("synthesis_max_evaluations", "workers")
    def count_must_be_positive(cls, v):
        if v < 1:
            raise ValueError("Count must be at least 1")
        return v

    @validator("curve_points")
    def curve_needs_two_points(cls, v):
        if v < 2:
            raise ValueError("A curve needs at least 2 points")
        return v

    @validator("log_level")
    def log_level_must_be_valid(cls, v):
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"Invalid log level: {v}. Must be one of {valid_levels}")
        return v.upper()


settings = Settings()
