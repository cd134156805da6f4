"""Process configuration using Pydantic Settings."""

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Simulator settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="SUBBAND_DPD_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Rate and filter limits
    max_sample_rate_hz: float = Field(default=2.0e9, gt=0)
    max_filter_taps: int = Field(default=200_000, ge=1)

    # Carrier synthesis
    cc_stopband_atten_db: float = Field(default=140.0, gt=0)

    # Observation receiver
    observer_stopband_atten_db: float = Field(default=80.0, gt=0)

    # Spectral estimation
    psd_segment_len: int = Field(default=4096, ge=16)
    psd_overlap: float = Field(default=0.5, ge=0.0, lt=1.0)

    # Synchronization
    min_align_overlap: int = Field(default=1000, ge=1)

    # Batch execution
    sweep_workers: int = Field(default=1, ge=1)
    output_dir: str = Field(default="results")
    log_level: str = Field(default="INFO")


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
