"""Pydantic schemas for learning and observation settings."""

import enum
from typing import Any, Optional

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_serializer,
    field_validator,
    model_validator,
)

from subband_dpd.core.exceptions import SubbandDpdError
from subband_dpd.models.sub_band import SubBandId


class LearningMode(str, enum.Enum):
    """Coefficient update schedule."""

    SAMPLE = "sample"
    BLOCK = "block"


class LearningConfig(BaseModel):
    """Step size, regularization and block schedule of the decorrelation learner."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    mu: float = Field(default=0.1, ge=0.0, description="NLMS step size", examples=[0.1])
    c: Optional[float] = Field(
        default=None,
        gt=0.0,
        description="Regularizer; None derives 1e-8 * mean ||s||^2 from the first block",
    )
    block_size: int = Field(default=1000, ge=1, description="Samples M per update")
    update_interval: int = Field(
        default=1000, ge=1, description="Samples L between updates (L >= M)"
    )
    max_updates: int = Field(default=200, ge=1, description="Number of updates")
    mode: LearningMode = Field(default=LearningMode.BLOCK)
    reuse_block: bool = Field(
        default=False,
        description="Iterate on one captured block instead of streaming new data",
    )
    latency_samples: int = Field(
        default=0, ge=0, description="Artificial feedback latency in samples"
    )
    max_lag: int = Field(
        default=64, ge=0, description="Search range of the feedback alignment"
    )
    divergence_db: float = Field(
        default=20.0, gt=0.0, description="Residual growth above the initial value"
    )

    @model_validator(mode="after")
    def _check_schedule(self) -> "LearningConfig":
        if self.block_size > self.update_interval:
            raise ValueError("block_size (M) must not exceed update_interval (L)")
        return self

    @property
    def effective_block_size(self) -> int:
        """M actually used: sample mode always updates on single samples."""
        return 1 if self.mode is LearningMode.SAMPLE else self.block_size

    @property
    def effective_update_interval(self) -> int:
        return 1 if self.mode is LearningMode.SAMPLE else self.update_interval


class ObserverConfig(BaseModel):
    """Feedback receiver settings for one IM sub-band."""

    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    sub_band: SubBandId = Field(..., description="Observed sub-band", examples=["IM3+"])
    obs_bandwidth_hz: float = Field(
        ..., gt=0.0, description="Two-sided observation bandwidth in Hz"
    )
    decimation: int = Field(default=1, ge=1)
    stopband_atten_db: float = Field(default=80.0, gt=0.0)
    noise_snr_db: Optional[float] = Field(
        default=None, description="Observer AWGN SNR in dB; None disables noise"
    )
    noise_seed: int = Field(default=0, ge=0)

    @field_validator("sub_band", mode="before")
    @classmethod
    def _parse_sub_band(cls, value: Any) -> Any:
        if isinstance(value, str):
            try:
                return SubBandId.parse(value)
            except SubbandDpdError as exc:
                raise ValueError(exc.message) from exc
        return value

    @field_serializer("sub_band")
    def _serialize_sub_band(self, value: SubBandId) -> str:
        return value.label

    def output_rate_hz(self, sample_rate_hz: float) -> float:
        return sample_rate_hz / self.decimation
