"""Scenario file schema for the batch runner."""

import enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from subband_dpd.core.exceptions import SubbandDpdError
from subband_dpd.models.sub_band import SubBandId
from subband_dpd.schemas.carrier import DualCarrierSpec
from subband_dpd.schemas.learning import LearningConfig


class DpdMethod(str, enum.Enum):
    """How the sub-band DPD coefficients are obtained."""

    ADAPTIVE = "adaptive"
    THIRD_ORDER_INVERSE = "third_order_inverse"
    MMSE = "mmse"
    DECORRELATION = "decorrelation"
    FIFTH_ORDER_INVERSE = "fifth_order_inverse"
    NONE = "none"

    @classmethod
    def closed_form(cls) -> list["DpdMethod"]:
        """Methods computed from a memoryless fixture instead of learned."""
        return [
            cls.THIRD_ORDER_INVERSE,
            cls.MMSE,
            cls.DECORRELATION,
            cls.FIFTH_ORDER_INVERSE,
        ]


def _parse_label(value: str) -> str:
    try:
        return SubBandId.parse(value).label
    except SubbandDpdError as exc:
        raise ValueError(exc.message) from exc


class DpdSection(BaseModel):
    """Which sub-bands to linearize and with what model size."""

    model_config = ConfigDict(extra="forbid")

    method: DpdMethod = Field(default=DpdMethod.ADAPTIVE)
    targets: list[str] = Field(
        default_factory=lambda: ["IM3+"],
        description="Sub-bands learned in the listed order",
        examples=[["IM3-", "IM5-", "IM7-"]],
    )
    q: int = Field(default=9, ge=3, description="DPD nonlinearity order Q")
    memory_depth: int = Field(default=1, ge=0, description="Memory depth N")

    @field_validator("targets")
    @classmethod
    def _valid_targets(cls, value: list[str]) -> list[str]:
        labels = [_parse_label(label) for label in value]
        if len(set(labels)) != len(labels):
            raise ValueError("targets must not repeat a sub-band")
        return labels

    @model_validator(mode="after")
    def _check_order(self) -> "DpdSection":
        if self.q % 2 == 0:
            raise ValueError("q must be odd")
        for label in self.targets:
            if SubBandId.parse(label).m > self.q:
                raise ValueError(f"q={self.q} is below the order of target {label}")
        return self

    @property
    def sub_bands(self) -> list[SubBandId]:
        return [SubBandId.parse(label) for label in self.targets]


class ObserverSection(BaseModel):
    """Feedback receiver knobs shared by every target."""

    model_config = ConfigDict(extra="forbid")

    bandwidth_hz: Optional[float] = Field(
        default=None, gt=0.0, description="None applies the Q x wider-CC rule"
    )
    decimation: int = Field(default=1, ge=1)
    stopband_atten_db: Optional[float] = Field(default=None, gt=0.0)
    noise_snr_db: Optional[float] = None


class MetricsSection(BaseModel):
    """Measurement settings."""

    model_config = ConfigDict(extra="forbid")

    n_samples: int = Field(
        default=262_144, ge=4096, description="Length of the evaluation waveform"
    )
    psd_segment_len: Optional[int] = Field(default=None, ge=16)
    psd_overlap: Optional[float] = Field(default=None, ge=0.0, lt=1.0)
    cc_band_hz: Optional[float] = Field(
        default=None, gt=0.0, description="Integration width of the wanted CC"
    )
    im_band_hz: Optional[float] = Field(
        default=None, gt=0.0, description="Integration width of each IM sub-band"
    )
    measure: list[str] = Field(
        default_factory=list,
        description="Extra sub-bands to report besides the DPD targets",
    )

    @field_validator("measure")
    @classmethod
    def _valid_measure(cls, value: list[str]) -> list[str]:
        return [_parse_label(label) for label in value]


class RxDesenseSection(BaseModel):
    """Own-receiver desensitization check of one spur."""

    model_config = ConfigDict(extra="forbid")

    sub_band: str = Field(default="IM3+")
    duplexer_atten_db: float = Field(default=65.0, ge=0.0)
    rx_bandwidth_hz: float = Field(default=5.0e6, gt=0.0)
    noise_figure_db: float = Field(default=9.0, ge=0.0)

    @field_validator("sub_band")
    @classmethod
    def _valid_label(cls, value: str) -> str:
        return _parse_label(value)


class EmissionSection(BaseModel):
    """Spurious emission density check of one spur."""

    model_config = ConfigDict(extra="forbid")

    sub_band: str = Field(default="IM3+")
    insertion_loss_db: float = Field(default=2.0, ge=0.0)
    limit_dbm_per_mhz: float = Field(default=-30.0)

    @field_validator("sub_band")
    @classmethod
    def _valid_label(cls, value: str) -> str:
        return _parse_label(value)


class Scenario(BaseModel):
    """One simulation: waveform, PA, DPD, learning and measurement settings."""

    model_config = ConfigDict(extra="forbid")

    name: str = Field(..., min_length=1, examples=["im3_adaptive"])
    description: Optional[str] = None
    seed: int = Field(default=0, ge=0)
    carriers: DualCarrierSpec
    pa_fixture: str = Field(
        ..., description="PA fixture path, relative to the scenario file"
    )
    tx_power_dbm: float = Field(
        default=23.0, description="Absolute total TX power label at zero drive offset"
    )
    drive_offset_db: float = Field(
        default=0.0, description="Scales both carrier powers and the dBm label"
    )
    dpd: DpdSection = Field(default_factory=DpdSection)
    learning: LearningConfig = Field(default_factory=LearningConfig)
    observer: ObserverSection = Field(default_factory=ObserverSection)
    metrics: MetricsSection = Field(default_factory=MetricsSection)
    rx_desense: Optional[RxDesenseSection] = None
    emission: Optional[EmissionSection] = None
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def _rate_covers_targets(self) -> "Scenario":
        highest = max(
            [SubBandId.parse(label).m for label in self.dpd.targets + self.metrics.measure]
            + [3]
        )
        if self.carriers.m_max < highest:
            raise ValueError(
                f"carriers.m_max={self.carriers.m_max} is below the highest "
                f"simulated sub-band order {highest}"
            )
        if self.dpd.q > self.carriers.dpd_order:
            raise ValueError(
                f"dpd.q={self.dpd.q} exceeds carriers.dpd_order={self.carriers.dpd_order}, "
                "which sizes the composite sample rate"
            )
        return self

    @property
    def measured_sub_bands(self) -> list[SubBandId]:
        """Targets first, then extra measured sub-bands."""
        labels = list(self.dpd.targets)
        labels += [label for label in self.metrics.measure if label not in labels]
        return [SubBandId.parse(label) for label in labels]


class SweepVariable(str, enum.Enum):
    """Scenario knob varied by a sweep."""

    TX_POWER_DB = "tx_power_db"
    DPD_ORDER = "dpd_order"

    @classmethod
    def names(cls) -> list[str]:
        return [member.value for member in cls]
