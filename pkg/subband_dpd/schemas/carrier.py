"""Pydantic schemas describing the dual-carrier waveform."""

import enum

from pydantic import BaseModel, ConfigDict, Field, field_validator


class Modulation(str, enum.Enum):
    """Symbol alphabet of a component carrier."""

    QPSK = "QPSK"
    QAM16 = "16QAM"


class DualCarrierSpec(BaseModel):
    """Two component carriers placed at +f_IF and -f_IF of a composite baseband.

    Each carrier's symbol rate equals its nominal bandwidth; root-raised-cosine
    shaping with ``rolloff`` gives an occupied bandwidth of B (1 + rolloff).
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    cc_bandwidth_hz: tuple[float, float] = Field(
        ...,
        description="Nominal bandwidth (= symbol rate) of CC1 and CC2 in Hz",
        examples=[(1.0e6, 1.0e6)],
    )
    carrier_spacing_hz: float = Field(
        ...,
        gt=0,
        description="Centre-to-centre carrier spacing, 2 f_IF, in Hz",
        examples=[12.0e6],
    )
    modulation: Modulation = Field(
        default=Modulation.QPSK, description="Symbol alphabet of both carriers"
    )
    per_cc_power: tuple[float, float] = Field(
        default=(1.0, 1.0),
        description="Linear mean power targets of CC1 and CC2",
    )
    guard: float = Field(
        default=1.2, ge=1.0, description="Oversampling guard factor of the rate rule"
    )
    rolloff: float = Field(
        default=0.22, gt=0.0, le=1.0, description="Root-raised-cosine excess bandwidth"
    )
    pulse_span_symbols: int = Field(
        default=16, ge=2, description="Pulse shaping filter span in symbols"
    )
    m_max: int = Field(
        default=3,
        ge=1,
        description="Highest IM sub-band order the composite rate must cover",
    )
    dpd_order: int = Field(
        default=9, ge=1, description="Highest basis order Q used in the rate rule"
    )

    @field_validator("cc_bandwidth_hz", "per_cc_power")
    @classmethod
    def _positive_pair(cls, value: tuple[float, float]) -> tuple[float, float]:
        if min(value) <= 0:
            raise ValueError("both entries must be positive")
        return value

    @field_validator("m_max", "dpd_order")
    @classmethod
    def _odd(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError("must be odd")
        return value

    @field_validator("pulse_span_symbols")
    @classmethod
    def _even_span(cls, value: int) -> int:
        if value % 2:
            raise ValueError("pulse span must be even so the pulse peak is on a sample")
        return value

    @property
    def f_if_hz(self) -> float:
        """Intermediate frequency: half the carrier spacing."""
        return self.carrier_spacing_hz / 2.0

    @property
    def max_bandwidth_hz(self) -> float:
        return max(self.cc_bandwidth_hz)

    def occupied_bandwidth_hz(self, index: int = -1) -> float:
        """Occupied bandwidth B (1 + rolloff) of one carrier, or of the wider one."""
        bandwidth = self.max_bandwidth_hz if index < 0 else self.cc_bandwidth_hz[index]
        return bandwidth * (1.0 + self.rolloff)

    def min_sample_rate_hz(self) -> float:
        """Lower bound guard * (m_max f_IF + Q max(B) / 2) * 2 on the composite rate."""
        return (
            self.guard
            * (self.m_max * self.f_if_hz + self.dpd_order * self.max_bandwidth_hz / 2.0)
            * 2.0
        )

    def scaled(self, drive_offset_db: float) -> "DualCarrierSpec":
        """Return a copy with both carrier powers scaled by ``drive_offset_db``."""
        factor = 10.0 ** (drive_offset_db / 10.0)
        powers = (self.per_cc_power[0] * factor, self.per_cc_power[1] * factor)
        return self.model_copy(update={"per_cc_power": powers})
