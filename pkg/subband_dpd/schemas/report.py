"""Result schemas written by the scenario runner."""

from typing import Optional

from pydantic import BaseModel, Field, model_validator

from subband_dpd.schemas.fixtures import ComplexPair


class ComplexityReport(BaseModel):
    """Running complexity of one DPD processing chain."""

    kind: str = Field(..., description="Sub-band label or 'full_band'", examples=["IM3"])
    q: int = Field(default=9)
    memory_depth: int = Field(..., ge=0)
    basis_flops: int = Field(..., description="Basis generation FLOPs per sample")
    filtering_flops: int = Field(..., description="DPD filtering FLOPs per sample")
    rate_hz: float = Field(..., gt=0, description="Processing rate in samples/s")
    coefficient_count: int = Field(..., ge=1)
    total_flops: int = 0
    gflops: float = 0.0

    @model_validator(mode="after")
    def _derive_totals(self) -> "ComplexityReport":
        total = self.basis_flops + self.filtering_flops
        self.total_flops = total
        self.gflops = round(total * self.rate_hz / 1e9, 9)
        return self


class SubBandResult(BaseModel):
    """Spur suppression achieved on one IM sub-band."""

    sub_band: str = Field(..., examples=["IM3+"])
    imr_before_dbc: float
    imr_after_dbc: float
    improvement_db: float
    integrated_before_dbm: float
    integrated_after_dbm: float
    updates: int = Field(default=0, ge=0)
    final_residual_db: Optional[float] = None
    taps: list[ComplexPair] = Field(default_factory=list)


class RxDesenseReport(BaseModel):
    """Own-receiver desensitization budget."""

    duplexer_atten_db: float
    rx_bandwidth_hz: float
    spur_before_dbm: float
    spur_after_dbm: float
    noise_floor_dbm: float
    margin_after_db: float = Field(..., description="Noise floor minus spur after DPD")


class EmissionReport(BaseModel):
    """Spurious emission density against a regulatory limit."""

    limit_dbm_per_mhz: float
    insertion_loss_db: float
    density_before_dbm_per_mhz: float
    density_after_dbm_per_mhz: float
    margin_after_db: float = Field(..., description="Limit minus density after DPD")


class MetricsSummary(BaseModel):
    """Everything one scenario run reports; written as summary.json."""

    scenario: str
    seed: int
    method: str
    sample_rate_hz: float
    f_if_hz: float
    tx_power_dbm: float
    drive_offset_db: float = 0.0
    sub_bands: list[SubBandResult]
    evm_before_pct: list[float]
    evm_after_pct: list[float]
    complexity: list[ComplexityReport] = Field(default_factory=list)
    rx_desense: Optional[RxDesenseReport] = None
    emission: Optional[EmissionReport] = None
    metadata: dict[str, str] = Field(default_factory=dict)

    def result_for(self, label: str) -> SubBandResult:
        for result in self.sub_bands:
            if result.sub_band == label:
                return result
        raise KeyError(label)


class SweepRow(BaseModel):
    """One sweep point for one measured sub-band."""

    index: int
    variable: str
    value: float
    sub_band: str
    imr_before_dbc: float
    imr_after_dbc: float
    integrated_before_dbm: float
    integrated_after_dbm: float
