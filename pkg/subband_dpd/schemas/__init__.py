"""Pydantic schemas for scenario files, fixtures and reports."""

from subband_dpd.schemas.carrier import DualCarrierSpec, Modulation
from subband_dpd.schemas.fixtures import (
    CoefficientFile,
    MemorylessFixtureFile,
    PAFixtureFile,
    PHFixtureFile,
)
from subband_dpd.schemas.learning import LearningConfig, LearningMode, ObserverConfig
from subband_dpd.schemas.report import (
    ComplexityReport,
    EmissionReport,
    MetricsSummary,
    RxDesenseReport,
    SubBandResult,
    SweepRow,
)
from subband_dpd.schemas.scenario import (
    DpdMethod,
    DpdSection,
    EmissionSection,
    MetricsSection,
    ObserverSection,
    RxDesenseSection,
    Scenario,
    SweepVariable,
)

__all__ = [
    "DualCarrierSpec",
    "Modulation",
    "CoefficientFile",
    "MemorylessFixtureFile",
    "PAFixtureFile",
    "PHFixtureFile",
    "LearningConfig",
    "LearningMode",
    "ObserverConfig",
    "ComplexityReport",
    "EmissionReport",
    "MetricsSummary",
    "RxDesenseReport",
    "SubBandResult",
    "SweepRow",
    "DpdMethod",
    "DpdSection",
    "EmissionSection",
    "MetricsSection",
    "ObserverSection",
    "RxDesenseSection",
    "Scenario",
    "SweepVariable",
]
