"""Numeric value types shared by the services."""

from subband_dpd.models.basis import BasisSet, OrthoBasisSet, OrthoTransform, basis_orders
from subband_dpd.models.dpd import DpdCoefficients, Regressor, coefficient_count
from subband_dpd.models.learning import THIRD_ORDER_MOMENTS, LearningHistory, MomentSet
from subband_dpd.models.metrics import PsdEstimate
from subband_dpd.models.pa import MemorylessPoly, PHModel
from subband_dpd.models.signal import ComplexBasebandSignal, SymbolStream
from subband_dpd.models.sub_band import SUPPORTED_ORDERS, BandSign, SubBandId

__all__ = [
    "ComplexBasebandSignal",
    "SymbolStream",
    "BandSign",
    "SubBandId",
    "SUPPORTED_ORDERS",
    "PHModel",
    "MemorylessPoly",
    "BasisSet",
    "OrthoBasisSet",
    "OrthoTransform",
    "basis_orders",
    "DpdCoefficients",
    "Regressor",
    "coefficient_count",
    "MomentSet",
    "LearningHistory",
    "THIRD_ORDER_MOMENTS",
    "PsdEstimate",
]
