"""Behavioral PA evaluation and sub-band output references."""

import logging
from collections.abc import Mapping
from typing import NamedTuple, Optional

import numpy as np

from subband_dpd.config import get_settings
from subband_dpd.core.exceptions import DesignError, ShapeError
from subband_dpd.models.pa import MemorylessPoly, PHModel
from subband_dpd.models.signal import ComplexBasebandSignal
from subband_dpd.models.sub_band import SubBandId
from subband_dpd.services.basis import gen_basis
from subband_dpd.services.signals import (
    convolve_advance,
    design_lowpass,
    fir_filter,
    frequency_shift,
    tone,
)

logger = logging.getLogger(__name__)

# Passband clip relative to f_IF when P x bandwidth reaches the next sub-band
PASSBAND_CLIP = 0.8


class SubBandFilter(NamedTuple):
    """Lowpass isolating one sub-band after mixing it to DC."""

    taps: np.ndarray
    cutoff_hz: float
    stop_edge_hz: float
    clipped: bool


class SubBandResponse(NamedTuple):
    """Modulated branch taps of one sub-band and the lowpass that follows them."""

    sub_band: SubBandId
    branches: dict[int, np.ndarray]
    lowpass: SubBandFilter

    def filtered(self) -> dict[int, np.ndarray]:
        """Branch taps convolved with the lowpass (delay (L - 1) / 2 included)."""
        return {p: np.convolve(taps, self.lowpass.taps) for p, taps in self.branches.items()}


def ph_apply(model: PHModel, x: ComplexBasebandSignal) -> ComplexBasebandSignal:
    """y(n) = sum_p f_p * (|x|^(p-1) x)(n) with zero pre-history."""
    samples = x.samples
    magnitude2 = np.abs(samples) ** 2
    output = np.zeros_like(samples)
    for p, taps in model.branches.items():
        output += convolve_advance(magnitude2 ** ((p - 1) // 2) * samples, taps)
    return x.with_samples(output)


def memoryless_apply(model: MemorylessPoly, x: ComplexBasebandSignal) -> ComplexBasebandSignal:
    """y = f1 x + f3 |x|^2 x + f5 |x|^4 x."""
    samples = x.samples
    magnitude2 = np.abs(samples) ** 2
    return x.with_samples(
        samples * (model.f1 + model.f3 * magnitude2 + model.f5 * magnitude2**2)
    )


def sub_band_filter(
    passband_hz: float,
    f_if_hz: float,
    sample_rate_hz: float,
    stopband_atten_db: Optional[float] = None,
) -> SubBandFilter:
    """Lowpass with one-sided passband ``passband_hz``, clipped at 0.8 f_IF.

    The stopband starts where the neighbouring sub-band, 2 f_IF away, begins.

    Raises:
        DesignError: If the passband and the neighbouring sub-band overlap
    """
    atten = stopband_atten_db or get_settings().observer_stopband_atten_db
    nominal = passband_hz
    cutoff = min(nominal, PASSBAND_CLIP * f_if_hz)
    clipped = cutoff < nominal
    stop_edge = min(2.0 * f_if_hz - cutoff, sample_rate_hz / 2.0)
    if stop_edge <= cutoff:
        raise DesignError(
            f"Sub-band passband {cutoff / 1e6:.3f} MHz leaves no transition band "
            f"below {stop_edge / 1e6:.3f} MHz",
            details={"cutoff_hz": cutoff, "stop_edge_hz": stop_edge},
        )
    if clipped:
        logger.warning(
            f"Sub-band passband clipped from {nominal / 1e6:.3f} MHz to "
            f"{cutoff / 1e6:.3f} MHz"
        )
    taps = design_lowpass(cutoff, atten, stop_edge - cutoff, sample_rate_hz)
    return SubBandFilter(taps, cutoff, stop_edge, clipped)


def sub_band_branch_response(
    model: PHModel,
    sub_band: SubBandId,
    f_if_hz: float,
    sample_rate_hz: float,
    occupied_bandwidth_hz: float,
    stopband_atten_db: Optional[float] = None,
) -> SubBandResponse:
    """Branch filters seen from sub-band m: exp(-j 2 pi (+-m) f_IF k / f_s) f_p[k].

    Only orders p >= m contribute; the sub-band lowpass is returned alongside.

    Raises:
        BandError: If m exceeds the model order
    """
    sub_band.check_order(model.order)
    branches: dict[int, np.ndarray] = {}
    for p, taps in model.branches.items():
        if p < sub_band.m:
            continue
        k = np.arange(taps.size)
        branches[p] = taps * np.exp(
            -2j * np.pi * sub_band.center_hz(f_if_hz) * k / sample_rate_hz
        )
    lowpass = sub_band_filter(
        model.order * occupied_bandwidth_hz / 2.0,
        f_if_hz,
        sample_rate_hz,
        stopband_atten_db,
    )
    return SubBandResponse(sub_band, branches, lowpass)


def _lowpass(sig: ComplexBasebandSignal, lowpass: SubBandFilter) -> ComplexBasebandSignal:
    return fir_filter(sig, lowpass.taps, compensate_delay=True)


def sub_band_output_oracle(
    model: PHModel,
    x1: ComplexBasebandSignal,
    x2: ComplexBasebandSignal,
    sub_band: SubBandId,
    f_if_hz: float,
    occupied_bandwidth_hz: float,
    stopband_atten_db: Optional[float] = None,
) -> ComplexBasebandSignal:
    """Model-side sub-band output: lowpass of sum_p f_{m,p} * u_{m,p}."""
    response = sub_band_branch_response(
        model, sub_band, f_if_hz, x1.sample_rate_hz, occupied_bandwidth_hz, stopband_atten_db
    )
    basis = gen_basis(x1, x2, sub_band, model.order)
    total = np.zeros(basis.n_samples, dtype=np.complex128)
    for p, taps in response.branches.items():
        total += convolve_advance(basis.column(p), taps)
    output = _lowpass(x1.with_samples(total), response.lowpass)
    output.metadata.update(
        {"sub_band": sub_band.label, "passband_clipped": response.lowpass.clipped}
    )
    return output


def compose_dual_carrier(
    x1: ComplexBasebandSignal, x2: ComplexBasebandSignal, f_if_hz: float
) -> ComplexBasebandSignal:
    """x1 exp(+j w n) + x2 exp(-j w n) with w = 2 pi f_IF / f_s."""
    if len(x1) != len(x2):
        raise ShapeError(f"Carrier lengths differ: {len(x1)} vs {len(x2)}")
    rate = x1.sample_rate_hz
    composite = x1.samples * tone(len(x1), f_if_hz, rate) + x2.samples * tone(
        len(x2), -f_if_hz, rate
    )
    return ComplexBasebandSignal(composite, rate)


def extract_sub_band_brute_force(
    model: PHModel,
    x1: ComplexBasebandSignal,
    x2: ComplexBasebandSignal,
    sub_band: SubBandId,
    f_if_hz: float,
    occupied_bandwidth_hz: float,
    stopband_atten_db: Optional[float] = None,
) -> ComplexBasebandSignal:
    """Compose, apply the full PA model, mix the sub-band to DC and lowpass."""
    sub_band.check_order(model.order)
    lowpass = sub_band_filter(
        model.order * occupied_bandwidth_hz / 2.0,
        f_if_hz,
        x1.sample_rate_hz,
        stopband_atten_db,
    )
    pa_out = ph_apply(model, compose_dual_carrier(x1, x2, f_if_hz))
    mixed = frequency_shift(pa_out, -sub_band.center_hz(f_if_hz))
    return _lowpass(mixed, lowpass)


def memoryless_harmonic_output(
    model: MemorylessPoly,
    components: Mapping[int, np.ndarray],
    harmonic: int,
) -> np.ndarray:
    """Exact baseband content of a memoryless PA output at one f_IF harmonic.

    ``components`` maps odd harmonic indices (1 and -1 for the carriers, +-m
    for injections) to baseband signals. The PA is evaluated for a set of
    equally spaced carrier phases and the requested harmonic is picked out by
    a DFT over phase, which involves no filtering and therefore no leakage.
    """
    if not components:
        raise ShapeError("At least one component is required")
    lengths = {np.asarray(v).size for v in components.values()}
    if len(lengths) != 1:
        raise ShapeError("All components must have the same length")
    span = max(abs(k) for k in components) * model.order + abs(harmonic)
    n_phases = 1 << int(np.ceil(np.log2(2 * span + 2)))

    result = np.zeros(lengths.pop(), dtype=np.complex128)
    for i in range(n_phases):
        theta = 2.0 * np.pi * i / n_phases
        x = sum(
            np.asarray(v, dtype=np.complex128) * np.exp(1j * k * theta)
            for k, v in components.items()
        )
        magnitude2 = np.abs(x) ** 2
        y = x * (model.f1 + model.f3 * magnitude2 + model.f5 * magnitude2**2)
        result += y * np.exp(-1j * harmonic * theta)
    return result / n_phases
