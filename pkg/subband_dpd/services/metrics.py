"""Spectral, constellation and running-complexity metrics."""

import logging
from collections.abc import Mapping
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import pandas as pd
from scipy import signal as sp_signal

from subband_dpd.config import get_settings
from subband_dpd.core.exceptions import (
    BandError,
    InvalidSignalError,
    RateError,
    ShapeError,
    UnsupportedOrderError,
)
from subband_dpd.models.dpd import coefficient_count
from subband_dpd.models.metrics import PsdEstimate
from subband_dpd.models.signal import ComplexBasebandSignal, SymbolStream
from subband_dpd.models.sub_band import SubBandId
from subband_dpd.schemas.report import ComplexityReport
from subband_dpd.services.signals import (
    align,
    design_lowpass,
    fir_filter,
    frequency_shift,
    rrc_taps,
    synthesize_carrier,
)

logger = logging.getLogger(__name__)

FULL_BAND = "full_band"

# FLOPs per sample of the ninth-order processing chains
_SUB_BAND_BASIS_FLOPS = {3: 37, 5: 40, 7: 45, 9: 48}
_SUB_BAND_FILTER_WEIGHT = {3: 32, 5: 24, 7: 16, 9: 8}
_FULL_BAND_BASIS_FLOPS = 11
_FULL_BAND_FILTER_WEIGHT = 40
_TABULATED_Q = 9

THERMAL_NOISE_DBM_PER_HZ = -174.0

_EVM_MAX_LAG = 256
_MIN_EVM_SYMBOLS = 100


def psd(
    sig: ComplexBasebandSignal,
    segment_len: Optional[int] = None,
    overlap: Optional[float] = None,
) -> PsdEstimate:
    """Two-sided Welch estimate with a Hann window.

    Args:
        sig: Signal to analyse
        segment_len: Samples per segment; defaults to settings
        overlap: Fractional segment overlap; defaults to settings

    Returns:
        PsdEstimate on an ascending grid over [-f_s/2, f_s/2)

    Raises:
        ShapeError: If the segment is longer than the signal
    """
    settings = get_settings()
    segment_len = segment_len or settings.psd_segment_len
    overlap = settings.psd_overlap if overlap is None else overlap
    if segment_len > len(sig):
        raise ShapeError(
            f"PSD segment of {segment_len} samples exceeds signal length {len(sig)}",
            details={"segment_len": segment_len},
        )
    frequencies, density = sp_signal.welch(
        sig.samples,
        fs=sig.sample_rate_hz,
        window="hann",
        nperseg=segment_len,
        noverlap=int(overlap * segment_len),
        detrend=False,
        return_onesided=False,
        scaling="density",
    )
    return PsdEstimate(
        frequencies_hz=np.fft.fftshift(frequencies),
        density=np.fft.fftshift(density),
        sample_rate_hz=sig.sample_rate_hz,
        segment_len=segment_len,
        overlap=overlap,
    )


def _as_psd(sig: Union[ComplexBasebandSignal, PsdEstimate]) -> PsdEstimate:
    return sig if isinstance(sig, PsdEstimate) else psd(sig)


def band_power(estimate: PsdEstimate, center_hz: float, width_hz: float) -> float:
    """Integrated power of the bins within ``width_hz / 2`` of ``center_hz``.

    Raises:
        BandError: If the band leaves the estimate grid or holds no bin
    """
    nyquist = estimate.sample_rate_hz / 2.0
    low, high = center_hz - width_hz / 2.0, center_hz + width_hz / 2.0
    if width_hz <= 0 or low < -nyquist or high > nyquist:
        raise BandError(
            f"Band {low / 1e6:.3f}..{high / 1e6:.3f} MHz is outside "
            f"+-{nyquist / 1e6:.3f} MHz",
            details={"center_hz": center_hz, "width_hz": width_hz},
        )
    mask = (estimate.frequencies_hz >= low) & (estimate.frequencies_hz <= high)
    if not np.any(mask):
        raise BandError(f"Band of {width_hz:.0f} Hz is narrower than one PSD bin")
    return float(np.sum(estimate.density[mask]) * estimate.resolution_hz)


def default_im_band_hz(
    sub_band: SubBandId, occupied_bandwidth_hz: float, f_if_hz: float
) -> float:
    """IMm integration width: m occupied bandwidths, at most 1.6 f_IF."""
    return min(sub_band.m * occupied_bandwidth_hz, 1.6 * f_if_hz)


def imr(
    pa_out: Union[ComplexBasebandSignal, PsdEstimate],
    sub_band: SubBandId,
    f_if_hz: float,
    cc_band_hz: float,
    im_band_hz: float,
) -> float:
    """Wanted-to-IM power ratio in dBc.

    The wanted power is the stronger of the two CC bands, both integrated
    over ``cc_band_hz``; the spur is integrated over ``im_band_hz``.

    Raises:
        BandError: If a band is outside Nyquist
    """
    estimate = _as_psd(pa_out)
    wanted = max(
        band_power(estimate, f_if_hz, cc_band_hz),
        band_power(estimate, -f_if_hz, cc_band_hz),
    )
    spur = band_power(estimate, sub_band.center_hz(f_if_hz), im_band_hz)
    return float(10.0 * np.log10(max(wanted, 1e-300) / max(spur, 1e-300)))


def integrated_power(
    estimate: PsdEstimate,
    center_hz: float,
    width_hz: float,
    ref_dbm: float,
    extra_atten_db: float = 0.0,
) -> float:
    """Band power in dBm with the whole-band power labelled ``ref_dbm``.

    Raises:
        BandError: If the band is outside the grid
        InvalidSignalError: If the estimate carries no power
    """
    total = estimate.total_power()
    if total <= 0:
        raise InvalidSignalError("Cannot reference an all-zero spectrum to dBm")
    in_band = band_power(estimate, center_hz, width_hz)
    return float(ref_dbm + 10.0 * np.log10(max(in_band, 1e-300) / total) - extra_atten_db)


def thermal_noise_floor_dbm(bandwidth_hz: float, noise_figure_db: float) -> float:
    """-174 dBm/Hz + 10 log10(B) + NF."""
    if bandwidth_hz <= 0:
        raise BandError(f"Receiver bandwidth must be positive, got {bandwidth_hz}")
    return float(THERMAL_NOISE_DBM_PER_HZ + 10.0 * np.log10(bandwidth_hz) + noise_figure_db)


def emission_density_dbm_per_mhz(
    estimate: PsdEstimate,
    center_hz: float,
    width_hz: float,
    ref_dbm: float,
    insertion_loss_db: float = 0.0,
) -> float:
    """Peak 1 MHz-integrated power inside the band, after the TX filter loss."""
    total = estimate.total_power()
    if total <= 0:
        raise InvalidSignalError("Cannot reference an all-zero spectrum to dBm")
    band_power(estimate, center_hz, width_hz)
    mask = np.abs(estimate.frequencies_hz - center_hz) <= width_hz / 2.0
    bins = estimate.density[mask] * estimate.resolution_hz
    window = int(np.clip(round(1e6 / estimate.resolution_hz), 1, bins.size))
    peak = float(np.max(np.convolve(bins, np.ones(window), mode="valid")))
    return float(ref_dbm + 10.0 * np.log10(max(peak, 1e-300) / total) - insertion_loss_db)


def _evm_chain(
    samples: ComplexBasebandSignal,
    matched: np.ndarray,
    isolation: Optional[np.ndarray],
) -> ComplexBasebandSignal:
    if isolation is not None:
        samples = fir_filter(samples, isolation, compensate_delay=True)
    return fir_filter(samples, matched, compensate_delay=True)


def evm(
    ref: SymbolStream,
    measured: ComplexBasebandSignal,
    cc_select: int = 1,
    f_if_hz: float = 0.0,
) -> float:
    """EVM in percent of the selected CC after synchronization and equalization.

    The CC is mixed to DC (CC1 sits at +f_IF, CC2 at -f_IF), isolated from
    the other carrier, matched-filtered and sampled at the symbol instants.
    The ideal re-modulated reference goes through the same filters. Delay
    and one complex gain are removed before the error is taken relative to
    the constellation power of ``ref``.

    Args:
        ref: Transmitted symbols of the selected CC
        measured: Composite or single-carrier waveform
        cc_select: 1 or 2
        f_if_hz: Intermediate frequency; 0 for a signal already at baseband

    Returns:
        EVM in percent

    Raises:
        RateError: If the waveform rate is not sps x symbol rate
        InvalidSignalError: If fewer than 100 symbols survive edge trimming
        AlignError: If the measured signal cannot be synchronized
    """
    if cc_select not in (1, 2):
        raise BandError(f"cc_select must be 1 or 2, got {cc_select}")
    sps = ref.samples_per_symbol
    rate = measured.sample_rate_hz
    if abs(rate - sps * ref.symbol_rate_hz) > 1e-6 * rate:
        raise RateError(
            f"Waveform at {rate} Hz does not carry {sps} samples per symbol at "
            f"{ref.symbol_rate_hz} Hz"
        )

    settings = get_settings()
    ideal = ComplexBasebandSignal(
        synthesize_carrier(
            ref.symbols,
            sps,
            ref.rolloff,
            ref.pulse_span_symbols,
            len(measured),
            settings.cc_stopband_atten_db,
        ),
        rate,
    )
    if f_if_hz:
        center = f_if_hz if cc_select == 1 else -f_if_hz
        measured = frequency_shift(measured, -center)
        cutoff = ref.symbol_rate_hz * (1.0 + ref.rolloff) / 2.0
        stop_edge = min(2.0 * f_if_hz - cutoff, rate / 2.0)
        if stop_edge <= cutoff:
            raise BandError("Carriers are too close to isolate one for EVM")
        isolation: Optional[np.ndarray] = design_lowpass(
            cutoff, settings.cc_stopband_atten_db, stop_edge - cutoff, rate
        )
    else:
        isolation = None
    matched = rrc_taps(ref.rolloff, ref.pulse_span_symbols, sps)

    ideal_mf = _evm_chain(ideal, matched, isolation)
    measured_mf = _evm_chain(measured, matched, isolation)
    synced = align(ideal_mf, measured_mf, _EVM_MAX_LAG)

    n_symbols = min(len(ref), len(measured) // sps)
    filter_span = (matched.size + (isolation.size if isolation is not None else 0)) // sps
    edge = ref.pulse_span_symbols + filter_span + abs(synced.lag) // sps + 1
    keep = np.arange(edge, n_symbols - edge) * sps
    if keep.size < _MIN_EVM_SYMBOLS:
        raise InvalidSignalError(
            f"Only {keep.size} symbols remain after trimming {edge} at each edge; "
            f"at least {_MIN_EVM_SYMBOLS} are required",
            details={"symbols": int(keep.size)},
        )
    reference = ideal_mf.samples[keep]
    observed = synced.aligned.samples[keep]
    gain = np.vdot(reference, observed) / np.vdot(reference, reference)
    error = observed / gain - reference
    ref_power = float(np.mean(np.abs(ref.symbols) ** 2))
    return float(100.0 * np.sqrt(np.mean(np.abs(error) ** 2) / ref_power))


def flops_model(
    kind: Union[SubBandId, str],
    q: int,
    memory_depth: int,
    rate_hz: float,
) -> ComplexityReport:
    """Per-sample FLOPs and GFLOPS of a ninth-order sub-band or full-band DPD.

    Sub-band: basis {IM3: 37, IM5: 40, IM7: 45, IM9: 48}, filtering
    w (N + 1) - 2 with w {32, 24, 16, 8}. Full band: 11 and 40 (N + 1) - 2.

    Raises:
        UnsupportedOrderError: For Q other than 9 or sub-bands above IM9
    """
    if q != _TABULATED_Q:
        raise UnsupportedOrderError(
            f"Complexity is tabulated for Q={_TABULATED_Q} only, got {q}",
            details={"q": q},
        )
    if memory_depth < 0:
        raise UnsupportedOrderError(f"Memory depth must be >= 0, got {memory_depth}")

    if isinstance(kind, str) and kind == FULL_BAND:
        return ComplexityReport(
            kind=FULL_BAND,
            q=q,
            memory_depth=memory_depth,
            basis_flops=_FULL_BAND_BASIS_FLOPS,
            filtering_flops=_FULL_BAND_FILTER_WEIGHT * (memory_depth + 1) - 2,
            rate_hz=rate_hz,
            coefficient_count=((q + 1) // 2) * (memory_depth + 1),
        )

    sub_band = kind if isinstance(kind, SubBandId) else SubBandId.parse(kind)
    if sub_band.m not in _SUB_BAND_BASIS_FLOPS:
        raise UnsupportedOrderError(
            f"No complexity figures for {sub_band.label}",
            details={"sub_band": sub_band.label},
        )
    return ComplexityReport(
        kind=f"IM{sub_band.m}",
        q=q,
        memory_depth=memory_depth,
        basis_flops=_SUB_BAND_BASIS_FLOPS[sub_band.m],
        filtering_flops=_SUB_BAND_FILTER_WEIGHT[sub_band.m] * (memory_depth + 1) - 2,
        rate_hz=rate_hz,
        coefficient_count=coefficient_count(sub_band, q, memory_depth),
    )


def psd_to_csv(
    estimate: PsdEstimate,
    path: Union[str, Path],
    metadata: Optional[Mapping[str, Any]] = None,
) -> Path:
    """Write frequency, density and density in dB under ``#`` metadata lines."""
    path = Path(path)
    header = {
        "sample_rate_hz": estimate.sample_rate_hz,
        "window": estimate.window,
        "segment_len": estimate.segment_len,
        "overlap": estimate.overlap,
        "onesided": str(estimate.onesided).lower(),
        **(metadata or {}),
    }
    frame = pd.DataFrame(
        {
            "frequency_hz": estimate.frequencies_hz,
            "density": estimate.density,
            "density_db": estimate.to_db(),
        }
    )
    with path.open("w", encoding="utf-8", newline="") as handle:
        for key, value in header.items():
            handle.write(f"# {key}: {value}\n")
        frame.to_csv(handle, index=False, float_format="%.12g")
    logger.debug(f"PSD written to {path}")
    return path


def read_csv_metadata(path: Union[str, Path]) -> dict[str, str]:
    """Parse the ``# key: value`` lines at the top of an exported table."""
    metadata: dict[str, str] = {}
    with Path(path).open(encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].partition(":")
            metadata[key.strip()] = value.strip()
    return metadata


def psd_from_csv(path: Union[str, Path]) -> PsdEstimate:
    """Read a table written by :func:`psd_to_csv`."""
    metadata = read_csv_metadata(path)
    frame = pd.read_csv(path, comment="#")
    return PsdEstimate(
        frequencies_hz=frame["frequency_hz"].to_numpy(),
        density=frame["density"].to_numpy(),
        sample_rate_hz=float(metadata["sample_rate_hz"]),
        segment_len=int(metadata["segment_len"]),
        overlap=float(metadata["overlap"]),
        window=metadata.get("window", "hann"),
        onesided=metadata.get("onesided", "false") == "true",
    )
