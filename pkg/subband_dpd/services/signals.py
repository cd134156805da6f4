"""Waveform synthesis, frequency translation, filtering and alignment."""

import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np
from scipy import signal as sp_signal

from subband_dpd.config import Settings, get_settings
from subband_dpd.core.exceptions import (
    AlignError,
    DesignError,
    InvalidSignalError,
    OverlapError,
    RateError,
    ShapeError,
)
from subband_dpd.models.signal import ComplexBasebandSignal, SymbolStream
from subband_dpd.schemas.carrier import DualCarrierSpec, Modulation

logger = logging.getLogger(__name__)

# Extra attenuation requested from kaiserord before numeric verification
_KAISER_MARGIN_DB = 6.0

# Band-limiting transition as a fraction of the RRC excess bandwidth
_BAND_LIMIT_TRANSITION = 0.45


class DualCarrier(NamedTuple):
    """Output of :func:`generate_dual_carrier`."""

    composite: ComplexBasebandSignal
    cc1: ComplexBasebandSignal
    cc2: ComplexBasebandSignal
    symbols: tuple[SymbolStream, SymbolStream]
    f_if_hz: float


class AlignResult(NamedTuple):
    """Output of :func:`align`."""

    lag: int
    phase_gain: complex
    aligned: ComplexBasebandSignal


def constellation(modulation: Modulation) -> np.ndarray:
    """Unit average power symbol alphabet."""
    if modulation is Modulation.QPSK:
        points = np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]) / np.sqrt(2.0)
    else:
        levels = np.array([-3.0, -1.0, 1.0, 3.0])
        points = (levels[:, None] + 1j * levels[None, :]).reshape(-1) / np.sqrt(10.0)
    return points.astype(np.complex128)


def rrc_taps(rolloff: float, span: int, sps: int) -> np.ndarray:
    """Root-raised-cosine taps, unit energy, length span * sps + 1.

    Args:
        rolloff: Excess bandwidth in (0, 1]
        span: Filter span in symbols
        sps: Samples per symbol

    Returns:
        Real symmetric taps
    """
    if not 0 < rolloff <= 1:
        raise DesignError(f"Roll-off must be in (0, 1], got {rolloff}")
    if span <= 0 or sps <= 0:
        raise DesignError("Pulse span and samples per symbol must be positive")

    n_half = span * sps / 2
    t = np.arange(-n_half, n_half + 1) / sps
    h = np.empty_like(t)

    center = np.abs(t) < 1e-12
    singular = np.abs(np.abs(4.0 * rolloff * t) - 1.0) < 1e-8
    regular = ~(center | singular)

    h[center] = 1.0 + rolloff * (4.0 / np.pi - 1.0)
    h[singular] = (rolloff / np.sqrt(2.0)) * (
        (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * rolloff))
        + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * rolloff))
    )
    tr = t[regular]
    num = np.sin(np.pi * tr * (1.0 - rolloff)) + 4.0 * rolloff * tr * np.cos(
        np.pi * tr * (1.0 + rolloff)
    )
    den = np.pi * tr * (1.0 - (4.0 * rolloff * tr) ** 2)
    h[regular] = num / den

    return h / np.sqrt(np.sum(h**2))


def composite_sample_rate(
    spec: DualCarrierSpec, max_sample_rate_hz: Optional[float] = None
) -> float:
    """Smallest common integer multiple of both symbol rates meeting the rate rule.

    Raises:
        RateError: If the rate exceeds ``max_sample_rate_hz``
    """
    limit = max_sample_rate_hz or get_settings().max_sample_rate_hz
    rates = [Fraction(str(b)) for b in spec.cc_bandwidth_hz]
    base = Fraction(
        math.lcm(rates[0].numerator, rates[1].numerator),
        math.gcd(rates[0].denominator, rates[1].denominator),
    )
    multiple = max(1, math.ceil(Fraction(spec.min_sample_rate_hz()) / base))
    rate = float(multiple * base)
    if rate > limit:
        raise RateError(
            f"Composite rate {rate / 1e6:.3f} MHz exceeds maximum {limit / 1e6:.3f} MHz",
            details={"sample_rate_hz": rate, "max_sample_rate_hz": limit},
        )
    return rate


def samples_per_symbol(sample_rate_hz: float, symbol_rate_hz: float) -> int:
    """Integer oversampling factor; raises RateError if not an integer."""
    ratio = sample_rate_hz / symbol_rate_hz
    sps = int(round(ratio))
    if sps < 1 or abs(ratio - sps) > 1e-9 * ratio:
        raise RateError(
            f"Sample rate {sample_rate_hz} is not an integer multiple of "
            f"symbol rate {symbol_rate_hz}"
        )
    return sps


def design_lowpass(
    cutoff_hz: float,
    stopband_atten_db: float,
    transition_hz: float,
    sample_rate_hz: float,
    max_taps: Optional[int] = None,
) -> np.ndarray:
    """Design a linear-phase Kaiser-window lowpass FIR.

    The passband extends to ``cutoff_hz`` and the stopband starts at
    ``cutoff_hz + transition_hz``. The attenuation is verified on a dense
    frequency grid and the length grown until it is met.

    Returns:
        Read-only odd-length symmetric real taps with unity DC gain

    Raises:
        DesignError: If the edges are invalid or the tap budget is exceeded
    """
    nyquist = sample_rate_hz / 2.0
    if not 0 < cutoff_hz < nyquist:
        raise DesignError(
            f"Cutoff {cutoff_hz} Hz must lie in (0, {nyquist}) Hz",
            details={"cutoff_hz": cutoff_hz},
        )
    if transition_hz <= 0 or cutoff_hz + transition_hz > nyquist:
        raise DesignError(
            f"Stopband edge {cutoff_hz + transition_hz} Hz must lie in "
            f"({cutoff_hz}, {nyquist}] Hz",
            details={"transition_hz": transition_hz},
        )
    if stopband_atten_db <= 0:
        raise DesignError("Stopband attenuation must be positive")
    budget = max_taps if max_taps is not None else get_settings().max_filter_taps
    return _design_lowpass(
        float(cutoff_hz),
        float(stopband_atten_db),
        float(transition_hz),
        float(sample_rate_hz),
        int(budget),
    )


@lru_cache(maxsize=64)
def _design_lowpass(
    cutoff_hz: float,
    stopband_atten_db: float,
    transition_hz: float,
    sample_rate_hz: float,
    max_taps: int,
) -> np.ndarray:
    nyquist = sample_rate_hz / 2.0
    numtaps, beta = sp_signal.kaiserord(
        stopband_atten_db + _KAISER_MARGIN_DB, transition_hz / nyquist
    )
    numtaps += 1 - numtaps % 2

    while numtaps <= max_taps:
        taps = sp_signal.firwin(
            numtaps,
            cutoff_hz + transition_hz / 2.0,
            window=("kaiser", beta),
            fs=sample_rate_hz,
            scale=True,
        )
        taps = 0.5 * (taps + taps[::-1])
        achieved = stopband_attenuation_db(taps, cutoff_hz + transition_hz, sample_rate_hz)
        if achieved >= stopband_atten_db:
            logger.debug(
                f"Lowpass {cutoff_hz / 1e6:.3f} MHz / {stopband_atten_db:.0f} dB: "
                f"{numtaps} taps ({achieved:.1f} dB)"
            )
            taps.flags.writeable = False
            return taps
        numtaps += 2 * max(1, numtaps // 20)

    raise DesignError(
        f"Lowpass with {stopband_atten_db} dB over a {transition_hz} Hz transition "
        f"needs more than {max_taps} taps",
        details={"max_taps": max_taps},
    )


def stopband_attenuation_db(
    taps: np.ndarray, stop_edge_hz: float, sample_rate_hz: float
) -> float:
    """Worst-case attenuation of ``taps`` from ``stop_edge_hz`` to Nyquist."""
    nfft = 1 << int(np.ceil(np.log2(16 * len(taps))))
    response = np.abs(np.fft.rfft(taps, nfft))
    freqs = np.fft.rfftfreq(nfft, d=1.0 / sample_rate_hz)
    peak = float(np.max(response[freqs >= stop_edge_hz]))
    dc = float(np.abs(np.sum(taps)))
    return -20.0 * np.log10(max(peak, 1e-300) / max(dc, 1e-300))


def _is_linear_phase(taps: np.ndarray) -> bool:
    return taps.size % 2 == 1 and bool(np.array_equal(taps, taps[::-1]))


def convolve_advance(samples: np.ndarray, taps: np.ndarray, advance: int = 0) -> np.ndarray:
    """Linear convolution with zero history, advanced and cut to the input length."""
    full = sp_signal.convolve(samples, taps, mode="full", method="auto")
    return np.ascontiguousarray(full[advance : advance + samples.size])


def fir_filter(
    sig: ComplexBasebandSignal, taps: np.ndarray, compensate_delay: bool = False
) -> ComplexBasebandSignal:
    """Filter ``sig`` with ``taps``; output has the input length.

    With ``compensate_delay`` and odd-length symmetric taps the output is
    advanced by (L - 1) / 2 samples so the filter is zero-delay.
    """
    taps = np.asarray(taps)
    if taps.size == 0:
        raise ShapeError("FIR taps must not be empty")
    advance = 0
    if compensate_delay:
        if _is_linear_phase(taps):
            advance = (taps.size - 1) // 2
        else:
            logger.debug("Taps are not linear phase; group delay left in place")
    return sig.with_samples(convolve_advance(sig.samples, taps, advance))


def frequency_shift(sig: ComplexBasebandSignal, f_shift_hz: float) -> ComplexBasebandSignal:
    """Multiply by exp(j 2 pi f n / f_s), phase referenced to n = 0."""
    if abs(f_shift_hz) >= sig.sample_rate_hz / 2.0:
        raise RateError(
            f"Shift of {f_shift_hz / 1e6:.3f} MHz aliases at "
            f"{sig.sample_rate_hz / 1e6:.3f} MHz",
            details={"f_shift_hz": f_shift_hz},
        )
    if f_shift_hz == 0:
        return sig.with_samples(sig.samples)
    return sig.with_samples(sig.samples * tone(len(sig), f_shift_hz, sig.sample_rate_hz))


def tone(
    n_samples: int, frequency_hz: float, sample_rate_hz: float, start: int = 0
) -> np.ndarray:
    """Unit complex exponential, phase zero at global sample 0, from ``start`` on."""
    n = np.arange(start, start + n_samples)
    return np.exp(2j * np.pi * frequency_hz * n / sample_rate_hz)


def decimate(sig: ComplexBasebandSignal, factor: int) -> ComplexBasebandSignal:
    """Keep every ``factor``-th sample; callers band-limit beforehand."""
    if factor < 1:
        raise RateError(f"Decimation factor must be >= 1, got {factor}")
    if factor == 1:
        return sig
    return ComplexBasebandSignal(
        sig.samples[::factor], sig.sample_rate_hz / factor, dict(sig.metadata)
    )


def synthesize_carrier(
    symbols: np.ndarray,
    sps: int,
    rolloff: float,
    span: int,
    n_samples: int,
    stopband_atten_db: Optional[float] = None,
) -> np.ndarray:
    """Pulse-shape ``symbols`` and strictly band-limit the result.

    Symbol k peaks at sample k * sps. The band-limiting lowpass has its
    stopband edge at the occupied bandwidth (1 + rolloff) / 2 per symbol rate.
    """
    atten = stopband_atten_db or get_settings().cc_stopband_atten_db
    pulse = rrc_taps(rolloff, span, sps)
    shaped = sp_signal.upfirdn(pulse, np.asarray(symbols, dtype=np.complex128), up=sps)

    transition = _BAND_LIMIT_TRANSITION * rolloff / sps
    stop_edge = (1.0 + rolloff) / (2.0 * sps)
    band_limit = design_lowpass(stop_edge - transition, atten, transition, 1.0)
    shaped = convolve_advance(shaped, band_limit, (band_limit.size - 1) // 2)

    delay = (pulse.size - 1) // 2
    waveform = np.zeros(n_samples, dtype=np.complex128)
    available = shaped[delay : delay + n_samples]
    waveform[: available.size] = available
    return waveform


def generate_dual_carrier(
    spec: DualCarrierSpec,
    n_samples: int,
    seed: int,
    settings: Optional[Settings] = None,
) -> DualCarrier:
    """Synthesize two carriers and place them at +f_IF and -f_IF.

    Raises:
        OverlapError: If the spacing does not exceed the wider bandwidth
        RateError: If the composite rate exceeds the configured maximum
        InvalidSignalError: If fewer than 100 symbols per carrier fit
    """
    settings = settings or get_settings()
    if spec.carrier_spacing_hz <= spec.max_bandwidth_hz:
        raise OverlapError(
            f"Carrier spacing {spec.carrier_spacing_hz / 1e6:.3f} MHz does not exceed "
            f"carrier bandwidth {spec.max_bandwidth_hz / 1e6:.3f} MHz",
            details={"carrier_spacing_hz": spec.carrier_spacing_hz},
        )
    rate = composite_sample_rate(spec, settings.max_sample_rate_hz)
    alphabet = constellation(spec.modulation)
    rng = np.random.default_rng(seed)

    carriers: list[ComplexBasebandSignal] = []
    streams: list[SymbolStream] = []
    for index, (bandwidth, power) in enumerate(
        zip(spec.cc_bandwidth_hz, spec.per_cc_power)
    ):
        sps = samples_per_symbol(rate, bandwidth)
        n_symbols = math.ceil(n_samples / sps)
        if n_symbols < 100:
            raise InvalidSignalError(
                f"{n_samples} samples hold only {n_symbols} symbols of CC{index + 1}; "
                "at least 100 are required",
                details={"n_samples": n_samples},
            )
        symbols = alphabet[rng.integers(0, alphabet.size, n_symbols + spec.pulse_span_symbols)]
        waveform = synthesize_carrier(
            symbols,
            sps,
            spec.rolloff,
            spec.pulse_span_symbols,
            n_samples,
            settings.cc_stopband_atten_db,
        )
        waveform *= np.sqrt(power / np.mean(np.abs(waveform) ** 2))
        carriers.append(
            ComplexBasebandSignal(waveform, rate, {"carrier": index + 1, "sps": sps})
        )
        streams.append(
            SymbolStream(
                symbols[:n_symbols],
                bandwidth,
                rolloff=spec.rolloff,
                samples_per_symbol=sps,
                pulse_span_symbols=spec.pulse_span_symbols,
            )
        )

    f_if = spec.f_if_hz
    composite = carriers[0].samples * tone(n_samples, f_if, rate) + carriers[
        1
    ].samples * tone(n_samples, -f_if, rate)
    logger.debug(
        f"Dual carrier: {n_samples} samples at {rate / 1e6:.3f} MHz, "
        f"f_IF {f_if / 1e6:.3f} MHz, seed {seed}"
    )
    return DualCarrier(
        composite=ComplexBasebandSignal(composite, rate, {"f_if_hz": f_if}),
        cc1=carriers[0],
        cc2=carriers[1],
        symbols=(streams[0], streams[1]),
        f_if_hz=f_if,
    )


def add_awgn(
    sig: ComplexBasebandSignal, snr_db: float, seed: int = 0
) -> ComplexBasebandSignal:
    """Add circular complex white Gaussian noise at ``snr_db`` below the signal power."""
    rng = np.random.default_rng(seed)
    noise_power = sig.power() / 10.0 ** (snr_db / 10.0)
    noise = np.sqrt(noise_power / 2.0) * (
        rng.standard_normal(len(sig)) + 1j * rng.standard_normal(len(sig))
    )
    return sig.with_samples(sig.samples + noise)


def align(
    ref: ComplexBasebandSignal,
    obs: ComplexBasebandSignal,
    max_lag: int,
    min_overlap: Optional[int] = None,
) -> AlignResult:
    """Estimate the integer delay and complex gain of ``obs`` relative to ``ref``.

    ``lag`` is positive when ``obs`` is delayed: obs(n) = g ref(n - lag). The
    aligned observation is ``obs(n + lag) / g`` on the overlap and zero
    elsewhere, so it lines up with ``ref`` sample for sample.

    Raises:
        RateError: If the rates differ
        AlignError: If the overlap is too short or the signals are unrelated
    """
    if ref.sample_rate_hz != obs.sample_rate_hz:
        raise RateError(
            f"Cannot align signals at {ref.sample_rate_hz} and {obs.sample_rate_hz} Hz"
        )
    minimum = min_overlap if min_overlap is not None else get_settings().min_align_overlap
    r, o = ref.samples, obs.samples

    corr = sp_signal.correlate(o, r, mode="full", method="auto")
    lags = sp_signal.correlation_lags(o.size, r.size, mode="full")
    window = np.abs(lags) <= max_lag
    lag = int(lags[window][np.argmax(np.abs(corr[window]))])

    start, stop = max(0, -lag), min(r.size, o.size - lag)
    if stop - start < minimum:
        raise AlignError(
            f"Overlap of {max(stop - start, 0)} samples at lag {lag} is below {minimum}",
            details={"lag": lag},
        )
    r_ov = r[start:stop]
    o_ov = o[start + lag : stop + lag]
    r_energy = float(np.real(np.vdot(r_ov, r_ov)))
    o_energy = float(np.real(np.vdot(o_ov, o_ov)))
    cross = np.vdot(r_ov, o_ov)
    peak = abs(cross) / np.sqrt(max(r_energy * o_energy, 1e-300))
    if peak < 0.1:
        raise AlignError(
            f"Peak normalized correlation {peak:.3g} is below 0.1",
            details={"lag": lag, "peak": float(peak)},
        )

    gain = complex(cross / r_energy)
    aligned = np.zeros(r.size, dtype=np.complex128)
    aligned[start:stop] = o_ov / gain
    return AlignResult(lag, gain, ComplexBasebandSignal(aligned, ref.sample_rate_hz))
