"""Feedback receiver: isolates one IM sub-band of the PA output."""

import logging
from typing import Optional

from subband_dpd.config import get_settings
from subband_dpd.core.exceptions import RateError
from subband_dpd.models.signal import ComplexBasebandSignal
from subband_dpd.models.sub_band import SubBandId
from subband_dpd.schemas.carrier import DualCarrierSpec
from subband_dpd.schemas.learning import ObserverConfig
from subband_dpd.schemas.scenario import ObserverSection
from subband_dpd.services.pa import SubBandFilter, sub_band_filter
from subband_dpd.services.signals import add_awgn, convolve_advance, decimate, tone

logger = logging.getLogger(__name__)


def default_observer_config(
    sub_band: SubBandId,
    spec: DualCarrierSpec,
    q: int,
    section: Optional[ObserverSection] = None,
) -> ObserverConfig:
    """Observer for ``sub_band`` with bandwidth Q x the wider occupied CC bandwidth."""
    section = section or ObserverSection()
    return ObserverConfig(
        sub_band=sub_band,
        obs_bandwidth_hz=section.bandwidth_hz or q * spec.occupied_bandwidth_hz(),
        decimation=section.decimation,
        stopband_atten_db=(
            section.stopband_atten_db or get_settings().observer_stopband_atten_db
        ),
        noise_snr_db=section.noise_snr_db,
    )


def observer_filter(
    cfg: ObserverConfig, f_if_hz: float, sample_rate_hz: float
) -> SubBandFilter:
    """Lowpass used by :func:`observe_sub_band` for ``cfg``.

    Raises:
        RateError: If the decimated rate cannot carry the observation bandwidth
    """
    lowpass = sub_band_filter(
        cfg.obs_bandwidth_hz / 2.0, f_if_hz, sample_rate_hz, cfg.stopband_atten_db
    )
    if cfg.output_rate_hz(sample_rate_hz) < 2.0 * lowpass.cutoff_hz:
        raise RateError(
            f"Decimation by {cfg.decimation} leaves "
            f"{cfg.output_rate_hz(sample_rate_hz) / 1e6:.3f} MHz for a "
            f"{2 * lowpass.cutoff_hz / 1e6:.3f} MHz observation",
            details={"decimation": cfg.decimation},
        )
    return lowpass


def observe_sub_band(
    pa_out: ComplexBasebandSignal,
    cfg: ObserverConfig,
    f_if_hz: float,
    start_sample: int = 0,
    noise_seed: Optional[int] = None,
) -> ComplexBasebandSignal:
    """Mix the sub-band to DC, lowpass (zero delay) and decimate.

    ``start_sample`` is the index of ``pa_out[0]`` on the global sample clock,
    so mixing phases match a capture taken from a longer signal.

    Raises:
        RateError: If the sub-band centre is beyond Nyquist
        DesignError: If the observation lowpass cannot be designed
    """
    rate = pa_out.sample_rate_hz
    center = cfg.sub_band.center_hz(f_if_hz)
    if abs(center) >= rate / 2.0:
        raise RateError(
            f"{cfg.sub_band.label} at {center / 1e6:.3f} MHz is beyond Nyquist "
            f"of {rate / 1e6:.3f} MHz"
        )
    lowpass = observer_filter(cfg, f_if_hz, rate)
    if cfg.noise_snr_db is not None:
        seed = cfg.noise_seed if noise_seed is None else noise_seed
        pa_out = add_awgn(pa_out, cfg.noise_snr_db, seed)

    mixed = pa_out.samples * tone(len(pa_out), -center, rate, start_sample)
    filtered = convolve_advance(mixed, lowpass.taps, (lowpass.taps.size - 1) // 2)
    observed = ComplexBasebandSignal(
        filtered,
        rate,
        {"sub_band": cfg.sub_band.label, "passband_clipped": lowpass.clipped},
    )
    return decimate(observed, cfg.decimation)
