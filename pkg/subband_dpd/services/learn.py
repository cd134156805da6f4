"""Coefficient learning: decorrelation updates, closed forms and moments."""

import logging
import math
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import NamedTuple, Optional, Union

import numpy as np
import pandas as pd

from subband_dpd.config import Settings, get_settings
from subband_dpd.core.exceptions import DivergenceError, ShapeError, ZeroDivideError
from subband_dpd.models.basis import BasisSet
from subband_dpd.models.learning import THIRD_ORDER_MOMENTS, LearningHistory, MomentSet
from subband_dpd.models.pa import PHModel
from subband_dpd.models.signal import ComplexBasebandSignal
from subband_dpd.models.sub_band import SubBandId
from subband_dpd.schemas.carrier import DualCarrierSpec
from subband_dpd.schemas.learning import LearningConfig, LearningMode, ObserverConfig
from subband_dpd.schemas.scenario import ObserverSection
from subband_dpd.services.basis import SignalLike, apply_transform, gen_basis, orthogonalize
from subband_dpd.services.dpd import InjectionSource, SubBandDpd, build_regressor, predistort
from subband_dpd.services.observe import (
    default_observer_config,
    observe_sub_band,
    observer_filter,
)
from subband_dpd.services.pa import ph_apply
from subband_dpd.services.signals import (
    DualCarrier,
    align,
    composite_sample_rate,
    generate_dual_carrier,
    samples_per_symbol,
    tone,
)

logger = logging.getLogger(__name__)

# Samples used to estimate the orthogonalizing transform when blocks are tiny
_MIN_TRANSFORM_SAMPLES = 1000

# Default regularizer relative to the mean regressor energy
_C_SCALE = 1e-8


def _require_nonzero(value: complex, what: str) -> complex:
    if value == 0 or not np.isfinite(value):
        raise ZeroDivideError(f"{what} is zero or not finite")
    return value


def sample_adaptive_step(
    alpha: np.ndarray, s: np.ndarray, e: complex, mu: float, c: float
) -> np.ndarray:
    """alpha' = alpha - mu / (||s||^2 + C) s conj(e)."""
    alpha = np.asarray(alpha, dtype=np.complex128)
    s = np.asarray(s, dtype=np.complex128)
    if alpha.shape != s.shape:
        raise ShapeError(f"Coefficient shape {alpha.shape} != regressor {s.shape}")
    grad = s * np.conj(e)
    norm = np.sum(np.abs(s) ** 2)
    denominator = _require_nonzero(norm + c, "Regressor energy plus C")
    return alpha - (mu / denominator) * grad


def block_adaptive_update(
    alpha: np.ndarray, block: np.ndarray, e: np.ndarray, mu: float, c: float
) -> np.ndarray:
    """alpha' = alpha - mu / (||S||_F^2 + C) sum_n s(n) conj(e(n)).

    Args:
        alpha: Current taps, length K(N + 1)
        block: Regressor rows S, shape (M, K(N + 1))
        e: Observed error, length M
        mu: Step size
        c: Regularizer

    Returns:
        Updated taps
    """
    alpha = np.asarray(alpha, dtype=np.complex128)
    block = np.asarray(block, dtype=np.complex128)
    e = np.asarray(e, dtype=np.complex128).reshape(-1)
    if block.ndim != 2 or block.shape[1] != alpha.size or block.shape[0] != e.size:
        raise ShapeError(
            f"Block {block.shape} does not match taps {alpha.shape} and error {e.shape}"
        )
    if e.size == 0:
        raise ShapeError("Block must contain at least one sample")
    grad = (block * np.conj(e)[:, None]).sum(axis=0)
    norm = np.sum(np.abs(block) ** 2)
    denominator = _require_nonzero(norm + c, "Block energy plus C")
    return alpha - (mu / denominator) * grad


def alpha_third_inverse(f1: complex, f3: complex) -> complex:
    """Third-order inverse -f3 / f1."""
    return -complex(f3) / _require_nonzero(complex(f1), "f1")


def alpha_mmse(f1: complex, f3: complex, moments: MomentSet) -> complex:
    """Closed-form minimizer of the IM3 error power of a memoryless cubic PA."""
    f1, f3 = complex(f1), complex(f3)
    e62_44 = moments(6, 2) + moments(4, 4)
    numerator = np.conj(f1) * f3 * moments(4, 2) + 2.0 * abs(f3) ** 2 * e62_44
    denominator = (
        abs(f1) ** 2 * moments(4, 2)
        + 4.0 * (f1 * np.conj(f3)).real * e62_44
        + 4.0 * abs(f3) ** 2 * (moments(4, 6) + 2.0 * moments(6, 4) + moments(8, 2))
    )
    return complex(-numerator / _require_nonzero(denominator, "MMSE denominator"))


def alpha_decorr_analytic(f1: complex, f3: complex, moments: MomentSet) -> complex:
    """Decorrelating alpha: -f3 / (f1 + 2 f3 (E60 / E40 + E04 / E02))."""
    f1, f3 = complex(f1), complex(f3)
    ratio = moments(6, 0) / _require_nonzero(moments(4, 0), "E40") + moments(
        0, 4
    ) / _require_nonzero(moments(0, 2), "E02")
    return -f3 / _require_nonzero(f1 + 2.0 * f3 * ratio, "Decorrelation denominator")


def fifth_order_inverse(
    f1: complex, f3: complex, f5: complex
) -> tuple[complex, complex, complex]:
    """Coefficients of u3, |x1|^2 u3 and |x2|^2 u3 nulling IM3 terms through order five."""
    f1 = _require_nonzero(complex(f1), "f1")
    f3, f5 = complex(f3), complex(f5)
    alpha3 = -f3 / f1
    cross = 2.0 * f3**2 / f1**2
    return alpha3, cross - 2.0 * f5 / f1, cross - 3.0 * f5 / f1


def estimate_moments(
    x1: SignalLike,
    x2: SignalLike,
    needed: Iterable[tuple[int, int]] = THIRD_ORDER_MOMENTS,
) -> MomentSet:
    """E_ij = mean(|x1|^i) mean(|x2|^j), treating the carriers as independent."""
    a = np.abs(x1.samples if isinstance(x1, ComplexBasebandSignal) else np.asarray(x1))
    b = np.abs(x2.samples if isinstance(x2, ComplexBasebandSignal) else np.asarray(x2))
    cache_a: dict[int, float] = {0: 1.0}
    cache_b: dict[int, float] = {0: 1.0}
    values = {}
    for i, j in needed:
        if i not in cache_a:
            cache_a[i] = float(np.mean(a**i))
        if j not in cache_b:
            cache_b[j] = float(np.mean(b**j))
        values[(i, j)] = cache_a[i] * cache_b[j]
    return MomentSet(values)


def gaussian_moments(
    var1: float,
    var2: float,
    needed: Iterable[tuple[int, int]] = THIRD_ORDER_MOMENTS,
) -> MomentSet:
    """Moments of independent circular complex Gaussians: E|x|^(2k) = k! var^k."""

    def even_moment(order: int, var: float) -> float:
        if order % 2:
            raise ShapeError(f"Gaussian moment of odd order {order} is not tabulated")
        k = order // 2
        return math.factorial(k) * var**k

    return MomentSet(
        {(i, j): even_moment(i, var1) * even_moment(j, var2) for i, j in needed}
    )


class ClosedLoopResult(NamedTuple):
    """Output of :func:`run_closed_loop`."""

    dpds: dict[SubBandId, SubBandDpd]
    histories: dict[SubBandId, LearningHistory]
    carrier: DualCarrier


class _Window(NamedTuple):
    start: int
    stop: int


def _round_up(value: int, multiple: int) -> int:
    return -(-value // multiple) * multiple


def _residual_db(e: np.ndarray) -> float:
    return float(10.0 * np.log10(np.mean(np.abs(e) ** 2) + 1e-300))


def _observer_guards(
    pa: PHModel, observer: ObserverConfig, cfg: LearningConfig, f_if_hz: float, rate: float
) -> tuple[int, int]:
    """Samples needed before and after a block for settled PA and lowpass output."""
    lowpass = observer_filter(observer, f_if_hz, rate)
    half = (lowpass.taps.size - 1) // 2
    guard_lo = _round_up(pa.memory_length + half + 8, observer.decimation)
    guard_hi = half + cfg.latency_samples + cfg.max_lag + 8
    return guard_lo, guard_hi


class _TargetLoop:
    """Closed-loop learner for one sub-band with other sub-band DPDs frozen."""

    def __init__(
        self,
        pa: PHModel,
        carrier: DualCarrier,
        target: SubBandId,
        q: int,
        memory_depth: int,
        active: Sequence[InjectionSource],
        cfg: LearningConfig,
        observer: ObserverConfig,
        settings: Settings,
        first_block: int,
    ) -> None:
        self.pa = pa
        self.cfg = cfg
        self.settings = settings
        self.sub_band = target
        self.f_if = carrier.f_if_hz
        self.rate = carrier.composite.sample_rate_hz
        self.first_block = first_block
        self.observer = observer
        self.decimation = observer.decimation
        self.guard_lo, self.guard_hi = _observer_guards(
            pa, observer, cfg, self.f_if, self.rate
        )

        self.base_input = predistort(
            carrier.composite, carrier.cc1, carrier.cc2, active, self.f_if
        ).samples
        self.injection_tone = tone(
            len(carrier.composite), target.center_hz(self.f_if), self.rate
        )

        basis = gen_basis(carrier.cc1, carrier.cc2, target, q)
        transform_len = max(cfg.effective_block_size, _MIN_TRANSFORM_SAMPLES)
        training = BasisSet(
            target, q, basis.columns[first_block : first_block + transform_len], basis.rate_hz
        )
        _, transform = orthogonalize(training)
        self.dpd = SubBandDpd.zeros(target, q, memory_depth, transform)
        self.rows = build_regressor(apply_transform(transform, basis), memory_depth).rows

        first_rows = self.rows[first_block : first_block + transform_len]
        mean_energy = float(np.mean(np.sum(np.abs(first_rows) ** 2, axis=1)))
        self.c = cfg.c if cfg.c is not None else _C_SCALE * mean_energy

        self.lag, self.gain = self._calibrate(transform_len)

    def _window(self, block_start: int, block_len: int) -> _Window:
        return _Window(block_start - self.guard_lo, block_start + block_len + self.guard_hi)

    def _pa_input(self, window: _Window, alpha: np.ndarray) -> np.ndarray:
        rows = self.rows[window.start : window.stop]
        injection = rows @ np.conj(alpha)
        return (
            self.base_input[window.start : window.stop]
            + injection * self.injection_tone[window.start : window.stop]
        )

    def _capture(self, pa_input: np.ndarray) -> np.ndarray:
        """PA output with the feedback latency applied."""
        output = ph_apply(self.pa, ComplexBasebandSignal(pa_input, self.rate)).samples
        latency = self.cfg.latency_samples
        if latency == 0:
            return output
        delayed = np.zeros_like(output)
        delayed[latency:] = output[:-latency]
        return delayed

    def _calibrate(self, length: int) -> tuple[int, complex]:
        window = self._window(self.first_block, length)
        pa_input = self._pa_input(window, self.dpd.coefficients.taps)
        result = align(
            ComplexBasebandSignal(pa_input, self.rate),
            ComplexBasebandSignal(self._capture(pa_input), self.rate),
            self.cfg.max_lag,
            min(self.settings.min_align_overlap, length),
        )
        logger.debug(
            f"{self.sub_band.label}: feedback lag {result.lag}, gain {result.phase_gain:.4g}"
        )
        return result.lag, result.phase_gain

    def _synchronize(self, pa_input: np.ndarray, captured: np.ndarray) -> np.ndarray:
        lag, gain = self.lag, self.gain
        if pa_input.size >= self.settings.min_align_overlap + self.cfg.max_lag:
            result = align(
                ComplexBasebandSignal(pa_input, self.rate),
                ComplexBasebandSignal(captured, self.rate),
                self.cfg.max_lag,
            )
            lag, gain = result.lag, result.phase_gain
        aligned = np.zeros_like(captured)
        start, stop = max(0, -lag), min(captured.size, captured.size - lag)
        aligned[start:stop] = captured[start + lag : stop + lag]
        return aligned / gain

    def observe_block(self, block_start: int, alpha: np.ndarray, update: int) -> tuple[
        np.ndarray, np.ndarray
    ]:
        """Error samples and matching regressor rows of one block."""
        block_len = self.cfg.effective_block_size
        window = self._window(block_start, block_len)
        pa_input = self._pa_input(window, alpha)
        aligned = self._synchronize(pa_input, self._capture(pa_input))
        observed = observe_sub_band(
            ComplexBasebandSignal(aligned, self.rate),
            self.observer,
            self.f_if,
            start_sample=window.start,
            noise_seed=self.observer.noise_seed + update,
        ).samples
        offset = self.guard_lo // self.decimation
        n_obs = -(-block_len // self.decimation)
        error = observed[offset : offset + n_obs]
        rows = self.rows[block_start : block_start + block_len : self.decimation]
        return error, rows

    def run(self) -> tuple[SubBandDpd, LearningHistory]:
        cfg = self.cfg
        history = LearningHistory(self.sub_band)
        alpha = np.array(self.dpd.coefficients.taps, copy=True)
        interval = cfg.effective_update_interval
        initial: Optional[float] = None

        for update in range(cfg.max_updates):
            block_start = self.first_block + (0 if cfg.reuse_block else update * interval)
            error, rows = self.observe_block(block_start, alpha, update)
            residual = _residual_db(error)
            if initial is None:
                initial = residual
            elif residual > initial + cfg.divergence_db:
                raise DivergenceError(
                    f"{self.sub_band.label} residual rose to {residual:.1f} dB from "
                    f"{initial:.1f} dB after {update} updates",
                    details={"sub_band": self.sub_band.label, "update": update},
                )
            if cfg.mode is LearningMode.SAMPLE:
                alpha = sample_adaptive_step(alpha, rows[0], error[0], cfg.mu, self.c)
            else:
                alpha = block_adaptive_update(alpha, rows, error, cfg.mu, self.c)
            history.record(alpha, residual)
            logger.debug(f"{self.sub_band.label} update {update}: {residual:.2f} dB")

        logger.info(
            f"{self.sub_band.label}: {len(history)} updates, residual "
            f"{history.residual_db[0]:.1f} -> {history.final_residual_db:.1f} dB"
        )
        return self.dpd.with_taps(alpha), history


def training_length(
    cfg: LearningConfig, first_block: int, guard_hi: int
) -> int:
    """Samples a training waveform needs for ``cfg.max_updates`` updates."""
    block = max(cfg.effective_block_size, _MIN_TRANSFORM_SAMPLES)
    span = 0 if cfg.reuse_block else (cfg.max_updates - 1) * cfg.effective_update_interval
    return first_block + span + block + guard_hi


def run_closed_loop(
    pa: PHModel,
    spec: DualCarrierSpec,
    targets: Sequence[SubBandId],
    q: int,
    memory_depth: int,
    cfg: LearningConfig,
    seed: int,
    observer: Optional[ObserverSection] = None,
    carrier: Optional[DualCarrier] = None,
    settings: Optional[Settings] = None,
) -> ClosedLoopResult:
    """Learn sub-band DPDs one target at a time in the listed order.

    Each update composes the PA input with constant coefficients, runs the PA,
    applies the feedback latency, aligns the capture, observes the target
    sub-band and updates the taps. Coefficients learned from one block take
    effect from the next block. Earlier targets stay active while later ones
    are learned.

    Args:
        pa: PA model
        spec: Carrier description
        targets: Sub-bands to learn, in order
        q: DPD order Q
        memory_depth: DPD memory depth N
        cfg: Learning schedule
        seed: Waveform seed
        observer: Observer knobs shared by all targets
        carrier: Pre-generated training waveform; generated from ``seed`` if None
        settings: Settings override

    Returns:
        ClosedLoopResult with one DPD and one history per target

    Raises:
        BandError: If a target order exceeds the PA order
        ShapeError: If ``carrier`` is too short for the schedule
        AlignError: If the feedback cannot be synchronized
        DivergenceError: If a residual grows beyond ``cfg.divergence_db``
    """
    settings = settings or get_settings()
    observer = observer or ObserverSection()
    for target in targets:
        target.check_order(pa.order)

    rate = (
        carrier.composite.sample_rate_hz
        if carrier is not None
        else composite_sample_rate(spec, settings.max_sample_rate_hz)
    )
    observers = {
        target: default_observer_config(target, spec, q, observer) for target in targets
    }
    guards = [
        _observer_guards(pa, observers[target], cfg, spec.f_if_hz, rate)
        for target in targets
    ]
    guard_lo = max((lo for lo, _ in guards), default=0)
    guard_hi = max((hi for _, hi in guards), default=0)
    first_block = _round_up(guard_lo + memory_depth, observer.decimation)
    needed = training_length(cfg, first_block, guard_hi)

    if carrier is None:
        max_sps = samples_per_symbol(rate, min(spec.cc_bandwidth_hz))
        carrier = generate_dual_carrier(spec, max(needed, 101 * max_sps), seed, settings)
    elif len(carrier.composite) < needed:
        raise ShapeError(
            f"Training waveform has {len(carrier.composite)} samples, {needed} are needed",
            details={"needed": needed},
        )

    dpds: dict[SubBandId, SubBandDpd] = {}
    histories: dict[SubBandId, LearningHistory] = {}
    for target in targets:
        logger.info(
            f"Learning {target.label}: Q={q}, N={memory_depth}, mode={cfg.mode.value}, "
            f"mu={cfg.mu}"
        )
        loop = _TargetLoop(
            pa,
            carrier,
            target,
            q,
            memory_depth,
            list(dpds.values()),
            cfg,
            observers[target],
            settings,
            first_block,
        )
        dpds[target], histories[target] = loop.run()
    return ClosedLoopResult(dpds, histories, carrier)


def history_to_csv(history: LearningHistory, path: Union[str, Path]) -> Path:
    """Write update index, residual dB and |alpha_k| with a metadata header."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(f"# sub_band: {history.sub_band.label}\n")
        handle.write(f"# updates: {len(history)}\n")
        history.to_frame().to_csv(handle, index=False)
    return path


def history_from_csv(path: Union[str, Path]) -> pd.DataFrame:
    """Read a history table written by :func:`history_to_csv`."""
    return pd.read_csv(path, comment="#")
