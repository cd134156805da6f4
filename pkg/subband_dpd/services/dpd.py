"""Sub-band DPD main path: regressors, injection signals and the PA input."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional, Protocol

import numpy as np
from scipy import linalg

from subband_dpd.core.exceptions import OrderError, RateError, ShapeError
from subband_dpd.models.basis import OrthoBasisSet, OrthoTransform
from subband_dpd.models.dpd import DpdCoefficients, Regressor
from subband_dpd.models.signal import ComplexBasebandSignal
from subband_dpd.models.sub_band import SubBandId
from subband_dpd.services.basis import (
    SignalLike,
    apply_transform,
    fifth_order_basis,
    gen_basis,
)
from subband_dpd.services.signals import tone

logger = logging.getLogger(__name__)


class InjectionSource(Protocol):
    """Anything that turns the CC baseband signals into a sub-band injection."""

    @property
    def sub_band(self) -> SubBandId: ...

    def injection(
        self, x1: ComplexBasebandSignal, x2: ComplexBasebandSignal
    ) -> ComplexBasebandSignal: ...


def build_regressor(ortho: OrthoBasisSet, memory_depth: int) -> Regressor:
    """Stack s(n), s(n-1), ..., s(n-N) per row with zero pre-history."""
    if memory_depth < 0:
        raise ShapeError(f"Memory depth must be >= 0, got {memory_depth}")
    n, k_cols = ortho.columns.shape
    rows = np.zeros((n, k_cols * (memory_depth + 1)), dtype=np.complex128)
    for delay in range(memory_depth + 1):
        rows[delay:, delay * k_cols : (delay + 1) * k_cols] = ortho.columns[: n - delay]
    return Regressor(ortho.sub_band, ortho.q, memory_depth, rows, ortho.rate_hz)


def injection_signal(coeffs: DpdCoefficients, reg: Regressor) -> ComplexBasebandSignal:
    """x~(n) = alpha^H s(n)."""
    if (coeffs.sub_band, coeffs.q, coeffs.memory_depth) != (
        reg.sub_band,
        reg.q,
        reg.memory_depth,
    ):
        raise ShapeError(
            f"Coefficients {coeffs.sub_band.label} Q={coeffs.q} N={coeffs.memory_depth} "
            f"do not match regressor {reg.sub_band.label} Q={reg.q} N={reg.memory_depth}"
        )
    return ComplexBasebandSignal(reg.rows @ np.conj(coeffs.taps), reg.rate_hz)


def compose_pa_input(
    x: ComplexBasebandSignal,
    injections: Sequence[tuple[SubBandId, ComplexBasebandSignal]],
    f_if_hz: float,
) -> ComplexBasebandSignal:
    """x~(n) = x(n) + sum of injections upconverted to their sub-band centres."""
    total = np.array(x.samples, copy=True)
    for sub_band, injection in injections:
        if injection.sample_rate_hz != x.sample_rate_hz:
            raise RateError(
                f"Injection for {sub_band.label} is at {injection.sample_rate_hz} Hz, "
                f"composite at {x.sample_rate_hz} Hz"
            )
        if len(injection) != len(x):
            raise ShapeError(
                f"Injection for {sub_band.label} has {len(injection)} samples, "
                f"composite has {len(x)}"
            )
        total += injection.samples * tone(
            len(x), sub_band.center_hz(f_if_hz), x.sample_rate_hz
        )
    return x.with_samples(total)


@dataclass(frozen=True)
class SubBandDpd:
    """Learned or closed-form DPD of one sub-band with its frozen transform W."""

    coefficients: DpdCoefficients
    transform: OrthoTransform

    def __post_init__(self) -> None:
        if (self.transform.sub_band, self.transform.q) != (
            self.coefficients.sub_band,
            self.coefficients.q,
        ):
            raise ShapeError("Transform and coefficients describe different bases")

    @property
    def sub_band(self) -> SubBandId:
        return self.coefficients.sub_band

    @property
    def q(self) -> int:
        return self.coefficients.q

    @property
    def memory_depth(self) -> int:
        return self.coefficients.memory_depth

    @classmethod
    def zeros(
        cls, sub_band: SubBandId, q: int, memory_depth: int, transform: OrthoTransform
    ) -> "SubBandDpd":
        return cls(DpdCoefficients.zeros(sub_band, q, memory_depth), transform)

    def regressor(self, x1: SignalLike, x2: SignalLike) -> Regressor:
        basis = gen_basis(x1, x2, self.sub_band, self.q)
        return build_regressor(apply_transform(self.transform, basis), self.memory_depth)

    def injection(
        self, x1: ComplexBasebandSignal, x2: ComplexBasebandSignal
    ) -> ComplexBasebandSignal:
        return injection_signal(self.coefficients, self.regressor(x1, x2))

    def with_taps(self, taps: np.ndarray) -> "SubBandDpd":
        return SubBandDpd(self.coefficients.with_taps(taps), self.transform)

    def basis_domain_taps(self) -> np.ndarray:
        """Filters h[k, r] on the raw basis: x~(n) = sum_k,r h[k, r] u_r(n - k).

        Shape (N + 1, n_orders); h = conj(alpha_k) W per delay k.
        """
        return np.conj(self.coefficients.per_delay()) @ self.transform.matrix

    @classmethod
    def from_basis_taps(
        cls,
        sub_band: SubBandId,
        q: int,
        taps: np.ndarray,
        transform: Optional[OrthoTransform] = None,
    ) -> "SubBandDpd":
        """Build a DPD whose injection is sum_k,r taps[k, r] u_r(n - k).

        With the identity transform a scalar closed-form alpha (x~ = alpha u3)
        is stored as conj(alpha).
        """
        transform = transform or OrthoTransform.identity(sub_band, q)
        h = np.atleast_2d(np.asarray(taps, dtype=np.complex128))
        if h.shape[1] != transform.matrix.shape[0]:
            raise ShapeError(
                f"Basis taps need {transform.matrix.shape[0]} orders, got {h.shape[1]}"
            )
        # conj(alpha) = h W^-1, solved as W^T conj(alpha)^T = h^T
        alpha_conj = linalg.solve_triangular(transform.matrix.T, h.T, lower=False).T
        coefficients = DpdCoefficients(
            sub_band, q, h.shape[0] - 1, np.conj(alpha_conj).reshape(-1)
        )
        return cls(coefficients, transform)


@dataclass(frozen=True)
class FifthOrderInverseDpd:
    """IM3 injection alpha3 u3 + alpha51 |x1|^2 u3 + alpha52 |x2|^2 u3."""

    sub_band: SubBandId
    alphas: tuple[complex, complex, complex]

    def __post_init__(self) -> None:
        if self.sub_band.m != 3:
            raise OrderError(
                f"Fifth-order inverse applies to IM3 sub-bands, got {self.sub_band.label}"
            )

    def injection(
        self, x1: ComplexBasebandSignal, x2: ComplexBasebandSignal
    ) -> ComplexBasebandSignal:
        columns = fifth_order_basis(x1, x2, self.sub_band.sign)
        return ComplexBasebandSignal(
            columns @ np.asarray(self.alphas, dtype=np.complex128), x1.sample_rate_hz
        )


def predistort(
    x: ComplexBasebandSignal,
    x1: ComplexBasebandSignal,
    x2: ComplexBasebandSignal,
    sources: Sequence[InjectionSource],
    f_if_hz: float,
) -> ComplexBasebandSignal:
    """Compose the PA input from the composite and every active sub-band DPD."""
    return compose_pa_input(
        x, [(source.sub_band, source.injection(x1, x2)) for source in sources], f_if_hz
    )
