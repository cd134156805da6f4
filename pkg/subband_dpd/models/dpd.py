"""Sub-band DPD coefficient and regressor value types."""

from dataclasses import dataclass

import numpy as np

from subband_dpd.core.exceptions import ShapeError
from subband_dpd.models.basis import basis_orders
from subband_dpd.models.sub_band import SubBandId


def coefficient_count(sub_band: SubBandId, q: int, memory_depth: int) -> int:
    """Number of complex taps ((Q - m)/2 + 1)(N + 1) of one sub-band DPD."""
    return len(basis_orders(sub_band, q)) * (memory_depth + 1)


@dataclass(frozen=True, eq=False)
class DpdCoefficients:
    """Stacked filter taps for one sub-band.

    Layout is delay-major: all orders at delay 0, then all orders at delay 1,
    and so on up to delay N.
    """

    sub_band: SubBandId
    q: int
    memory_depth: int
    taps: np.ndarray

    def __post_init__(self) -> None:
        if self.memory_depth < 0:
            raise ShapeError(f"Memory depth must be >= 0, got {self.memory_depth}")
        taps = np.array(self.taps, dtype=np.complex128).reshape(-1)
        expected = coefficient_count(self.sub_band, self.q, self.memory_depth)
        if taps.size != expected:
            raise ShapeError(
                f"{self.sub_band.label} Q={self.q} N={self.memory_depth} needs "
                f"{expected} taps, got {taps.size}"
            )
        if not np.all(np.isfinite(taps)):
            raise ShapeError("DPD taps must be finite")
        taps.flags.writeable = False
        object.__setattr__(self, "taps", taps)

    @classmethod
    def zeros(cls, sub_band: SubBandId, q: int, memory_depth: int) -> "DpdCoefficients":
        size = coefficient_count(sub_band, q, memory_depth)
        return cls(sub_band, q, memory_depth, np.zeros(size, dtype=np.complex128))

    @property
    def n_orders(self) -> int:
        return len(basis_orders(self.sub_band, self.q))

    def per_delay(self) -> np.ndarray:
        """Taps reshaped to (N + 1, n_orders)."""
        return self.taps.reshape(self.memory_depth + 1, self.n_orders)

    def with_taps(self, taps: np.ndarray) -> "DpdCoefficients":
        return DpdCoefficients(self.sub_band, self.q, self.memory_depth, taps)


@dataclass(frozen=True, eq=False)
class Regressor:
    """Rows s̄(n) = [s(n); s(n-1); ...; s(n-N)] in the DPD tap layout."""

    sub_band: SubBandId
    q: int
    memory_depth: int
    rows: np.ndarray
    rate_hz: float

    def __post_init__(self) -> None:
        rows = np.array(self.rows, dtype=np.complex128)
        expected = coefficient_count(self.sub_band, self.q, self.memory_depth)
        if rows.ndim != 2 or rows.shape[1] != expected:
            raise ShapeError(
                f"Regressor rows must have {expected} entries, got shape {rows.shape}"
            )
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)

    @property
    def n_samples(self) -> int:
        return int(self.rows.shape[0])
