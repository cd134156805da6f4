"""Sub-band basis function value types."""

from dataclasses import dataclass

import numpy as np

from subband_dpd.core.exceptions import OrderError, ShapeError
from subband_dpd.models.sub_band import SubBandId


def basis_orders(sub_band: SubBandId, q: int) -> list[int]:
    """Nonlinearity orders p = m, m+2, ..., Q carried by a sub-band basis."""
    if q % 2 == 0 or q < sub_band.m:
        raise OrderError(
            f"DPD order Q={q} must be odd and >= {sub_band.m} for {sub_band.label}",
            details={"q": q, "sub_band": sub_band.label},
        )
    return list(range(sub_band.m, q + 1, 2))


@dataclass(frozen=True, eq=False)
class BasisSet:
    """Per-sample static-nonlinear basis functions u_p(n) of one sub-band.

    ``columns`` has shape (n_samples, n_orders); column k holds order
    ``orders[k]``.
    """

    sub_band: SubBandId
    q: int
    columns: np.ndarray
    rate_hz: float

    def __post_init__(self) -> None:
        columns = np.array(self.columns, dtype=np.complex128)
        if columns.ndim == 1:
            columns = columns[:, None]
        expected = len(basis_orders(self.sub_band, self.q))
        if columns.ndim != 2 or columns.shape[1] != expected:
            raise ShapeError(
                f"{self.sub_band.label} with Q={self.q} needs {expected} columns, "
                f"got shape {columns.shape}"
            )
        columns.flags.writeable = False
        object.__setattr__(self, "columns", columns)

    @property
    def orders(self) -> list[int]:
        return basis_orders(self.sub_band, self.q)

    @property
    def n_samples(self) -> int:
        return int(self.columns.shape[0])

    @property
    def n_orders(self) -> int:
        return int(self.columns.shape[1])

    def column(self, p: int) -> np.ndarray:
        """Return the column of nonlinearity order ``p``."""
        return self.columns[:, self.orders.index(p)]


@dataclass(frozen=True, eq=False)
class OrthoTransform:
    """Lower-triangular W with real positive diagonal; s(n) = W u(n)."""

    sub_band: SubBandId
    q: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=np.complex128)
        size = len(basis_orders(self.sub_band, self.q))
        if matrix.shape != (size, size):
            raise ShapeError(
                f"Transform for {self.sub_band.label}, Q={self.q} must be "
                f"{size}x{size}, got {matrix.shape}"
            )
        if np.any(np.triu(matrix, k=1) != 0):
            raise ShapeError("Orthogonalizing transform must be lower-triangular")
        diagonal = np.diag(matrix)
        if np.any(diagonal.real <= 0) or np.any(
            np.abs(diagonal.imag) > 1e-12 * np.abs(diagonal.real)
        ):
            raise ShapeError("Orthogonalizing transform diagonal must be real and positive")
        matrix.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def identity(cls, sub_band: SubBandId, q: int) -> "OrthoTransform":
        size = len(basis_orders(sub_band, q))
        return cls(sub_band, q, np.eye(size, dtype=np.complex128))


@dataclass(frozen=True, eq=False)
class OrthoBasisSet(BasisSet):
    """Orthogonalized basis s_p(n); same layout as :class:`BasisSet`."""

    def correlation_matrix(self) -> np.ndarray:
        """Normalized sample correlation |<s_i, s_j>| / (||s_i|| ||s_j||)."""
        gram = self.columns.conj().T @ self.columns
        norms = np.sqrt(np.real(np.diag(gram)))
        return np.abs(gram) / np.outer(norms, norms)
