"""Static-nonlinear basis functions of the IM sub-bands and their orthogonalization."""

import logging
from typing import Union

import numpy as np
from scipy import linalg

from subband_dpd.core.exceptions import DegenerateBasisError, RateError, ShapeError
from subband_dpd.models.basis import BasisSet, OrthoBasisSet, OrthoTransform, basis_orders
from subband_dpd.models.signal import ComplexBasebandSignal
from subband_dpd.models.sub_band import BandSign, SubBandId

logger = logging.getLogger(__name__)

SignalLike = Union[ComplexBasebandSignal, np.ndarray]

# (m, p) -> terms (c, i, j) of the factor sum c |x1|^(2i) |x2|^(2j) that
# multiplies u_m = conj(x2)^((m-1)/2) x1^((m+1)/2) on the positive sub-band
COEFFICIENT_TABLES: dict[tuple[int, int], tuple[tuple[int, int, int], ...]] = {
    (3, 3): ((1, 0, 0),),
    (3, 5): ((2, 1, 0), (3, 0, 1)),
    (3, 7): ((3, 2, 0), (6, 0, 2), (12, 1, 1)),
    (3, 9): ((4, 3, 0), (10, 0, 3), (30, 2, 1), (40, 1, 2)),
    (3, 11): ((5, 4, 0), (15, 0, 4), (60, 3, 1), (100, 1, 3), (150, 2, 2)),
    (5, 5): ((1, 0, 0),),
    (5, 7): ((3, 1, 0), (4, 0, 1)),
    (5, 9): ((6, 2, 0), (10, 0, 2), (20, 1, 1)),
    (5, 11): ((10, 3, 0), (20, 0, 3), (75, 1, 2), (60, 2, 1)),
    (7, 7): ((1, 0, 0),),
    (7, 9): ((4, 1, 0), (5, 0, 1)),
    (7, 11): ((10, 2, 0), (15, 0, 2), (30, 1, 1)),
    (9, 9): ((1, 0, 0),),
    (9, 11): ((5, 1, 0), (6, 0, 1)),
    (11, 11): ((1, 0, 0),),
}

# Reorthogonalization passes of the modified Gram-Schmidt loop
_MGS_PASSES = 2

# Residual RMS below this fraction of the column RMS is rank deficiency
_DEGENERACY_RATIO = 1e-12


def _samples(x: SignalLike) -> np.ndarray:
    if isinstance(x, ComplexBasebandSignal):
        return x.samples
    return np.asarray(x, dtype=np.complex128).reshape(-1)


def _rate(x1: SignalLike, x2: SignalLike) -> float:
    rates = [x.sample_rate_hz for x in (x1, x2) if isinstance(x, ComplexBasebandSignal)]
    if len(rates) == 2 and rates[0] != rates[1]:
        raise RateError(f"Carrier rates differ: {rates[0]} vs {rates[1]} Hz")
    return rates[0] if rates else 1.0


def _oriented(
    x1: SignalLike, x2: SignalLike, sign: BandSign
) -> tuple[np.ndarray, np.ndarray]:
    a, b = _samples(x1), _samples(x2)
    if a.shape != b.shape:
        raise ShapeError(f"Carrier lengths differ: {a.size} vs {b.size}")
    # the negative sub-band is the positive one with the carriers swapped
    return (a, b) if sign is BandSign.POSITIVE else (b, a)


def base_function(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    """Lowest-order term conj(b)^((m-1)/2) a^((m+1)/2) of the IMm+ sub-band."""
    return np.conj(b) ** ((m - 1) // 2) * a ** ((m + 1) // 2)


def gen_basis(x1: SignalLike, x2: SignalLike, sub_band: SubBandId, q: int) -> BasisSet:
    """Generate u_{m,p}(n) for p = m, m+2, ..., Q.

    Args:
        x1: Baseband CC at +f_IF
        x2: Baseband CC at -f_IF
        sub_band: Target sub-band
        q: DPD order Q

    Returns:
        BasisSet with one column per order

    Raises:
        OrderError: If Q is even or below m
    """
    orders = basis_orders(sub_band, q)
    a, b = _oriented(x1, x2, sub_band.sign)
    abs_a2, abs_b2 = np.abs(a) ** 2, np.abs(b) ** 2
    base = base_function(a, b, sub_band.m)

    columns = np.empty((a.size, len(orders)), dtype=np.complex128)
    for k, p in enumerate(orders):
        factor = np.zeros(a.size)
        for coefficient, i, j in COEFFICIENT_TABLES[(sub_band.m, p)]:
            factor += coefficient * abs_a2**i * abs_b2**j
        columns[:, k] = factor * base
    return BasisSet(sub_band, q, columns, _rate(x1, x2))


def fifth_order_basis(x1: SignalLike, x2: SignalLike, sign: BandSign) -> np.ndarray:
    """Columns u3, |x1|^2 u3 and |x2|^2 u3 of an IM3 sub-band.

    These are the functions weighted by the fifth-order inverse coefficients.
    For the negative sub-band the roles of x1 and x2 are swapped.
    """
    a, b = _oriented(x1, x2, sign)
    u3 = base_function(a, b, 3)
    return np.column_stack([u3, np.abs(a) ** 2 * u3, np.abs(b) ** 2 * u3])


def orthogonalize(basis: BasisSet) -> tuple[OrthoBasisSet, OrthoTransform]:
    """Orthonormalize the columns with modified Gram-Schmidt.

    The triangular factor R of U = Q R is computed with a reorthogonalization
    pass; W = sqrt(n) R^-T is lower-triangular with a real positive diagonal
    and s = W u gives unit-RMS, mutually orthogonal columns.

    Raises:
        DegenerateBasisError: If a column is dependent on the previous ones
    """
    columns = basis.columns
    n, k_cols = columns.shape
    q_mat = np.array(columns, dtype=np.complex128, copy=True)
    r_mat = np.zeros((k_cols, k_cols), dtype=np.complex128)

    for k in range(k_cols):
        column_rms = np.linalg.norm(columns[:, k]) / np.sqrt(n)
        for _ in range(_MGS_PASSES):
            for i in range(k):
                projection = np.vdot(q_mat[:, i], q_mat[:, k])
                r_mat[i, k] += projection
                q_mat[:, k] -= projection * q_mat[:, i]
        residual = np.linalg.norm(q_mat[:, k])
        if column_rms == 0 or residual / np.sqrt(n) < _DEGENERACY_RATIO * column_rms:
            raise DegenerateBasisError(
                f"{basis.sub_band.label} order {basis.orders[k]} is linearly dependent "
                "on lower orders",
                details={"order": basis.orders[k]},
            )
        r_mat[k, k] = residual
        q_mat[:, k] /= residual

    r_inv = linalg.solve_triangular(r_mat, np.eye(k_cols, dtype=np.complex128))
    matrix = np.tril(np.sqrt(n) * r_inv.T)
    transform = OrthoTransform(basis.sub_band, basis.q, matrix)
    logger.debug(
        f"Orthogonalized {basis.sub_band.label} Q={basis.q}: "
        f"cond(R) = {np.linalg.cond(r_mat):.3g}"
    )
    return apply_transform(transform, basis), transform


def apply_transform(transform: OrthoTransform, basis: BasisSet) -> OrthoBasisSet:
    """Compute s(n) = W u(n) with a previously estimated W."""
    if transform.sub_band != basis.sub_band or transform.q != basis.q:
        raise ShapeError(
            f"Transform for {transform.sub_band.label} Q={transform.q} does not fit "
            f"basis {basis.sub_band.label} Q={basis.q}"
        )
    return OrthoBasisSet(
        basis.sub_band, basis.q, basis.columns @ transform.matrix.T, basis.rate_hz
    )
