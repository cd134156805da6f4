"""Tests for sub-band basis generation and orthogonalization."""

import numpy as np
import pytest

from subband_dpd.core.exceptions import DegenerateBasisError, OrderError, RateError, ShapeError
from subband_dpd.models.basis import OrthoTransform, basis_orders
from subband_dpd.models.signal import ComplexBasebandSignal
from subband_dpd.models.sub_band import BandSign, SubBandId
from subband_dpd.services.basis import (
    apply_transform,
    fifth_order_basis,
    gen_basis,
    orthogonalize,
)
from subband_dpd.services.signals import DualCarrier

_PHASES = 32


def _harmonic(a: np.ndarray, b: np.ndarray, p: int, harmonic: int) -> np.ndarray:
    """Content of |x|^(p-1) x at one f_IF harmonic, x = a e^(j t) + b e^(-j t)."""
    total = np.zeros(a.size, dtype=np.complex128)
    for i in range(_PHASES):
        theta = 2.0 * np.pi * i / _PHASES
        x = a * np.exp(1j * theta) + b * np.exp(-1j * theta)
        total += np.abs(x) ** (p - 1) * x * np.exp(-1j * harmonic * theta)
    return total / _PHASES


@pytest.fixture
def pair(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Two independent complex Gaussian carriers."""
    a = (rng.standard_normal(400) + 1j * rng.standard_normal(400)) / np.sqrt(2.0)
    b = (rng.standard_normal(400) + 1j * rng.standard_normal(400)) / np.sqrt(2.0)
    return a, b


class TestBasisOrders:
    """Tests for order bookkeeping."""

    def test_orders(self) -> None:
        """Orders run from m to Q in steps of two."""
        assert basis_orders(SubBandId(3), 9) == [3, 5, 7, 9]
        assert basis_orders(SubBandId(9), 9) == [9]

    @pytest.mark.parametrize("q", [4, 1])
    def test_invalid_q(self, q: int) -> None:
        """Even Q or Q below m is rejected."""
        with pytest.raises(OrderError):
            basis_orders(SubBandId(3), q)


class TestGenBasis:
    """Tests for the static-nonlinear basis functions."""

    @pytest.mark.parametrize("m", [3, 5, 7, 9, 11])
    @pytest.mark.parametrize("sign", [BandSign.POSITIVE, BandSign.NEGATIVE])
    def test_columns_are_harmonic_content(
        self, pair: tuple[np.ndarray, np.ndarray], m: int, sign: BandSign
    ) -> None:
        """Column p is the content of |x|^(p-1) x at (+-m) f_IF."""
        a, b = pair
        sub_band = SubBandId(m, sign)
        basis = gen_basis(a, b, sub_band, 11)
        for p in basis.orders:
            expected = _harmonic(a, b, p, sub_band.offset)
            scale = np.max(np.abs(expected))
            assert np.allclose(basis.column(p), expected, rtol=1e-8, atol=1e-10 * scale), (
                f"{sub_band.label} order {p}"
            )

    @pytest.mark.parametrize("sub_band", [SubBandId(3), SubBandId(7, BandSign.NEGATIVE)])
    def test_amplitude_scaling(
        self, pair: tuple[np.ndarray, np.ndarray], sub_band: SubBandId
    ) -> None:
        """Scaling both carriers by a scales the order-p column by a^p."""
        a, b = pair
        scale = 0.37
        basis = gen_basis(a, b, sub_band, 9)
        scaled = gen_basis(scale * a, scale * b, sub_band, 9)
        for p in basis.orders:
            assert np.allclose(scaled.column(p), scale**p * basis.column(p), rtol=1e-10), p

    def test_rate_from_signals(self, narrow_carrier: DualCarrier) -> None:
        """The basis carries the carrier sample rate."""
        basis = gen_basis(narrow_carrier.cc1, narrow_carrier.cc2, SubBandId(3), 5)
        assert basis.rate_hz == pytest.approx(40.0e6)
        assert basis.columns.shape == (len(narrow_carrier.cc1), 2)

    def test_rate_mismatch(self) -> None:
        """Carriers at different rates are rejected."""
        with pytest.raises(RateError):
            gen_basis(
                ComplexBasebandSignal.zeros(10, 1.0e6),
                ComplexBasebandSignal.zeros(10, 2.0e6),
                SubBandId(3),
                3,
            )

    def test_length_mismatch(self) -> None:
        """Carriers of different lengths are rejected."""
        with pytest.raises(ShapeError):
            gen_basis(np.ones(10), np.ones(11), SubBandId(3), 3)

    def test_fifth_order_columns(self, pair: tuple[np.ndarray, np.ndarray]) -> None:
        """The fifth-order inverse basis is u3, |x1|^2 u3 and |x2|^2 u3."""
        a, b = pair
        columns = fifth_order_basis(a, b, BandSign.POSITIVE)
        u3 = a**2 * np.conj(b)
        assert np.allclose(columns[:, 0], u3)
        assert np.allclose(columns[:, 1], np.abs(a) ** 2 * u3)
        assert np.allclose(columns[:, 2], np.abs(b) ** 2 * u3)


class TestOrthogonalize:
    """Tests for the orthogonalizing transform."""

    def test_orthonormal_columns(self, narrow_carrier: DualCarrier) -> None:
        """Columns of s = W u are unit-RMS and mutually orthogonal."""
        basis = gen_basis(narrow_carrier.cc1, narrow_carrier.cc2, SubBandId(3), 9)
        ortho, transform = orthogonalize(basis)
        correlation = ortho.correlation_matrix()
        assert np.allclose(correlation, np.eye(4), atol=1e-9)
        assert np.allclose(np.mean(np.abs(ortho.columns) ** 2, axis=0), 1.0)

        matrix = transform.matrix
        assert np.allclose(np.triu(matrix, k=1), 0.0)
        assert np.allclose(np.imag(np.diag(matrix)), 0.0)
        assert np.all(np.real(np.diag(matrix)) > 0)

    def test_frozen_transform_on_new_data(self, narrow_carrier: DualCarrier) -> None:
        """A transform estimated on one block applies unchanged to another."""
        basis = gen_basis(narrow_carrier.cc1, narrow_carrier.cc2, SubBandId(3), 5)
        _, transform = orthogonalize(basis)
        again = apply_transform(transform, basis)
        assert np.allclose(again.columns, basis.columns @ transform.matrix.T)

    def test_constant_envelope_is_degenerate(self) -> None:
        """With |x1| = |x2| = 1 every higher order repeats u3."""
        phases = np.random.default_rng(7).uniform(0.0, 2.0 * np.pi, (2, 500))
        basis = gen_basis(np.exp(1j * phases[0]), np.exp(1j * phases[1]), SubBandId(3), 5)
        with pytest.raises(DegenerateBasisError):
            orthogonalize(basis)

    def test_transform_mismatch(self, pair: tuple[np.ndarray, np.ndarray]) -> None:
        """A transform for another sub-band or order does not apply."""
        a, b = pair
        basis = gen_basis(a, b, SubBandId(3), 5)
        with pytest.raises(ShapeError):
            apply_transform(OrthoTransform.identity(SubBandId(3), 7), basis)
        with pytest.raises(ShapeError):
            apply_transform(OrthoTransform.identity(SubBandId(3, BandSign.NEGATIVE), 5), basis)

    def test_span_preserved(self, pair: tuple[np.ndarray, np.ndarray]) -> None:
        """s = W u spans the same space as u."""
        a, b = pair
        basis = gen_basis(a, b, SubBandId(5, BandSign.NEGATIVE), 11)
        ortho, _ = orthogonalize(basis)
        for source, target in ((basis, ortho), (ortho, basis)):
            fit, *_ = np.linalg.lstsq(target.columns, source.columns, rcond=None)
            residual = np.linalg.norm(target.columns @ fit - source.columns)
            assert residual < 1e-8 * np.linalg.norm(source.columns)

    @pytest.mark.parametrize("diagonal", [-1.0, 1.0j, 0.0])
    def test_diagonal_must_be_real_positive(self, diagonal: complex) -> None:
        """Negative, complex or zero diagonal entries are rejected."""
        with pytest.raises(ShapeError):
            OrthoTransform(SubBandId(3), 5, np.array([[1.0, 0.0], [0.5, diagonal]]))

    def test_upper_triangular_rejected(self) -> None:
        """Transforms must be lower-triangular."""
        with pytest.raises(ShapeError):
            OrthoTransform(SubBandId(3), 5, np.array([[1.0, 1.0], [0.0, 1.0]]))
