"""Tests for PA models and sub-band output references."""

import logging
from typing import Any

import numpy as np
import pytest

from subband_dpd.core.exceptions import BandError, DesignError
from subband_dpd.models.pa import MemorylessPoly, PHModel
from subband_dpd.models.signal import ComplexBasebandSignal
from subband_dpd.models.sub_band import BandSign, SubBandId
from subband_dpd.schemas.carrier import DualCarrierSpec
from subband_dpd.services.basis import base_function, gen_basis
from subband_dpd.services.pa import (
    compose_dual_carrier,
    extract_sub_band_brute_force,
    memoryless_apply,
    memoryless_harmonic_output,
    ph_apply,
    sub_band_branch_response,
    sub_band_filter,
    sub_band_output_oracle,
)
from subband_dpd.services.signals import DualCarrier

# Margin trimmed at both ends before comparing filtered outputs
_EDGE = 1000

# Oracle comparisons need stopbands well below the -80 dB target
_ORACLE_ATTEN_DB = 150.0


def _nmse_db(estimate: np.ndarray, reference: np.ndarray) -> float:
    error = np.sum(np.abs(estimate - reference) ** 2)
    return float(10.0 * np.log10(error / np.sum(np.abs(reference) ** 2)))


class TestPhApply:
    """Tests for Parallel Hammerstein evaluation."""

    def test_linear_model(self, rng: np.random.Generator) -> None:
        """A single linear tap scales the input."""
        x = ComplexBasebandSignal(rng.standard_normal(100) + 0j, 1.0e6)
        y = ph_apply(PHModel(1, {1: [0.5 - 0.5j]}), x)
        assert np.allclose(y.samples, (0.5 - 0.5j) * x.samples)

    def test_memory_tap_delays(self) -> None:
        """Branch taps act as causal FIR filters with zero pre-history."""
        x = ComplexBasebandSignal(np.array([1.0, 0.0, 0.0, 0.0]), 1.0)
        y = ph_apply(PHModel(3, {1: [1.0, 0.5], 3: [0.0, 0.0, 0.1]}), x)
        assert np.allclose(y.samples, [1.0, 0.5, 0.1, 0.0])

    def test_memoryless_matches_single_tap_model(
        self, rng: np.random.Generator
    ) -> None:
        """The polynomial and its Parallel Hammerstein form agree."""
        poly = MemorylessPoly(1.0, -0.05 + 0.02j, 0.004 - 0.001j)
        x = ComplexBasebandSignal(
            rng.standard_normal(500) + 1j * rng.standard_normal(500), 1.0e6
        )
        assert np.allclose(memoryless_apply(poly, x).samples, ph_apply(poly.to_ph(), x).samples)

    def test_homogeneous_in_taps(self, random_ph_model: Any, rng: np.random.Generator) -> None:
        """Scaling every branch tap by c scales the output by c."""
        model = random_ph_model(7, n_taps=4, seed=3)
        x = ComplexBasebandSignal(
            0.5 * (rng.standard_normal(300) + 1j * rng.standard_normal(300)), 1.0e6
        )
        factor = 0.7 - 1.3j
        scaled = ph_apply(model.scaled(factor), x).samples
        assert np.allclose(scaled, factor * ph_apply(model, x).samples, rtol=1e-12, atol=1e-14)

    def test_phase_equivariant(self, random_ph_model: Any, rng: np.random.Generator) -> None:
        """Rotating the input by e^(j theta) rotates the output by the same phase."""
        model = random_ph_model(9, n_taps=3, seed=5)
        x = ComplexBasebandSignal(
            0.5 * (rng.standard_normal(300) + 1j * rng.standard_normal(300)), 1.0e6
        )
        rotation = np.exp(1j * 0.9)
        rotated = ph_apply(model, x.with_samples(rotation * x.samples)).samples
        assert np.allclose(rotated, rotation * ph_apply(model, x).samples, rtol=1e-12, atol=1e-14)


class TestSubBandFilter:
    """Tests for the sub-band isolation lowpass."""

    def test_nominal_edges(self) -> None:
        """The stopband starts where the neighbouring sub-band begins."""
        lowpass = sub_band_filter(2.0e6, 6.0e6, 54.0e6, 80.0)
        assert lowpass.cutoff_hz == pytest.approx(2.0e6)
        assert lowpass.stop_edge_hz == pytest.approx(10.0e6)
        assert not lowpass.clipped

    def test_passband_clip(self, caplog: pytest.LogCaptureFixture) -> None:
        """A passband reaching the next sub-band is clipped to 0.8 f_IF."""
        with caplog.at_level(logging.WARNING):
            lowpass = sub_band_filter(5.5e6, 6.0e6, 54.0e6, 80.0)
        assert lowpass.clipped
        assert lowpass.cutoff_hz == pytest.approx(4.8e6)
        assert "clipped" in caplog.text

    def test_no_transition_band(self) -> None:
        """A Nyquist edge below the cutoff cannot be designed."""
        with pytest.raises(DesignError):
            sub_band_filter(10.0, 100.0, 15.0)


class TestSubBandBranchResponse:
    """Tests for modulated branch filters."""

    def test_only_orders_at_or_above_m(self, random_ph_model: Any) -> None:
        """Branches below the sub-band order do not contribute."""
        model = random_ph_model(7)
        response = sub_band_branch_response(
            model, SubBandId(5), 15.0e6, 410.0e6, 1.22e6
        )
        assert sorted(response.branches) == [5, 7]
        for p, taps in response.branches.items():
            assert np.allclose(np.abs(taps), np.abs(model.branches[p]))

    def test_order_above_model(self, random_ph_model: Any) -> None:
        """Sub-bands above the model order raise BandError."""
        with pytest.raises(BandError):
            sub_band_branch_response(
                random_ph_model(3), SubBandId(5), 15.0e6, 410.0e6, 1.22e6
            )


class TestSubBandOracle:
    """The model-side sub-band output matches brute-force extraction."""

    @pytest.mark.parametrize("order", [3, 5, 7, 9, 11])
    def test_matches_brute_force(
        self,
        order: int,
        random_ph_model: Any,
        wide_spec: DualCarrierSpec,
        wide_carrier: DualCarrier,
    ) -> None:
        """Every sub-band of an order-P model agrees to -80 dB NMSE."""
        model = random_ph_model(order, n_taps=4, seed=order)
        occupied = wide_spec.occupied_bandwidth_hz()
        for m in range(3, order + 1, 2):
            for sign in BandSign.both():
                sub_band = SubBandId(m, sign)
                oracle = sub_band_output_oracle(
                    model,
                    wide_carrier.cc1,
                    wide_carrier.cc2,
                    sub_band,
                    wide_carrier.f_if_hz,
                    occupied,
                    _ORACLE_ATTEN_DB,
                )
                brute = extract_sub_band_brute_force(
                    model,
                    wide_carrier.cc1,
                    wide_carrier.cc2,
                    sub_band,
                    wide_carrier.f_if_hz,
                    occupied,
                    _ORACLE_ATTEN_DB,
                )
                interior = slice(_EDGE, len(oracle) - _EDGE)
                nmse = _nmse_db(oracle.samples[interior], brute.samples[interior])
                assert nmse <= -80.0, f"{sub_band.label} of order {order}: {nmse:.1f} dB"

    def test_brute_force_order_check(
        self, random_ph_model: Any, wide_carrier: DualCarrier
    ) -> None:
        """Brute-force extraction rejects sub-bands above the model order."""
        with pytest.raises(BandError):
            extract_sub_band_brute_force(
                random_ph_model(3),
                wide_carrier.cc1,
                wide_carrier.cc2,
                SubBandId(5),
                wide_carrier.f_if_hz,
                1.22e6,
            )

    def test_compose_places_carriers(self, wide_carrier: DualCarrier) -> None:
        """Composing the carriers reproduces the generated composite."""
        composite = compose_dual_carrier(
            wide_carrier.cc1, wide_carrier.cc2, wide_carrier.f_if_hz
        )
        assert np.allclose(composite.samples, wide_carrier.composite.samples)


class TestMemorylessHarmonicOutput:
    """Tests for exact harmonic extraction of memoryless PAs."""

    def test_linear_harmonic(self, circular_pair: tuple[np.ndarray, np.ndarray]) -> None:
        """The carrier harmonic holds f1 x1 plus cubic self and cross terms."""
        a, b = circular_pair
        f3 = -0.02 + 0.01j
        out = memoryless_harmonic_output(MemorylessPoly(1.0, f3), {1: a, -1: b}, 1)
        expected = a + f3 * (np.abs(a) ** 2 + 2.0 * np.abs(b) ** 2) * a
        assert np.allclose(out, expected)

    def test_third_harmonic_is_u3(self, circular_pair: tuple[np.ndarray, np.ndarray]) -> None:
        """A cubic PA puts exactly f3 x1^2 conj(x2) at +3 f_IF."""
        a, b = circular_pair
        f3 = -0.02 + 0.01j
        out = memoryless_harmonic_output(MemorylessPoly(1.0, f3), {1: a, -1: b}, 3)
        assert np.allclose(out, f3 * base_function(a, b, 3))

    def test_fifth_order_term(self, circular_pair: tuple[np.ndarray, np.ndarray]) -> None:
        """The fifth-order IM3 content is f5 times the order-5 basis column."""
        a, b = circular_pair
        f5 = 0.004 - 0.002j
        out = memoryless_harmonic_output(MemorylessPoly(1.0, 0.0, f5), {1: a, -1: b}, 3)
        basis = gen_basis(a, b, SubBandId(3), 5)
        assert np.allclose(out, f5 * basis.column(5))
