"""Tests for coefficient learning, closed forms and moments."""

from pathlib import Path

import numpy as np
import pytest
from scipy import optimize

from subband_dpd.core.exceptions import DivergenceError, ShapeError, ZeroDivideError
from subband_dpd.models.learning import LearningHistory, MomentSet
from subband_dpd.models.pa import MemorylessPoly
from subband_dpd.models.sub_band import SubBandId
from subband_dpd.schemas.carrier import DualCarrierSpec
from subband_dpd.schemas.learning import LearningConfig, LearningMode
from subband_dpd.schemas.scenario import ObserverSection
from subband_dpd.services.basis import base_function, gen_basis, orthogonalize
from subband_dpd.services.learn import (
    alpha_decorr_analytic,
    alpha_mmse,
    alpha_third_inverse,
    block_adaptive_update,
    estimate_moments,
    fifth_order_inverse,
    gaussian_moments,
    history_from_csv,
    history_to_csv,
    run_closed_loop,
    sample_adaptive_step,
    training_length,
)
from subband_dpd.services.pa import memoryless_harmonic_output
from subband_dpd.services.signals import DualCarrier

_F3_SMALL = 0.01 * np.exp(1j * np.deg2rad(100.0))


def _im3_error(
    poly: MemorylessPoly, a: np.ndarray, b: np.ndarray, alpha: complex
) -> np.ndarray:
    """Exact IM3+ content of the PA output with injection alpha u3."""
    u3 = base_function(a, b, 3)
    return memoryless_harmonic_output(poly, {1: a, -1: b, 3: alpha * u3}, 3)


class TestAdaptiveUpdates:
    """Tests for the decorrelation update rules."""

    def test_sample_step(self) -> None:
        """alpha' = alpha - mu s conj(e) / (||s||^2 + C)."""
        alpha = np.array([0.1 + 0.0j, 0.0])
        s = np.array([1.0 + 1.0j, 2.0])
        updated = sample_adaptive_step(alpha, s, 1.0j, mu=0.5, c=1.0)
        expected = alpha - 0.5 / (2.0 + 4.0 + 1.0) * s * (-1.0j)
        assert np.allclose(updated, expected)

    def test_block_of_one_matches_sample_step(self, rng: np.random.Generator) -> None:
        """A one-row block update equals the per-sample step."""
        alpha = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        s = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        e = 0.3 - 0.7j
        block = block_adaptive_update(alpha, s[None, :], np.array([e]), 0.2, 0.01)
        assert np.allclose(block, sample_adaptive_step(alpha, s, e, 0.2, 0.01))

    def test_block_gradient(self, rng: np.random.Generator) -> None:
        """The block gradient sums s(n) conj(e(n)) over the block."""
        block = rng.standard_normal((50, 2)) + 1j * rng.standard_normal((50, 2))
        e = rng.standard_normal(50) + 1j * rng.standard_normal(50)
        updated = block_adaptive_update(np.zeros(2), block, e, 1.0, 0.0)
        expected = -(block.T @ np.conj(e)) / np.sum(np.abs(block) ** 2)
        assert np.allclose(updated, expected)

    def test_zero_regressor_without_regularizer(self) -> None:
        """A zero regressor and C = 0 cannot be normalized."""
        with pytest.raises(ZeroDivideError):
            sample_adaptive_step(np.zeros(2), np.zeros(2), 1.0, 0.1, 0.0)

    def test_shape_mismatch(self) -> None:
        """Regressor, taps and error must agree in size."""
        with pytest.raises(ShapeError):
            sample_adaptive_step(np.zeros(2), np.zeros(3), 1.0, 0.1, 1.0)
        with pytest.raises(ShapeError):
            block_adaptive_update(np.zeros(2), np.zeros((4, 2)), np.zeros(3), 0.1, 1.0)


class TestClosedForms:
    """Tests for closed-form coefficients."""

    def test_third_order_inverse(self) -> None:
        """alpha = -f3 / f1."""
        assert alpha_third_inverse(2.0, 0.03j) == pytest.approx(-0.015j)

    def test_zero_f1(self) -> None:
        """f1 = 0 has no inverse."""
        with pytest.raises(ZeroDivideError):
            alpha_third_inverse(0.0, 0.03)
        with pytest.raises(ZeroDivideError):
            fifth_order_inverse(0.0, 0.03, 0.001)

    def test_fifth_order_inverse(self) -> None:
        """Coefficients of u3, |x1|^2 u3 and |x2|^2 u3."""
        f3, f5 = -0.05 + 0.02j, 0.004 - 0.002j
        alpha3, alpha51, alpha52 = fifth_order_inverse(1.0, f3, f5)
        assert alpha3 == pytest.approx(-f3)
        assert alpha51 == pytest.approx(2.0 * f3**2 - 2.0 * f5)
        assert alpha52 == pytest.approx(2.0 * f3**2 - 3.0 * f5)

    def test_fifth_order_inverse_slopes(
        self, circular_pair: tuple[np.ndarray, np.ndarray]
    ) -> None:
        """IM3 grows 14 dB per dB of drive with the fifth-order inverse and 6 without."""
        a, b = circular_pair
        poly = MemorylessPoly(1.0, -0.05 + 0.02j, 0.004 - 0.002j)
        alpha3, alpha51, alpha52 = fifth_order_inverse(poly.f1, poly.f3, poly.f5)
        amplitudes = np.array([0.05, 0.1, 0.2])

        def power(scale: float, with_dpd: bool) -> float:
            x1, x2 = scale * a, scale * b
            injection = np.zeros_like(x1)
            if with_dpd:
                u3 = base_function(x1, x2, 3)
                injection = (alpha3 + alpha51 * np.abs(x1) ** 2 + alpha52 * np.abs(x2) ** 2) * u3
            out = memoryless_harmonic_output(poly, {1: x1, -1: x2, 3: injection}, 3)
            return float(np.mean(np.abs(out) ** 2))

        for with_dpd, expected in ((True, 14.0), (False, 6.0)):
            powers = [power(scale, with_dpd) for scale in amplitudes]
            slope = np.polyfit(np.log10(amplitudes), np.log10(powers), 1)[0]
            assert slope == pytest.approx(expected, abs=0.5), with_dpd

    def test_mmse_matches_numerical_minimum(
        self, circular_pair: tuple[np.ndarray, np.ndarray]
    ) -> None:
        """The MMSE formula lands on the minimum of the exact IM3 error power."""
        a, b = circular_pair
        poly = MemorylessPoly(1.0, 0.03 * np.exp(1j * np.deg2rad(100.0)))
        reference = float(np.mean(np.abs(_im3_error(poly, a, b, 0.0)) ** 2))

        def normalized_power(point: np.ndarray) -> float:
            alpha = complex(point[0], point[1])
            return float(np.mean(np.abs(_im3_error(poly, a, b, alpha)) ** 2)) / reference

        start = alpha_third_inverse(poly.f1, poly.f3)
        found = optimize.minimize(
            normalized_power,
            np.array([start.real, start.imag]),
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 4000},
        )
        numerical = complex(found.x[0], found.x[1])
        closed_form = alpha_mmse(poly.f1, poly.f3, estimate_moments(a, b))
        assert abs(closed_form - numerical) <= 1e-3 * abs(numerical)

    def test_mmse_beats_inverse(self, circular_pair: tuple[np.ndarray, np.ndarray]) -> None:
        """The MMSE injection leaves less IM3 than the third-order inverse."""
        a, b = circular_pair
        poly = MemorylessPoly(1.0, 0.03 * np.exp(1j * np.deg2rad(100.0)))
        moments = estimate_moments(a, b)

        def power(alpha: complex) -> float:
            return float(np.mean(np.abs(_im3_error(poly, a, b, alpha)) ** 2))

        mmse = power(alpha_mmse(poly.f1, poly.f3, moments))
        assert mmse < power(alpha_third_inverse(poly.f1, poly.f3))
        assert mmse < 1e-2 * power(0.0)

    def test_decorrelation(self, circular_pair: tuple[np.ndarray, np.ndarray]) -> None:
        """The analytic alpha leaves the IM3 error uncorrelated with u3."""
        a, b = circular_pair
        poly = MemorylessPoly(1.0, 0.03 * np.exp(1j * np.deg2rad(100.0)))
        u3 = base_function(a, b, 3)
        alpha = alpha_decorr_analytic(poly.f1, poly.f3, estimate_moments(a, b))
        before = np.vdot(u3, _im3_error(poly, a, b, 0.0))
        after = np.vdot(u3, _im3_error(poly, a, b, alpha))
        assert abs(after) < 1e-2 * abs(before)


class TestMoments:
    """Tests for moment estimation."""

    def test_gaussian_moments(self) -> None:
        """E|x|^(2k) = k! var^k for each carrier."""
        moments = gaussian_moments(0.5, 2.0)
        assert moments(2, 0) == pytest.approx(0.5)
        assert moments(4, 2) == pytest.approx(2.0 * 0.25 * 2.0)
        assert moments(0, 6) == pytest.approx(6.0 * 8.0)

    def test_odd_gaussian_moment(self) -> None:
        """Odd orders are not tabulated."""
        with pytest.raises(ShapeError):
            gaussian_moments(1.0, 1.0, needed=[(3, 0)])

    def test_estimates_factor(self, circular_pair: tuple[np.ndarray, np.ndarray]) -> None:
        """Sample moments of factorially paired data are exact products."""
        a, b = circular_pair
        moments = estimate_moments(a, b, needed=[(4, 2)])
        joint = np.mean(np.abs(a) ** 4 * np.abs(b) ** 2)
        assert moments(4, 2) == pytest.approx(joint, rel=1e-12)

    def test_gaussian_estimates(self, rng: np.random.Generator) -> None:
        """Sample moments of Gaussian carriers approach the analytic values."""
        n = 400_000
        a = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * np.sqrt(0.5 / 2)
        b = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * np.sqrt(1.0 / 2)
        estimated = estimate_moments(a, b, needed=[(4, 2), (0, 4)])
        analytic = gaussian_moments(0.5, 1.0, needed=[(4, 2), (0, 4)])
        assert estimated(4, 2) == pytest.approx(analytic(4, 2), rel=0.03)
        assert estimated(0, 4) == pytest.approx(analytic(0, 4), rel=0.03)

    def test_missing_moment(self) -> None:
        """Moments that were not estimated raise ShapeError."""
        with pytest.raises(ShapeError):
            MomentSet({(2, 0): 1.0})(4, 2)


class TestTrainingLength:
    """Tests for the training waveform length."""

    def test_streaming(self) -> None:
        """Streaming needs one interval per update after the first block."""
        cfg = LearningConfig(block_size=1000, update_interval=2000, max_updates=10)
        assert training_length(cfg, 500, 300) == 500 + 9 * 2000 + 1000 + 300

    def test_reused_block(self) -> None:
        """Iterating on one block needs a single block."""
        cfg = LearningConfig(
            block_size=4000, update_interval=4000, max_updates=10, reuse_block=True
        )
        assert training_length(cfg, 500, 300) == 500 + 4000 + 300


class TestClosedLoop:
    """Tests for closed-loop learning."""

    def test_converges_to_analytic_decorrelation(self, narrow_spec: DualCarrierSpec) -> None:
        """Iterating on one long block reaches the analytic alpha within 1 %."""
        poly = MemorylessPoly(1.0, _F3_SMALL)
        cfg = LearningConfig(
            mu=0.5,
            block_size=65_536,
            update_interval=65_536,
            max_updates=40,
            reuse_block=True,
        )
        result = run_closed_loop(
            poly.to_ph(),
            narrow_spec,
            [SubBandId(3)],
            3,
            0,
            cfg,
            seed=21,
            observer=ObserverSection(stopband_atten_db=100.0),
        )
        dpd = result.dpds[SubBandId(3)]
        learned = complex(dpd.basis_domain_taps()[0, 0])
        carrier = result.carrier
        analytic = alpha_decorr_analytic(
            poly.f1, poly.f3, estimate_moments(carrier.cc1, carrier.cc2)
        )
        assert abs(learned - analytic) < 0.01 * abs(analytic)

        history = result.histories[SubBandId(3)]
        assert len(history) == 40
        assert history.final_residual_db < history.residual_db[0] - 15.0

    def test_streaming_blocks_reduce_residual(
        self, narrow_spec: DualCarrierSpec, third_order_pa: MemorylessPoly
    ) -> None:
        """Block updates on fresh data suppress the IM3 residual."""
        cfg = LearningConfig(mu=0.5, block_size=2000, update_interval=2000, max_updates=30)
        result = run_closed_loop(
            third_order_pa.to_ph(), narrow_spec, [SubBandId(3)], 3, 0, cfg, seed=4
        )
        history = result.histories[SubBandId(3)]
        assert np.mean(history.residual_db[-5:]) < history.residual_db[0] - 10.0

    def test_sample_mode(
        self, narrow_spec: DualCarrierSpec, third_order_pa: MemorylessPoly
    ) -> None:
        """Per-sample updates record one history entry per update."""
        cfg = LearningConfig(
            mu=0.05, max_updates=20, mode=LearningMode.SAMPLE, divergence_db=100.0
        )
        result = run_closed_loop(
            third_order_pa.to_ph(), narrow_spec, [SubBandId(3)], 3, 0, cfg, seed=4
        )
        assert len(result.histories[SubBandId(3)]) == 20

    def test_block_of_one_trajectory_matches_sample_mode(
        self, narrow_spec: DualCarrierSpec, third_order_pa: MemorylessPoly
    ) -> None:
        """Block mode with M = L = 1 reproduces the sample-mode trajectory bit for bit."""
        common = {"mu": 0.05, "max_updates": 30, "divergence_db": 200.0}
        histories = []
        for cfg in (
            LearningConfig(mode=LearningMode.SAMPLE, **common),
            LearningConfig(mode=LearningMode.BLOCK, block_size=1, update_interval=1, **common),
        ):
            result = run_closed_loop(
                third_order_pa.to_ph(), narrow_spec, [SubBandId(3)], 3, 0, cfg, seed=2
            )
            histories.append(result.histories[SubBandId(3)])
        sample, block = histories
        assert np.array_equal(np.vstack(sample.coefficients), np.vstack(block.coefficients))
        assert sample.residual_db == block.residual_db

    @pytest.mark.parametrize("mu", [0.01, 0.1, 0.5])
    def test_stable_step_sizes(
        self, narrow_spec: DualCarrierSpec, third_order_pa: MemorylessPoly, mu: float
    ) -> None:
        """Step sizes from 0.01 to 0.5 converge without tripping the divergence check."""
        cfg = LearningConfig(mu=mu, block_size=1000, update_interval=1000, max_updates=150)
        result = run_closed_loop(
            third_order_pa.to_ph(), narrow_spec, [SubBandId(3)], 3, 0, cfg, seed=6
        )
        history = result.histories[SubBandId(3)]
        assert len(history) == 150
        assert np.mean(history.residual_db[-5:]) < np.mean(history.residual_db[:5]) - 3.0

    def test_converged_error_is_decorrelated(self, rng: np.random.Generator) -> None:
        """At the fixed point the IM3 error is uncorrelated with every orthogonalized column."""
        n = 4000
        a = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * 0.5 / np.sqrt(2.0)
        b = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * 0.5 / np.sqrt(2.0)
        poly = MemorylessPoly(1.0, 0.03 * np.exp(1j * np.deg2rad(100.0)), 0.004 - 0.002j)
        ortho, _ = orthogonalize(gen_basis(a, b, SubBandId(3), 5))
        s = ortho.columns

        def error(alpha: np.ndarray) -> np.ndarray:
            injection = s @ np.conj(alpha)
            return memoryless_harmonic_output(poly, {1: a, -1: b, 3: injection}, 3)

        alpha = np.zeros(s.shape[1], dtype=np.complex128)
        initial = error(alpha)
        for _ in range(200):
            alpha = block_adaptive_update(alpha, s, error(alpha), 0.5, 0.0)
        e = error(alpha)
        assert np.mean(np.abs(e) ** 2) < np.mean(np.abs(initial) ** 2)
        for k in range(s.shape[1]):
            correlation = abs(np.vdot(s[:, k], e)) / (
                np.linalg.norm(s[:, k]) * np.linalg.norm(e)
            )
            assert correlation <= 1e-3, k

    def test_divergence(self, narrow_spec: DualCarrierSpec) -> None:
        """An unstable step size is stopped with DivergenceError."""
        poly = MemorylessPoly(1.0, _F3_SMALL)
        cfg = LearningConfig(
            mu=3.0, block_size=4000, update_interval=4000, max_updates=20, reuse_block=True
        )
        with pytest.raises(DivergenceError):
            run_closed_loop(poly.to_ph(), narrow_spec, [SubBandId(3)], 3, 0, cfg, seed=8)

    def test_short_training_waveform(
        self,
        narrow_spec: DualCarrierSpec,
        narrow_carrier: DualCarrier,
        third_order_pa: MemorylessPoly,
    ) -> None:
        """A supplied waveform shorter than the schedule is rejected."""
        cfg = LearningConfig(block_size=1000, update_interval=1000, max_updates=100)
        with pytest.raises(ShapeError):
            run_closed_loop(
                third_order_pa.to_ph(),
                narrow_spec,
                [SubBandId(3)],
                3,
                0,
                cfg,
                seed=0,
                carrier=narrow_carrier,
            )


class TestHistoryCsv:
    """Tests for learning history export."""

    def test_write_and_read(self, tmp_path: Path) -> None:
        """Residuals and tap magnitudes survive the CSV table."""
        history = LearningHistory(SubBandId(5))
        history.record(np.array([0.1 + 0.1j, 0.2]), -20.0)
        history.record(np.array([0.3, -0.4j]), -35.5)
        path = history_to_csv(history, tmp_path / "history.csv")

        assert path.read_text(encoding="utf-8").startswith("# sub_band: IM5+")
        frame = history_from_csv(path)
        assert list(frame.columns) == ["update", "residual_db", "abs_alpha_0", "abs_alpha_1"]
        assert frame["residual_db"].tolist() == [-20.0, -35.5]
        assert frame["abs_alpha_1"].iloc[1] == pytest.approx(0.4)
