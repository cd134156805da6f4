"""Scenario runner: waveform, PA, DPD, metrics and artifacts for one config."""

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import pandas as pd

from subband_dpd.config import Settings, get_settings
from subband_dpd.core.exceptions import ConfigError, UnsupportedOrderError
from subband_dpd.models.learning import LearningHistory
from subband_dpd.models.metrics import PsdEstimate
from subband_dpd.models.pa import MemorylessPoly, PHModel
from subband_dpd.models.signal import ComplexBasebandSignal
from subband_dpd.models.sub_band import SubBandId
from subband_dpd.schemas.carrier import DualCarrierSpec
from subband_dpd.schemas.fixtures import ComplexPair
from subband_dpd.schemas.report import (
    ComplexityReport,
    EmissionReport,
    MetricsSummary,
    RxDesenseReport,
    SubBandResult,
    SweepRow,
)
from subband_dpd.schemas.scenario import DpdMethod, Scenario, SweepVariable
from subband_dpd.services.dpd import (
    FifthOrderInverseDpd,
    InjectionSource,
    SubBandDpd,
    predistort,
)
from subband_dpd.services.files import load_pa_fixture, load_scenario, save_coefficients
from subband_dpd.services.learn import (
    alpha_decorr_analytic,
    alpha_mmse,
    alpha_third_inverse,
    estimate_moments,
    fifth_order_inverse,
    history_to_csv,
    run_closed_loop,
)
from subband_dpd.services.metrics import (
    FULL_BAND,
    default_im_band_hz,
    emission_density_dbm_per_mhz,
    evm,
    flops_model,
    imr,
    integrated_power,
    psd,
    psd_to_csv,
    thermal_noise_floor_dbm,
)
from subband_dpd.services.pa import ph_apply
from subband_dpd.services.signals import DualCarrier, generate_dual_carrier

logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.json"
SWEEP_FILE = "sweep.csv"

# Evaluation data is drawn from a different seed than the training data
_EVAL_SEED_OFFSET = 1


def _pairs(values: np.ndarray) -> list[ComplexPair]:
    return [(float(v.real), float(v.imag)) for v in np.asarray(values).reshape(-1)]


class ScenarioRunner:
    """Runs one scenario end to end."""

    def __init__(
        self,
        scenario: Scenario,
        output_dir: Optional[Union[str, Path]] = None,
        settings: Optional[Settings] = None,
    ) -> None:
        """Initialize the runner.

        Args:
            scenario: Validated scenario with an absolute PA fixture path
            output_dir: Artifact directory; overrides the scenario and settings
            settings: Settings override
        """
        self.scenario = scenario
        self.settings = settings or get_settings()
        self.output_dir = Path(
            output_dir or scenario.output_dir or self.settings.output_dir
        )
        self.spec: DualCarrierSpec = scenario.carriers.scaled(scenario.drive_offset_db)
        self.tx_power_dbm = scenario.tx_power_dbm + scenario.drive_offset_db

        fixture = load_pa_fixture(scenario.pa_fixture)
        self.memoryless: Optional[MemorylessPoly] = (
            fixture if isinstance(fixture, MemorylessPoly) else None
        )
        self.pa: PHModel = fixture.to_ph() if isinstance(fixture, MemorylessPoly) else fixture
        self._validate()

    def _validate(self) -> None:
        scenario, order = self.scenario, self.pa.order
        for field, labels in (
            ("dpd.targets", scenario.dpd.targets),
            ("metrics.measure", scenario.metrics.measure),
        ):
            for label in labels:
                if SubBandId.parse(label).m > order:
                    raise ConfigError(
                        f"{field}: {label} is above the PA fixture order {order}",
                        field=field,
                    )
        for field, section in (
            ("rx_desense.sub_band", scenario.rx_desense),
            ("emission.sub_band", scenario.emission),
        ):
            if section is not None and SubBandId.parse(section.sub_band).m > self.spec.m_max:
                raise ConfigError(
                    f"{field}: {section.sub_band} is above carriers.m_max={self.spec.m_max}",
                    field=field,
                )

        method = scenario.dpd.method
        if method in DpdMethod.closed_form():
            if self.memoryless is None:
                raise ConfigError(
                    f"dpd.method '{method.value}' needs a memoryless PA fixture",
                    field="dpd.method",
                )
            if any(sub_band.m != 3 for sub_band in scenario.dpd.sub_bands):
                raise ConfigError(
                    f"dpd.method '{method.value}' applies to IM3 sub-bands only",
                    field="dpd.targets",
                )

    def _closed_form_dpds(self, carrier: DualCarrier) -> dict[SubBandId, InjectionSource]:
        assert self.memoryless is not None
        poly, method = self.memoryless, self.scenario.dpd.method
        dpds: dict[SubBandId, InjectionSource] = {}
        for sub_band in self.scenario.dpd.sub_bands:
            if method is DpdMethod.FIFTH_ORDER_INVERSE:
                dpds[sub_band] = FifthOrderInverseDpd(
                    sub_band, fifth_order_inverse(poly.f1, poly.f3, poly.f5)
                )
                continue
            # IM3- is IM3+ with the carrier roles exchanged
            near, far = (
                (carrier.cc1, carrier.cc2)
                if sub_band.sign.factor > 0
                else (carrier.cc2, carrier.cc1)
            )
            if method is DpdMethod.THIRD_ORDER_INVERSE:
                alpha = alpha_third_inverse(poly.f1, poly.f3)
            elif method is DpdMethod.MMSE:
                alpha = alpha_mmse(poly.f1, poly.f3, estimate_moments(near, far))
            else:
                alpha = alpha_decorr_analytic(poly.f1, poly.f3, estimate_moments(near, far))
            logger.info(f"{sub_band.label}: {method.value} alpha = {alpha:.6g}")
            dpds[sub_band] = SubBandDpd.from_basis_taps(sub_band, 3, np.array([[alpha]]))
        return dpds

    def _obtain_dpds(
        self, carrier: DualCarrier
    ) -> tuple[dict[SubBandId, InjectionSource], dict[SubBandId, LearningHistory]]:
        scenario = self.scenario
        method = scenario.dpd.method
        if method is DpdMethod.NONE:
            return {}, {}
        if method is not DpdMethod.ADAPTIVE:
            return self._closed_form_dpds(carrier), {}
        result = run_closed_loop(
            self.pa,
            self.spec,
            scenario.dpd.sub_bands,
            scenario.dpd.q,
            scenario.dpd.memory_depth,
            scenario.learning,
            scenario.seed,
            observer=scenario.observer,
            settings=self.settings,
        )
        return dict(result.dpds), result.histories

    def _complexity(self) -> list[ComplexityReport]:
        dpd = self.scenario.dpd
        if dpd.method is not DpdMethod.ADAPTIVE:
            return []
        sub_band_rate = dpd.q * self.spec.max_bandwidth_hz
        full_band_rate = dpd.q * (self.spec.carrier_spacing_hz + self.spec.max_bandwidth_hz)
        reports: list[ComplexityReport] = []
        try:
            for sub_band in dpd.sub_bands:
                reports.append(flops_model(sub_band, dpd.q, dpd.memory_depth, sub_band_rate))
            reports.append(flops_model(FULL_BAND, dpd.q, dpd.memory_depth, full_band_rate))
        except UnsupportedOrderError as exc:
            logger.info(f"Complexity report skipped: {exc.message}")
            return []
        return reports

    def evaluate(self) -> tuple[MetricsSummary, dict[str, Any]]:
        """Run the scenario without writing files.

        Returns:
            Summary plus the in-memory artifacts (PSDs, histories, DPDs)
        """
        scenario, spec = self.scenario, self.spec
        logger.info(
            f"Running scenario '{scenario.name}' ({scenario.dpd.method.value}, "
            f"seed {scenario.seed})"
        )
        eval_seed = scenario.seed + _EVAL_SEED_OFFSET
        carrier = generate_dual_carrier(
            spec, scenario.metrics.n_samples, eval_seed, self.settings
        )
        dpds, histories = self._obtain_dpds(carrier)
        f_if = carrier.f_if_hz

        before = ph_apply(self.pa, carrier.composite)
        after = ph_apply(
            self.pa,
            predistort(carrier.composite, carrier.cc1, carrier.cc2, list(dpds.values()), f_if),
        )
        psd_args = (scenario.metrics.psd_segment_len, scenario.metrics.psd_overlap)
        psd_before, psd_after = psd(before, *psd_args), psd(after, *psd_args)

        occupied = spec.occupied_bandwidth_hz()
        cc_band = scenario.metrics.cc_band_hz or occupied
        results: list[SubBandResult] = []
        for sub_band in scenario.measured_sub_bands:
            im_band = scenario.metrics.im_band_hz or default_im_band_hz(
                sub_band, occupied, f_if
            )
            center = sub_band.center_hz(f_if)
            imr_before = imr(psd_before, sub_band, f_if, cc_band, im_band)
            imr_after = imr(psd_after, sub_band, f_if, cc_band, im_band)
            history = histories.get(sub_band)
            dpd = dpds.get(sub_band)
            results.append(
                SubBandResult(
                    sub_band=sub_band.label,
                    imr_before_dbc=imr_before,
                    imr_after_dbc=imr_after,
                    improvement_db=imr_after - imr_before,
                    integrated_before_dbm=integrated_power(
                        psd_before, center, im_band, self.tx_power_dbm
                    ),
                    integrated_after_dbm=integrated_power(
                        psd_after, center, im_band, self.tx_power_dbm
                    ),
                    updates=len(history) if history is not None else 0,
                    final_residual_db=(
                        history.final_residual_db if history is not None else None
                    ),
                    taps=_pairs(dpd.coefficients.taps) if isinstance(dpd, SubBandDpd) else [],
                )
            )
            logger.info(
                f"{sub_band.label}: IMR {imr_before:.2f} -> {imr_after:.2f} dBc "
                f"({imr_after - imr_before:+.2f} dB)"
            )

        summary = MetricsSummary(
            scenario=scenario.name,
            seed=scenario.seed,
            method=scenario.dpd.method.value,
            sample_rate_hz=carrier.composite.sample_rate_hz,
            f_if_hz=f_if,
            tx_power_dbm=self.tx_power_dbm,
            drive_offset_db=scenario.drive_offset_db,
            sub_bands=results,
            evm_before_pct=self._evm(carrier, before),
            evm_after_pct=self._evm(carrier, after),
            complexity=self._complexity(),
            rx_desense=self._rx_desense(psd_before, psd_after, f_if),
            emission=self._emission(psd_before, psd_after, f_if, occupied),
            metadata={
                "eval_seed": str(eval_seed),
                "pa_order": str(self.pa.order),
                "psd_window": "hann",
                "psd_segment_len": str(psd_before.segment_len),
            },
        )
        artifacts = {
            "psd_before": psd_before,
            "psd_after": psd_after,
            "histories": histories,
            "dpds": dpds,
        }
        return summary, artifacts

    def _evm(self, carrier: DualCarrier, pa_out: ComplexBasebandSignal) -> list[float]:
        return [
            evm(carrier.symbols[index], pa_out, index + 1, carrier.f_if_hz)
            for index in range(2)
        ]

    def _rx_desense(
        self, psd_before: PsdEstimate, psd_after: PsdEstimate, f_if: float
    ) -> Optional[RxDesenseReport]:
        section = self.scenario.rx_desense
        if section is None:
            return None
        center = SubBandId.parse(section.sub_band).center_hz(f_if)
        spur_before, spur_after = (
            integrated_power(
                estimate,
                center,
                section.rx_bandwidth_hz,
                self.tx_power_dbm,
                section.duplexer_atten_db,
            )
            for estimate in (psd_before, psd_after)
        )
        floor = thermal_noise_floor_dbm(section.rx_bandwidth_hz, section.noise_figure_db)
        return RxDesenseReport(
            duplexer_atten_db=section.duplexer_atten_db,
            rx_bandwidth_hz=section.rx_bandwidth_hz,
            spur_before_dbm=spur_before,
            spur_after_dbm=spur_after,
            noise_floor_dbm=floor,
            margin_after_db=floor - spur_after,
        )

    def _emission(
        self,
        psd_before: PsdEstimate,
        psd_after: PsdEstimate,
        f_if: float,
        occupied: float,
    ) -> Optional[EmissionReport]:
        section = self.scenario.emission
        if section is None:
            return None
        sub_band = SubBandId.parse(section.sub_band)
        width = self.scenario.metrics.im_band_hz or default_im_band_hz(
            sub_band, occupied, f_if
        )
        density_before, density_after = (
            emission_density_dbm_per_mhz(
                estimate,
                sub_band.center_hz(f_if),
                width,
                self.tx_power_dbm,
                section.insertion_loss_db,
            )
            for estimate in (psd_before, psd_after)
        )
        return EmissionReport(
            limit_dbm_per_mhz=section.limit_dbm_per_mhz,
            insertion_loss_db=section.insertion_loss_db,
            density_before_dbm_per_mhz=density_before,
            density_after_dbm_per_mhz=density_after,
            margin_after_db=section.limit_dbm_per_mhz - density_after,
        )

    def run(self) -> MetricsSummary:
        """Evaluate the scenario and write every artifact to the output directory."""
        summary, artifacts = self.evaluate()
        out = self.output_dir
        out.mkdir(parents=True, exist_ok=True)
        psd_metadata = {
            "scenario": summary.scenario,
            "ref_dbm": summary.tx_power_dbm,
            "f_if_hz": summary.f_if_hz,
        }
        psd_to_csv(artifacts["psd_before"], out / "psd_before.csv", psd_metadata)
        psd_to_csv(artifacts["psd_after"], out / "psd_after.csv", psd_metadata)
        for sub_band, history in artifacts["histories"].items():
            history_to_csv(history, out / f"history_{sub_band.label}.csv")
        for sub_band, dpd in artifacts["dpds"].items():
            if isinstance(dpd, SubBandDpd):
                save_coefficients(dpd, out / f"coefficients_{sub_band.label}.json")
        (out / SUMMARY_FILE).write_text(
            summary.model_dump_json(indent=2) + "\n", encoding="utf-8"
        )
        logger.info(f"Artifacts for '{summary.scenario}' written to {out}")
        return summary


def run_scenario(
    path: Union[str, Path],
    output_dir: Optional[Union[str, Path]] = None,
    seed: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> MetricsSummary:
    """Load, run and write one scenario.

    Raises:
        ConfigError: On invalid scenario or fixture files
        SubbandDpdError: Propagated from the numerical operations
    """
    scenario = load_scenario(path)
    if seed is not None:
        scenario = scenario.model_copy(update={"seed": seed})
    return ScenarioRunner(scenario, output_dir, settings).run()


def sweep_values(start: float, stop: float, steps: int) -> list[float]:
    """``steps`` evenly spaced values from ``start`` to ``stop`` inclusive."""
    if steps < 1:
        raise ConfigError(f"Sweep needs at least one step, got {steps}", field="steps")
    return [float(v) for v in np.linspace(start, stop, steps)]


def _apply_variable(scenario: Scenario, variable: SweepVariable, value: float) -> Scenario:
    if variable is SweepVariable.TX_POWER_DB:
        return scenario.model_copy(update={"drive_offset_db": value})
    q = int(round(value))
    if q % 2 == 0 or q < 3 or q > scenario.carriers.dpd_order:
        raise ConfigError(
            f"Swept DPD order {value} must be odd, >= 3 and <= "
            f"carriers.dpd_order={scenario.carriers.dpd_order}",
            field="dpd.q",
        )
    try:
        dpd = scenario.dpd.model_validate({**scenario.dpd.model_dump(), "q": q})
    except ValueError as exc:
        raise ConfigError(str(exc), field="dpd.q") from exc
    return scenario.model_copy(update={"dpd": dpd})


def _sweep_point(
    payload: dict[str, Any],
    settings_payload: dict[str, Any],
    variable: str,
    index: int,
    value: float,
) -> list[dict[str, Any]]:
    scenario = Scenario.model_validate(payload)
    point = _apply_variable(scenario, SweepVariable(variable), value)
    summary, _ = ScenarioRunner(point, settings=Settings(**settings_payload)).evaluate()
    return [
        SweepRow(
            index=index,
            variable=variable,
            value=value,
            sub_band=result.sub_band,
            imr_before_dbc=result.imr_before_dbc,
            imr_after_dbc=result.imr_after_dbc,
            integrated_before_dbm=result.integrated_before_dbm,
            integrated_after_dbm=result.integrated_after_dbm,
        ).model_dump()
        for result in summary.sub_bands
    ]


def sweep(
    path: Union[str, Path],
    variable: Union[str, SweepVariable],
    start: float,
    stop: float,
    steps: int,
    output_dir: Optional[Union[str, Path]] = None,
    seed: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> list[SweepRow]:
    """Run a scenario over a range of one variable and write ``sweep.csv``.

    Points run in a process pool when ``settings.sweep_workers`` > 1; rows
    are merged by sweep index.

    Raises:
        ConfigError: On invalid files or sweep arguments
    """
    settings = settings or get_settings()
    try:
        variable = SweepVariable(variable)
    except ValueError as exc:
        raise ConfigError(
            f"Unknown sweep variable '{variable}'; expected one of "
            f"{', '.join(SweepVariable.names())}",
            field="var",
        ) from exc
    scenario = load_scenario(path)
    if seed is not None:
        scenario = scenario.model_copy(update={"seed": seed})
    values = sweep_values(start, stop, steps)
    for value in values:
        _apply_variable(scenario, variable, value)
    payload = scenario.model_dump(mode="json")
    settings_payload = settings.model_dump()

    logger.info(
        f"Sweeping {variable.value} over {len(values)} points "
        f"with {settings.sweep_workers} worker(s)"
    )
    if settings.sweep_workers > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=settings.sweep_workers) as pool:
            futures = [
                pool.submit(
                    _sweep_point, payload, settings_payload, variable.value, index, value
                )
                for index, value in enumerate(values)
            ]
            batches = [future.result() for future in futures]
    else:
        batches = [
            _sweep_point(payload, settings_payload, variable.value, index, value)
            for index, value in enumerate(values)
        ]
    rows = [SweepRow.model_validate(row) for batch in batches for row in batch]
    rows.sort(key=lambda row: row.index)

    out = Path(output_dir or scenario.output_dir or settings.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    target = out / SWEEP_FILE
    with target.open("w", encoding="utf-8", newline="") as handle:
        handle.write(f"# scenario: {scenario.name}\n")
        handle.write(f"# variable: {variable.value}\n")
        handle.write(f"# seed: {scenario.seed}\n")
        pd.DataFrame([row.model_dump() for row in rows]).to_csv(handle, index=False)
    logger.info(f"Sweep table written to {target}")
    return rows


__all__ = [
    "ScenarioRunner",
    "run_scenario",
    "sweep",
    "sweep_values",
]
