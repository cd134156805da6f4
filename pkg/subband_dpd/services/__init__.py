"""Service layer: signal generation, PA models, DPD, learning and metrics."""

from subband_dpd.services.basis import (
    apply_transform,
    fifth_order_basis,
    gen_basis,
    orthogonalize,
)
from subband_dpd.services.dpd import (
    FifthOrderInverseDpd,
    SubBandDpd,
    build_regressor,
    compose_pa_input,
    injection_signal,
    predistort,
)
from subband_dpd.services.files import (
    load_coefficients,
    load_pa_fixture,
    load_scenario,
    save_coefficients,
    save_pa_fixture,
)
from subband_dpd.services.learn import (
    ClosedLoopResult,
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
)
from subband_dpd.services.metrics import (
    band_power,
    emission_density_dbm_per_mhz,
    evm,
    flops_model,
    imr,
    integrated_power,
    psd,
    psd_from_csv,
    psd_to_csv,
    thermal_noise_floor_dbm,
)
from subband_dpd.services.observe import observe_sub_band
from subband_dpd.services.pa import (
    extract_sub_band_brute_force,
    memoryless_apply,
    ph_apply,
    sub_band_branch_response,
    sub_band_output_oracle,
)
from subband_dpd.services.scenario_runner import ScenarioRunner, run_scenario, sweep
from subband_dpd.services.signals import (
    add_awgn,
    align,
    composite_sample_rate,
    decimate,
    fir_filter,
    frequency_shift,
    generate_dual_carrier,
)

__all__ = [
    "add_awgn",
    "align",
    "composite_sample_rate",
    "decimate",
    "fir_filter",
    "frequency_shift",
    "generate_dual_carrier",
    "ph_apply",
    "memoryless_apply",
    "sub_band_branch_response",
    "sub_band_output_oracle",
    "extract_sub_band_brute_force",
    "gen_basis",
    "fifth_order_basis",
    "orthogonalize",
    "apply_transform",
    "build_regressor",
    "injection_signal",
    "compose_pa_input",
    "predistort",
    "SubBandDpd",
    "FifthOrderInverseDpd",
    "sample_adaptive_step",
    "block_adaptive_update",
    "run_closed_loop",
    "ClosedLoopResult",
    "alpha_third_inverse",
    "alpha_mmse",
    "alpha_decorr_analytic",
    "fifth_order_inverse",
    "estimate_moments",
    "gaussian_moments",
    "history_to_csv",
    "history_from_csv",
    "observe_sub_band",
    "psd",
    "band_power",
    "imr",
    "evm",
    "integrated_power",
    "flops_model",
    "thermal_noise_floor_dbm",
    "emission_density_dbm_per_mhz",
    "psd_to_csv",
    "psd_from_csv",
    "load_scenario",
    "load_pa_fixture",
    "save_pa_fixture",
    "load_coefficients",
    "save_coefficients",
    "ScenarioRunner",
    "run_scenario",
    "sweep",
]
