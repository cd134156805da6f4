"""Pytest configuration and fixtures."""

import json
import os
import shutil
from collections.abc import Generator
from pathlib import Path
from typing import Any

import numpy as np
import pytest

# Keep test output out of the working tree before settings are first read
os.environ.setdefault("SUBBAND_DPD_OUTPUT_DIR", "test-results")

from subband_dpd.config import Settings, get_settings  # noqa: E402
from subband_dpd.models.pa import MemorylessPoly, PHModel  # noqa: E402
from subband_dpd.schemas.carrier import DualCarrierSpec  # noqa: E402
from subband_dpd.services.signals import DualCarrier, generate_dual_carrier  # noqa: E402

PRESETS_DIR = Path(__file__).resolve().parent.parent / "subband_dpd" / "presets"

# f3 = 0.03 exp(j 100 deg)
THIRD_ORDER_F3 = 0.03 * np.exp(1j * np.deg2rad(100.0))


def get_test_settings() -> Settings:
    """Get test settings override."""
    return Settings(output_dir="test-results", sweep_workers=1)


@pytest.fixture(autouse=True)
def clear_settings_cache() -> Generator[None, None, None]:
    """Drop cached settings so environment overrides take effect per test."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def settings() -> Settings:
    """Test settings instance."""
    return get_test_settings()


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded random generator."""
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def narrow_spec() -> DualCarrierSpec:
    """Two 1 MHz CCs at 10 MHz spacing, rate rule for IM3 with Q = 3 (40 MHz)."""
    return DualCarrierSpec(
        cc_bandwidth_hz=(1.0e6, 1.0e6),
        carrier_spacing_hz=10.0e6,
        m_max=3,
        dpd_order=3,
    )


@pytest.fixture(scope="session")
def narrow_carrier(narrow_spec: DualCarrierSpec) -> DualCarrier:
    """40 000 samples (1000 symbols per CC) of the narrow dual carrier."""
    return generate_dual_carrier(narrow_spec, 40_000, seed=5, settings=Settings())


@pytest.fixture(scope="session")
def wide_spec() -> DualCarrierSpec:
    """Two 1 MHz CCs at 30 MHz spacing sampled fast enough for IM11 (410 MHz)."""
    return DualCarrierSpec(
        cc_bandwidth_hz=(1.0e6, 1.0e6),
        carrier_spacing_hz=30.0e6,
        m_max=11,
        dpd_order=11,
    )


@pytest.fixture(scope="session")
def wide_carrier(wide_spec: DualCarrierSpec) -> DualCarrier:
    """60 000 samples of the wide dual carrier."""
    return generate_dual_carrier(wide_spec, 60_000, seed=3, settings=Settings())


@pytest.fixture
def third_order_pa() -> MemorylessPoly:
    """Memoryless cubic PA, f1 = 1."""
    return MemorylessPoly(1.0, THIRD_ORDER_F3)


@pytest.fixture
def random_ph_model() -> Any:
    """Factory for random Parallel Hammerstein models of a given order."""

    def make(order: int, n_taps: int = 3, seed: int = 0) -> PHModel:
        generator = np.random.default_rng(seed)
        branches = {}
        for p in range(1, order + 1, 2):
            scale = 0.1 ** ((p - 1) // 2)
            taps = generator.standard_normal(n_taps) + 1j * generator.standard_normal(n_taps)
            taps *= scale * 0.5 ** np.arange(n_taps)
            if p == 1:
                taps[0] = 1.0
            branches[p] = taps
        return PHModel(order, branches)

    return make


@pytest.fixture
def circular_pair() -> tuple[np.ndarray, np.ndarray]:
    """Factorially paired carriers with circular phase grids.

    Every magnitude of each carrier appears on a uniform grid of 16 phases
    and every value of x1 is paired with every value of x2, so sample
    moments factor into products of single-carrier moments exactly.
    """
    generator = np.random.default_rng(99)
    phases = np.exp(2j * np.pi * np.arange(16) / 16)

    def carrier(var: float) -> np.ndarray:
        magnitudes = np.sqrt(var * generator.exponential(size=24))
        return (magnitudes[:, None] * phases[None, :]).reshape(-1)

    a, b = carrier(0.25), carrier(0.25)
    return np.repeat(a, b.size), np.tile(b, a.size)


@pytest.fixture
def preset_scenario(tmp_path: Path) -> Any:
    """Copy a preset scenario and its PA fixture into ``tmp_path`` with overrides."""

    def make(name: str, **overrides: Any) -> Path:
        source = PRESETS_DIR / f"{name}.json"
        payload = json.loads(source.read_text(encoding="utf-8"))
        shutil.copy(PRESETS_DIR / payload["pa_fixture"], tmp_path / payload["pa_fixture"])
        for dotted, value in overrides.items():
            section = payload
            *parents, leaf = dotted.split("__")
            for parent in parents:
                section = section.setdefault(parent, {})
            section[leaf] = value
        payload["output_dir"] = str(tmp_path / "out")
        target = tmp_path / f"{name}.json"
        target.write_text(json.dumps(payload, indent=2), encoding="utf-8")
        return target

    return make
