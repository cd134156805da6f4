"""Complex baseband signal and symbol stream value types."""

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from subband_dpd.core.exceptions import InvalidSignalError


def _frozen_array(values: Any, dtype: type = np.complex128) -> np.ndarray:
    array = np.array(values, dtype=dtype).reshape(-1)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class ComplexBasebandSignal:
    """Uniformly sampled complex envelope with an explicit sample rate.

    Samples are stored as a read-only complex128 vector so instances can be
    shared between threads and worker processes.
    """

    samples: np.ndarray
    sample_rate_hz: float
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        samples = _frozen_array(self.samples)
        rate = float(self.sample_rate_hz)
        if not rate > 0:
            raise InvalidSignalError(
                f"Sample rate must be positive, got {rate}",
                details={"sample_rate_hz": rate},
            )
        if samples.size < 1:
            raise InvalidSignalError("Signal must contain at least one sample")
        if not np.all(np.isfinite(samples)):
            raise InvalidSignalError("Signal contains NaN or Inf samples")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", rate)

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration_s(self) -> float:
        """Signal duration in seconds."""
        return len(self) / self.sample_rate_hz

    def power(self) -> float:
        """Mean power of the samples."""
        return float(np.mean(np.abs(self.samples) ** 2))

    def with_samples(self, samples: np.ndarray) -> "ComplexBasebandSignal":
        """Return a signal at the same rate holding new samples."""
        return ComplexBasebandSignal(samples, self.sample_rate_hz, dict(self.metadata))

    @classmethod
    def zeros(cls, n_samples: int, sample_rate_hz: float) -> "ComplexBasebandSignal":
        """Create an all-zero signal."""
        return cls(np.zeros(n_samples, dtype=np.complex128), sample_rate_hz)


@dataclass(frozen=True, eq=False)
class SymbolStream:
    """Constellation symbols of one component carrier.

    The pulse roll-off and samples-per-symbol of the modulator are kept so the
    ideal waveform can be re-modulated as an EVM reference.
    """

    symbols: np.ndarray
    symbol_rate_hz: float
    rolloff: float = 0.22
    samples_per_symbol: int = 1
    pulse_span_symbols: int = 16

    def __post_init__(self) -> None:
        symbols = _frozen_array(self.symbols)
        if symbols.size < 1:
            raise InvalidSignalError("Symbol stream must not be empty")
        if not float(self.symbol_rate_hz) > 0:
            raise InvalidSignalError("Symbol rate must be positive")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "symbol_rate_hz", float(self.symbol_rate_hz))

    def __len__(self) -> int:
        return int(self.symbols.size)
