"""Spectral estimate value type."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class PsdEstimate:
    """Two-sided averaged-periodogram power spectral density.

    ``density`` is power per Hz on an ascending frequency grid covering
    [-f_s/2, f_s/2); summing density * resolution over the grid gives the
    mean power of the signal.
    """

    frequencies_hz: np.ndarray
    density: np.ndarray
    sample_rate_hz: float
    segment_len: int
    overlap: float
    window: str = "hann"
    onesided: bool = False

    @property
    def resolution_hz(self) -> float:
        return self.sample_rate_hz / self.segment_len

    def total_power(self) -> float:
        return float(np.sum(self.density) * self.resolution_hz)

    def to_db(self) -> np.ndarray:
        """Density in dB relative to 1 unit^2/Hz, floored at -400 dB."""
        return 10.0 * np.log10(np.maximum(self.density, 1e-40))
