"""Moment sets and learning histories."""

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from subband_dpd.core.exceptions import ShapeError
from subband_dpd.models.sub_band import SubBandId

# E_ij pairs used by the closed-form third-order solutions
THIRD_ORDER_MOMENTS: frozenset[tuple[int, int]] = frozenset(
    {
        (4, 2),
        (6, 2),
        (4, 4),
        (4, 6),
        (6, 4),
        (8, 2),
        (6, 0),
        (4, 0),
        (0, 4),
        (0, 2),
        (2, 0),
        (0, 6),
    }
)


@dataclass(frozen=True)
class MomentSet:
    """Product moments E_ij = E[|x1|^i] E[|x2|^j] of the two carriers."""

    values: Mapping[tuple[int, int], float]

    def __post_init__(self) -> None:
        values: dict[tuple[int, int], float] = {}
        for (i, j), value in self.values.items():
            if (i, j) == (0, 0):
                raise ShapeError("E_00 is not a moment of interest")
            if value < 0 or not np.isfinite(value):
                raise ShapeError(f"Moment E_{i}{j} must be finite and >= 0")
            values[(int(i), int(j))] = float(value)
        object.__setattr__(self, "values", values)

    def __call__(self, i: int, j: int) -> float:
        try:
            return self.values[(i, j)]
        except KeyError as exc:
            raise ShapeError(f"Moment E_{i}{j} was not estimated") from exc


@dataclass
class LearningHistory:
    """Per-update coefficient snapshots and residual sub-band power."""

    sub_band: SubBandId
    coefficients: list[np.ndarray] = field(default_factory=list)
    residual_db: list[float] = field(default_factory=list)

    def record(self, taps: np.ndarray, residual_db: float) -> None:
        self.coefficients.append(np.array(taps, dtype=np.complex128, copy=True))
        self.residual_db.append(float(residual_db))

    def __len__(self) -> int:
        return len(self.residual_db)

    @property
    def final_residual_db(self) -> float:
        return self.residual_db[-1] if self.residual_db else float("nan")

    def to_frame(self) -> pd.DataFrame:
        """Tabular view: update index, residual dB and |alpha_k| per tap."""
        frame = pd.DataFrame(
            {"update": np.arange(len(self)), "residual_db": self.residual_db}
        )
        if self.coefficients:
            magnitudes = np.abs(np.vstack(self.coefficients))
            for k in range(magnitudes.shape[1]):
                frame[f"abs_alpha_{k}"] = magnitudes[:, k]
        return frame
