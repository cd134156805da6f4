"""Behavioral power amplifier model value types."""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Union

import numpy as np

from subband_dpd.core.exceptions import OrderError, ZeroDivideError

TapsLike = Union[Sequence[complex], np.ndarray]


@dataclass(frozen=True, eq=False)
class PHModel:
    """Parallel Hammerstein PA: odd monomials |x|^(p-1) x, each through an FIR branch."""

    order: int
    branches: Mapping[int, np.ndarray]

    def __post_init__(self) -> None:
        if self.order < 1 or self.order % 2 == 0:
            raise OrderError(f"PA order must be odd and >= 1, got {self.order}")
        branches: dict[int, np.ndarray] = {}
        for p, taps in sorted(self.branches.items()):
            p = int(p)
            if p % 2 == 0 or p < 1 or p > self.order:
                raise OrderError(
                    f"Branch order {p} must be odd and <= model order {self.order}",
                    details={"branch": p},
                )
            array = np.array(taps, dtype=np.complex128).reshape(-1)
            if array.size == 0:
                raise OrderError(f"Branch {p} has no taps", details={"branch": p})
            if not np.all(np.isfinite(array)):
                raise OrderError(
                    f"Branch {p} has non-finite taps", details={"branch": p}
                )
            array.flags.writeable = False
            branches[p] = array
        if 1 not in branches:
            raise OrderError("Branch 1 (linear term) must be present")
        object.__setattr__(self, "branches", branches)

    @property
    def memory_length(self) -> int:
        """Longest branch length in taps."""
        return max(taps.size for taps in self.branches.values())

    def scaled(self, factor: complex) -> "PHModel":
        """Return the model with every branch tap multiplied by ``factor``."""
        return PHModel(
            self.order, {p: factor * taps for p, taps in self.branches.items()}
        )


@dataclass(frozen=True)
class MemorylessPoly:
    """Memoryless odd polynomial f1 x + f3 |x|^2 x + f5 |x|^4 x."""

    f1: complex
    f3: complex = 0j
    f5: complex = 0j

    def __post_init__(self) -> None:
        if complex(self.f1) == 0:
            raise ZeroDivideError("Linear coefficient f1 must be nonzero")
        for name in ("f1", "f3", "f5"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    @property
    def order(self) -> int:
        if self.f5 != 0:
            return 5
        if self.f3 != 0:
            return 3
        return 1

    def to_ph(self) -> PHModel:
        """Express the polynomial as a single-tap Parallel Hammerstein model."""
        branches: dict[int, TapsLike] = {1: [self.f1]}
        if self.order >= 3:
            branches[3] = [self.f3]
        if self.order >= 5:
            branches[5] = [self.f5]
        return PHModel(self.order, branches)
