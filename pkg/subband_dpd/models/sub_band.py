"""Intermodulation sub-band identifiers."""

import enum
import re
from dataclasses import dataclass

from subband_dpd.core.exceptions import BandError, OrderError

SUPPORTED_ORDERS = (3, 5, 7, 9, 11)

_LABEL_PATTERN = re.compile(r"^(?:IM)?(\d+)([+-])$", re.IGNORECASE)


class BandSign(str, enum.Enum):
    """Side of the composite spectrum a sub-band sits on."""

    POSITIVE = "+"
    NEGATIVE = "-"

    @property
    def factor(self) -> int:
        """Return +1 or -1."""
        return 1 if self is BandSign.POSITIVE else -1

    @classmethod
    def both(cls) -> list["BandSign"]:
        """Return both signs, positive first."""
        return [cls.POSITIVE, cls.NEGATIVE]


@dataclass(frozen=True, order=True)
class SubBandId:
    """One IM sub-band: odd order m in 3..11 and a spectral side."""

    m: int
    sign: BandSign = BandSign.POSITIVE

    def __post_init__(self) -> None:
        if self.m % 2 == 0 or self.m not in SUPPORTED_ORDERS:
            raise OrderError(
                f"Sub-band order must be one of {SUPPORTED_ORDERS}, got {self.m}",
                details={"m": self.m},
            )
        object.__setattr__(self, "sign", BandSign(self.sign))

    @property
    def offset(self) -> int:
        """Signed multiple of f_IF at which the sub-band is centred."""
        return self.sign.factor * self.m

    @property
    def label(self) -> str:
        return f"IM{self.m}{self.sign.value}"

    def center_hz(self, f_if_hz: float) -> float:
        """Centre frequency of the sub-band in the composite baseband."""
        return self.offset * f_if_hz

    def check_order(self, order: int) -> None:
        """Raise BandError when the sub-band is not generated by an order-P model."""
        if self.m > order:
            raise BandError(
                f"Sub-band {self.label} requires nonlinearity order >= {self.m}, "
                f"model order is {order}",
                details={"sub_band": self.label, "order": order},
            )

    @classmethod
    def parse(cls, label: str) -> "SubBandId":
        """Parse labels such as ``IM3+``, ``im5-`` or ``7+``."""
        match = _LABEL_PATTERN.match(label.strip())
        if not match:
            raise BandError(f"Cannot parse sub-band label '{label}'")
        return cls(int(match.group(1)), BandSign(match.group(2)))

    def __str__(self) -> str:
        return self.label
