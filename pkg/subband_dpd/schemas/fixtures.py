"""File schemas for PA fixtures and learned DPD coefficients."""

from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from subband_dpd.models.basis import OrthoTransform
from subband_dpd.models.dpd import DpdCoefficients
from subband_dpd.models.pa import MemorylessPoly, PHModel
from subband_dpd.models.sub_band import SubBandId

# A complex number on disk: [real, imag]
ComplexPair = tuple[float, float]


def _to_complex(pairs: list[ComplexPair]) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)


def _to_pairs(values: np.ndarray) -> list[ComplexPair]:
    return [(float(v.real), float(v.imag)) for v in np.asarray(values).reshape(-1)]


class PHFixtureFile(BaseModel):
    """Parallel Hammerstein PA fixture: order and per-branch complex taps."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["parallel_hammerstein"] = "parallel_hammerstein"
    description: Optional[str] = None
    order: int = Field(..., ge=1, description="Highest odd order P")
    branches: dict[int, list[ComplexPair]] = Field(
        ...,
        description="Odd order p -> branch taps as [re, im] pairs",
        examples=[{"1": [[1.0, 0.0]], "3": [[-0.05, 0.01]]}],
    )

    @field_validator("order")
    @classmethod
    def _odd_order(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError("order must be odd")
        return value

    def to_model(self) -> PHModel:
        return PHModel(self.order, {p: _to_complex(t) for p, t in self.branches.items()})

    @classmethod
    def from_model(
        cls, model: PHModel, description: Optional[str] = None
    ) -> "PHFixtureFile":
        return cls(
            order=model.order,
            description=description,
            branches={p: _to_pairs(taps) for p, taps in model.branches.items()},
        )


class MemorylessFixtureFile(BaseModel):
    """Memoryless polynomial PA fixture."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["memoryless"] = "memoryless"
    description: Optional[str] = None
    f1: ComplexPair = Field(..., examples=[(1.0, 0.0)])
    f3: ComplexPair = Field(default=(0.0, 0.0))
    f5: ComplexPair = Field(default=(0.0, 0.0))

    def to_model(self) -> MemorylessPoly:
        return MemorylessPoly(complex(*self.f1), complex(*self.f3), complex(*self.f5))

    @classmethod
    def from_model(
        cls, model: MemorylessPoly, description: Optional[str] = None
    ) -> "MemorylessFixtureFile":
        return cls(
            description=description,
            f1=(model.f1.real, model.f1.imag),
            f3=(model.f3.real, model.f3.imag),
            f5=(model.f5.real, model.f5.imag),
        )


PAFixtureFile = Annotated[
    Union[PHFixtureFile, MemorylessFixtureFile], Field(discriminator="kind")
]


class CoefficientFile(BaseModel):
    """Serialized sub-band DPD: taps in delay-major layout plus the frozen W."""

    model_config = ConfigDict(extra="forbid")

    sub_band: str = Field(..., examples=["IM3+"])
    q: int = Field(..., ge=3)
    memory_depth: int = Field(..., ge=0)
    taps: list[ComplexPair]
    transform: Optional[list[list[ComplexPair]]] = Field(
        default=None, description="Lower-triangular W, row by row"
    )

    @field_validator("sub_band")
    @classmethod
    def _valid_label(cls, value: str) -> str:
        try:
            return SubBandId.parse(value).label
        except Exception as exc:
            raise ValueError(str(exc)) from exc

    def to_coefficients(self) -> DpdCoefficients:
        return DpdCoefficients(
            SubBandId.parse(self.sub_band), self.q, self.memory_depth, _to_complex(self.taps)
        )

    def to_transform(self) -> Optional[OrthoTransform]:
        if self.transform is None:
            return None
        matrix = np.vstack([_to_complex(row) for row in self.transform])
        return OrthoTransform(SubBandId.parse(self.sub_band), self.q, matrix)

    @classmethod
    def from_coefficients(
        cls, coeffs: DpdCoefficients, transform: Optional[OrthoTransform] = None
    ) -> "CoefficientFile":
        return cls(
            sub_band=coeffs.sub_band.label,
            q=coeffs.q,
            memory_depth=coeffs.memory_depth,
            taps=_to_pairs(coeffs.taps),
            transform=(
                None
                if transform is None
                else [_to_pairs(row) for row in transform.matrix]
            ),
        )
