"""Loading and saving scenario, PA fixture and coefficient files."""

import json
import logging
from pathlib import Path
from typing import Any, Optional, TypeVar, Union

from pydantic import BaseModel, TypeAdapter, ValidationError

from subband_dpd.core.exceptions import ConfigError, SubbandDpdError
from subband_dpd.models.basis import OrthoTransform
from subband_dpd.models.pa import MemorylessPoly, PHModel
from subband_dpd.schemas.fixtures import (
    CoefficientFile,
    MemorylessFixtureFile,
    PAFixtureFile,
    PHFixtureFile,
)
from subband_dpd.schemas.scenario import Scenario
from subband_dpd.services.dpd import SubBandDpd

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
ModelT = TypeVar("ModelT", bound=BaseModel)

_PA_FIXTURE_ADAPTER: TypeAdapter[Union[PHFixtureFile, MemorylessFixtureFile]] = (
    TypeAdapter(PAFixtureFile)
)


def _read_json(path: Path) -> Any:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(
            f"Cannot read {path}: {exc.strerror}", details={"path": str(path)}
        ) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            line=exc.lineno,
            details={"path": str(path)},
        ) from exc


def _validation_error(path: Path, exc: ValidationError) -> ConfigError:
    first = exc.errors()[0]
    field = ".".join(str(part) for part in first["loc"]) or None
    return ConfigError(
        f"{path}: {field or 'document'}: {first['msg']}",
        field=field,
        details={"path": str(path), "error_count": exc.error_count()},
    )


def _write_json(path: Path, payload: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(payload + "\n", encoding="utf-8")
    return path


def load_scenario(path: PathLike) -> Scenario:
    """Parse and validate a scenario file.

    The PA fixture path is resolved relative to the scenario file.

    Raises:
        ConfigError: On unreadable files, JSON syntax errors, schema
            violations or a missing PA fixture
    """
    path = Path(path)
    raw = _read_json(path)
    try:
        scenario = Scenario.model_validate(raw)
    except ValidationError as exc:
        raise _validation_error(path, exc) from exc

    fixture = Path(scenario.pa_fixture)
    if not fixture.is_absolute():
        fixture = (path.parent / fixture).resolve()
    if not fixture.is_file():
        raise ConfigError(
            f"PA fixture {fixture} does not exist",
            field="pa_fixture",
            details={"path": str(path)},
        )
    logger.debug(f"Loaded scenario '{scenario.name}' from {path}")
    return scenario.model_copy(update={"pa_fixture": str(fixture)})


def load_pa_fixture(path: PathLike) -> Union[PHModel, MemorylessPoly]:
    """Read a parallel Hammerstein or memoryless PA fixture.

    Raises:
        ConfigError: On syntax or schema errors
    """
    path = Path(path)
    raw = _read_json(path)
    try:
        fixture = _PA_FIXTURE_ADAPTER.validate_python(raw)
        return fixture.to_model()
    except ValidationError as exc:
        raise _validation_error(path, exc) from exc
    except SubbandDpdError as exc:
        raise ConfigError(f"{path}: {exc.message}", details={"path": str(path)}) from exc


def save_pa_fixture(
    model: Union[PHModel, MemorylessPoly],
    path: PathLike,
    description: Optional[str] = None,
) -> Path:
    """Write ``model`` in the fixture format read by :func:`load_pa_fixture`."""
    document: Union[PHFixtureFile, MemorylessFixtureFile]
    if isinstance(model, MemorylessPoly):
        document = MemorylessFixtureFile.from_model(model, description)
    else:
        document = PHFixtureFile.from_model(model, description)
    return _write_json(Path(path), document.model_dump_json(indent=2, exclude_none=True))


def save_coefficients(dpd: SubBandDpd, path: PathLike) -> Path:
    """Write taps and the frozen transform of one sub-band DPD."""
    document = CoefficientFile.from_coefficients(dpd.coefficients, dpd.transform)
    return _write_json(Path(path), document.model_dump_json(indent=2))


def load_coefficients(path: PathLike) -> SubBandDpd:
    """Read a DPD written by :func:`save_coefficients`.

    A file without a transform gets the identity.

    Raises:
        ConfigError: On syntax or schema errors
    """
    path = Path(path)
    raw = _read_json(path)
    try:
        document = CoefficientFile.model_validate(raw)
    except ValidationError as exc:
        raise _validation_error(path, exc) from exc
    try:
        coefficients = document.to_coefficients()
        transform = document.to_transform() or OrthoTransform.identity(
            coefficients.sub_band, coefficients.q
        )
        return SubBandDpd(coefficients, transform)
    except SubbandDpdError as exc:
        raise ConfigError(f"{path}: {exc.message}", details={"path": str(path)}) from exc


def load_model(model_type: type[ModelT], path: PathLike) -> ModelT:
    """Validate any JSON document against ``model_type``.

    Raises:
        ConfigError: On syntax or schema errors
    """
    path = Path(path)
    raw = _read_json(path)
    try:
        return model_type.model_validate(raw)
    except ValidationError as exc:
        raise _validation_error(path, exc) from exc
