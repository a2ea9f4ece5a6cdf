"""Scenario configuration: schema, loading and conversion to library objects."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
import yaml
from pydantic import AliasChoices, BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError
from .grid import SpectralGrid
from .units import PhysicalParams, ScalingParams, make_scaling

DEFAULT_SEED = 20240607
Vector = Union[float, list[float]]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class UnitsBlock(_Strict):
    mass: float = Field(1.0, gt=0)
    speed_of_light: float = Field(1.0, gt=0)
    hbar: float = Field(1.0, gt=0)
    # characteristic length for the relativity parameter; reporting only
    box_length: Optional[float] = Field(None, gt=0)

    def params(self) -> PhysicalParams:
        return PhysicalParams(self.mass, self.speed_of_light, self.hbar)

    def scaling(self) -> ScalingParams | None:
        return None if self.box_length is None else make_scaling(self.params(), self.box_length)


class GridBlock(_Strict):
    dim: Literal[1, 2, 3] = 1
    n: int = Field(256, ge=2, validation_alias=AliasChoices("n", "n_per_axis"))
    box: float = Field(20.0, gt=0, validation_alias=AliasChoices("box", "box_length"))

    @field_validator("n")
    @classmethod
    def _even(cls, v):
        if v % 2:
            raise ValueError("must be even")
        return v

    def grid(self) -> SpectralGrid:
        return SpectralGrid(self.dim, self.n, self.box)


class StateBlock(_Strict):
    kind: Literal["plane_wave", "gaussian", "random"] = "gaussian"
    branch: Optional[Literal["plus", "minus"]] = "plus"
    x0: Vector = 0.0
    k0: Vector = 0.0
    sigma: float = Field(3.0, gt=0)
    kmax: Optional[float] = Field(None, gt=0)


class RunBlock(_Strict):
    method: str = "exact"
    t_final: float = Field(1.0, ge=0)
    snapshots: int = Field(5, ge=1)
    steps: int = Field(10, ge=1)
    order: int = Field(3, ge=1)

    @field_validator("method")
    @classmethod
    def _method(cls, v):
        parse_method(v)
        return v


class OutputBlock(_Strict):
    directory: str = "."
    formats: list[Literal["csv", "json"]] = ["csv", "json"]


class FockBlock(_Strict):
    modes: list[Vector] = [0.0]
    n_max: int = Field(3, ge=1)
    box: Optional[float] = Field(None, gt=0)


class ScenarioConfig(_Strict):
    units: UnitsBlock = UnitsBlock()
    grid: GridBlock = GridBlock()
    state: StateBlock = StateBlock()
    run: RunBlock = RunBlock()
    output: OutputBlock = OutputBlock()
    fock: FockBlock = FockBlock()
    seed: int = Field(DEFAULT_SEED, ge=0, lt=2**64)


def parse_method(text: str):
    """``exact`` | ``schrodinger`` | ``truncated:<N>`` -> ``(name, order)``."""
    text = str(text).strip().lower()
    if text in ("exact", "schrodinger"):
        return text, None
    if text.startswith("truncated:"):
        tail = text.split(":", 1)[1]
        if tail.isdigit() and int(tail) >= 1:
            return "truncated", int(tail)
    raise ValueError(f"method must be exact, schrodinger or truncated:<N>=1..., got {text!r}")


def _format_errors(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def validate_config(data) -> ScenarioConfig:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("<root>: config must be a mapping")
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from None


def load_config(path) -> ScenarioConfig:
    """Read a YAML (or JSON, which is YAML) scenario file and validate it."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"{path}: not parseable ({exc})") from None
    return validate_config(data)


def as_vector(v, dim: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.size == 1:
        return np.full(dim, float(arr[0]))
    if arr.size != dim:
        raise ConfigError(f"vector {list(arr)} does not match dim={dim}")
    return arr
