"""
Модуль для схемы сценария (pydantic) и сборки геометрии из него
"""
import json
import logging
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, ValidationError, field_validator

from config import DEFAULT_N, DEFAULT_TOL, MAX_ITER, OUTPUT_DIR
from contours import Contour, EllipseSpec, sample_ellipse
from errors import ScenarioError
from field import PatchPair

logger = logging.getLogger(__name__)


class EllipseGeometry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["ellipse"]
    a: PositiveFloat
    b: PositiveFloat
    center: Tuple[float, float] = (0.0, 0.0)
    tilt: float = 0.0

    def to_spec(self) -> EllipseSpec:
        return EllipseSpec(self.a, self.b, complex(*self.center), self.tilt)


class SampledGeometry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["samples"]
    points: List[Tuple[float, float]] = Field(min_length=16)

    @field_validator("points")
    @classmethod
    def even_count(cls, v):
        if len(v) % 2:
            raise ValueError("number of sampled points must be even")
        return v

    def to_contour(self) -> Contour:
        return Contour.from_samples([complex(x, y) for x, y in self.points])


Geometry = Annotated[Union[EllipseGeometry, SampledGeometry], Field(discriminator="type")]


class Numerics(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n: int = Field(default=DEFAULT_N, ge=16)
    dt: Optional[PositiveFloat] = None
    t_end: Optional[PositiveFloat] = None
    tol: PositiveFloat = DEFAULT_TOL
    method: Literal["auto", "closed_form", "quadrature"] = "auto"
    k_max: Optional[PositiveInt] = None
    max_iter: PositiveInt = MAX_ITER
    seed: int = 0
    perturbation: float = Field(default=0.0, ge=0.0, le=0.2)

    @field_validator("n")
    @classmethod
    def even_nodes(cls, v):
        if v % 2:
            raise ValueError("number of nodes must be even")
        return v


class Outputs(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dir: str = OUTPUT_DIR
    formats: List[Literal["csv", "json", "svg"]] = ["csv", "json"]
    stride: PositiveInt = 1


class Scenario(BaseModel):
    """Сценарий: геометрия, уровень завихренности, Ω, численные параметры и выводы"""
    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    outer: Optional[Geometry] = None
    inner: Optional[Geometry] = None
    alpha: float = 1.0
    omega: Union[float, Literal["auto"]] = "auto"
    alphas: Optional[List[float]] = None
    numerics: Numerics = Field(default_factory=Numerics)
    outputs: Outputs = Field(default_factory=Outputs)

    def outer_spec(self) -> Optional[EllipseSpec]:
        return self.outer.to_spec() if isinstance(self.outer, EllipseGeometry) else None

    def inner_spec(self) -> Optional[EllipseSpec]:
        return self.inner.to_spec() if isinstance(self.inner, EllipseGeometry) else None

    def to_pair(self) -> PatchPair:
        """Пара интерфейсов; при отсутствии внутреннего одиночное пятно"""
        if self.outer is None:
            raise ScenarioError("scenario has no outer geometry")
        n = self.numerics.n
        if self.inner is None:
            if isinstance(self.outer, EllipseGeometry):
                return PatchPair.single(self.outer.to_spec(), n)
            return PatchPair.single(self.outer.to_contour())
        if isinstance(self.outer, EllipseGeometry) and isinstance(self.inner, EllipseGeometry):
            return PatchPair.from_ellipses(self.outer.to_spec(), self.inner.to_spec(), self.alpha, n)
        outer = self.outer.to_contour() if isinstance(self.outer, SampledGeometry) else sample_ellipse(self.outer.to_spec(), n)
        inner = self.inner.to_contour() if isinstance(self.inner, SampledGeometry) else sample_ellipse(self.inner.to_spec(), n)
        return PatchPair(outer, inner, self.alpha)


def ellipse_geometry(spec: EllipseSpec) -> EllipseGeometry:
    return EllipseGeometry(type="ellipse", a=spec.a, b=spec.b, center=(spec.center.real, spec.center.imag), tilt=spec.tilt)


def contour_geometry(c: Contour) -> SampledGeometry:
    return SampledGeometry(type="samples", points=[(float(z.real), float(z.imag)) for z in np.asarray(c.samples)])


def scenario_from_dict(data: dict) -> Scenario:
    """Проверить словарь по схеме"""
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        raise ScenarioError(f"scenario does not match the schema: {e}") from e


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Прочитать и проверить сценарий из JSON-файла"""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ScenarioError(f"scenario file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ScenarioError(f"malformed scenario JSON in {path}: {e}") from e
    if not isinstance(data, dict):
        raise ScenarioError(f"scenario in {path} must be a JSON object")
    scenario = scenario_from_dict(data)
    logger.info(f"Loaded scenario {scenario.name or path.name}")
    return scenario
