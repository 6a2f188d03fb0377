"""Pydantic models for the service API and the on-disk JSON formats."""

from __future__ import annotations

from typing import Any, Optional, Union

import numpy as np
from pydantic import BaseModel, Field

from .dirichlet import LiftedFunction, TripleFunction
from .scale import Triple, triple_from_json, triple_to_json

Number = Union[float, str]  # floats, or "inf" / "-inf"


class IntervalModel(BaseModel):
    l: Number
    r: Number


class ScaleModel(BaseModel):
    breakpoints: list[list[float]]
    jumps: list[list[float]] = Field(default_factory=list)
    tail_slopes: list[float] = Field(default_factory=lambda: [0.0, 0.0])


class MeasureModel(BaseModel):
    pieces: list[list[Number]] = Field(default_factory=list)
    atoms: list[list[Number]] = Field(default_factory=list)


class TripleModel(BaseModel):
    interval: IntervalModel
    scale: ScaleModel
    measure: MeasureModel

    def to_triple(self) -> Triple:
        return triple_from_json(self.model_dump())

    @classmethod
    def from_triple(cls, triple: Triple) -> "TripleModel":
        return cls.model_validate(triple_to_json(triple))


class HostFunctionModel(BaseModel):
    """Piecewise-linear host in image coordinates."""

    breakpoints: list[list[float]]
    tail_slopes: list[float] = Field(default_factory=lambda: [0.0, 0.0])

    def to_lifted(self) -> LiftedFunction:
        xs = np.array([b[0] for b in self.breakpoints], dtype=float)
        vals = np.array([b[1] for b in self.breakpoints], dtype=float)
        return LiftedFunction(xs, vals, self.tail_slopes[0], self.tail_slopes[1])


class ComponentFunctionModel(BaseModel):
    """Triple-side function through its decomposition."""

    c0: float = 0.0
    g_c: list[list[float]] = Field(default_factory=list)       # [a, b, value]
    g_plus: list[list[float]] = Field(default_factory=list)    # [x, coefficient]
    g_minus: list[list[float]] = Field(default_factory=list)

    def to_triple_function(self) -> TripleFunction:
        return TripleFunction(
            c0=self.c0,
            g_c=tuple((a, b, v) for a, b, v in self.g_c),
            g_plus=tuple((x, v) for x, v in self.g_plus),
            g_minus=tuple((x, v) for x, v in self.g_minus))


class FunctionModel(BaseModel):
    host: Optional[HostFunctionModel] = None
    components: Optional[ComponentFunctionModel] = None


class RegularizeRequest(BaseModel):
    triple: TripleModel


class EnergyRequest(BaseModel):
    triple: TripleModel
    function: FunctionModel


class ExitRequest(BaseModel):
    triple: TripleModel
    a: float
    b: float
    x: float
    delta: Optional[float] = None


class SimulateRequest(BaseModel):
    triple: TripleModel
    x0: float
    horizon: float = 1.0
    paths: int = 10
    seed: int = 0
    delta: Optional[float] = None
    project: bool = False
    threads: int = 0


class VerifyRequest(BaseModel):
    triple: TripleModel
    suite: str = "all"
    paths: int = 200_000
    seed: int = 0
    delta: Optional[float] = None
    threads: int = 0


class GalleryRequest(BaseModel):
    name: str
    params: dict[str, Any] = Field(default_factory=dict)


class HealthResponse(BaseModel):
    status: str


class EnergyResponse(BaseModel):
    triple_energy: Number
    image_energy: Number
    member_of_F: bool


class RecoveredAtoms(BaseModel):
    states: list[float]
    masses: list[float]


class ExitResponse(BaseModel):
    hitting_prob: float
    mean_exit_time: float
    recovered_atoms: RecoveredAtoms
    x_used: float
    delta: float


class SimulateResponse(BaseModel):
    csv: str
    summary: dict[str, Any]


class GalleryResponse(BaseModel):
    triple: TripleModel
    uniqueness: Optional[dict[str, Any]] = None
