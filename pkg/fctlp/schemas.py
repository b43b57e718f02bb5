import math
from enum import Enum
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


PROBLEM_NAMES = (
    "advection-shapes",
    "solid-body-rotation",
    "nonconvex-riemann",
    "burgers",
    "buckley-leverett",
    "convection-diffusion",
)

# Problems governed by a nonlinear (or generic) flux function rather than a velocity field
CONSERVATION_PROBLEMS = ("nonconvex-riemann", "burgers", "buckley-leverett")


class LimiterMode(str, Enum):
    LP = "LP"
    AP = "AP"
    LE = "LE"
    AE = "AE"
    LET = "LET"
    LOW = "none-low-order"
    HIGH = "none-high-order"

    @property
    def entropy(self) -> bool:
        return self in (LimiterMode.LE, LimiterMode.AE, LimiterMode.LET)

    @property
    def exact(self) -> bool:
        """Limiters come from a linear program"""
        return self in (LimiterMode.LP, LimiterMode.LE, LimiterMode.LET)


# ============= Boundary Schemas =============

class BoundarySpec(BaseModel):
    kind: Literal["periodic", "dirichlet", "extend_constant"] = Field(..., description="Boundary handling")
    left: float = Field(0.0, description="Dirichlet value at the left end")
    right: float = Field(0.0, description="Dirichlet value at the right end")
    model_config = ConfigDict(frozen=True)

    @field_validator("left", "right")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("boundary value must be finite")
        return value


class BoundarySpec2D(BaseModel):
    x: BoundarySpec = Field(..., description="Boundary along the first axis")
    y: BoundarySpec = Field(..., description="Boundary along the second axis")
    model_config = ConfigDict(frozen=True)


# ============= Scheme Schemas =============

class PicardParams(BaseModel):
    eps1: float = Field(1e-6, gt=0, description="Relative state change tolerance")
    eps2: float = Field(1e-6, gt=0, description="Absolute limiter change tolerance")
    delta: float = Field(1e-12, gt=0, description="Floor of the relative state norm")
    max_iters: int = Field(50, ge=1, description="Iteration cap")
    model_config = ConfigDict(frozen=True)


class SchemeConfig(BaseModel):
    sigma: float = Field(0.0, ge=0.0, le=1.0, description="Time weight of the implicit level")
    dt: float = Field(..., gt=0, description="Time step")
    limiter_mode: LimiterMode = Field(LimiterMode.AP, description="Limiter computation")
    low_flux: Literal["upwind", "rusanov", "godunov"] = Field("upwind", description="Monotone flux")
    high_flux: Literal["centered", "quick"] = Field("centered", description="High-order flux")
    picard: PicardParams = Field(default_factory=PicardParams)
    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_pairs(self):
        if self.limiter_mode.entropy and (self.low_flux != "rusanov" or self.high_flux != "centered"):
            raise ValueError("entropy limiter modes require the rusanov/centered flux pair")
        if self.high_flux == "quick" and self.low_flux != "upwind":
            raise ValueError("quick high-order flux is only defined for linear advection")
        return self


# ============= Problem Schemas =============

class VelocitySpec(BaseModel):
    kind: Literal["constant", "rotation"] = Field("constant", description="Velocity field family")
    value: list[float] = Field(default_factory=lambda: [1.0], description="Constant velocity per axis")
    model_config = ConfigDict(frozen=True)


class InitialCondition(BaseModel):
    name: Literal["advection-shapes", "rotating-bodies", "riemann", "box", "sine-pulse"] = Field(
        ..., description="Registered initial profile")
    params: dict[str, float] = Field(default_factory=dict, description="Profile parameters")
    model_config = ConfigDict(frozen=True)


class Segment(BaseModel):
    name: str = Field(..., min_length=1, description="Component label used in metrics")
    center: list[float] = Field(..., min_length=1, max_length=2, description="Initial component center")
    model_config = ConfigDict(frozen=True)


class ProblemSpec(BaseModel):
    name: str = Field(..., description="Registered problem name")
    dimension: Literal[1, 2] = Field(1, description="Spatial dimension")
    flux: Literal["linear", "burgers", "quartic", "buckley-leverett"] = Field("linear", description="Flux function")
    velocity: Optional[VelocitySpec] = Field(None, description="Velocity for linear problems")
    diffusivity: float = Field(0.0, ge=0.0, description="Constant diffusion coefficient")
    initial: InitialCondition
    domain: list[list[float]] = Field(..., min_length=1, max_length=2, description="[a, b] per axis")
    cells: list[int] = Field(..., min_length=1, max_length=2, description="Cell count per axis")
    boundary: BoundarySpec2D = Field(..., description="Boundary per axis (second entry unused in 1D)")
    dt: float = Field(..., gt=0, description="Default time step")
    end_times: list[float] = Field(..., min_length=1, description="Output times")
    reference: Literal["translation", "rotation", "burgers-exact", "godunov-fine", "refined-crank-nicolson"]
    segments: list[Segment] = Field(default_factory=list, description="Components reported separately")
    entropy_range: Optional[list[float]] = Field(None, description="x range of the entropy integral")
    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_shape(self):
        if len(self.domain) != self.dimension or len(self.cells) != self.dimension:
            raise ValueError("domain and cells must have one entry per axis")
        for a, b in self.domain:
            if not b > a:
                raise ValueError("domain requires b > a")
        if any(n < 3 for n in self.cells):
            raise ValueError("at least 3 cells per axis")
        if self.flux == "linear" and self.velocity is None:
            raise ValueError("linear problems need a velocity")
        return self

    @property
    def conservation_law(self) -> bool:
        return self.flux != "linear"


# ============= Run Schemas =============

class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    problem: str = Field(..., description="Problem name")
    mode: LimiterMode = Field(LimiterMode.AP, description="Limiter mode")
    sigma: float = Field(0.0, ge=0.0, le=1.0, description="Time weight")
    cells: Optional[int] = Field(None, ge=3, description="Cells per axis override")
    dt: Optional[float] = Field(None, gt=0, description="Time step override")
    t_end: Optional[float] = Field(None, gt=0, description="End time override")
    high_flux: Optional[Literal["centered", "quick"]] = Field(None, description="High-order flux override")
    low_flux: Optional[Literal["upwind", "rusanov", "godunov"]] = Field(None, description="Low-order flux override")
    picard: PicardParams = Field(default_factory=PicardParams)
    out: Optional[str] = Field(None, description="Output directory")

    @field_validator("problem")
    @classmethod
    def _known_problem(cls, value: str) -> str:
        if value not in PROBLEM_NAMES:
            raise ValueError(f"unknown problem {value!r}; expected one of {', '.join(PROBLEM_NAMES)}")
        return value

    @model_validator(mode="after")
    def _check_compatibility(self):
        conservation = self.problem in CONSERVATION_PROBLEMS
        if self.mode.entropy:
            if not conservation:
                raise ValueError(f"mode {self.mode.value} requires a conservation-law problem")
            if self.low_flux not in (None, "rusanov") or self.high_flux not in (None, "centered"):
                raise ValueError(f"mode {self.mode.value} requires the rusanov/centered flux pair")
        if conservation and self.low_flux == "upwind":
            raise ValueError("upwind low-order flux is only defined for linear problems")
        if not conservation and self.low_flux in ("rusanov", "godunov"):
            raise ValueError("linear problems use the upwind low-order flux")
        if conservation and self.high_flux == "quick":
            raise ValueError("quick high-order flux is only defined for linear problems")
        return self


class SegmentMetrics(BaseModel):
    l1_error: float = Field(..., ge=0)
    y_max: float


class SnapshotMetrics(BaseModel):
    t: float
    l1_error: float = Field(..., ge=0)
    y_max: float
    y_min: float
    segments: dict[str, SegmentMetrics] = Field(default_factory=dict)


class RunMetrics(BaseModel):
    problem: str
    mode: LimiterMode
    sigma: float
    snapshots: list[SnapshotMetrics]
    entropy_integral: list[list[float]] = Field(default_factory=list, description="[t, value] pairs")
    entropy_residual_max: list[list[float]] = Field(default_factory=list, description="[t, value] pairs")
    tadmor_residual_max: list[list[float]] = Field(default_factory=list, description="[t, value] pairs")
    conservation_drift: float = 0.0
    alpha_min: float = 1.0
    alpha_mean: float = 1.0
    picard_iterations_max: int = Field(0, ge=0)
    lp_fallbacks: int = Field(0, ge=0)
    steps: int = Field(0, ge=0)


class Manifest(BaseModel):
    package_version: str
    run: RunConfig
    problem: ProblemSpec
    scheme: SchemeConfig
    output_times: list[float]
    files: list[str]
