"""
Pydantic models for documents, realizer parameters and command reports.
"""
from enum import Enum
from typing import Any

from pydantic import BaseModel, Field, model_validator

from config import settings


class StepRule(str, Enum):
    """Step rules available to the numerical realizer."""

    LBFGS = "lbfgs"
    ARMIJO = "armijo"


class DocumentKind(str, Enum):
    """Kinds of JSON documents read and written by the command line."""

    POINTS = "points"
    GRAPH = "graph"
    LATTICE = "lattice"
    SYSTEM = "system"
    SHOR = "shor"
    REPORT = "report"


class Document(BaseModel):
    """Envelope of every file: kind and format version fix the payload schema."""

    kind: DocumentKind
    format_version: int = Field(default_factory=lambda: settings.format_version, ge=1)
    payload: dict[str, Any]

    @model_validator(mode="after")
    def check_version(self):
        if self.format_version > settings.format_version:
            raise ValueError(
                f"format_version {self.format_version} is newer than the supported {settings.format_version}"
            )
        return self


class RealizerParams(BaseModel):
    """Parameters of one realizer run; the seed fully determines the run."""

    max_iters: int = Field(default_factory=lambda: settings.max_iters, gt=0)
    restarts: int = Field(default_factory=lambda: settings.restarts, gt=0)
    step_rule: StepRule = Field(default_factory=lambda: StepRule(settings.step_rule))
    penalty_margin: float = Field(default_factory=lambda: settings.penalty_margin, gt=0)
    convergence_tolerance: float = Field(default_factory=lambda: settings.convergence_tolerance, gt=0)
    seed: int = Field(default_factory=lambda: settings.random_seed, ge=0)


class HullReport(BaseModel):
    """Summary of an exact hull computation."""

    dim: int
    n_points: int
    f_vector: list[int]
    vertices: list[str]
    non_vertices: list[str]
    facets: list[dict[str, Any]]
    euler_sum: int
    seed: int


class SteinitzReport(BaseModel):
    """Polytopality verdict for a graph, with an optional realization."""

    simple: bool
    planar: bool
    three_connected: bool
    polytopal: bool
    verified: bool | None = None
    bit_length: int | None = None
    failed_predicate: str | None = None
    seed: int


class ConnectedSumReport(BaseModel):
    facets_p1: int
    facets_p2: int
    facets_sum: int
    boundary_preserved: bool
    flatness: str
    n_vertices: int
    seed: int

    @property
    def facet_identity_holds(self) -> bool:
        return self.facets_sum == self.facets_p1 + self.facets_p2 - 2


class SystemReport(BaseModel):
    variables: int
    equations: int
    strict: int
    primary: bool
    seed: int


class ShorReport(BaseModel):
    n_variables: int
    n_constraints: int
    flag: str
    input_terms: int
    coefficient_bits: int
    contradiction: list[int] | None = None
    growth_exponent: float | None = None
    growth_r_squared: float | None = None
    growth_quadratic_r_squared: float | None = None
    seed: int


class RealizeReport(BaseModel):
    success: bool
    certified: bool
    restart: int | None = None
    iterations: int
    residual: float
    tangent_dimension: int | None = None
    expected_dimension: int | None = None
    violated: str | None = None
    seed: int
