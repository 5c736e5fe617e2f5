"""Pydantic request/response models for the solver service."""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field


class QueryDoc(BaseModel):
    id: str
    value: str
    cost: str
    clicks: str
    biddable: bool = False


class InstanceDoc(BaseModel):
    queries: list[QueryDoc]
    broad_match: list[tuple[str, str]] = Field(default_factory=list)
    budget: Optional[str] = None


class SolveRequest(BaseModel):
    instance: InstanceDoc
    method: Literal[
        "mincut",
        "lp",
        "budgeted",
        "lagrangian",
        "keyword-lp-round",
        "keyword-exact",
        "greedy-margin",
        "greedy-rate",
        "oracle",
    ]
    budget: Optional[str] = None
    epsilon: float = 0.0
    trials: int = Field(default=1000, ge=1, le=1_000_000)
    seed: int = 0
    rate: Literal["profit_over_cost", "value_over_cost"] = "profit_over_cost"


class PlanRequest(BaseModel):
    instance: InstanceDoc
    budget: Optional[str] = None


class GenerateRequest(BaseModel):
    family: Literal[
        "greedy-trap",
        "integrality-gap",
        "independent-set",
        "max-coverage",
        "simulation",
    ]
    n: Optional[int] = None  # greedy-trap
    k: Optional[int] = None  # integrality-gap, max-coverage budget
    chain: Optional[int] = None
    cost_anchor: Optional[str] = None
    cost_satellite: Optional[str] = None
    value_anchor: Optional[str] = None
    strict: bool = True
    nodes: Optional[list[str]] = None  # independent-set
    edges: Optional[list[tuple[str, str]]] = None
    sets: Optional[dict[str, list[str]]] = None  # max-coverage
    element_weights: Optional[dict[str, float]] = None
    keywords: Optional[int] = None  # simulation
    seed: Optional[int] = None


class GenerateResponse(BaseModel):
    instance: dict[str, Any]


class ExperimentSimRequest(BaseModel):
    keywords: int = Field(ge=2)
    runs: int = Field(ge=1, le=10_000)
    seed: int = 0
    exact_method: Literal["closed-form", "bb", "brute"] = "closed-form"
    bounds_ok: bool = False


class HealthResponse(BaseModel):
    status: str


class VersionResponse(BaseModel):
    version: str
    report_schema: str
    rng: str


class ErrorBody(BaseModel):
    code: str
    message: str


class ErrorResponse(BaseModel):
    error: ErrorBody
