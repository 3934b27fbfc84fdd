"""Pydantic request/response models for the checking service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class ErrorBody(BaseModel):
    kind: str
    message: str
    line: Optional[int] = None


class ValidateRequest(BaseModel):
    model: str


class ViolationModel(BaseModel):
    kind: str
    where: str
    message: str


class ValidateResponse(BaseModel):
    valid: bool
    violations: list[ViolationModel]


class CheckRequest(BaseModel):
    model: str
    dra: Optional[str] = None
    bound: Literal["lower", "upper", "both"] = "both"
    objective: Literal["rabin", "reach"] = "rabin"
    targets: list[str] = Field(default_factory=list)
    epsilon: float = 1e-10
    max_iterations: int = 10**6
    method: Literal["auto", "game", "mec", "brute"] = "auto"


class BoundModel(BaseModel):
    values: dict[str, float]
    controller: dict[str, str]
    nature: list[NatureChoice]
    iterations: int
    witness: Optional[str] = None


class NatureChoice(BaseModel):
    state: str
    action: str
    distribution: dict[str, float]


class ReportModel(BaseModel):
    objective: str
    bound: str
    method: str
    epsilon: float
    states: list[str]
    initial: str
    lower: Optional[BoundModel] = None
    upper: Optional[BoundModel] = None
    elapsed_seconds: float


class CheckResponse(BaseModel):
    report: ReportModel
    report_text: str
    policy_text: str
    table: str


class BfsRequest(BaseModel):
    model: str
    state: str
    action: str


class BfsResponse(BaseModel):
    state: str
    action: str
    vertices: list[dict[str, float]]


class GameRequest(BaseModel):
    model: str


class GameResponse(BaseModel):
    game_text: str
    n_states: int
    n_player2_states: int
    n_actions: int


class ProductRequest(BaseModel):
    model: str
    dra: str


class ProductResponse(BaseModel):
    model_text: str
    n_states: int


class BracketRequest(BaseModel):
    model: str
    report_text: str
    trials: int = 100
    seed: int = 0


class BracketResponse(BaseModel):
    passed: bool
    trials: int
    counterexamples: list[str]


BoundModel.model_rebuild()
