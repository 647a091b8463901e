"""Pydantic request/response models for the service and the CLI client."""
from __future__ import annotations

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..bipartite import PureState
from ..operators import DenseOperator, GammaOperator
from ..tmsv import db_to_epsilon


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PureStateModel(StrictModel):
    d_a: int = Field(ge=1)
    d_b: int = Field(ge=1)
    re: list[list[float]]
    im: list[list[float]]

    @classmethod
    def from_state(cls, psi: PureState) -> "PureStateModel":
        return cls(**psi.to_json())

    def to_state(self) -> PureState:
        return PureState.from_json(self.model_dump())


class GammaMatrixModel(StrictModel):
    n: int = Field(ge=1)
    re: list[list[float]]
    im: list[list[float]]

    @classmethod
    def from_operator(cls, op: GammaOperator) -> "GammaMatrixModel":
        return cls(**op.to_json())

    def to_operator(self) -> GammaOperator:
        return GammaOperator.from_json(self.model_dump())


class DenseMatrixModel(StrictModel):
    d_a: int = Field(ge=1)
    d_b: int = Field(ge=1)
    re: list[list[float]]
    im: list[list[float]]

    @classmethod
    def from_operator(cls, op: DenseOperator) -> "DenseMatrixModel":
        return cls(**op.to_json())

    def to_operator(self) -> DenseOperator:
        return DenseOperator.from_json(self.model_dump())


OperatorKind = Literal["matched", "flat_sinc", "projector", "identity", "gamma", "dense"]


class OperatorSpec(StrictModel):
    """How to build the test operator L.

    matched / flat_sinc / projector need squeezing (epsilon or db) and, for
    the first two, an angle; identity needs the local dimension d; gamma and
    dense carry their matrices inline.
    """

    kind: OperatorKind
    epsilon: Optional[float] = None
    db: Optional[float] = None
    delta_phi_deg: Optional[float] = None
    cutoff: int = 100
    d: Optional[int] = None
    gamma: Optional[GammaMatrixModel] = None
    dense: Optional[DenseMatrixModel] = None

    @model_validator(mode="after")
    def _consistent(self) -> "OperatorSpec":
        if self.epsilon is not None and self.db is not None:
            raise ValueError("epsilon and db are mutually exclusive")
        if self.kind in ("matched", "flat_sinc", "projector"):
            if self.kind != "flat_sinc" and self.epsilon is None and self.db is None:
                raise ValueError(f"operator kind {self.kind!r} needs epsilon or db")
            if self.kind in ("matched", "flat_sinc") and self.delta_phi_deg is None:
                raise ValueError(f"operator kind {self.kind!r} needs delta_phi_deg")
        if self.kind == "identity" and self.d is None:
            raise ValueError("operator kind 'identity' needs d")
        if self.kind == "gamma" and self.gamma is None:
            raise ValueError("operator kind 'gamma' needs the gamma matrix")
        if self.kind == "dense" and self.dense is None:
            raise ValueError("operator kind 'dense' needs the dense matrix")
        return self

    def resolved_epsilon(self) -> Optional[float]:
        if self.epsilon is not None:
            return self.epsilon
        if self.db is not None:
            return db_to_epsilon(self.db)
        return None


class ScenarioModel(StrictModel):
    epsilon: Optional[float] = None
    db: Optional[float] = None
    cutoff: int = 100
    operator_kind: Literal["matched", "flat_sinc"] = "matched"
    r: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _squeezing_given(self) -> "ScenarioModel":
        if (self.epsilon is None) == (self.db is None):
            raise ValueError("exactly one of epsilon or db is required")
        return self

    def resolved_epsilon(self) -> float:
        return self.epsilon if self.epsilon is not None else db_to_epsilon(self.db)


class FrRequest(StrictModel):
    operator: OperatorSpec
    r: int = Field(ge=1)
    enumeration_cap: int = 2_000_000
    restarts: int = 100
    max_iters: int = 500
    seed: int = 0
    threads: int = 1


class FrResponse(StrictModel):
    r: int
    f_r: float
    f_r_source: str
    approximate: bool


class VerdictRequest(StrictModel):
    operator: OperatorSpec
    r: int = Field(ge=1)
    expectation: Optional[float] = None
    detection_tol: Optional[float] = None


class WitnessReportModel(StrictModel):
    r: int
    f_r: float
    expectation: float
    margin: float
    verdict: bool
    f_r_source: str
    approximate: bool


class ScanRequest(StrictModel):
    scenario: ScenarioModel
    angle_min_deg: float = 0.5
    angle_max_deg: float = 180.0
    angle_step_deg: float = 0.5


class ScanResponse(StrictModel):
    delta_phi_deg: list[float]
    expectation: list[float]
    f_r: list[float]
    margin: list[float]
    approximate_f_r: bool


class ThresholdRequest(StrictModel):
    scenario: ScenarioModel
    r: Optional[int] = None
    coarse_step_deg: float = 0.5
    refine_tol_deg: float = 0.01


class ThresholdResponse(StrictModel):
    scenario: dict
    r: int
    threshold_deg: float
    crossings_deg: list[float]
    approximate_f_r: bool


class OracleRequest(StrictModel):
    operator: OperatorSpec
    r: int = Field(ge=1)
    restarts: int = 100
    max_iters: int = 500
    seed: int = 0
    threads: int = 1


class OracleResponse(StrictModel):
    value: float
    chi_norm: float
    biorth_residual: float
    converged: bool
    schmidt_rank: int
    vector: PureStateModel


class SchmidtRequest(StrictModel):
    state: PureStateModel
    rank_tol: float = 1e-10


class BasisModel(StrictModel):
    """Plain re/im blocks for a (not necessarily square) complex matrix."""

    re: list[list[float]]
    im: list[list[float]]

    @classmethod
    def from_array(cls, a: np.ndarray) -> "BasisModel":
        return cls(re=a.real.tolist(), im=a.imag.tolist())


class SchmidtResponse(StrictModel):
    rank: int
    coefficients: list[float]
    left_basis: BasisModel
    right_basis: BasisModel


class RunConfig(StrictModel):
    """CLI run configuration; a config file mirrors this, flags override it."""

    command: Literal["fr", "verdict", "scan", "threshold", "oracle", "schmidt"]
    operator: Optional[str] = None
    file: Optional[str] = None
    epsilon: Optional[float] = None
    db: Optional[float] = None
    delta_phi_deg: Optional[float] = None
    cutoff: int = 100
    d: Optional[int] = None
    r: int = 1
    expectation: Optional[float] = None
    detection_tol: Optional[float] = None
    angle_min_deg: float = 0.5
    angle_max_deg: float = 180.0
    angle_step_deg: float = 0.5
    coarse_step_deg: float = 0.5
    refine_tol_deg: float = 0.01
    restarts: int = 100
    max_iters: int = 500
    enumeration_cap: int = 2_000_000
    rank_tol: float = 1e-10
    seed: int = 0
    threads: int = 1
    out: Optional[str] = None
    format: Literal["csv", "json"] = "json"
    server: Optional[str] = None
