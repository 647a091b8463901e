"""Request handlers shared by the HTTP routes and the in-process CLI client."""
from __future__ import annotations

import math

import numpy as np

from ..bipartite import schmidt_decompose
from ..errors import BadParameter
from ..operators import (
    DenseOperator,
    DiagonalMixedState,
    GammaOperator,
    ProjectorOperator,
    expectation_mixed,
    flat_sinc_gamma,
    tmsv_gamma,
    tmsv_projector,
)
from ..schmidt_number import (
    f1_gamma,
    f2_gamma,
    f_r_projector,
    fr_gamma,
    fr_oracle,
    make_report,
    witness_verdict,
)
from ..tmsv import Scenario, expectation_closed_form, margin_curve, threshold_scan
from . import models


def build_operator(spec: models.OperatorSpec):
    """Materialize an OperatorSpec into one of the operator types."""
    eps = spec.resolved_epsilon()
    if spec.kind == "matched":
        return tmsv_gamma(eps, math.radians(spec.delta_phi_deg), spec.cutoff)
    if spec.kind == "flat_sinc":
        return flat_sinc_gamma(math.radians(spec.delta_phi_deg), spec.cutoff)
    if spec.kind == "projector":
        return tmsv_projector(eps, spec.cutoff)
    if spec.kind == "identity":
        d = spec.d
        return DenseOperator(np.eye(d * d), d, d)
    if spec.kind == "gamma":
        return spec.gamma.to_operator()
    return spec.dense.to_operator()


def _scenario(model: models.ScenarioModel) -> Scenario:
    return Scenario(
        epsilon=model.resolved_epsilon(),
        cutoff=model.cutoff,
        operator_kind=model.operator_kind,
        r=model.r,
    )


def handle_fr(req: models.FrRequest) -> models.FrResponse:
    op = build_operator(req.operator)
    if isinstance(op, ProjectorOperator):
        return models.FrResponse(
            r=req.r, f_r=f_r_projector(op, req.r), f_r_source="closed_form", approximate=False
        )
    if isinstance(op, GammaOperator):
        if req.r == 1:
            return models.FrResponse(
                r=req.r, f_r=f1_gamma(op), f_r_source="closed_form", approximate=False
            )
        if req.r == 2 and op.n >= 2:
            return models.FrResponse(
                r=req.r, f_r=f2_gamma(op), f_r_source="closed_form", approximate=False
            )
        fr = fr_gamma(op, req.r, req.enumeration_cap)
        return models.FrResponse(r=req.r, f_r=fr.value, f_r_source=fr.source, approximate=fr.approximate)
    sol = fr_oracle(op, req.r, restarts=req.restarts, max_iters=req.max_iters,
                    seed=req.seed, threads=req.threads)
    return models.FrResponse(r=req.r, f_r=sol.value, f_r_source="oracle",
                             approximate=not sol.converged)


def _scenario_expectation(op, spec: models.OperatorSpec) -> float:
    """Expectation of the built operator against its own scenario state."""
    eps = spec.resolved_epsilon()
    if eps is None:
        raise BadParameter(
            "no expectation supplied and none derivable: operator kind "
            f"{spec.kind!r} has no associated state"
        )
    if spec.kind == "matched":
        return expectation_closed_form(eps, math.radians(spec.delta_phi_deg))
    if spec.kind == "flat_sinc":
        rho = DiagonalMixedState.tmsv_phase_randomized(
            eps, math.radians(spec.delta_phi_deg), spec.cutoff
        )
        return expectation_mixed(op, rho)
    if spec.kind == "projector":
        # The projected pure state itself: expectation is exactly 1.
        return 1.0
    raise BadParameter(f"operator kind {spec.kind!r} needs an explicit expectation")


def handle_verdict(req: models.VerdictRequest) -> models.WitnessReportModel:
    op = build_operator(req.operator)
    expectation = req.expectation
    if expectation is None:
        expectation = _scenario_expectation(op, req.operator)
    if isinstance(op, DenseOperator):
        sol = fr_oracle(op, req.r)
        report = make_report(req.r, sol.value, expectation, "oracle",
                             approximate=not sol.converged, detection_tol=req.detection_tol)
    else:
        report = witness_verdict(op, expectation, req.r, req.detection_tol)
    return models.WitnessReportModel(**report.to_json())


def handle_scan(req: models.ScanRequest) -> models.ScanResponse:
    if req.angle_step_deg <= 0:
        raise BadParameter(f"angle_step_deg must be positive, got {req.angle_step_deg}")
    if req.angle_max_deg < req.angle_min_deg:
        raise BadParameter("angle_max_deg must be >= angle_min_deg")
    n = int(math.floor((req.angle_max_deg - req.angle_min_deg) / req.angle_step_deg + 1e-9)) + 1
    angles = req.angle_min_deg + req.angle_step_deg * np.arange(n)
    curve = margin_curve(_scenario(req.scenario), angles)
    return models.ScanResponse(
        delta_phi_deg=curve.delta_phi_deg.tolist(),
        expectation=curve.expectation.tolist(),
        f_r=curve.f_r.tolist(),
        margin=curve.margin.tolist(),
        approximate_f_r=curve.approximate_f_r,
    )


def handle_threshold(req: models.ThresholdRequest) -> models.ThresholdResponse:
    scenario = _scenario(req.scenario)
    r = req.r if req.r is not None else scenario.r
    result = threshold_scan(scenario, r, req.coarse_step_deg, req.refine_tol_deg)
    return models.ThresholdResponse(
        scenario={
            "epsilon": scenario.epsilon,
            "cutoff": scenario.cutoff,
            "operator_kind": scenario.operator_kind,
            "r": r,
        },
        r=r,
        threshold_deg=result.threshold_deg,
        crossings_deg=result.crossings_deg,
        approximate_f_r=result.approximate_f_r,
    )


def handle_oracle(req: models.OracleRequest) -> models.OracleResponse:
    op = build_operator(req.operator)
    if isinstance(op, GammaOperator):
        op = op.to_dense()
    elif isinstance(op, ProjectorOperator):
        op = op.to_dense()
    sol = fr_oracle(op, req.r, restarts=req.restarts, max_iters=req.max_iters,
                    seed=req.seed, threads=req.threads)
    sd = schmidt_decompose(sol.vector)
    return models.OracleResponse(
        value=sol.value,
        chi_norm=sol.chi_norm,
        biorth_residual=sol.biorth_residual,
        converged=sol.converged,
        schmidt_rank=sd.rank,
        vector=models.PureStateModel.from_state(sol.vector),
    )


def handle_schmidt(req: models.SchmidtRequest) -> models.SchmidtResponse:
    psi = req.state.to_state()
    sd = schmidt_decompose(psi, req.rank_tol)
    return models.SchmidtResponse(
        rank=sd.rank,
        coefficients=sd.coefficients.tolist(),
        left_basis=models.BasisModel.from_array(sd.left_basis),
        right_basis=models.BasisModel.from_array(sd.right_basis),
    )
