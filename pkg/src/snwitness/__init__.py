"""Schmidt-number witnesses for bipartite quantum states.

Core pieces: Schmidt decomposition of pure states, Hermitian test operators
in projector / gamma / dense form, maximal SN-r expectation values f_r with
closed forms and a multi-start r-Schmidt-eigenvalue oracle, and the
phase-randomized two-mode squeezed-vacuum application with its detection
thresholds.  A FastAPI service and a thin CLI client expose the same
operations over JSON.
"""
from . import errors
from .bipartite import (
    PureState,
    SchmidtDecomposition,
    apply_local,
    schmidt_decompose,
    schmidt_rank,
    tmsv_pure,
    tmsv_truncation_deficit,
)
from .linalg import (
    HermitianEig,
    SVDResult,
    generalized_hermitian_eig,
    hermitian_eig,
    svd,
)
from .operators import (
    DenseOperator,
    DiagonalMixedState,
    GammaOperator,
    ProjectorOperator,
    expectation_mixed,
    expectation_pure,
    flat_sinc_gamma,
    projector_as_gamma,
    sinc,
    tmsv_gamma,
    tmsv_projector,
    witness_from,
)
from .schmidt_number import (
    FrValue,
    RSESolution,
    WitnessReport,
    f1_gamma,
    f2_gamma,
    f_r_projector,
    fr_gamma,
    fr_oracle,
    make_report,
    projector_maximizer,
    rse_residual,
    witness_verdict,
)
from .tmsv import (
    MarginCurve,
    Scenario,
    ThresholdResult,
    db_to_epsilon,
    epsilon_to_db,
    expectation_closed_form,
    f2_matched,
    margin_curve,
    threshold,
    threshold_scan,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "PureState",
    "SchmidtDecomposition",
    "apply_local",
    "schmidt_decompose",
    "schmidt_rank",
    "tmsv_pure",
    "tmsv_truncation_deficit",
    "HermitianEig",
    "SVDResult",
    "generalized_hermitian_eig",
    "hermitian_eig",
    "svd",
    "DenseOperator",
    "DiagonalMixedState",
    "GammaOperator",
    "ProjectorOperator",
    "expectation_mixed",
    "expectation_pure",
    "flat_sinc_gamma",
    "projector_as_gamma",
    "sinc",
    "tmsv_gamma",
    "tmsv_projector",
    "witness_from",
    "FrValue",
    "RSESolution",
    "WitnessReport",
    "f1_gamma",
    "f2_gamma",
    "f_r_projector",
    "fr_gamma",
    "fr_oracle",
    "make_report",
    "projector_maximizer",
    "rse_residual",
    "witness_verdict",
    "MarginCurve",
    "Scenario",
    "ThresholdResult",
    "db_to_epsilon",
    "epsilon_to_db",
    "expectation_closed_form",
    "f2_matched",
    "margin_curve",
    "threshold",
    "threshold_scan",
]
