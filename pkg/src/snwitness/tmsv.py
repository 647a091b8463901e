"""Phase-randomized two-mode squeezed vacuum: margins and detection thresholds.

A squeezed state with one arm phase-randomized over [-delta_phi, +delta_phi]
loses its off-diagonal coherences under a sinc envelope.  Testing it against
either the matched operator (same form as the state) or the flat-sinc
operator with unit diagonal yields margin curves whose zero crossings are the
detection thresholds.  Degrees at every interface here; radians internally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParameter
from .operators import (
    DiagonalMixedState,
    GammaOperator,
    expectation_mixed,
    flat_sinc_gamma,
    sinc,
    tmsv_gamma,
)
from .schmidt_number import f1_gamma, f2_gamma, fr_gamma

OPERATOR_KINDS = ("matched", "flat_sinc")
DEFAULT_K_MAX = 300
DEFAULT_K_SEARCH = 200
SERIES_TOL = 1e-12


@dataclass
class Scenario:
    """A squeezing strength, truncation, operator choice, and target r."""

    epsilon: float
    cutoff: int = 100
    operator_kind: str = "matched"
    r: int = 1

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise BadParameter(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.operator_kind not in OPERATOR_KINDS:
            raise BadParameter(f"operator_kind must be one of {OPERATOR_KINDS}")
        if self.r < 1:
            raise BadParameter(f"r must be >= 1, got {self.r}")
        if self.cutoff < self.r:
            raise BadParameter(f"cutoff {self.cutoff} must be >= r = {self.r}")

    def operator(self, delta_phi: float) -> GammaOperator:
        if self.operator_kind == "matched":
            return tmsv_gamma(self.epsilon, delta_phi, self.cutoff)
        return flat_sinc_gamma(delta_phi, self.cutoff)


@dataclass
class MarginCurve:
    """Sampled expectation, bound, and margin over a grid of angles."""

    delta_phi_deg: np.ndarray
    expectation: np.ndarray
    f_r: np.ndarray
    margin: np.ndarray
    approximate_f_r: bool = False

    def to_csv(self, stream) -> None:
        stream.write("delta_phi_deg,expectation,f_r,margin\n")
        for a, e, f, m in zip(self.delta_phi_deg, self.expectation, self.f_r, self.margin):
            stream.write(f"{a:.12g},{e:.12g},{f:.12g},{m:.12g}\n")


@dataclass
class ThresholdResult:
    """Refined last positive-to-negative margin crossing, in degrees."""

    threshold_deg: float
    crossings_deg: list = field(default_factory=list)
    approximate_f_r: bool = False


def expectation_closed_form(epsilon: float, delta_phi: float, k_max: int = DEFAULT_K_MAX) -> float:
    """Series form of Tr(rho L) for the matched operator pair.

    (1-eps^2)/(1+eps^2) * (1 + 2 sum_{k>=1} eps^(2k) sinc^2(delta_phi k)),
    truncated at k_max; the remainder is bounded by
    2 eps^(2(k_max+1))/(1-eps^2) and must stay below 1e-12.
    """
    if not 0.0 < epsilon < 1.0:
        raise BadParameter(f"epsilon must lie in (0, 1), got {epsilon}")
    if k_max < 1:
        raise BadParameter(f"k_max must be >= 1, got {k_max}")
    remainder = 2.0 * epsilon ** (2 * (k_max + 1)) / (1.0 - epsilon**2)
    if remainder > SERIES_TOL:
        raise BadParameter(
            f"k_max = {k_max} leaves a series remainder {remainder:.3e} > {SERIES_TOL}; "
            "increase k_max"
        )
    k = np.arange(1, k_max + 1)
    terms = epsilon ** (2 * k) * sinc(delta_phi * k) ** 2
    s = math.fsum(terms.tolist())
    return (1.0 - epsilon**2) / (1.0 + epsilon**2) * (1.0 + 2.0 * s)


def f2_matched(epsilon: float, delta_phi: float, k_search: int = DEFAULT_K_SEARCH) -> float:
    """Maximal 2x2 principal-submatrix eigenvalue for the matched operator.

    The best pair always contains level 0; the gap k >= 1 to the partner
    level is scanned numerically.
    """
    if not 0.0 < epsilon < 1.0:
        raise BadParameter(f"epsilon must lie in (0, 1), got {epsilon}")
    if k_search < 1:
        raise BadParameter(f"k_search must be >= 1, got {k_search}")
    k = np.arange(1, k_search + 1)
    e2k = epsilon ** (2 * k)
    vals = 1.0 + e2k + np.sqrt((1.0 - e2k) ** 2 + 4.0 * e2k * sinc(delta_phi * k) ** 2)
    return float(0.5 * (1.0 - epsilon**2) * np.max(vals))


def _point(scenario: Scenario, r: int, delta_phi: float):
    """(expectation, f_r, approximate) at one angle in radians."""
    if scenario.operator_kind == "matched":
        expect = expectation_closed_form(scenario.epsilon, delta_phi)
        if r == 1:
            return expect, f1_gamma(scenario.operator(delta_phi)), False
        if r == 2:
            return expect, f2_matched(scenario.epsilon, delta_phi), False
        fr = fr_gamma(scenario.operator(delta_phi), r)
        return expect, fr.value, fr.approximate
    op = scenario.operator(delta_phi)
    rho = DiagonalMixedState.tmsv_phase_randomized(scenario.epsilon, delta_phi, scenario.cutoff)
    expect = expectation_mixed(op, rho)
    if r == 1:
        return expect, f1_gamma(op), False
    if r == 2:
        return expect, f2_gamma(op), False
    fr = fr_gamma(op, r)
    return expect, fr.value, fr.approximate


def margin_curve(scenario: Scenario, angles_deg) -> MarginCurve:
    """Evaluate expectation, f_r, and margin on a strictly increasing grid."""
    angles = np.asarray(angles_deg, dtype=float)
    if angles.ndim != 1 or angles.size == 0:
        raise BadParameter("angles_deg must be a nonempty 1-D sequence")
    if np.any(angles <= 0.0) or np.any(angles > 180.0):
        raise BadParameter("angles must lie in (0, 180] degrees")
    if np.any(np.diff(angles) <= 0.0):
        raise BadParameter("angles must be strictly increasing")
    expect = np.empty_like(angles)
    bound = np.empty_like(angles)
    approx = False
    for i, a in enumerate(angles):
        e, f, ap = _point(scenario, scenario.r, math.radians(a))
        expect[i] = e
        bound[i] = f
        approx = approx or ap
    return MarginCurve(
        delta_phi_deg=angles,
        expectation=expect,
        f_r=bound,
        margin=expect - bound,
        approximate_f_r=approx,
    )


def threshold_scan(scenario: Scenario, r: int | None = None,
                   coarse_step_deg: float = 0.5,
                   refine_tol_deg: float = 0.01) -> ThresholdResult:
    """Locate margin sign changes over (0, 180] and refine them by bisection.

    The threshold is the LAST positive-to-negative crossing (margins are not
    proven monotone); all crossings are listed as a diagnostic.  A margin
    that is never positive gives 0; never negative gives 180.
    """
    if coarse_step_deg <= 0:
        raise BadParameter(f"coarse_step_deg must be positive, got {coarse_step_deg}")
    if refine_tol_deg <= 0:
        raise BadParameter(f"refine_tol_deg must be positive, got {refine_tol_deg}")
    rr = scenario.r if r is None else r
    if rr < 1:
        raise BadParameter(f"r must be >= 1, got {rr}")

    approx = False

    def margin(angle_deg: float) -> float:
        nonlocal approx
        e, f, ap = _point(scenario, rr, math.radians(angle_deg))
        approx = approx or ap
        return e - f

    n_steps = int(math.ceil(180.0 / coarse_step_deg))
    grid = np.minimum(coarse_step_deg * np.arange(1, n_steps + 1), 180.0)
    values = np.array([margin(a) for a in grid])

    def refine(lo: float, hi: float, positive_low: bool) -> float:
        while hi - lo > refine_tol_deg:
            mid = 0.5 * (lo + hi)
            if (margin(mid) > 0.0) == positive_low:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    crossings = []
    last_pos_to_neg = None
    for i in range(len(grid) - 1):
        if values[i] > 0.0 >= values[i + 1]:
            c = refine(grid[i], grid[i + 1], positive_low=True)
            crossings.append(c)
            last_pos_to_neg = c
        elif values[i] <= 0.0 < values[i + 1]:
            crossings.append(refine(grid[i], grid[i + 1], positive_low=False))

    if last_pos_to_neg is not None:
        thr = last_pos_to_neg
    elif np.all(values <= 0.0):
        thr = 0.0
    else:
        thr = 180.0
    return ThresholdResult(threshold_deg=thr, crossings_deg=crossings, approximate_f_r=approx)


def threshold(scenario: Scenario, r: int | None = None,
              coarse_step_deg: float = 0.5, refine_tol_deg: float = 0.01) -> float:
    """Detection threshold angle in degrees; see threshold_scan."""
    return threshold_scan(scenario, r, coarse_step_deg, refine_tol_deg).threshold_deg


def db_to_epsilon(db: float) -> float:
    """Squeezing in dB to the TMSV amplitude parameter.

    The variance ratio 10^(db/10) equals e^(2 s) for squeeze parameter s, and
    eps = tanh(s), i.e. eps = (10^(db/10) - 1) / (10^(db/10) + 1).
    """
    if db < 0:
        raise BadParameter(f"db must be nonnegative, got {db}")
    ratio = 10.0 ** (db / 10.0)
    return (ratio - 1.0) / (ratio + 1.0)


def epsilon_to_db(epsilon: float) -> float:
    """Inverse of db_to_epsilon on [0, 1)."""
    if not 0.0 <= epsilon < 1.0:
        raise BadParameter(f"epsilon must lie in [0, 1), got {epsilon}")
    return 10.0 * math.log10((1.0 + epsilon) / (1.0 - epsilon))
