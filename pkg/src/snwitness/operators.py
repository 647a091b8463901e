"""Hermitian test operators on H_A (x) H_B and their expectation values.

Three representations are supported:

* ``ProjectorOperator`` -- a one-dimensional projector |phi><phi|.
* ``GammaOperator`` -- an operator diagonal in a product basis pair,
  L = sum_{m,n} gamma[m,n] |m,m><n,n|, held as the n x n matrix gamma.
  Everything needed for maximal SN-r expectation values lives in gamma;
  the dense (n^2 x n^2) form is only materialized on request.
* ``DenseOperator`` -- an arbitrary Hermitian matrix on the composite space
  with index convention a*d_b + b for |a,b>.

``DiagonalMixedState`` covers mixtures of |k,k> dyads, in particular the
phase-randomized two-mode squeezed vacuum whose coefficient matrix carries a
sinc envelope from the uniform phase average.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .bipartite import PureState, SchmidtDecomposition, schmidt_decompose, tmsv_pure
from .errors import BadParameter, DimensionMismatch, NotReal, ZeroState

HERMITICITY_ATOL = 1e-12
IMAG_TOL = 1e-8


def sinc(x):
    """sin(x)/x with sinc(0) = 1; near zero uses 1 - x^2/6 for stability."""
    arr = np.asarray(x, dtype=float)
    small = np.abs(arr) < 1e-8
    safe = np.where(small, 1.0, arr)
    out = np.where(small, 1.0 - arr * arr / 6.0, np.sin(safe) / safe)
    if np.isscalar(x):
        return float(out)
    return out


def _check_hermitian_abs(m: np.ndarray, name: str) -> np.ndarray:
    dev = np.max(np.abs(m - m.conj().T))
    if dev > HERMITICITY_ATOL:
        raise BadParameter(f"{name} deviates from Hermiticity by {dev:.3e} (> {HERMITICITY_ATOL})")
    return 0.5 * (m + m.conj().T)


@dataclass
class GammaOperator:
    """L = sum_{m,n} gamma[m,n] |m,m><n,n| on a diagonal product basis.

    ``left_basis``/``right_basis`` (columns e_m / f_m) are set when the
    diagonal basis differs from the computational one, e.g. for projectors
    rotated into their Schmidt bases; None means |m,m> are basis states.
    """

    gamma: np.ndarray
    left_basis: np.ndarray | None = None
    right_basis: np.ndarray | None = None

    def __post_init__(self):
        g = linalg.as_complex_matrix(self.gamma, "gamma")
        if g.shape[0] != g.shape[1]:
            raise BadParameter(f"gamma must be square, got shape {g.shape}")
        g = _check_hermitian_abs(g, "gamma")
        g.setflags(write=False)
        self.gamma = g
        if (self.left_basis is None) != (self.right_basis is None):
            raise BadParameter("left_basis and right_basis must be given together")
        if self.left_basis is not None:
            lb = linalg.as_complex_matrix(self.left_basis, "left_basis")
            rb = linalg.as_complex_matrix(self.right_basis, "right_basis")
            if lb.shape[1] != self.n or rb.shape[1] != self.n:
                raise DimensionMismatch("basis column count must match gamma dimension")
            self.left_basis, self.right_basis = lb, rb

    @property
    def n(self) -> int:
        return self.gamma.shape[0]

    def to_dense(self, d_a: int | None = None, d_b: int | None = None) -> "DenseOperator":
        """Materialize the composite-space matrix."""
        if self.left_basis is not None:
            u, w = self.left_basis, self.right_basis
            cols = np.einsum("ak,bk->abk", u, w).reshape(u.shape[0] * w.shape[0], self.n)
            dense = cols @ self.gamma @ cols.conj().T
            return DenseOperator(dense, u.shape[0], w.shape[0])
        da = self.n if d_a is None else d_a
        db = self.n if d_b is None else d_b
        if da < self.n or db < self.n:
            raise DimensionMismatch(f"dense dims ({da},{db}) cannot hold a {self.n}-level gamma")
        dense = np.zeros((da * db, da * db), dtype=complex)
        idx = np.arange(self.n) * db + np.arange(self.n)
        dense[np.ix_(idx, idx)] = self.gamma
        return DenseOperator(dense, da, db)

    def to_json(self) -> dict:
        if self.left_basis is not None:
            raise BadParameter("only computational-basis gamma operators serialize to JSON")
        return {"n": self.n, "re": self.gamma.real.tolist(), "im": self.gamma.imag.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "GammaOperator":
        g = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
        if g.shape != (data["n"], data["n"]):
            raise BadParameter(f"gamma shape {g.shape} does not match n={data['n']}")
        return cls(g)


@dataclass
class DenseOperator:
    """Hermitian operator on the composite space, index a*d_b + b."""

    matrix: np.ndarray
    d_a: int
    d_b: int

    def __post_init__(self):
        m = linalg.as_complex_matrix(self.matrix, "operator matrix")
        dim = self.d_a * self.d_b
        if m.shape != (dim, dim):
            raise DimensionMismatch(f"matrix shape {m.shape} does not match d_a*d_b = {dim}")
        m = _check_hermitian_abs(m, "operator matrix")
        m.setflags(write=False)
        self.matrix = m

    def to_json(self) -> dict:
        return {
            "d_a": self.d_a,
            "d_b": self.d_b,
            "re": self.matrix.real.tolist(),
            "im": self.matrix.imag.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "DenseOperator":
        m = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
        return cls(m, int(data["d_a"]), int(data["d_b"]))


@dataclass
class ProjectorOperator:
    """One-dimensional projector |phi><phi| with phi's Schmidt data attached."""

    target: PureState
    schmidt: SchmidtDecomposition

    def __post_init__(self):
        rec = self.schmidt.reconstruct()
        if np.linalg.norm(rec.coeffs - self.target.coeffs) > 1e-8:
            raise BadParameter("schmidt decomposition does not reconstruct the target state")

    @classmethod
    def from_state(cls, phi: PureState, rank_tol: float = linalg.DEFAULT_RANK_TOL) -> "ProjectorOperator":
        return cls(target=phi, schmidt=schmidt_decompose(phi, rank_tol))

    @property
    def kappa(self) -> np.ndarray:
        """Descending Schmidt coefficients of the projected state."""
        return self.schmidt.coefficients

    def to_dense(self) -> DenseOperator:
        v = self.target.vec()
        return DenseOperator(np.outer(v, v.conj()), self.target.d_a, self.target.d_b)


@dataclass
class DiagonalMixedState:
    """Mixture supported on |k,k> dyads.

    For the phase-randomized TMSV the coefficient matrix in the |k,k><l,l|
    basis is (1-eps^2) eps^(k+l) sinc(delta_phi (k-l)); its diagonal gives the
    mixing weights.  Truncation is NOT renormalized: the missing tail shows up
    as ``trace_deficit`` and is reported rather than folded into the weights.
    """

    weights: np.ndarray
    structure: str
    epsilon: float | None = None
    delta_phi: float | None = None
    cutoff: int | None = None

    @classmethod
    def tmsv_phase_randomized(cls, epsilon: float, delta_phi: float, cutoff: int = 100) -> "DiagonalMixedState":
        if not 0.0 < epsilon < 1.0:
            raise BadParameter(f"epsilon must lie in (0, 1), got {epsilon}")
        if not 0.0 <= delta_phi <= math.pi + 1e-15:
            raise BadParameter(f"delta_phi must lie in [0, pi], got {delta_phi}")
        if cutoff < 0:
            raise BadParameter(f"cutoff must be nonnegative, got {cutoff}")
        k = np.arange(cutoff + 1)
        w = (1.0 - epsilon**2) * epsilon ** (2 * k)
        return cls(weights=w, structure="tmsv_phase_randomized",
                   epsilon=epsilon, delta_phi=delta_phi, cutoff=cutoff)

    @classmethod
    def from_dyads(cls, weights) -> "DiagonalMixedState":
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0):
            raise BadParameter("dyad weights must be nonnegative")
        if abs(float(np.sum(w)) - 1.0) > 1e-10:
            raise BadParameter(f"dyad weights sum to {np.sum(w)}, expected 1")
        return cls(weights=w, structure="dyads")

    @property
    def trace_deficit(self) -> float:
        """Trace lost to truncation (exactly eps^(2(cutoff+1)) for the TMSV)."""
        if self.structure == "tmsv_phase_randomized":
            return float(self.epsilon ** (2 * (self.cutoff + 1)))
        return max(0.0, 1.0 - float(np.sum(self.weights)))

    def coefficient_matrix(self) -> np.ndarray:
        """Matrix R with rho = sum_{k,l} R[k,l] |k,k><l,l|."""
        if self.structure == "tmsv_phase_randomized":
            k = np.arange(self.cutoff + 1)
            envelope = (1.0 - self.epsilon**2) * self.epsilon ** (k[:, None] + k[None, :])
            return envelope * sinc(self.delta_phi * (k[:, None] - k[None, :]))
        return np.diag(self.weights)


def projector_as_gamma(p: ProjectorOperator) -> GammaOperator:
    """Rank-1 gamma = kappa kappa^T in the projector's Schmidt bases."""
    kappa = p.kappa
    r = len(kappa)
    return GammaOperator(
        gamma=np.outer(kappa, kappa),
        left_basis=p.schmidt.left_basis[:, :r],
        right_basis=p.schmidt.right_basis[:, :r],
    )


def tmsv_gamma(epsilon: float, delta_phi: float, cutoff: int = 100) -> GammaOperator:
    """Phase-averaged TMSV test operator.

    gamma[m,n] = (1-eps^2) eps^(m+n) sinc(delta_phi (m-n)); delta_phi = 0
    recovers the pure TMSV projector up to truncation, delta_phi = pi kills
    all off-diagonals.
    """
    if not 0.0 < epsilon < 1.0:
        raise BadParameter(f"epsilon must lie in (0, 1), got {epsilon}")
    if not 0.0 <= delta_phi <= math.pi + 1e-15:
        raise BadParameter(f"delta_phi must lie in [0, pi], got {delta_phi}")
    if cutoff < 0:
        raise BadParameter(f"cutoff must be nonnegative, got {cutoff}")
    m = np.arange(cutoff + 1)
    g = (1.0 - epsilon**2) * epsilon ** (m[:, None] + m[None, :])
    g = g * sinc(delta_phi * (m[:, None] - m[None, :]))
    return GammaOperator(g)


def flat_sinc_gamma(delta_phi: float, cutoff: int = 100) -> GammaOperator:
    """Test operator with unit diagonal: gamma[m,n] = sinc(delta_phi (m-n))."""
    if not 0.0 < delta_phi <= math.pi + 1e-15:
        raise BadParameter(f"delta_phi must lie in (0, pi], got {delta_phi}")
    if cutoff < 0:
        raise BadParameter(f"cutoff must be nonnegative, got {cutoff}")
    m = np.arange(cutoff + 1)
    return GammaOperator(sinc(delta_phi * (m[:, None] - m[None, :])))


def tmsv_projector(epsilon: float, cutoff: int = 100) -> ProjectorOperator:
    """Projector onto the truncated (renormalized) TMSV state."""
    return ProjectorOperator.from_state(tmsv_pure(epsilon, 0.0, cutoff))


def expectation_pure(op, psi: PureState) -> float:
    """<psi| L |psi> for any of the three operator representations."""
    if isinstance(op, ProjectorOperator):
        if op.target.coeffs.shape != psi.coeffs.shape:
            raise DimensionMismatch(
                f"projector is on {op.target.coeffs.shape}, state on {psi.coeffs.shape}"
            )
        overlap = np.vdot(op.target.coeffs, psi.coeffs)
        return float(abs(overlap) ** 2)
    if isinstance(op, GammaOperator):
        if op.left_basis is not None:
            u, w = op.left_basis, op.right_basis
            if u.shape[0] != psi.d_a or w.shape[0] != psi.d_b:
                raise DimensionMismatch(
                    f"gamma bases are on ({u.shape[0]}, {w.shape[0]}), "
                    f"state on ({psi.d_a}, {psi.d_b})"
                )
            c = np.einsum("ak,ab,bk->k", u.conj(), psi.coeffs, w.conj())
        else:
            c = psi.diagonal_amplitudes(op.n)
        val = np.vdot(c, op.gamma @ c)
    elif isinstance(op, DenseOperator):
        if (op.d_a, op.d_b) != (psi.d_a, psi.d_b):
            raise DimensionMismatch(
                f"operator is on ({op.d_a}, {op.d_b}), state on ({psi.d_a}, {psi.d_b})"
            )
        v = psi.vec()
        val = np.vdot(v, op.matrix @ v)
    else:
        raise BadParameter(f"unsupported operator type {type(op).__name__}")
    if abs(val.imag) > IMAG_TOL:
        raise NotReal(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def expectation_mixed(op: GammaOperator, rho: DiagonalMixedState) -> float:
    """Tr(rho L) for a gamma operator against a |k,k>-dyad mixture.

    Uses compensated summation: near full randomization the value sits within
    rounding distance of the diagonal trace and naive accumulation sign-flips
    vanishing margins.
    """
    if not isinstance(op, GammaOperator):
        raise BadParameter("expectation_mixed requires a GammaOperator")
    if op.left_basis is not None:
        raise BadParameter("expectation_mixed requires a computational-basis gamma")
    r = rho.coefficient_matrix()
    k = min(r.shape[0], op.n)
    terms = (r[:k, :k] * op.gamma[:k, :k].T).real
    return math.fsum(terms.ravel().tolist())


def witness_from(op, lam: float, f_r_value: float | None = None) -> DenseOperator:
    """Witness W = lam * I - L in dense form.

    If the caller supplies the maximal SN-r expectation value ``f_r_value``,
    lam is checked against it (a smaller lam does not give a witness).
    """
    if f_r_value is not None and lam < f_r_value - 1e-12:
        raise BadParameter(f"lam = {lam} is below the supplied f_r = {f_r_value}")
    if isinstance(op, GammaOperator):
        dense = op.to_dense()
    elif isinstance(op, DenseOperator):
        dense = op
    else:
        raise BadParameter(f"unsupported operator type {type(op).__name__}")
    w = lam * np.eye(dense.matrix.shape[0]) - dense.matrix
    return DenseOperator(w, dense.d_a, dense.d_b)
