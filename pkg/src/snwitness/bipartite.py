"""Pure bipartite states, Schmidt decomposition, and local transformations.

A pure state on a d_A x d_B space is held as its coefficient matrix: entry
(k, l) is the amplitude of the product basis vector |k, l>.  Basis indices
start at 0 throughout (Fock-like spaces count photons from 0).  The singular
value decomposition of the coefficient matrix is the Schmidt decomposition.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import BadParameter, DimensionMismatch, ZeroState

NORM_TOL = 1e-10
# Absolute floor below which a state counts as numerically zero.
ZERO_THRESHOLD = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


@dataclass
class PureState:
    """Normalized pure state with coefficient matrix of shape (d_a, d_b)."""

    coeffs: np.ndarray

    def __post_init__(self):
        m = linalg.as_complex_matrix(self.coeffs, "state coefficients")
        nrm = np.linalg.norm(m)
        if abs(nrm - 1.0) > NORM_TOL:
            raise BadParameter(f"state norm is {nrm:.12f}, expected 1 within {NORM_TOL}")
        self.coeffs = _readonly(m)

    @classmethod
    def normalized(cls, coeffs) -> "PureState":
        """Build a state from unnormalized coefficients."""
        m = linalg.as_complex_matrix(coeffs, "state coefficients")
        nrm = np.linalg.norm(m)
        if nrm < ZERO_THRESHOLD:
            raise ZeroState(f"cannot normalize a state of norm {nrm:.3e}")
        return cls(m / nrm)

    @property
    def d_a(self) -> int:
        return self.coeffs.shape[0]

    @property
    def d_b(self) -> int:
        return self.coeffs.shape[1]

    def vec(self) -> np.ndarray:
        """Flatten to the composite basis; index of |a,b> is a*d_b + b."""
        return self.coeffs.reshape(-1)

    def diagonal_amplitudes(self, n: int | None = None) -> np.ndarray:
        """Amplitudes <k,k|psi> for k below n (padded with zeros if needed)."""
        d = min(self.d_a, self.d_b)
        diag = np.diagonal(self.coeffs).copy()
        if n is None:
            return diag
        out = np.zeros(n, dtype=complex)
        out[: min(n, d)] = diag[: min(n, d)]
        return out

    def to_json(self) -> dict:
        return {
            "d_a": self.d_a,
            "d_b": self.d_b,
            "re": self.coeffs.real.tolist(),
            "im": self.coeffs.imag.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "PureState":
        m = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
        if m.shape != (data["d_a"], data["d_b"]):
            raise BadParameter(
                f"coefficient shape {m.shape} does not match (d_a, d_b)="
                f"({data['d_a']}, {data['d_b']})"
            )
        return cls(m)


@dataclass
class SchmidtDecomposition:
    """Local bases and descending positive Schmidt coefficients of a state.

    Columns of ``left_basis``/``right_basis`` are the full orthonormal A/B
    bases; the first ``rank`` columns carry the state.  Reconstruction is
    M = left[:, :rank] @ diag(coefficients) @ right[:, :rank].T
    """

    left_basis: np.ndarray
    right_basis: np.ndarray
    coefficients: np.ndarray
    rank: int = field(init=False)

    def __post_init__(self):
        self.left_basis = _readonly(self.left_basis)
        self.right_basis = _readonly(self.right_basis)
        c = np.asarray(self.coefficients, dtype=float)
        c.setflags(write=False)
        self.coefficients = c
        self.rank = len(c)

    def reconstruct(self) -> PureState:
        r = self.rank
        m = (self.left_basis[:, :r] * self.coefficients) @ self.right_basis[:, :r].T
        return PureState.normalized(m)


def schmidt_decompose(psi: PureState, rank_tol: float = linalg.DEFAULT_RANK_TOL) -> SchmidtDecomposition:
    """Schmidt-decompose a pure state via the SVD of its coefficient matrix.

    Coefficients are the singular values exceeding ``rank_tol`` times the
    largest one.  The B-side basis is conjugated so that the coefficient
    matrix reconstructs as U diag(s) W^T.
    """
    res = linalg.svd(psi.coeffs)
    s = res.singular_values
    if s[0] < ZERO_THRESHOLD:
        raise ZeroState("all singular values below the absolute threshold")
    keep = s > rank_tol * s[0]
    return SchmidtDecomposition(
        left_basis=res.left,
        right_basis=res.right.conj(),
        coefficients=s[keep],
    )


def schmidt_rank(psi: PureState, rank_tol: float = linalg.DEFAULT_RANK_TOL) -> int:
    """Number of Schmidt coefficients above the relative threshold."""
    return schmidt_decompose(psi, rank_tol).rank


def tmsv_pure(epsilon: float, phase: float = 0.0, cutoff: int = 100) -> PureState:
    """Truncated two-mode squeezed vacuum with amplitudes (eps e^{i phase})^k.

    The coefficient of |k,k> is sqrt(1-eps^2) (eps e^{i phase})^k for
    k <= cutoff, then the state is renormalized.  The pre-normalization
    squared norm is 1 - eps^(2(cutoff+1)), which quantifies the truncation.
    """
    if not 0.0 < epsilon < 1.0:
        raise BadParameter(f"epsilon must lie in (0, 1), got {epsilon}")
    if cutoff < 0:
        raise BadParameter(f"cutoff must be nonnegative, got {cutoff}")
    n = cutoff + 1
    q = epsilon * np.exp(1j * phase)
    amps = np.sqrt(1.0 - epsilon**2) * q ** np.arange(n)
    m = np.zeros((n, n), dtype=complex)
    np.fill_diagonal(m, amps)
    return PureState.normalized(m)


def tmsv_truncation_deficit(epsilon: float, cutoff: int) -> float:
    """Squared-norm deficit of the truncated TMSV: eps^(2(cutoff+1))."""
    return float(epsilon ** (2 * (cutoff + 1)))


def apply_local(psi: PureState, s, t) -> PureState:
    """Apply a local operation S (x) T and renormalize.

    Unitary S, T preserve the Schmidt coefficients; invertible S, T preserve
    the Schmidt rank.
    """
    sm = linalg.as_complex_matrix(s, "S")
    tm = linalg.as_complex_matrix(t, "T")
    if sm.shape != (psi.d_a, psi.d_a):
        raise DimensionMismatch(f"S has shape {sm.shape}, expected ({psi.d_a}, {psi.d_a})")
    if tm.shape != (psi.d_b, psi.d_b):
        raise DimensionMismatch(f"T has shape {tm.shape}, expected ({psi.d_b}, {psi.d_b})")
    out = sm @ psi.coeffs @ tm.T
    return PureState.normalized(out)
