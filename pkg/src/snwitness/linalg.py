"""Dense Hermitian eigendecomposition, SVD, and generalized eigenproblems.

All solvers are pure functions of their inputs and hold no shared state, so
they are safe to call concurrently.  Dimensions in scope are small (a few
hundred at most); everything is dense double precision.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadParameter,
    DegenerateMetric,
    DimensionMismatch,
    MetricNotPSD,
    NonFinite,
    NotHermitian,
)

DEFAULT_TOL = 1e-10
DEFAULT_RANK_TOL = 1e-10


def as_complex_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return a finite 2-D complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.size == 0:
        raise BadParameter(f"{name} must be a nonempty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise NonFinite(f"{name} contains NaN or Inf entries")
    return m


def require_hermitian(a: np.ndarray, tol: float = DEFAULT_TOL, name: str = "matrix") -> np.ndarray:
    """Check relative Hermiticity and return the Hermitian average."""
    if a.shape[0] != a.shape[1]:
        raise NotHermitian(f"{name} is not square: shape {a.shape}")
    scale = np.linalg.norm(a)
    dev = np.linalg.norm(a - a.conj().T)
    if dev > tol * max(scale, 1e-300):
        raise NotHermitian(f"{name} deviates from Hermiticity by {dev:.3e} (scale {scale:.3e})")
    return 0.5 * (a + a.conj().T)


@dataclass
class HermitianEig:
    """Eigenvalues in descending order with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass
class SVDResult:
    """Factors of A = left @ diag(singular_values) @ right^H."""

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray


def hermitian_eig(a, tol: float = DEFAULT_TOL) -> HermitianEig:
    """Eigendecompose a Hermitian matrix, eigenvalues sorted descending."""
    m = as_complex_matrix(a)
    m = require_hermitian(m, tol)
    w, v = np.linalg.eigh(m)
    return HermitianEig(eigenvalues=w[::-1].copy(), eigenvectors=v[:, ::-1].copy())


def svd(a) -> SVDResult:
    """Full singular value decomposition with descending singular values."""
    m = as_complex_matrix(a)
    u, s, vh = np.linalg.svd(m, full_matrices=True)
    return SVDResult(left=u, singular_values=s, right=vh.conj().T)


def generalized_hermitian_eig(a, b, rank_tol: float = DEFAULT_RANK_TOL) -> HermitianEig:
    """Solve A v = g B v for Hermitian A and positive semi-definite B.

    The problem is restricted to the range of B: both matrices are projected
    onto the span of B's eigenvectors with eigenvalue above
    ``rank_tol * max_eig(B)``.  Returned eigenvectors satisfy v^H B v = 1 and
    the eigenvalues are sorted descending.  A singular metric is handled by
    the spectral projection, never by perturbing B.
    """
    am = as_complex_matrix(a, "A")
    bm = as_complex_matrix(b, "B")
    if am.shape != bm.shape:
        raise DimensionMismatch(f"A has shape {am.shape}, B has shape {bm.shape}")
    am = require_hermitian(am, name="A")
    bm = require_hermitian(bm, name="B")

    w, q = np.linalg.eigh(bm)
    wmax = w[-1]
    if wmax <= 0:
        if np.all(np.abs(w) <= rank_tol * max(abs(w[0]), 1e-300)):
            raise DegenerateMetric("metric B has numerical rank 0")
        raise MetricNotPSD(f"metric B has no positive eigenvalue (max {wmax:.3e})")
    if w[0] < -rank_tol * wmax:
        raise MetricNotPSD(f"metric B has negative eigenvalue {w[0]:.3e}")
    keep = w > rank_tol * wmax
    if not np.any(keep):
        raise DegenerateMetric("metric B has numerical rank 0")

    # Whitening restricted to range(B): columns of W map the reduced problem back.
    wfac = q[:, keep] / np.sqrt(w[keep])
    ared = wfac.conj().T @ am @ wfac
    ared = 0.5 * (ared + ared.conj().T)
    ev, u = np.linalg.eigh(ared)
    vecs = wfac @ u
    return HermitianEig(eigenvalues=ev[::-1].copy(), eigenvectors=vecs[:, ::-1].copy())
