import numpy as np
import pytest


def haar_unitary(n, rng):
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_hermitian(n, rng):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (a + a.conj().T)


def random_psd_gamma(n, rng):
    """Random positive semi-definite gamma, trace-normalized."""
    b = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    g = b.conj().T @ b
    return g / np.trace(g).real


def random_state_matrix(d_a, d_b, rng):
    m = rng.standard_normal((d_a, d_b)) + 1j * rng.standard_normal((d_a, d_b))
    return m / np.linalg.norm(m)


def random_snr_vectors(d_a, d_b, r, rng):
    """Unnormalized weak rank-r decomposition: rows are x_k / y_k."""
    x = rng.standard_normal((r, d_a)) + 1j * rng.standard_normal((r, d_a))
    y = rng.standard_normal((r, d_b)) + 1j * rng.standard_normal((r, d_b))
    return x, y


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
