import numpy as np
import pytest

from snwitness.bipartite import (
    PureState,
    apply_local,
    schmidt_decompose,
    schmidt_rank,
    tmsv_pure,
    tmsv_truncation_deficit,
)
from snwitness.errors import BadParameter, DimensionMismatch, ZeroState

from conftest import haar_unitary, random_state_matrix


def bell_state():
    return PureState(np.diag([1.0, 1.0]) / np.sqrt(2))


def test_state_requires_normalization():
    with pytest.raises(BadParameter):
        PureState(np.eye(2))


def test_normalized_factory_rejects_zero():
    with pytest.raises(ZeroState):
        PureState.normalized(np.zeros((2, 2)))


def test_schmidt_bell():
    sd = schmidt_decompose(bell_state())
    assert sd.rank == 2
    assert np.allclose(sd.coefficients, [1 / np.sqrt(2)] * 2)


def test_schmidt_product_state(rng):
    u = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    u /= np.linalg.norm(u)
    v /= np.linalg.norm(v)
    sd = schmidt_decompose(PureState(np.outer(u, v)))
    assert sd.rank == 1
    assert np.isclose(sd.coefficients[0], 1.0, atol=1e-12)


def test_schmidt_tmsv_geometric():
    eps = 1 / 3
    psi = tmsv_pure(eps, 0.0, cutoff=20)
    sd = schmidt_decompose(psi)
    assert sd.rank == 21
    ratios = sd.coefficients[1:] / sd.coefficients[:-1]
    assert np.all(np.abs(ratios - eps) < 1e-12)


def test_schmidt_rank_examples():
    assert schmidt_rank(bell_state()) == 2
    m = np.zeros((2, 2))
    m[0, 0] = 1.0
    assert schmidt_rank(PureState(m)) == 1
    m = np.zeros((4, 4))
    for k in range(3):
        m[k, k] = 1 / np.sqrt(3)
    assert schmidt_rank(PureState(m)) == 3


def test_schmidt_reconstruction_roundtrip(rng):
    for d_a, d_b in [(2, 2), (3, 5), (6, 4)]:
        psi = PureState(random_state_matrix(d_a, d_b, rng))
        sd = schmidt_decompose(psi)
        rec = sd.reconstruct()
        assert np.linalg.norm(rec.coeffs - psi.coeffs) < 1e-10
        assert abs(np.sum(sd.coefficients**2) - 1.0) < 1e-10


def test_tmsv_single_term():
    psi = tmsv_pure(1 / 3, 0.0, cutoff=0)
    assert psi.coeffs.shape == (1, 1)
    assert np.isclose(psi.coeffs[0, 0], 1.0)


def test_tmsv_amplitude_ratios():
    psi = tmsv_pure(1 / 3, 0.0, cutoff=100)
    diag = np.diagonal(psi.coeffs)
    ratios = diag[1:] / diag[:-1]
    assert np.all(np.abs(ratios - 1 / 3) < 1e-12)
    # off-diagonal amplitudes vanish
    off = psi.coeffs - np.diag(diag)
    assert np.all(np.abs(off) == 0.0)


def test_tmsv_phase_convention():
    phase = 0.7
    psi = tmsv_pure(0.5, phase, cutoff=5)
    diag = np.diagonal(psi.coeffs)
    for k in range(6):
        assert np.isclose(np.angle(diag[k] / diag[0]), (phase * k + np.pi) % (2 * np.pi) - np.pi,
                          atol=1e-12)


def test_tmsv_prenormalization_norm():
    eps, cutoff = 1 / 3, 5
    amps = np.sqrt(1 - eps**2) * eps ** np.arange(cutoff + 1)
    # independent finite geometric sum of the unnormalized squared amplitudes
    direct = float(np.sum(amps**2))
    assert np.isclose(direct, 1 - eps ** (2 * (cutoff + 1)), atol=1e-15)
    assert np.isclose(tmsv_truncation_deficit(eps, cutoff), eps ** (2 * (cutoff + 1)))


def test_tmsv_rejects_bad_epsilon():
    with pytest.raises(BadParameter):
        tmsv_pure(0.0, 0.0, 3)
    with pytest.raises(BadParameter):
        tmsv_pure(1.0, 0.0, 3)


def test_apply_local_identity():
    psi = bell_state()
    out = apply_local(psi, np.eye(2), np.eye(2))
    assert np.allclose(out.coeffs, psi.coeffs)


def test_apply_local_unitary_preserves_coefficients(rng):
    psi = bell_state()
    s = np.diag([1.0, np.exp(1j * 0.3)])
    out = apply_local(psi, s, np.eye(2))
    sd = schmidt_decompose(out)
    assert np.allclose(sd.coefficients, [1 / np.sqrt(2)] * 2, atol=1e-10)

    for _ in range(20):
        psi = PureState(random_state_matrix(4, 4, rng))
        u, v = haar_unitary(4, rng), haar_unitary(4, rng)
        before = schmidt_decompose(psi).coefficients
        after = schmidt_decompose(apply_local(psi, u, v)).coefficients
        assert len(before) == len(after)
        assert np.all(np.abs(before - after) <= 1e-10)


def test_apply_local_invertible_preserves_rank(rng):
    # explicit rank-3 state on a 4x4 space
    w = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    m = np.zeros((4, 4), dtype=complex)
    m[:3, :3] = np.diag(w)
    psi = PureState.normalized(m)
    assert schmidt_rank(psi) == 3
    for _ in range(10):
        s = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)) + 2 * np.eye(4)
        t = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)) + 2 * np.eye(4)
        assert schmidt_rank(apply_local(psi, s, t)) == 3


def test_apply_local_rejects_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        apply_local(bell_state(), np.eye(3), np.eye(2))


def test_apply_local_zero_image():
    with pytest.raises(ZeroState):
        apply_local(bell_state(), np.zeros((2, 2)), np.eye(2))


def test_json_roundtrip(rng):
    psi = PureState(random_state_matrix(3, 4, rng))
    again = PureState.from_json(psi.to_json())
    assert np.allclose(again.coeffs, psi.coeffs)
