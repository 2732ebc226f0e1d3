import math

import numpy as np
import pytest

from spingauss.errors import ValidationError
from spingauss.numerics import fidelity, hermitian_eig, trace_norm, unitary_exp

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)


def random_hermitian(rng, dim):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (a + a.conj().T) / 2


def random_density(rng, dim):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def test_eig_diagonal_input():
    w, v = hermitian_eig(np.diag([3.0, 1.0]).astype(complex))
    np.testing.assert_allclose(w, [1.0, 3.0])
    assert abs(abs(v[1, 0]) - 1.0) < 1e-14 and abs(abs(v[0, 1]) - 1.0) < 1e-14


def test_eig_pauli_x_spectrum():
    w, _ = hermitian_eig(SX)
    np.testing.assert_allclose(w, [-1.0, 1.0], atol=1e-14)


def test_eig_reconstruction_oracle():
    rng = np.random.default_rng(7)
    h = random_hermitian(rng, 5)
    w, v = hermitian_eig(h)
    recon = (v * w) @ v.conj().T
    assert np.linalg.norm(recon - h) <= 1e-10 * np.linalg.norm(h)
    assert np.abs(v.conj().T @ v - np.eye(5)).max() < 1e-10


def test_eig_rejects_non_hermitian_naming_entry():
    bad = np.array([[1.0, 2.0], [0.0, 1.0]], dtype=complex)
    with pytest.raises(ValidationError, match=r"\(0, 1\)|\(1, 0\)"):
        hermitian_eig(bad)


def test_unitary_exp_zero_is_identity():
    np.testing.assert_allclose(unitary_exp(np.zeros((3, 3))), np.eye(3), atol=1e-14)


def test_unitary_exp_matches_closed_form_2x2():
    # one-qubit rotation at u = (0.3, 0.4): angle 0.5, phase Arg(-0.4 + 0.3i)
    ux, uy = 0.3, 0.4
    got = unitary_exp(ux * SX + uy * SY)
    r = math.hypot(ux, uy)
    phi = math.atan2(ux, -uy)
    want = np.array(
        [
            [math.cos(r), -np.exp(-1j * phi) * math.sin(r)],
            [np.exp(1j * phi) * math.sin(r), math.cos(r)],
        ]
    )
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_unitary_exp_inverse_product_oracle():
    rng = np.random.default_rng(11)
    h = random_hermitian(rng, 6)
    prod = unitary_exp(h) @ unitary_exp(-h)
    assert np.abs(prod - np.eye(6)).max() < 1e-10


def test_unitary_exp_singular_values_near_one():
    rng = np.random.default_rng(3)
    for dim in (2, 17, 64):
        u = unitary_exp(random_hermitian(rng, dim))
        sv = np.linalg.svd(u, compute_uv=False)
        assert np.abs(sv - 1.0).max() < 1e-10


def test_trace_norm_diag():
    assert trace_norm(np.diag([1.0, -1.0])) == pytest.approx(2.0, abs=1e-14)


def test_trace_norm_zero_difference():
    rng = np.random.default_rng(5)
    m = random_density(rng, 4)
    assert trace_norm(m - m) == 0.0


def test_trace_norm_pure_state_closed_form():
    # oracle: two pure states with overlap c are at distance 2 sqrt(1 - |c|^2)
    rng = np.random.default_rng(13)
    for _ in range(20):
        a = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        c = np.vdot(a, b)
        got = trace_norm(np.outer(a, a.conj()) - np.outer(b, b.conj()))
        assert got == pytest.approx(2 * math.sqrt(1 - abs(c) ** 2), abs=1e-12)


def test_trace_norm_non_square_rejected():
    with pytest.raises(ValidationError):
        trace_norm(np.zeros((2, 3)))


def test_trace_norm_triangle_inequality():
    rng = np.random.default_rng(17)
    for _ in range(25):
        a = random_hermitian(rng, 5)
        b = random_hermitian(rng, 5)
        assert trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-10


def test_fidelity_self_is_one():
    rng = np.random.default_rng(19)
    rho = random_density(rng, 3)
    assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-10)


def test_fidelity_pure_states_overlap():
    rng = np.random.default_rng(23)
    a = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    b = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    a /= np.linalg.norm(a)
    b /= np.linalg.norm(b)
    f = fidelity(np.outer(a, a.conj()), np.outer(b, b.conj()))
    assert f == pytest.approx(abs(np.vdot(a, b)), abs=1e-10)


def test_fidelity_commuting_bhattacharyya_oracle():
    p = np.array([0.5, 0.3, 0.2])
    q = np.array([0.1, 0.2, 0.7])
    f = fidelity(np.diag(p).astype(complex), np.diag(q).astype(complex))
    assert f == pytest.approx(np.sum(np.sqrt(p * q)), abs=1e-12)


def test_fidelity_rejects_negative_eigenvalues():
    bad = np.diag([1.1, -0.1]).astype(complex)
    with pytest.raises(ValidationError):
        fidelity(bad, np.diag([0.5, 0.5]).astype(complex))


def test_fuchs_van_de_graaf_on_random_qubit_pairs():
    rng = np.random.default_rng(29)
    for _ in range(40):
        rho = random_density(rng, 2)
        sig = random_density(rng, 2)
        f = fidelity(rho, sig)
        half_tn = 0.5 * trace_norm(rho - sig)
        assert 1 - f <= half_tn + 1e-8
        assert half_tn <= math.sqrt(1 - f * f) + 1e-8
