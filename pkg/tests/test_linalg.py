import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nmqec.codes import four_qubit_code
from nmqec.errors import NegativeEigenvalue, NotHermitian
from nmqec.linalg import (
    hermitian_eig,
    inv_sqrt_on_support,
    kron,
    partial_isometry,
    polar_unitary,
    psd_sqrt,
    support_projector,
)
from nmqec.noise import ad_kraus, ad_noise
from nmqec.channel import to_choi
from nmqec.recovery import noise_image

from tests.helpers import random_hermitian, random_psd

SZ = np.diag([1.0, -1.0])
SX = np.array([[0, 1], [1, 0]], dtype=complex)
seeds = st.integers(0, 2**32 - 1)


def test_kron_examples():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(kron(SZ, SZ), np.diag([1, -1, -1, 1]).astype(complex))
    e1 = ad_kraus(0.5).ops[0]
    assert kron(e1, e1)[3, 3] == pytest.approx(0.5, abs=1e-15)


@given(seeds)
def test_kron_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3)) for _ in range(3))
    assert np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c)))) <= 1e-14


def test_hermitian_eig_examples():
    w, _ = hermitian_eig(SX)
    np.testing.assert_allclose(w, [1, -1], atol=1e-14)
    w, v = hermitian_eig(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(w, [3, 2, 1])
    np.testing.assert_allclose(np.abs(v), np.eye(3)[:, [0, 2, 1]])


def test_hermitian_eig_ad_choi():
    # trace-2 Choi of AD(0.36): 1 + (1 - gamma), gamma, 0, 0
    w, _ = hermitian_eig(to_choi(ad_kraus(0.36)))
    np.testing.assert_allclose(w, [1.64, 0.36, 0, 0], atol=1e-12)


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 64))
def test_hermitian_eig_reconstructs(seed, dim):
    h = random_hermitian(np.random.default_rng(seed), dim)
    w, v = hermitian_eig(h)
    assert np.all(np.diff(w) <= 0)
    assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - h)) <= 1e-10 * np.max(np.abs(h))


def test_inv_sqrt_examples():
    np.testing.assert_allclose(inv_sqrt_on_support(np.eye(4)), np.eye(4))
    np.testing.assert_allclose(inv_sqrt_on_support(np.diag([4.0, 0.0])), np.diag([0.5, 0.0]))
    with pytest.raises(NegativeEigenvalue):
        inv_sqrt_on_support(np.diag([1.0, -0.5]))


def test_inv_sqrt_on_rank_deficient_noise_image():
    code = four_qubit_code()
    ep = noise_image(code, ad_noise(1.0, 4))
    x = inv_sqrt_on_support(ep)
    w = np.linalg.eigvalsh(ep)
    rank = int(np.sum(w > 1e-12 * w.max()))
    assert np.linalg.matrix_rank(x, tol=1e-9) == rank
    np.testing.assert_allclose(x @ ep @ x, support_projector(ep), atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 8), st.integers(0, 7))
def test_inv_sqrt_squared_times_h_is_support_projector(seed, dim, drop):
    rank = max(1, dim - drop)
    h = random_psd(np.random.default_rng(seed), dim, rank)
    x = inv_sqrt_on_support(h)
    assert np.max(np.abs(x @ x @ h - support_projector(h))) <= 1e-8


def test_polar_examples():
    rng = np.random.default_rng(3)
    u, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    np.testing.assert_allclose(polar_unitary(u), u, atol=1e-12)
    np.testing.assert_allclose(polar_unitary(np.diag([2.0, 3.0])), np.eye(2), atol=1e-14)
    e2 = ad_kraus(0.5).ops[1]
    u = polar_unitary(e2)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(u @ psd_sqrt(e2.conj().T @ e2), e2, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 10))
def test_polar_unitary_properties(seed, dim):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    u = polar_unitary(a)
    assert np.max(np.abs(u.conj().T @ u - np.eye(dim))) <= 1e-10
    assert np.max(np.abs(u @ psd_sqrt(a.conj().T @ a) - a)) <= 1e-10 * max(1, np.max(np.abs(a))) * dim


def test_partial_isometry_vanishes_on_kernel():
    a = np.array([[1.0, 0.0], [0.0, 0.0]])
    np.testing.assert_allclose(partial_isometry(a), a)
