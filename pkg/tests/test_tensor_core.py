import threading

import numpy as np
import pytest

from bellspec.errors import CapacityError, InvalidInputError
from bellspec.tensor_core import (
    IDENTITY,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    cluster_projectors,
    expectation,
    hermitian_eig,
    is_hermitian,
    kron,
    kron_all,
    pauli,
    qubit_count,
    random_hermitian,
    random_unit_vectors,
)


def test_pauli_axes():
    assert np.array_equal(pauli([1, 0, 0]), SIGMA_X)
    assert np.array_equal(pauli([0, 1, 0]), SIGMA_Y)
    assert np.array_equal(pauli([0, 0, 1]), SIGMA_Z)


def test_pauli_diagonal_direction():
    v = np.array([1.0, 1.0, 0.0]) / np.sqrt(2)
    expected = (SIGMA_X + SIGMA_Y) / np.sqrt(2)
    assert np.allclose(pauli(v), expected, atol=1e-15)


@pytest.mark.parametrize("bad", [[1, 1, 0], [0, 0, 0], [1, 0]])
def test_pauli_rejects_non_unit(bad):
    with pytest.raises(InvalidInputError):
        pauli(bad)


def test_pauli_algebra():
    assert np.allclose(SIGMA_X @ SIGMA_Y, 1j * SIGMA_Z)
    for s in (SIGMA_X, SIGMA_Y, SIGMA_Z):
        assert np.allclose(s @ s, IDENTITY)


def test_kron_bit_flip():
    ket00 = np.array([1, 0, 0, 0])
    assert np.array_equal(kron(SIGMA_X, SIGMA_X) @ ket00, [0, 0, 0, 1])


def test_kron_first_factor_is_most_significant():
    # sigma_z on the first factor only flips the sign of the upper half
    m = kron(SIGMA_Z, IDENTITY)
    assert np.array_equal(np.diag(m).real, [1, 1, -1, -1])


def test_kron_capacity():
    with pytest.raises(CapacityError):
        kron_all([IDENTITY] * 4, n_max=3)
    assert kron_all([IDENTITY] * 3, n_max=3).shape == (8, 8)


def test_qubit_count():
    assert qubit_count(1) == 0
    assert qubit_count(64) == 6
    with pytest.raises(InvalidInputError):
        qubit_count(6)


def test_hermitian_eig_descending_and_exact(rng):
    m = random_hermitian(8, rng)
    w, v = hermitian_eig(m)
    assert np.all(np.diff(w) <= 0)
    assert np.allclose(m @ v, v * w, atol=1e-12)
    assert np.allclose(w, np.sort(np.linalg.eigvalsh(m))[::-1])


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(InvalidInputError):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_cluster_projectors_degenerate():
    w, v = hermitian_eig(np.diag([2.0, 1.0, 1.0, -1.0]).astype(complex))
    clusters = cluster_projectors(w, v)
    assert [round(c[0], 12) for c in clusters] == [2.0, 1.0, -1.0]
    assert np.allclose(clusters[1][1], np.diag([0, 1, 1, 0]))
    assert np.allclose(sum(c[1] for c in clusters), np.eye(4))


def test_expectation_pure_and_mixed_agree(rng):
    m = random_hermitian(4, rng)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi /= np.linalg.norm(psi)
    assert expectation(m, psi) == pytest.approx(expectation(m, np.outer(psi, psi.conj())), abs=1e-12)


def test_expectation_errors():
    with pytest.raises(InvalidInputError):
        expectation(np.eye(4), np.ones(2) / np.sqrt(2))
    with pytest.raises(InvalidInputError):
        expectation(np.array([[0, 1], [0, 0]]), np.array([1, 1j]) / np.sqrt(2))


def test_is_hermitian():
    assert is_hermitian(SIGMA_Y)
    assert not is_hermitian(np.ones((2, 3)))


def test_random_unit_vectors(rng):
    v = random_unit_vectors(500, rng)
    assert np.allclose(np.linalg.norm(v, axis=1), 1)
    # roughly isotropic
    assert np.all(np.abs(v.mean(axis=0)) < 0.15)


def test_hermitian_eig_threadsafe(rng):
    m = random_hermitian(16, rng)
    ref = hermitian_eig(m)[0]
    out = []
    threads = [threading.Thread(target=lambda: out.append(hermitian_eig(m)[0])) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(np.array_equal(ref, o) for o in out)
