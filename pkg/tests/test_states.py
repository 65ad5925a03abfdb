import logging
from itertools import product

import numpy as np
import pytest

from bellspec.errors import InvalidInputError
from bellspec.states import (
    QuantumState,
    basis_index,
    index_bits,
    ket,
    random_mixed_state,
    random_product_state,
    random_pure_state,
)
from bellspec.tensor_core import PAULIS, expectation, kron_all


def brute_tensor(state):
    n = state.n
    T = np.empty((3,) * n)
    for idx in product(range(3), repeat=n):
        # idx[k] is the Pauli on qubit k+1, which is tensor factor n-k
        op = kron_all(PAULIS[idx[k]] for k in range(n - 1, -1, -1))
        T[idx] = expectation(op, state)
    return T


def test_basis_index_qubit_one_is_lsb():
    assert basis_index("100") == 1
    assert basis_index("001") == 4
    assert basis_index((1, 1, 0)) == 3
    assert index_bits(6, 3) == (0, 1, 1)
    assert ket("10")[1] == 1


def test_pure_state_validation():
    with pytest.raises(InvalidInputError):
        QuantumState(np.array([1.0, 1.0]))
    with pytest.raises(InvalidInputError):
        QuantumState(np.ones(3) / np.sqrt(3))


def test_mixed_state_validation():
    with pytest.raises(InvalidInputError):
        QuantumState(np.diag([0.5, 0.6]))
    with pytest.raises(InvalidInputError):
        QuantumState(np.diag([1.5, -0.5]))
    with pytest.raises(InvalidInputError):
        QuantumState(np.array([[0.5, 0.1], [0.2, 0.5]]))


def test_state_is_immutable():
    s = QuantumState(np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        s.data[0] = 0


def test_normalized_warns(caplog):
    with caplog.at_level(logging.WARNING, logger="bellspec.states"):
        s = QuantumState.normalized([1.0, 1.0])
    assert s.data[0] == pytest.approx(1 / np.sqrt(2))
    assert "renormalizing" in caplog.text


def test_normalized_silent_when_close(caplog):
    with caplog.at_level(logging.WARNING, logger="bellspec.states"):
        QuantumState.normalized([1.0 + 1e-9, 0.0])
    assert caplog.text == ""


@pytest.mark.parametrize("n", [1, 2, 3])
def test_correlation_tensor_matches_brute_force(n, rng):
    for s in (random_pure_state(n, rng), random_mixed_state(n, rng, rank=2)):
        assert np.allclose(s.correlation_tensor(), brute_tensor(s), atol=1e-12)


def test_ghz_correlations():
    v = np.zeros(8)
    v[0] = v[7] = 1 / np.sqrt(2)
    T = QuantumState(v).correlation_tensor()
    assert T[0, 0, 0] == pytest.approx(1)
    for idx in [(0, 1, 1), (1, 0, 1), (1, 1, 0)]:
        assert T[idx] == pytest.approx(-1)
    assert T[1, 1, 1] == pytest.approx(0)


def test_product_state_tensor_factorizes(rng):
    s = random_product_state(3, rng)
    T = s.correlation_tensor()
    # a product of unit Bloch vectors: rank one across every split, unit norm
    assert np.linalg.matrix_rank(T.reshape(3, 9), tol=1e-10) == 1
    assert np.linalg.matrix_rank(T.reshape(9, 3), tol=1e-10) == 1
    assert np.linalg.norm(T) == pytest.approx(1.0)


def test_density_of_pure(rng):
    s = random_pure_state(2, rng)
    rho = s.density()
    assert np.allclose(rho @ rho, rho)
    assert s.kind == "pure"
    assert QuantumState(rho).kind == "mixed"
