import threading

import numpy as np
import pytest

from bellspec.bell_operator import (
    CHSH,
    BellCoefficients,
    BellOperator,
    MeasurementFrame,
    canonical_mk_frame,
    mk_coefficients,
    mk_matrix_recursive,
    mk_operator,
    prime,
    product_state_spot_check,
    random_planar_frame,
)
from bellspec.errors import InvalidInputError
from bellspec.tensor_core import SIGMA_X, SIGMA_Y, hermitian_eig, kron, pauli, random_unit_vectors


def test_frame_reduces_angles():
    f = MeasurementFrame((2 * np.pi + 0.5, -0.5), (0.0, 4 * np.pi))
    assert f.alpha == pytest.approx((0.5, 2 * np.pi - 0.5))
    assert f.alpha_prime == (0.0, 0.0)


def test_frame_validation():
    with pytest.raises(InvalidInputError):
        MeasurementFrame((0.0,), (0.0, 1.0))
    with pytest.raises(InvalidInputError):
        MeasurementFrame((), ())
    with pytest.raises(InvalidInputError):
        MeasurementFrame((0.0,), (0.0,), axes=[[[1, 0, 0], [1, 0, 0]]])


def test_planar_directions():
    f = MeasurementFrame((0.0, np.pi / 2), (np.pi / 2, np.pi))
    d = f.directions()
    assert np.allclose(d[0], [[1, 0, 0], [0, 1, 0]])
    assert np.allclose(d[1], [[0, 1, 0], [-1, 0, 0]])
    assert f.is_planar()


def test_non_planar_names_qubit():
    axes = np.array([[[1, 0, 0], [0, 1, 0]], [[1, 0, 0], [0, 0, 1]]], dtype=float)
    f = MeasurementFrame((0.0, 0.0), (0.0, np.pi / 2), axes=axes)
    assert not f.is_planar()
    with pytest.raises(InvalidInputError, match="qubit 2"):
        f.planar_angles()


def test_tilted_axes_inside_plane_stay_planar():
    c, s = np.cos(0.3), np.sin(0.3)
    axes = np.array([[[c, s, 0], [-s, c, 0]]])
    f = MeasurementFrame((0.1,), (0.7,), axes=axes)
    assert np.allclose(f.planar_angles(), [[0.4, 1.0]])


def test_from_directions_roundtrip(rng):
    d = random_unit_vectors(8, rng).reshape(4, 2, 3)
    f = MeasurementFrame.from_directions(d)
    assert np.allclose(f.directions(), d, atol=1e-12)


def test_from_directions_parallel_and_nearly_parallel():
    a = np.array([0.0, 0.6, 0.8])
    b = a + np.array([1e-9, 0, 0])
    b /= np.linalg.norm(b)
    f = MeasurementFrame.from_directions(np.array([[a, a], [a, b]]))
    assert np.allclose(f.directions(), [[a, a], [a, b]], atol=1e-12)


def test_coefficients_from_bitstrings_qubit_one_leftmost():
    c = BellCoefficients.from_bitstrings({"10": 1.0}, 2)
    assert c.beta[1, 0] == 1.0 and c.beta.sum() == 1.0
    frame = MeasurementFrame((0.0, 0.0), (np.pi / 2, np.pi / 2))
    m = BellOperator(c, frame).matrix
    # setting 1 on qubit 1 (last factor), setting 0 on qubit 2 (first factor)
    assert np.allclose(m, kron(SIGMA_X, SIGMA_Y))
    assert c.to_bitstrings() == {"10": 1.0}


def test_coefficients_validation():
    with pytest.raises(InvalidInputError):
        BellCoefficients(np.zeros((2, 2)))
    with pytest.raises(InvalidInputError):
        BellCoefficients(np.ones(6))
    with pytest.raises(InvalidInputError):
        BellCoefficients.from_bitstrings({"012": 1}, 3)
    assert BellCoefficients(np.arange(1, 9)).n == 3


def test_prime_is_complement_and_involution(rng):
    c = BellCoefficients(rng.normal(size=(2, 2, 2)))
    p = prime(c)
    assert p.beta[0, 1, 1] == c.beta[1, 0, 0]
    assert prime(p) == c


def test_mk2_is_chsh():
    assert np.array_equal(mk_coefficients(2).beta, CHSH)
    with pytest.raises(InvalidInputError):
        mk_coefficients(1)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_coefficient_recursion_matches_matrix_recursion(n, rng):
    for _ in range(3):
        frame = MeasurementFrame.from_directions(random_unit_vectors(2 * n, rng).reshape(n, 2, 3))
        b, bp = mk_matrix_recursive(frame)
        assert np.allclose(mk_operator(frame).matrix, b, atol=1e-12)
        assert np.allclose(mk_operator(frame).primed().matrix, bp, atol=1e-12)


def test_primed_equals_swapped_frame(rng):
    frame = random_planar_frame(3, rng)
    c = BellCoefficients(rng.normal(size=(2, 2, 2)))
    assert np.allclose(BellOperator(c, frame).primed().matrix, BellOperator(c, frame.swapped()).matrix)


def test_mk3_canonical_is_mermin():
    m = mk_operator(canonical_mk_frame(3)).matrix
    x, y = SIGMA_X, SIGMA_Y
    # settings a = x, a' = y on every qubit
    mermin = 0.5 * (kron(kron(y, x), x) + kron(kron(x, y), x) + kron(kron(x, x), y) - kron(kron(y, y), y))
    assert np.allclose(m, mermin)


def test_chsh_tsirelson():
    frame = MeasurementFrame((0.0, np.pi / 4), (np.pi / 2, -np.pi / 4))
    w, _ = hermitian_eig(mk_operator(frame).matrix)
    assert w[0] == pytest.approx(np.sqrt(2), abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_local_bound_on_product_states(n, rng):
    frame = MeasurementFrame.from_directions(random_unit_vectors(2 * n, rng).reshape(n, 2, 3))
    assert product_state_spot_check(mk_operator(frame), 200, rng) <= 1 + 1e-12


def test_operator_size_mismatch():
    with pytest.raises(InvalidInputError):
        BellOperator(mk_coefficients(3), MeasurementFrame((0.0,) * 2, (0.0,) * 2))


def test_matrix_cached_readonly_and_threadsafe(rng):
    op = mk_operator(random_planar_frame(6, rng))
    got = []
    threads = [threading.Thread(target=lambda: got.append(op.matrix)) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(g is got[0] for g in got)
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 1


def test_observables_are_spin_operators(rng):
    frame = random_planar_frame(2, rng)
    obs = frame.observables()
    d = frame.directions()
    assert np.allclose(obs[1][0], pauli(d[1, 0]))
