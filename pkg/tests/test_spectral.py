import numpy as np
import pytest

from bellspec.bell_operator import BellCoefficients, BellOperator, MeasurementFrame, mk_operator, random_planar_frame
from bellspec.errors import InvalidInputError
from bellspec.spectral import (
    complement,
    f_all,
    f_omega,
    flip_operator,
    full_spectrum,
    ghz_vector,
    reflected_frame,
    reflection_operator,
    theta_lambda,
)
from bellspec.states import basis_index, index_bits
from bellspec.tensor_core import cluster_projectors, hermitian_eig


def random_operator(n, rng):
    return BellOperator(BellCoefficients(rng.normal(size=(2,) * n)), random_planar_frame(n, rng))


@pytest.mark.parametrize(
    "f, theta, lam",
    [
        (1.0, 0.0, 1.0),
        (2.5, 0.0, 2.5),
        (-1.0, 0.0, -1.0),
        (1j, np.pi / 2, -1.0),
        (-1j, np.pi / 2, 1.0),
        (0.0, 0.0, 0.0),
    ],
)
def test_theta_lambda_cases(f, theta, lam):
    t, l = theta_lambda(f)
    assert t == pytest.approx(theta, abs=1e-15)
    assert l == pytest.approx(lam, abs=1e-15)


def test_theta_lambda_identity(rng):
    for f in rng.normal(size=50) + 1j * rng.normal(size=50):
        t, l = theta_lambda(f)
        assert 0 <= t < np.pi
        assert np.exp(1j * t) * f == pytest.approx(l, abs=1e-13)


def test_complement():
    assert complement((0, 1, 1)) == (1, 0, 0)
    assert complement("10") == (0, 1)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_f_is_the_flip_matrix_element(n, rng):
    # sigma_alpha maps |0> to e^{i alpha}|1> and |1> to e^{-i alpha}|0>, so
    # <complement W|B|W> collects exactly the phase products
    op = random_operator(n, rng)
    m = op.matrix
    for idx in range(1 << n):
        w = index_bits(idx, n)
        assert f_omega(op, w) == pytest.approx(m[basis_index(complement(w)), idx], abs=1e-12)
    assert np.allclose(f_all(op)[(0,) * n], f_omega(op, (0,) * n))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_full_spectrum_eigenpairs(n, rng):
    op = random_operator(n, rng)
    spec = full_spectrum(op)
    assert np.max(spec.residuals()) < 1e-12
    v = spec.vectors()
    assert np.allclose(v.conj().T @ v, np.eye(1 << n), atol=1e-12)
    assert np.allclose(spec.reconstruct(), op.matrix, atol=1e-12)
    w, vecs = hermitian_eig(op.matrix)
    assert np.allclose(spec.eigenvalues(), w, atol=1e-12)
    for (a, p), (b, q) in zip(spec.projectors(1e-6), cluster_projectors(w, vecs, 1e-6)):
        assert a == pytest.approx(b, abs=1e-12)
        assert np.allclose(p, q, atol=1e-10)


def test_complement_pairs(rng):
    spec = full_spectrum(random_operator(3, rng))
    for p in spec.pairs:
        if p.label[0] == 0:
            q = spec.by_label(complement(p.label))
            assert q.lam == pytest.approx(-p.lam)
            assert q.theta == pytest.approx(np.pi - p.theta)


def test_seam_keeps_pair_orthogonal():
    # real f puts theta at the seam; both vectors of the pair must differ
    frame = MeasurementFrame((0.0, 0.0), (np.pi / 2, np.pi / 2))
    spec = full_spectrum(mk_operator(frame))
    v = spec.vectors()
    assert np.allclose(v.conj().T @ v, np.eye(4), atol=1e-12)


def test_chsh_spectrum():
    frame = MeasurementFrame((0.0, np.pi / 4), (np.pi / 2, -np.pi / 4))
    lam = full_spectrum(mk_operator(frame)).eigenvalues()
    assert np.allclose(lam, [np.sqrt(2), 0, 0, -np.sqrt(2)], atol=1e-12)


def test_non_planar_rejected():
    axes = np.array([[[1, 0, 0], [0, 0, 1]], [[1, 0, 0], [0, 1, 0]]], dtype=float)
    op = mk_operator(MeasurementFrame((0.0, 0.0), (1.0, 1.0), axes=axes))
    with pytest.raises(InvalidInputError, match="qubit 1"):
        full_spectrum(op)


def test_ghz_vector():
    v = ghz_vector("01", 0.0)
    assert v[basis_index("01")] == pytest.approx(1 / np.sqrt(2))
    assert v[basis_index("10")] == pytest.approx(1 / np.sqrt(2))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_reflection_symmetries(n, rng):
    b = random_operator(n, rng).matrix
    for k in range(1, n + 1):
        u = reflection_operator(n, k)
        assert np.allclose(u @ b @ u, -b, atol=1e-10)
        for l in range(k + 1, n + 1):
            v = reflection_operator(n, l)
            assert np.allclose(u @ v @ b @ v @ u, b, atol=1e-10)
    w, _ = hermitian_eig(b)
    assert np.allclose(w, -w[::-1], atol=1e-9)


def test_reflection_operator_range():
    with pytest.raises(InvalidInputError):
        reflection_operator(3, 4)


def test_flip_reduces_to_all_zero(rng):
    n = 3
    c = BellCoefficients(rng.normal(size=(2,) * n))
    frame = random_planar_frame(n, rng)
    w = (1, 0, 1)
    x = flip_operator(w)
    assert np.allclose(x @ np.eye(8)[:, basis_index(w)], np.eye(8)[:, 0])
    lhs = x @ BellOperator(c, frame).matrix @ x
    assert np.allclose(lhs, BellOperator(c, reflected_frame(frame, w)).matrix, atol=1e-12)
    # so f_W of the original equals f_0 of the reflected frame
    assert f_omega(BellOperator(c, frame), w) == pytest.approx(
        f_omega(BellOperator(c, reflected_frame(frame, w)), (0, 0, 0)), abs=1e-12
    )
