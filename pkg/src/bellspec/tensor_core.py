"""Dense complex linear algebra for n-qubit systems.

Matrices and vectors are plain ``numpy`` arrays of ``complex128``.  The
numeric eigensolver here is the oracle that closed-form results are checked
against; closed-form code paths never call it.
"""

from __future__ import annotations

import numpy as np

from .errors import CapacityError, InvalidInputError, NumericError

N_MAX = 12
UNIT_TOL = 1e-12
HERMITIAN_TOL = 1e-10

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])


def unit_vector(direction, tol: float = UNIT_TOL) -> np.ndarray:
    """Return ``direction`` as a float array after checking it is unit-norm."""
    v = np.asarray(direction, dtype=float)
    if v.shape != (3,):
        raise InvalidInputError(f"direction must have 3 components, got shape {v.shape}")
    if abs(v @ v - 1.0) > tol:
        raise InvalidInputError(f"direction {v.tolist()} is not unit-norm (|v|^2={v @ v!r})")
    return v


def pauli(direction) -> np.ndarray:
    """Spin observable ``x*sx + y*sy + z*sz`` along a unit direction."""
    v = unit_vector(direction)
    return np.tensordot(v, PAULIS, axes=1)


def pauli_unchecked(direction) -> np.ndarray:
    return np.tensordot(np.asarray(direction, dtype=float), PAULIS, axes=1)


def qubit_count(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise InvalidInputError(f"dimension {dim} is not a power of two")
    return n


def kron(a, b, n_max: int = N_MAX) -> np.ndarray:
    """Kronecker product, refusing results larger than ``2**n_max``."""
    a = np.asarray(a)
    b = np.asarray(b)
    rows = a.shape[0] * b.shape[0]
    if rows > 1 << n_max:
        raise CapacityError(f"kron result of dimension {rows} exceeds 2**{n_max}")
    return np.kron(a, b)


def kron_all(factors, n_max: int = N_MAX) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = kron(out, f, n_max=n_max)
    return out


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T), initial=0.0) < tol


def hermitian_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and eigenvectors (columns) of a Hermitian matrix.

    Eigenvectors inside a degenerate cluster are an arbitrary orthonormal
    basis of the cluster, so comparisons against closed forms should go
    through :func:`cluster_projectors`.
    """
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m):
        raise InvalidInputError("hermitian_eig requires a Hermitian matrix (tol 1e-10)")
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        # LAPACK reports the failing off-diagonal count, not an iteration count.
        raise NumericError(f"eigh did not converge: {exc}", iterations=None) from exc
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def cluster_projectors(eigenvalues, eigenvectors, gap: float = 1e-8):
    """Group sorted eigenpairs into clusters and return ``(value, projector)`` pairs.

    ``eigenvectors`` holds one vector per column.  Consecutive eigenvalues
    closer than ``gap`` share a cluster; the reported value is the mean.
    """
    w = np.asarray(eigenvalues, dtype=float)
    v = np.asarray(eigenvectors)
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    clusters = []
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i - 1] - w[i] >= gap:
            block = v[:, start:i]
            clusters.append((float(np.mean(w[start:i])), block @ block.conj().T))
            start = i
    return clusters


def _as_state_data(state):
    return getattr(state, "data", state)


def expectation(m, state) -> float:
    """``<psi|M|psi>`` for a vector, ``Tr(M rho)`` for a density matrix.

    ``state`` may be a raw array or any object with a ``data`` attribute
    holding one (such as :class:`bellspec.states.QuantumState`).
    """
    m = np.asarray(m)
    data = np.asarray(_as_state_data(state))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"operator must be square, got shape {m.shape}")
    if data.shape[0] != m.shape[0] or (data.ndim == 2 and data.shape != m.shape):
        raise InvalidInputError(f"dimension mismatch: operator {m.shape}, state {data.shape}")
    if data.ndim == 1:
        value = np.vdot(data, m @ data)
    elif data.ndim == 2:
        value = np.trace(m @ data)
    else:
        raise InvalidInputError("state must be a vector or a square matrix")
    scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
    if abs(value.imag) > 1e-10 * scale:
        raise InvalidInputError(f"expectation has imaginary part {value.imag:.3e}; operator not Hermitian?")
    return float(value.real)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def random_unit_vectors(count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` directions uniformly distributed on the unit sphere."""
    v = rng.normal(size=(count, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)
