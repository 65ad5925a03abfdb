"""n-qubit states, pure or mixed.

Basis index convention: the computational ket for bits ``(w_1, ..., w_n)``
sits at index ``sum_k w_k * 2**(k-1)``, i.e. qubit 1 is the least
significant bit (it is the last tensor factor).  Bit strings are always
written with qubit 1 leftmost.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .tensor_core import N_MAX, PAULIS, kron_all, qubit_count, random_unit_vectors

log = logging.getLogger(__name__)

NORM_TOL = 1e-12


def basis_index(bits) -> int:
    """Index of ``|w_1 ... w_n>``; accepts a sequence of ints or a bit string."""
    return sum(int(b) << k for k, b in enumerate(bits))


def index_bits(index: int, n: int) -> tuple[int, ...]:
    return tuple((index >> k) & 1 for k in range(n))


def ket(bits) -> np.ndarray:
    v = np.zeros(1 << len(bits), dtype=complex)
    v[basis_index(bits)] = 1.0
    return v


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A normalized pure state vector or a density matrix."""

    data: np.ndarray

    def __post_init__(self):
        d = np.array(self.data, dtype=complex)
        if d.ndim == 1:
            norm = np.vdot(d, d).real
            if abs(norm - 1) > NORM_TOL:
                raise InvalidInputError(f"state vector not normalized (norm^2={norm!r})")
        elif d.ndim == 2:
            if d.shape[0] != d.shape[1]:
                raise InvalidInputError(f"density matrix must be square, got {d.shape}")
            if np.max(np.abs(d - d.conj().T)) > NORM_TOL:
                raise InvalidInputError("density matrix is not Hermitian")
            if abs(np.trace(d).real - 1) > NORM_TOL:
                raise InvalidInputError(f"density matrix trace is {np.trace(d).real!r}")
            if np.linalg.eigvalsh(d)[0] < -1e-10:
                raise InvalidInputError("density matrix has a negative eigenvalue")
        else:
            raise InvalidInputError("state data must be a vector or a matrix")
        n = qubit_count(d.shape[0])
        if not 1 <= n <= N_MAX:
            raise InvalidInputError(f"{n} qubits outside [1, {N_MAX}]")
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    @classmethod
    def normalized(cls, data, warn_tol: float = 1e-6) -> "QuantumState":
        """Normalize first, logging a warning if the input was off by more than ``warn_tol``."""
        d = np.asarray(data, dtype=complex)
        scale = np.vdot(d, d).real if d.ndim == 1 else np.trace(d).real
        if scale <= 0:
            raise InvalidInputError("state has zero norm")
        if abs(scale - 1) > warn_tol:
            log.warning("state normalization off by %.3g; renormalizing", scale - 1)
        return cls(d / np.sqrt(scale) if d.ndim == 1 else d / scale)

    @property
    def n(self) -> int:
        return qubit_count(self.data.shape[0])

    @property
    def kind(self) -> str:
        return "pure" if self.data.ndim == 1 else "mixed"

    def density(self) -> np.ndarray:
        if self.data.ndim == 2:
            return self.data
        return np.outer(self.data, self.data.conj())

    def correlation_tensor(self) -> np.ndarray:
        """Full Pauli correlations ``T[i_1, ..., i_n] = Tr(rho s_{i_n} x ... x s_{i_1})``.

        Axis ``k - 1`` belongs to qubit ``k``; index 0, 1, 2 is x, y, z.
        """
        n = self.n
        r = self.density().reshape((2,) * (2 * n))
        # axes: rows (q_n..q_1) then cols (q_n..q_1); each step traces out the
        # leading qubit against the three Paulis and appends a new axis
        for m in range(n, 0, -1):
            r = np.tensordot(r, PAULIS, axes=([0, m], [2, 1]))
        return np.ascontiguousarray(r.real.transpose(range(n - 1, -1, -1)))


def random_pure_state(n: int, rng: np.random.Generator) -> QuantumState:
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return QuantumState(v / np.linalg.norm(v))


def random_mixed_state(n: int, rng: np.random.Generator, rank: int | None = None) -> QuantumState:
    dim = 1 << n
    rank = dim if rank is None else rank
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    rho = (rho + rho.conj().T) / 2
    return QuantumState(rho / np.trace(rho).real)


def random_product_state(n: int, rng: np.random.Generator) -> QuantumState:
    factors = []
    for u in random_unit_vectors(n, rng):
        # Bloch vector u <-> cos(t/2)|0> + e^{ip} sin(t/2)|1>
        theta, phi = np.arccos(np.clip(u[2], -1, 1)), np.arctan2(u[1], u[0])
        factors.append(np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])[:, None])
    v = kron_all(reversed(factors))[:, 0]
    return QuantumState(v / np.linalg.norm(v))
