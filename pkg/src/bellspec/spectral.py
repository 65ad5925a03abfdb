"""Closed-form eigensystem of planar two-observable Bell operators.

For measurement directions in each qubit's (x, y) plane the eigenvectors
are the GHZ-type states ``(e^{i theta}|W> + |~W>)/sqrt 2`` indexed by bit
configurations ``W`` (``~W`` is the complement).  Eigenvalue and phase
follow from one complex number per configuration, obtained by replacing
``sigma_{a_k}`` with ``exp(+i alpha_k)`` when ``w_k = 0`` and with
``exp(-i alpha_k)`` when ``w_k = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .bell_operator import BellOperator, MeasurementFrame
from .errors import InvalidInputError
from .states import basis_index
from .tensor_core import IDENTITY, SIGMA_X, SIGMA_Z, cluster_projectors, kron_all

TWO_PI = 2 * np.pi
SEAM_TOL = 1e-12


def _label(label, n: int | None = None) -> tuple[int, ...]:
    if isinstance(label, str):
        label = tuple(int(c) for c in label)
    label = tuple(int(b) for b in label)
    if set(label) - {0, 1}:
        raise InvalidInputError(f"configuration {label} is not a bit string")
    if n is not None and len(label) != n:
        raise InvalidInputError(f"configuration {label} has length {len(label)}, expected {n}")
    return label


def complement(label) -> tuple[int, ...]:
    return tuple(1 - b for b in _label(label))


def _phase_tables(frame: MeasurementFrame) -> np.ndarray:
    """``E[k, w, s] = exp(i (-1)^w alpha_k(s))``."""
    ang = frame.planar_angles()
    return np.exp(1j * np.stack([ang, -ang], axis=1))


def _contract(beta: np.ndarray, mats) -> np.ndarray:
    # mats[k] acts on axis k; the last axis is contracted first and each new
    # axis is put in front, so the output keeps qubit order
    out = beta.astype(complex)
    for k in range(beta.ndim - 1, -1, -1):
        out = np.tensordot(mats[k], out, axes=([1], [out.ndim - 1]))
    return out


def f_omega(op: BellOperator, label) -> complex:
    """The complex number whose modulus and phase give the configuration's eigenpair."""
    w = _label(label, op.n)
    e = _phase_tables(op.frame)
    vecs = [e[k, w[k]][None, :] for k in range(op.n)]
    return complex(_contract(op.coefficients.beta, vecs).reshape(()))


def f_all(op: BellOperator) -> np.ndarray:
    """``f`` for every configuration at once, as an array of shape ``(2,) * n``."""
    return _contract(op.coefficients.beta, list(_phase_tables(op.frame)))


def theta_lambda(f: complex) -> tuple[float, float]:
    """Phase ``theta`` in ``[0, pi)`` and real eigenvalue with ``e^{i theta} f = lambda``.

    ``arg f`` in ``[0, pi)`` gives ``lambda = -|f|``, ``arg f`` in ``[pi, 2 pi)``
    gives ``lambda = +|f|``.  For real ``f`` that rule lands on ``theta = pi``;
    there ``theta`` is folded to 0 and the sign of ``lambda`` flips, so real
    ``f`` always yields ``(0, f)``.
    """
    f = complex(f)
    mod = abs(f)
    if mod == 0.0:
        return 0.0, 0.0
    arg = float(np.mod(np.angle(f), TWO_PI))
    if abs(arg - np.pi) < SEAM_TOL:
        arg = np.pi
    elif arg < SEAM_TOL or TWO_PI - arg < SEAM_TOL:
        arg = 0.0
    if arg < np.pi:
        theta, lam = -arg - np.pi, -mod
    else:
        theta, lam = -arg, mod
    theta = float(np.mod(theta, TWO_PI))
    if theta >= np.pi - SEAM_TOL:
        theta, lam = 0.0, -lam
    return theta, lam


def ghz_vector(label, theta: float) -> np.ndarray:
    """``(e^{i theta}|W> + |~W>) / sqrt 2``."""
    w = _label(label)
    v = np.zeros(1 << len(w), dtype=complex)
    v[basis_index(w)] = np.exp(1j * theta)
    v[basis_index(complement(w))] += 1.0
    return v / np.sqrt(2)


@dataclass(frozen=True)
class GhzEigenpair:
    label: tuple
    theta: float
    lam: float
    f: complex

    @property
    def vector(self) -> np.ndarray:
        return ghz_vector(self.label, self.theta)

    @property
    def bits(self) -> str:
        return "".join(map(str, self.label))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    operator: BellOperator
    pairs: tuple

    def eigenvalues(self) -> np.ndarray:
        """All ``2**n`` eigenvalues, sorted descending."""
        return np.sort([p.lam for p in self.pairs])[::-1]

    def vectors(self) -> np.ndarray:
        """Eigenvectors as columns, in the order of :attr:`pairs`."""
        return np.column_stack([p.vector for p in self.pairs])

    def by_label(self, label) -> GhzEigenpair:
        w = _label(label, self.operator.n)
        for p in self.pairs:
            if p.label == w:
                return p
        raise KeyError(w)

    def reconstruct(self) -> np.ndarray:
        v = self.vectors()
        lam = np.array([p.lam for p in self.pairs])
        return (v * lam) @ v.conj().T

    def projectors(self, gap: float = 1e-8):
        return cluster_projectors([p.lam for p in self.pairs], self.vectors(), gap=gap)

    def residuals(self) -> np.ndarray:
        m = self.operator.matrix
        return np.array([np.linalg.norm(m @ p.vector - p.lam * p.vector) for p in self.pairs])


def full_spectrum(op: BellOperator) -> SpectralDecomposition:
    """All ``2**n`` GHZ eigenpairs of a planar Bell operator.

    Phases are chosen for the configurations with ``w_1 = 0``; each
    complement is derived from its partner with ``theta -> pi - theta`` and
    ``lambda -> -lambda``, which keeps the pair orthogonal even when
    ``theta = 0``.
    """
    n = op.n
    f = f_all(op)
    pairs = []
    for rest in product((0, 1), repeat=n - 1):
        w = (0,) + rest
        wbar = complement(w)
        theta, lam = theta_lambda(f[w])
        pairs.append(GhzEigenpair(w, theta, lam, complex(f[w])))
        pairs.append(GhzEigenpair(wbar, np.pi - theta, -lam, complex(f[wbar])))
    pairs.sort(key=lambda p: basis_index(p.label))
    return SpectralDecomposition(op, tuple(pairs))


def reflection_operator(n: int, k: int) -> np.ndarray:
    """``sigma_z`` on qubit ``k`` (1-based), identity elsewhere."""
    if not 1 <= k <= n:
        raise InvalidInputError(f"qubit index {k} outside 1..{n}")
    return kron_all(SIGMA_Z if q == k else IDENTITY for q in range(n, 0, -1))


def flip_operator(label) -> np.ndarray:
    """``sigma_x`` on every qubit ``k`` with ``w_k = 1``; maps ``|W>`` to ``|0...0>``."""
    w = _label(label)
    n = len(w)
    return kron_all(SIGMA_X if w[q - 1] else IDENTITY for q in range(n, 0, -1))


def reflected_frame(frame: MeasurementFrame, label) -> MeasurementFrame:
    """Frame seen after conjugating by :func:`flip_operator`: ``alpha -> -alpha`` on flipped qubits."""
    w = _label(label, frame.n)
    ang = frame.planar_angles()
    sign = np.where(np.array(w) == 1, -1.0, 1.0)
    return MeasurementFrame(tuple(sign * ang[:, 0]), tuple(sign * ang[:, 1]))
