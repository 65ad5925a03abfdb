"""Operator identities and eigenvalue structure of Mermin-Klyshko operators.

The closed forms are written in terms of the per-qubit wedge operators
``(a_k x a_k') . sigma``: ``B_n^2`` is the sum over all products of an even
number of wedges, ``[B_n, B_n']`` is ``2i`` times the sum over odd numbers.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .bell_operator import MeasurementFrame, mk_operator
from .errors import GuardedDenominator, InvalidInputError, UndefinedValueError
from .spectral import f_all
from .tensor_core import IDENTITY, hermitian_eig, kron_all, pauli_unchecked

log = logging.getLogger(__name__)


def wedge_operators(frame: MeasurementFrame) -> list[np.ndarray]:
    """``(a_k x a_k') . sigma`` for each qubit, in qubit order.

    Hermitian, with norm ``|sin|`` of the angle between the two settings.
    """
    d = frame.directions()
    return [pauli_unchecked(np.cross(d[k, 0], d[k, 1])) for k in range(frame.n)]


def _wedge_subset_sum(frame: MeasurementFrame, parity: int) -> np.ndarray:
    n = frame.n
    wedges = wedge_operators(frame)
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    for size in range(parity, n + 1, 2):
        for subset in combinations(range(1, n + 1), size):
            chosen = set(subset)
            out += kron_all(wedges[q - 1] if q in chosen else IDENTITY for q in range(n, 0, -1))
    return out


def bn_squared_closed(frame: MeasurementFrame) -> np.ndarray:
    """``B_n^2`` (equal to ``B_n'^2``) as the even-wedge-product sum."""
    if frame.n < 2:
        raise InvalidInputError("need n >= 2")
    return _wedge_subset_sum(frame, 0)


def commutator_closed(frame: MeasurementFrame) -> np.ndarray:
    """``[B_n, B_n']`` as ``2i`` times the odd-wedge-product sum."""
    if frame.n < 2:
        raise InvalidInputError("need n >= 2")
    return 2j * _wedge_subset_sum(frame, 1)


def anticommutator_value(frame: MeasurementFrame) -> float:
    """Scalar ``c`` with ``{B_n, B_n'} = c * 1``, namely ``2 prod_k a_k . a_k'``."""
    if frame.n < 2:
        raise InvalidInputError("need n >= 2")
    d = frame.directions()
    return float(2 * np.prod(np.einsum("ki,ki->k", d[:, 0], d[:, 1])))


def trace_b2(n: int, frame: MeasurementFrame | None = None, tol: float = 1e-8) -> float:
    """``Tr(B_n^2)`` computed from the operator matrix; asserts it equals ``2**n``."""
    if n < 2:
        raise InvalidInputError("need n >= 2")
    if frame is None:
        frame = MeasurementFrame((0.0,) * n, (np.pi / 2,) * n)
    if frame.n != n:
        raise InvalidInputError(f"frame has n={frame.n}, expected {n}")
    m = mk_operator(frame).matrix
    # Tr(B^2) = sum |B_ij|^2 for Hermitian B
    value = float(np.sum(np.abs(m) ** 2))
    if abs(value - 2**n) > tol * 2**n:
        raise AssertionError(f"Tr(B_{n}^2) = {value}, expected {2**n}")
    return value


@dataclass(frozen=True, eq=False)
class EigenvalueProfile:
    n: int
    lambdas: np.ndarray

    @classmethod
    def from_frame(cls, frame: MeasurementFrame, closed_form: bool = True) -> "EigenvalueProfile":
        """Eigenvalues of ``B_n`` at ``frame``, from the closed form or from ``eigh``."""
        if closed_form:
            # |f| is shared by a configuration and its complement; the first
            # half of the flat array (w_1 = 0) holds one of each pair
            f = np.abs(f_all(mk_operator(frame))).ravel()
            lam = np.sort(np.concatenate([f[: len(f) // 2], -f[: len(f) // 2]]))[::-1]
        else:
            lam, _ = hermitian_eig(mk_operator(frame).matrix)
        return cls(frame.n, np.asarray(lam))

    @property
    def mu(self) -> np.ndarray:
        return self.lambdas / 2 ** (self.n / 2 - 1)

    @property
    def threshold(self) -> float:
        return 2 ** (self.n / 2 - 1)

    def positive_half_square_sum(self) -> float:
        return float(np.sum(self.lambdas[: len(self.lambdas) // 2] ** 2))

    def reflection_residual(self) -> float:
        return float(np.max(np.abs(self.lambdas + self.lambdas[::-1])))


@dataclass(frozen=True)
class DegeneracyReport:
    lambda1: float
    lambda2: float
    threshold: float
    applicable: bool
    holds: bool


def degeneracy_check(profile: EigenvalueProfile, tol: float = 1e-9) -> DegeneracyReport:
    """If the top eigenvalue beats ``2**(n/2-1)``, it is simple and the runner-up is below that level."""
    l1, l2 = float(profile.lambdas[0]), float(profile.lambdas[1])
    thr = profile.threshold
    applicable = l1 > thr + tol
    holds = (l1 - l2 > tol and l2 < thr) if applicable else True
    return DegeneracyReport(l1, l2, thr, applicable, holds)


def p_bar(profile: EigenvalueProfile, tol: float = 1e-12) -> float:
    """Minimal top-eigenvector weight ``(1 - mu_2) / (mu_1 - mu_2)`` needed to beat ``2**(n/2-1)``."""
    mu = profile.mu
    if mu[0] - mu[1] <= tol:
        raise UndefinedValueError("p_bar undefined: top eigenvalue is degenerate")
    value = float((1 - mu[1]) / (mu[0] - mu[1]))
    if profile.lambdas[0] > profile.threshold + 1e-9 and not 0.5 < value <= 1 + 1e-12:
        raise AssertionError(f"p_bar={value} outside (1/2, 1]")
    return value


MERMIN3_LABELS = ((0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1))


def mermin3_constraint(frame: MeasurementFrame, guard: float = 1e-6) -> tuple[float, float]:
    """Both sides of the three-qubit eigenvalue constraint.

    ``lambda_1..lambda_4`` belong to configurations 000, 001, 010, 011 (qubit
    1 leftmost), not to magnitude order.  Raises :class:`GuardedDenominator`
    when ``|lambda_3^2 + lambda_2^2 - 2| < guard``.
    """
    if frame.n != 3:
        raise InvalidInputError(f"constraint is for three qubits, frame has {frame.n}")
    f = f_all(mk_operator(frame))
    l1, l2, l3, l4 = (abs(f[w]) ** 2 for w in MERMIN3_LABELS)
    den = l3 + l2 - 2
    if abs(den) < guard:
        log.debug("mermin3 constraint skipped: denominator %.3g", den)
        raise GuardedDenominator(f"denominator {den:.3g} below guard {guard}")
    lhs = (l3 + l1 - 2) * (l3 + l4 - 2) / den
    a1, a1p = frame.planar_angles()[0]
    rhs = 2 * np.sin(a1 - a1p) ** 2
    return float(lhs), float(rhs)
