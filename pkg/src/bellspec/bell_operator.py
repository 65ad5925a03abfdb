"""Two-observable-per-qubit Bell operators.

A Bell operator is ``sum_s beta(s) A_n(s_n) x ... x A_1(s_1)`` where
``A_k(0)`` and ``A_k(1)`` are spin observables of qubit ``k``.  Qubit 1 is
the *last* tensor factor (and so the least significant bit of a basis
index); qubit ``n`` is the first.  Coefficient tables are arrays of shape
``(2,) * n`` whose axis ``k - 1`` is the setting bit of qubit ``k``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .tensor_core import N_MAX, kron, pauli_unchecked

TWO_PI = 2 * np.pi
PLANAR_TOL = 1e-12

_DEFAULT_AXES = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


def _reduce_angle(a: float) -> float:
    r = float(np.mod(a, TWO_PI))
    return 0.0 if r == TWO_PI else r


@dataclass(frozen=True, eq=False)
class MeasurementFrame:
    """The ``2n`` measurement directions, given as planar angles.

    ``alpha[k]`` and ``alpha_prime[k]`` are the angles of qubit ``k + 1``'s
    two settings inside that qubit's measurement plane.  ``axes``, if given,
    has shape ``(n, 2, 3)`` and holds an orthonormal pair ``(x_k, y_k)``
    spanning each plane; the default is the Bloch-sphere ``(x, y)`` plane.
    """

    alpha: tuple
    alpha_prime: tuple
    axes: np.ndarray | None = None

    def __post_init__(self):
        alpha = tuple(_reduce_angle(a) for a in self.alpha)
        alpha_prime = tuple(_reduce_angle(a) for a in self.alpha_prime)
        if len(alpha) != len(alpha_prime) or not alpha:
            raise InvalidInputError("alpha and alpha_prime must be non-empty and of equal length")
        if len(alpha) > N_MAX:
            raise InvalidInputError(f"frame has {len(alpha)} qubits, cap is {N_MAX}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "alpha_prime", alpha_prime)
        if self.axes is not None:
            axes = np.array(self.axes, dtype=float)
            if axes.shape != (len(alpha), 2, 3):
                raise InvalidInputError(f"axes must have shape ({len(alpha)}, 2, 3), got {axes.shape}")
            for k, (x, y) in enumerate(axes):
                gram = np.array([[x @ x, x @ y], [y @ x, y @ y]])
                if np.max(np.abs(gram - np.eye(2))) > 1e-12:
                    raise InvalidInputError(f"axes of qubit {k + 1} are not an orthonormal pair")
            axes.setflags(write=False)
            object.__setattr__(self, "axes", axes)

    @property
    def n(self) -> int:
        return len(self.alpha)

    @classmethod
    def from_directions(cls, directions) -> "MeasurementFrame":
        """Frame whose settings are the given ``(n, 2, 3)`` unit vectors.

        Each qubit's plane is spanned by its two directions: ``x_k`` is the
        first direction, so ``alpha_k = 0``.  Parallel pairs get an arbitrary
        perpendicular ``y_k``.
        """
        d = np.asarray(directions, dtype=float)
        axes = np.empty((d.shape[0], 2, 3))
        alpha_prime = []
        for k, (a, b) in enumerate(d):
            x = a / np.linalg.norm(a)
            b = b / np.linalg.norm(b)
            y = b - (b @ x) * x
            if np.linalg.norm(y) < 1e-8:
                trial = np.eye(3)[np.argmin(np.abs(x))]
                y = trial - (trial @ x) * x
            # second pass restores orthogonality lost to cancellation
            y = y / np.linalg.norm(y)
            y = y - (y @ x) * x
            y = y / np.linalg.norm(y)
            axes[k] = x, y
            alpha_prime.append(np.arctan2(b @ y, b @ x))
        return cls(alpha=(0.0,) * len(d), alpha_prime=tuple(alpha_prime), axes=axes)

    def frame_axes(self) -> np.ndarray:
        if self.axes is None:
            return np.broadcast_to(_DEFAULT_AXES, (self.n, 2, 3))
        return self.axes

    def angles(self) -> np.ndarray:
        """Array of shape ``(n, 2)``: ``[alpha_k, alpha_k']`` per qubit."""
        return np.column_stack([self.alpha, self.alpha_prime])

    def directions(self) -> np.ndarray:
        """Unit vectors of shape ``(n, 2, 3)``; ``[k, s]`` is setting ``s`` of qubit ``k + 1``."""
        ang = self.angles()
        ax = self.frame_axes()
        return np.cos(ang)[..., None] * ax[:, None, 0, :] + np.sin(ang)[..., None] * ax[:, None, 1, :]

    def planar_angles(self) -> np.ndarray:
        """Angles of all directions in the Bloch ``(x, y)`` plane.

        Raises if any direction leaves that plane; the message names the
        first offending qubit.
        """
        if self.axes is None:
            return self.angles()
        d = self.directions()
        for k in range(self.n):
            if np.max(np.abs(d[k, :, 2])) > PLANAR_TOL:
                raise InvalidInputError(
                    f"qubit {k + 1}: measurement directions leave the (x, y) plane; "
                    "the closed-form spectrum only covers planar frames"
                )
        return np.arctan2(d[..., 1], d[..., 0])

    def is_planar(self) -> bool:
        try:
            self.planar_angles()
        except InvalidInputError:
            return False
        return True

    def swapped(self) -> "MeasurementFrame":
        """Frame with every ``a_k`` exchanged with ``a_k'``."""
        return MeasurementFrame(self.alpha_prime, self.alpha, self.axes)

    def observables(self) -> list[list[np.ndarray]]:
        """``obs[k][s]`` is the 2x2 observable of qubit ``k + 1``, setting ``s``."""
        d = self.directions()
        return [[pauli_unchecked(d[k, s]) for s in (0, 1)] for k in range(self.n)]

    def to_dict(self) -> dict:
        out = {"alpha": list(self.alpha), "alpha_prime": list(self.alpha_prime)}
        if self.axes is not None:
            out["axes"] = self.axes.tolist()
        return out


def random_planar_frame(n: int, rng: np.random.Generator) -> MeasurementFrame:
    a = rng.uniform(0, TWO_PI, size=(2, n))
    return MeasurementFrame(tuple(a[0]), tuple(a[1]))


@dataclass(frozen=True, eq=False)
class BellCoefficients:
    """Real coefficient table ``beta(s)``, ``s`` in ``{0,1}^n``."""

    beta: np.ndarray

    def __post_init__(self):
        b = np.array(self.beta, dtype=float)
        if b.ndim == 1 and b.size > 2:
            n = b.size.bit_length() - 1
            if 1 << n != b.size:
                raise InvalidInputError(f"table has {b.size} entries, not a power of two")
            b = b.reshape((2,) * n)
        if b.ndim == 0 or b.shape != (2,) * b.ndim:
            raise InvalidInputError(f"coefficient table must have shape (2,)*n, got {b.shape}")
        if b.ndim > N_MAX:
            raise InvalidInputError(f"table has {b.ndim} qubits, cap is {N_MAX}")
        if not np.any(b):
            raise InvalidInputError("coefficient table is identically zero")
        b.setflags(write=False)
        object.__setattr__(self, "beta", b)

    @property
    def n(self) -> int:
        return self.beta.ndim

    @classmethod
    def from_bitstrings(cls, table: dict, n: int) -> "BellCoefficients":
        """Build from ``{"s1 s2 ... sn": value}``; qubit 1 is the leftmost bit."""
        b = np.zeros((2,) * n)
        for bits, value in table.items():
            if len(bits) != n or set(bits) - {"0", "1"}:
                raise InvalidInputError(f"bad bitstring {bits!r} for n={n}")
            b[tuple(int(c) for c in bits)] = float(value)
        return cls(b)

    def to_bitstrings(self) -> dict:
        return {"".join(map(str, s)): float(self.beta[s]) for s in np.ndindex(self.beta.shape) if self.beta[s] != 0}

    def __eq__(self, other):
        return isinstance(other, BellCoefficients) and np.array_equal(self.beta, other.beta)


def prime(c: BellCoefficients) -> BellCoefficients:
    """Coefficients of the operator with all ``a_k`` and ``a_k'`` exchanged.

    ``beta'(s) = beta(complement of s)``; an involution.
    """
    return BellCoefficients(c.beta[(slice(None, None, -1),) * c.n])


CHSH = np.array([[0.5, 0.5], [0.5, -0.5]])


def mk_coefficients(n: int) -> BellCoefficients:
    """Mermin-Klyshko coefficient table, built by the coefficient-level recursion."""
    if n < 2:
        raise InvalidInputError(f"Mermin-Klyshko operators need n >= 2, got {n}")
    if n > N_MAX:
        raise InvalidInputError(f"n={n} exceeds cap {N_MAX}")
    b = CHSH
    for _ in range(3, n + 1):
        bp = b[(slice(None, None, -1),) * b.ndim]
        b = np.stack([0.5 * (b + bp), 0.5 * (b - bp)], axis=-1)
    return BellCoefficients(b)


def canonical_mk_frame(n: int) -> MeasurementFrame:
    """``alpha_k = 0``, ``alpha_k' = pi/2``: the maximally violating MK settings.

    The returned frame is checked to give ``|f| = 2**((n-1)/2)`` on the
    all-zeros configuration.
    """
    if n < 2:
        raise InvalidInputError(f"n must be >= 2, got {n}")
    frame = MeasurementFrame((0.0,) * n, (np.pi / 2,) * n)
    from .spectral import f_omega

    f = f_omega(BellOperator(mk_coefficients(n), frame), (0,) * n)
    if abs(abs(f) - 2 ** ((n - 1) / 2)) > 1e-9 * 2 ** (n / 2):
        raise AssertionError(f"canonical frame gives |f|={abs(f)}, expected {2 ** ((n - 1) / 2)}")
    return frame


def polynomial_matrix(beta: np.ndarray, observables) -> np.ndarray:
    """``sum_s beta[s] obs[n-1][s_n] x ... x obs[0][s_1]``."""
    n = beta.ndim
    if n == 1:
        return beta[0] * observables[0][0] + beta[1] * observables[0][1]
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    for s in (0, 1):
        sub = beta[..., s]
        if np.any(sub):
            out += kron(observables[n - 1][s], polynomial_matrix(sub, observables[: n - 1]))
    return out


@dataclass(frozen=True, eq=False)
class BellOperator:
    coefficients: BellCoefficients
    frame: MeasurementFrame
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __post_init__(self):
        if self.coefficients.n != self.frame.n:
            raise InvalidInputError(
                f"coefficient table has n={self.coefficients.n}, frame has n={self.frame.n}"
            )

    @property
    def n(self) -> int:
        return self.frame.n

    @property
    def matrix(self) -> np.ndarray:
        cached = self.__dict__.get("_matrix")
        if cached is None:
            with self._lock:
                cached = self.__dict__.get("_matrix")
                if cached is None:
                    cached = polynomial_matrix(self.coefficients.beta, self.frame.observables())
                    cached.setflags(write=False)
                    self.__dict__["_matrix"] = cached
        return cached

    def primed(self) -> "BellOperator":
        return BellOperator(prime(self.coefficients), self.frame)


def build_matrix(op: BellOperator) -> np.ndarray:
    return op.matrix


def mk_operator(frame: MeasurementFrame) -> BellOperator:
    return BellOperator(mk_coefficients(frame.n), frame)


def mk_matrix_recursive(frame: MeasurementFrame) -> tuple[np.ndarray, np.ndarray]:
    """``(B_n, B_n')`` from the matrix-level Mermin-Klyshko recursion.

    Starts from ``B_1 = sigma_{a_1}``, ``B_1' = sigma_{a_1'}``; independent of
    the coefficient-table route.
    """
    obs = frame.observables()
    b, bp = obs[0][0], obs[0][1]
    for k in range(1, frame.n):
        a, ap = obs[k]
        b, bp = (
            0.5 * kron(a + ap, b) + 0.5 * kron(a - ap, bp),
            0.5 * kron(ap + a, bp) + 0.5 * kron(ap - a, b),
        )
    return b, bp


def product_state_spot_check(op: BellOperator, samples: int, rng: np.random.Generator) -> float:
    """Largest ``|<B>|`` over random product states.

    A cheap sanity probe of the normalization ``<B> <= 1`` on product
    states; it is not a proof.
    """
    from .states import random_product_state
    from .tensor_core import expectation

    m = op.matrix
    return max(abs(expectation(m, random_product_state(op.n, rng))) for _ in range(samples))
