"""Maximal Bell-operator expectations for given states.

Three quantities are optimized here, all by multi-start Nelder-Mead over
angle parametrizations of the local measurement settings:

* ``S`` (``optimize_expectation``): max of ``<B>`` over both directions of
  every qubit, 2 spherical angles each (``4n`` parameters).
* ``S+`` / ``S-`` (``bound_upper`` / ``bound_lower``): three-qubit bounds built
  from four correlations in per-qubit orthonormal frames (3 angles per qubit).

Every search is seeded from ``SeedSequence(seed, spawn_key=(task, restart))``
so a result depends only on the base seed and its task id, never on thread
scheduling.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from ._fallback import plane_frames, spherical_pairs
from ._parallel import pmap
from .bell_operator import BellCoefficients, BellOperator, MeasurementFrame, mk_coefficients
from .errors import InvalidInputError
from .states import QuantumState, basis_index

log = logging.getLogger(__name__)

QUARTER_PI = np.pi / 4
PHI_TOL = 1e-12
THRESHOLD_DELTA = 1e-7
BISECT_WIDTH = 1e-5
VERIFIED_N = (3, 4, 5)


def default_restarts(n: int) -> int:
    if n <= 3:
        return 64
    return {4: 32, 5: 16}.get(n, 8)


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int | None = None
    seed: int = 0
    xatol: float = 1e-8
    maxiter: int = 2000
    polish: int = 6

    def __post_init__(self):
        if self.restarts is not None and self.restarts < 0:
            raise InvalidInputError("restarts must be >= 0")
        if self.seed < 0:
            raise InvalidInputError("seed must be a non-negative integer")
        if not self.xatol > 0:
            raise InvalidInputError("xatol must be positive")

    def restarts_for(self, n: int) -> int:
        return default_restarts(n) if self.restarts is None else self.restarts


@dataclass(frozen=True, eq=False)
class ViolationResult:
    value: float
    achieving_frame: MeasurementFrame
    restarts_used: int
    converged: bool
    params: np.ndarray = field(repr=False)


# -- the phi family and the closed-form curves ------------------------------


def _check_phi(phi: float) -> float:
    phi = float(phi)
    if not -PHI_TOL <= phi <= QUARTER_PI + PHI_TOL:
        raise InvalidInputError(f"phi={phi} outside [0, pi/4]")
    return min(max(phi, 0.0), QUARTER_PI)


@dataclass(frozen=True)
class PhiFamilyState:
    n: int
    phi: float

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError("n must be >= 1")
        object.__setattr__(self, "phi", _check_phi(self.phi))

    def state(self) -> QuantumState:
        v = np.zeros(1 << self.n, dtype=complex)
        v[0] = np.cos(self.phi)
        v[-1] = np.sin(self.phi)
        return QuantumState(v)


def psi_family(n: int, phi: float) -> QuantumState:
    """``cos(phi)|0...0> + sin(phi)|1...1>`` with ``0 <= phi <= pi/4``."""
    return PhiFamilyState(n, phi).state()


def s2_exact(phi: float) -> float:
    return float(np.sqrt(1 + np.sin(2 * phi) ** 2))


def f_branch(n: int, phi: float) -> float:
    """Weight of ``<0...0|B|0...0>`` in the expectation: 1 for even n, cos 2phi for odd n."""
    return 1.0 if n % 2 == 0 else float(np.cos(2 * phi))


def s_guess(n: int, phi: float) -> float:
    if n < 3:
        raise InvalidInputError("the guess is defined for n >= 3")
    phi = _check_phi(phi)
    return max(2 ** ((n - 1) / 2) * np.sin(2 * phi), f_branch(n, phi))


def guess_threshold(n: int) -> float:
    """phi at which the GHZ-like branch of the guess reaches 1."""
    return 0.5 * np.arcsin(2 ** (-(n - 1) / 2))


@dataclass(frozen=True)
class PhiMatrixElements:
    b00: float
    b11: float
    b10: complex


def phi_matrix_elements(op: BellOperator) -> PhiMatrixElements:
    """``<0|B|0>``, ``<1|B|1>`` and ``<1|B|0>`` on the all-zero / all-one kets."""
    m = op.matrix
    return PhiMatrixElements(float(m[0, 0].real), float(m[-1, -1].real), complex(m[-1, 0]))


def phi_decomposition(op: BellOperator, phi: float) -> float:
    """``<B>`` on the phi family written as ``f_n <0|B|0> + sin 2phi Re<1|B|0>``.

    Holds whenever ``<1|B|1> = (-1)^n <0|B|0>``, true for the Mermin-Klyshko family.
    """
    e = phi_matrix_elements(op)
    return f_branch(op.n, phi) * e.b00 + np.sin(2 * phi) * e.b10.real


# -- multistart driver -------------------------------------------------------


def _random_starts(mode: int, n: int, count: int, seed: int, task: int) -> np.ndarray:
    per = 4 * n if mode == _backend.MODES["expectation"] else 3 * n
    out = np.empty((count, per))
    for r in range(count):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(task, r)))
        if mode == _backend.MODES["expectation"]:
            # uniform directions on the sphere, (theta, phi) per setting
            cos_t = rng.uniform(-1.0, 1.0, 2 * n)
            az = rng.uniform(0.0, 2 * np.pi, 2 * n)
            out[r] = np.column_stack([np.arccos(cos_t), az]).ravel()
        else:
            cos_t = rng.uniform(-1.0, 1.0, n)
            az = rng.uniform(0.0, 2 * np.pi, n)
            psi = rng.uniform(0.0, 2 * np.pi, n)
            out[r] = np.column_stack([np.arccos(cos_t), az, psi]).ravel()
    return out


def _search(mode: int, T: np.ndarray, beta, n: int, starts: np.ndarray, config: OptimizerConfig, parallel: bool):
    def run(chunk):
        return _backend.multistart(mode, chunk, T, beta, n, config.xatol, config.maxiter, True)

    if parallel and len(starts) > 1:
        chunks = np.array_split(starts, min(len(starts), 64))
        parts = pmap(lambda c: run(np.ascontiguousarray(c)), [c for c in chunks if len(c)])
        values = np.concatenate([p[0] for p in parts])
        xs = np.concatenate([p[1] for p in parts])
        conv = np.concatenate([p[4] for p in parts])
    else:
        values, xs, _, _, conv = run(starts)
    # first index wins on exact ties, so a longer start list never lowers the result
    best = int(np.argmax(values))
    value, x, ok = float(values[best]), xs[best].copy(), bool(conv[best])
    # restart from the best vertex; the start is kept in the new simplex, so
    # the value cannot drop, and a search that ran out of iterations gets more
    for _ in range(config.polish):
        v2, x2, _, _, c2 = _backend.multistart(mode, x[None, :], T, beta, n, config.xatol, config.maxiter, True)
        gain = float(v2[0]) - value
        if gain >= 0:
            value, x = float(v2[0]), x2[0].copy()
        ok = bool(c2[0])
        if ok and gain <= 1e-13:
            break
    return value, x, ok


def _optimize(mode, T, beta, n, config, task, warm_starts, parallel):
    count = config.restarts_for(n)
    starts = _random_starts(mode, n, count, config.seed, task)
    if warm_starts is not None and len(warm_starts):
        starts = np.vstack([starts, np.asarray(warm_starts, dtype=float).reshape(len(warm_starts), -1)])
    if len(starts) == 0:
        raise InvalidInputError("no restarts and no warm starts given")
    starts = np.ascontiguousarray(starts)
    value, x, ok = _search(mode, T, beta, n, starts, config, parallel)
    if not ok:
        log.debug("best local search stopped at the iteration limit (value %.12g)", value)
    return value, x, ok, len(starts)


def _coefficients(n: int, family) -> BellCoefficients:
    if family is None or (isinstance(family, str) and family.lower() == "mk"):
        return mk_coefficients(n)
    if isinstance(family, BellCoefficients):
        if family.n != n:
            raise InvalidInputError(f"coefficients act on {family.n} qubits, state has {n}")
        return family
    raise InvalidInputError(f"unknown operator family {family!r}")


def optimize_expectation(
    state: QuantumState,
    family: BellCoefficients | str | None = None,
    config: OptimizerConfig | None = None,
    *,
    task: int = 0,
    warm_starts=None,
    parallel: bool = True,
) -> ViolationResult:
    """Maximize ``<B>`` over all measurement directions (4 angles per qubit).

    ``family`` is ``"mk"`` / ``None`` for the Mermin-Klyshko table or an
    explicit :class:`BellCoefficients`.  The returned value is attained by
    ``achieving_frame``, so it is a certified lower bound on the true maximum.
    """
    config = config or OptimizerConfig()
    n = state.n
    if n < 2:
        raise InvalidInputError("need at least two qubits")
    beta = np.ascontiguousarray(_coefficients(n, family).beta.ravel())
    T = np.ascontiguousarray(state.correlation_tensor().ravel())
    mode = _backend.MODES["expectation"]
    value, x, ok, used = _optimize(mode, T, beta, n, config, task, warm_starts, parallel)
    frame = MeasurementFrame.from_directions(spherical_pairs(x, n))
    return ViolationResult(value, frame, used, ok, x)


def expectation_at(state: QuantumState, params, family=None) -> float:
    """Objective of :func:`optimize_expectation` at raw angle parameters."""
    n = state.n
    beta = np.ascontiguousarray(_coefficients(n, family).beta.ravel())
    T = np.ascontiguousarray(state.correlation_tensor().ravel())
    return float(_backend.objective(0, np.ascontiguousarray(params, dtype=float), T, beta, n))


# -- the phi sweep -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SweepPoint:
    phi: float
    s_n: float
    s_guess: float
    converged: bool
    params: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class SweepResult:
    n: int
    points: list
    threshold: float | None
    max_deviation: float
    phi_max_deviation: float
    status: str

    def rows(self) -> list[tuple[float, float, float, bool]]:
        return [(p.phi, p.s_n, p.s_guess, p.converged) for p in self.points]


def default_grid(size: int = 200) -> np.ndarray:
    if size < 2:
        raise InvalidInputError("grid needs at least two points")
    return np.linspace(0.0, QUARTER_PI, size)


def _refine(n, states, points, config, max_passes):
    # warm-start every point from its neighbours' optimal angles until stable
    cfg = OptimizerConfig(restarts=0, seed=config.seed, xatol=config.xatol, maxiter=config.maxiter, polish=config.polish)
    for _ in range(max_passes):
        snapshot = list(points)

        def improve(i):
            nbrs = [snapshot[j].params for j in (i - 1, i + 1) if 0 <= j < len(snapshot)]
            return optimize_expectation(states[i], None, cfg, warm_starts=nbrs, parallel=False)

        trial = pmap(improve, range(len(points)))
        changed = False
        for i, res in enumerate(trial):
            if res.value > points[i].s_n + 1e-12:
                p = points[i]
                points[i] = SweepPoint(p.phi, res.value, p.s_guess, res.converged, res.params)
                changed = True
        if not changed:
            break
    return points


def _bisect_threshold(n, points, config, task0):
    above = [p.s_n > 1 + THRESHOLD_DELTA for p in points]
    cross = next((i for i in range(1, len(points)) if above[i] and not above[i - 1]), None)
    if cross is None:
        return None
    lo, hi = points[cross - 1], points[cross]
    lo_phi, hi_phi = lo.phi, hi.phi
    warm = [lo.params, hi.params]
    step = 0
    while hi_phi - lo_phi > BISECT_WIDTH:
        mid = 0.5 * (lo_phi + hi_phi)
        res = optimize_expectation(psi_family(n, mid), None, config, task=task0 + step, warm_starts=warm)
        if res.value > 1 + THRESHOLD_DELTA:
            hi_phi = mid
        else:
            lo_phi = mid
        warm = warm + [res.params]
        step += 1
    return 0.5 * (lo_phi + hi_phi)


def sweep_phi(n: int, phi_grid=None, config: OptimizerConfig | None = None, max_passes: int = 8) -> SweepResult:
    """Optimized ``S_n(phi)`` and the guess on a grid, plus threshold and largest excess.

    The threshold is the bisected point where ``S_n`` first exceeds 1 (by
    ``THRESHOLD_DELTA``); ``None`` when the grid contains no crossing.
    """
    if n < 3:
        raise InvalidInputError("sweeps need n >= 3; use s2_exact for two qubits")
    config = config or OptimizerConfig()
    grid = default_grid() if phi_grid is None else np.asarray(phi_grid, dtype=float)
    grid = np.array([_check_phi(p) for p in grid])
    states = [psi_family(n, p) for p in grid]

    def first(i):
        return optimize_expectation(states[i], None, config, task=i, parallel=False)

    results = pmap(first, range(len(grid)))
    points = [SweepPoint(float(p), r.value, s_guess(n, p), r.converged, r.params) for p, r in zip(grid, results)]
    points = _refine(n, states, points, config, max_passes)
    threshold = _bisect_threshold(n, points, config, task0=len(grid))
    dev = np.array([p.s_n - p.s_guess for p in points])
    k = int(np.argmax(dev))
    status = "verified" if n in VERIFIED_N else "conjectured"
    return SweepResult(n, points, threshold, float(dev[k]), points[k].phi, status)


# -- three-qubit correlations and the S+/S- bounds ---------------------------


@dataclass(frozen=True)
class CorrelationTensor3:
    t_xxx: float
    t_xyy: float
    t_yxy: float
    t_yyx: float

    def __post_init__(self):
        for name in ("t_xxx", "t_xyy", "t_yxy", "t_yyx"):
            if abs(getattr(self, name)) > 1 + 1e-10:
                raise InvalidInputError(f"{name}={getattr(self, name)} outside [-1, 1]")

    def as_array(self) -> np.ndarray:
        return np.array([self.t_xxx, self.t_xyy, self.t_yxy, self.t_yyx])


def _frame_axes(frames) -> np.ndarray:
    if frames is None:
        return np.broadcast_to(np.array([[1.0, 0, 0], [0, 1.0, 0]]), (3, 2, 3))
    if isinstance(frames, MeasurementFrame):
        return frames.frame_axes()
    ax = np.asarray(frames, dtype=float)
    if ax.shape != (3, 2, 3):
        raise InvalidInputError(f"expected per-qubit (x, y) axes of shape (3, 2, 3), got {ax.shape}")
    return ax


def correlation_tensor(state: QuantumState, frames=None) -> CorrelationTensor3:
    """``t_xxx, t_xyy, t_yxy, t_yyx`` in per-qubit frames (default: Bloch x and y).

    ``frames`` is an ``(3, 2, 3)`` array of ``(x_k, y_k)`` unit vectors or a
    :class:`MeasurementFrame` whose plane axes are used.
    """
    if state.n != 3:
        raise InvalidInputError(f"correlation_tensor needs three qubits, got {state.n}")
    D = np.ascontiguousarray(_frame_axes(frames), dtype=float).ravel()
    T = np.ascontiguousarray(state.correlation_tensor().ravel())
    g = _backend.contract(T, D, 3)
    return CorrelationTensor3(float(g[0]), float(g[3]), float(g[5]), float(g[6]))


MU_SIGNS = np.array([[1, 1, 1, 1], [-1, 1, 1, -1], [-1, 1, -1, 1], [-1, -1, 1, 1]])


def mu_weights(lambdas) -> np.ndarray:
    """Weights on ``(t_xxx, t_xyy, t_yxy, t_yyx)`` for GHZ-pair eigenvalues on 000, 001, 010, 011.

    Labels list qubit 1 first; each pair is taken with zero phase.
    """
    lam = np.asarray(lambdas, dtype=float)
    if lam.shape != (4,):
        raise InvalidInputError("need four eigenvalue parameters")
    return 0.25 * MU_SIGNS @ lam


def mermin3_from_tensor(t: CorrelationTensor3, lambdas) -> float:
    return float(mu_weights(lambdas) @ t.as_array())


def max_cos_sin(a: float, b: float) -> float:
    """``max over chi of a cos(chi) + b sin(chi)``."""
    return float(np.hypot(a, b))


def _bound(state: QuantumState, mode_name: str, config, task):
    if state.n != 3:
        raise InvalidInputError(f"bounds need a three-qubit state, got {state.n}")
    config = config or OptimizerConfig()
    T = np.ascontiguousarray(state.correlation_tensor().ravel())
    value, x, ok, used = _optimize(_backend.MODES[mode_name], T, None, 3, config, task, None, True)
    frame = MeasurementFrame((0.0,) * 3, (np.pi / 2,) * 3, axes=plane_frames(x, 3))
    return ViolationResult(value, frame, used, ok, x)


def bound_upper(state: QuantumState, config: OptimizerConfig | None = None, *, task: int = 0) -> ViolationResult:
    """``S+``: max over per-qubit frames of ``sqrt(t_xxx^2 + t_xyy^2 + t_yxy^2 + t_yyx^2)``."""
    return _bound(state, "upper", config, task)


def bound_lower(state: QuantumState, config: OptimizerConfig | None = None, *, task: int = 0) -> ViolationResult:
    """``S-``: max over per-qubit frames of ``|t_xxx - t_xyy - t_yxy - t_yyx| / 2``."""
    return _bound(state, "lower", config, task)


# -- named states ------------------------------------------------------------


def _from_kets(terms: dict, n: int = 3) -> QuantumState:
    v = np.zeros(1 << n, dtype=complex)
    for bits, amp in terms.items():
        v[basis_index(bits)] += amp
    return QuantumState(v / np.linalg.norm(v))


def table1_states() -> dict[str, QuantumState]:
    """The four reference three-qubit states, normalized, keyed by builtin name."""
    c, s = np.cos(np.pi / 5), np.sin(np.pi / 5)
    w = {"011": 1 / np.sqrt(3), "101": 1 / np.sqrt(3), "110": 1 / np.sqrt(3)}
    w_mix = {"000": c, **{k: s * a for k, a in w.items()}}
    return {
        "w": _from_kets(w),
        "w-mix": _from_kets(w_mix),
        "asym": _from_kets({"000": c * c, "001": c, "111": s}),
        "biseparable": _from_kets({"000": 1.0, "011": 1.0}),
    }


def builtin_state(name: str) -> QuantumState:
    if name == "ghz3":
        return psi_family(3, QUARTER_PI)
    states = table1_states()
    if name not in states:
        raise InvalidInputError(f"unknown builtin state {name!r}; choose from {', '.join(BUILTIN_STATES)}")
    return states[name]


BUILTIN_STATES = ("ghz3", "w", "w-mix", "asym", "biseparable")


@dataclass(frozen=True)
class BoundsRow:
    state_name: str
    s_minus: float
    s_rho: float
    s_plus: float


def bounds_row(name: str, state: QuantumState, config: OptimizerConfig | None = None, task: int = 0) -> BoundsRow:
    """``S-``, ``S`` and ``S+`` for one state; each search gets its own task id."""
    config = config or OptimizerConfig()
    lo = bound_lower(state, config, task=3 * task)
    mid = optimize_expectation(state, None, config, task=3 * task + 1)
    hi = bound_upper(state, config, task=3 * task + 2)
    return BoundsRow(name, lo.value, mid.value, hi.value)
