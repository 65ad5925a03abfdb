"""Randomized checks of operator identities, one named suite per identity.

Every suite draws ``trials`` random instances per qubit count and reports
the largest residual.  Trials whose check is undefined (a guarded
denominator, or a gap statement whose premise fails) are counted as skipped.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .bell_operator import BellCoefficients, BellOperator, MeasurementFrame, mk_operator, random_planar_frame
from .errors import GuardedDenominator, InvalidInputError
from .mk_identities import (
    EigenvalueProfile,
    anticommutator_value,
    bn_squared_closed,
    commutator_closed,
    degeneracy_check,
    mermin3_constraint,
)
from .spectral import full_spectrum, reflection_operator
from .tensor_core import hermitian_eig, random_unit_vectors


@dataclass(frozen=True)
class SuiteReport:
    identity_name: str
    n: int
    trials: int
    max_residual: float
    skipped: int
    verdict: str
    value: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["value"] is None:
            del d["value"]
        return d


def random_frame(n: int, rng: np.random.Generator) -> MeasurementFrame:
    """Frame with all ``2n`` directions uniform on the sphere."""
    return MeasurementFrame.from_directions(random_unit_vectors(2 * n, rng).reshape(n, 2, 3))


def _lemma_square(n, rng):
    op = mk_operator(random_frame(n, rng))
    b, bp = op.matrix, op.primed().matrix
    return float(np.max(np.abs(b @ b - bp @ bp))), None


def _closed_forms(n, rng):
    frame = random_frame(n, rng)
    b, bp = mk_operator(frame).matrix, mk_operator(frame).primed().matrix
    r1 = np.max(np.abs(b @ b - bn_squared_closed(frame)))
    r2 = np.max(np.abs(b @ bp - bp @ b - commutator_closed(frame)))
    return float(max(r1, r2)), None


def _anticommutator(n, rng):
    frame = random_frame(n, rng)
    b, bp = mk_operator(frame).matrix, mk_operator(frame).primed().matrix
    target = anticommutator_value(frame) * np.eye(1 << n)
    return float(np.max(np.abs(b @ bp + bp @ b - target))), None


def _trace(n, rng):
    b = mk_operator(random_frame(n, rng)).matrix
    value = float(np.trace(b @ b).real)
    return abs(value - 2**n), value


def _eq34(n, rng):
    profile = EigenvalueProfile.from_frame(random_planar_frame(n, rng))
    return abs(profile.positive_half_square_sum() - 2 ** (n - 1)), None


def _lemma5(n, rng):
    report = degeneracy_check(EigenvalueProfile.from_frame(random_planar_frame(n, rng)))
    if not report.applicable:
        raise GuardedDenominator("top eigenvalue below the gap level")
    if report.holds:
        return 0.0, None
    # a failed gap statement always fails the suite
    return 1.0 + max(report.lambda2 - report.threshold, 0.0), None


def _pbar(n, rng):
    profile = EigenvalueProfile.from_frame(random_planar_frame(n, rng))
    if not degeneracy_check(profile).applicable:
        raise GuardedDenominator("top eigenvalue below the gap level")
    mu = profile.mu
    p = float((1 - mu[1]) / (mu[0] - mu[1]))
    if p <= 0.5:
        return 1.0 + 0.5 - p, p
    return max(p - 1.0, 0.0), p


def _mermin3(n, rng):
    lhs, rhs = mermin3_constraint(random_planar_frame(3, rng))
    return abs(lhs - rhs), None


def _random_operator(n, rng) -> BellOperator:
    beta = rng.normal(size=(2,) * n)
    return BellOperator(BellCoefficients(beta), random_planar_frame(n, rng))


def _symmetry(n, rng):
    op = _random_operator(n, rng)
    b = op.matrix
    res = 0.0
    for k in range(1, n + 1):
        u = reflection_operator(n, k)
        res = max(res, np.max(np.abs(u @ b @ u + b)))
        for l in range(k + 1, n + 1):
            v = reflection_operator(n, l)
            res = max(res, np.max(np.abs(u @ v @ b @ v @ u - b)))
    lam = full_spectrum(op).eigenvalues()
    res = max(res, np.max(np.abs(lam + lam[::-1])))
    num, _ = hermitian_eig(b)
    res = max(res, np.max(np.abs(num + num[::-1])))
    return float(res), None


SUITES = {
    "lemma-square": (_lemma_square, 1e-8),
    "closed-forms": (_closed_forms, 1e-8),
    "anticommutator": (_anticommutator, 1e-8),
    "trace": (_trace, 1e-8),
    "eq34": (_eq34, 1e-8),
    "lemma5": (_lemma5, 1e-9),
    "pbar": (_pbar, 1e-12),
    "mermin3-constraint": (_mermin3, 1e-6),
    "symmetry": (_symmetry, 1e-9),
}


def suite_names() -> list[str]:
    return list(SUITES)


def run_suite(name: str, n: int, trials: int, seed: int = 0, tol: float | None = None) -> SuiteReport:
    """Run ``trials`` random checks of one identity at qubit count ``n``."""
    if name not in SUITES:
        raise InvalidInputError(f"unknown suite {name!r}; available: {', '.join(SUITES)}")
    if name == "mermin3-constraint" and n != 3:
        raise InvalidInputError("the mermin3-constraint suite is for n = 3")
    if n < 2:
        raise InvalidInputError("suites need n >= 2")
    if trials < 1:
        raise InvalidInputError("trials must be >= 1")
    check, default_tol = SUITES[name]
    tol = default_tol if tol is None else tol
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(n,)))
    worst, skipped, value = 0.0, 0, None
    for _ in range(trials):
        try:
            r, v = check(n, rng)
        except GuardedDenominator:
            skipped += 1
            continue
        worst = max(worst, r)
        if v is not None:
            value = v
    ok = worst <= tol
    return SuiteReport(name, n, trials, worst, skipped, "pass" if ok else "fail", value)

