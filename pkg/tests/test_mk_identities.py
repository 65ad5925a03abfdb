import numpy as np
import pytest

from bellspec.bell_operator import MeasurementFrame, canonical_mk_frame, mk_matrix_recursive, mk_operator, random_planar_frame
from bellspec.errors import GuardedDenominator, InvalidInputError, UndefinedValueError
from bellspec.mk_identities import (
    EigenvalueProfile,
    anticommutator_value,
    bn_squared_closed,
    commutator_closed,
    degeneracy_check,
    mermin3_constraint,
    p_bar,
    trace_b2,
    wedge_operators,
)
from bellspec.tensor_core import random_unit_vectors


def general_frame(n, rng):
    return MeasurementFrame.from_directions(random_unit_vectors(2 * n, rng).reshape(n, 2, 3))


def test_wedge_norm(rng):
    frame = general_frame(2, rng)
    d = frame.directions()
    for k, w in enumerate(wedge_operators(frame)):
        sin = np.linalg.norm(np.cross(d[k, 0], d[k, 1]))
        assert np.allclose(w @ w, sin**2 * np.eye(2))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_closed_forms_against_matrix_recursion(n, rng):
    frame = general_frame(n, rng)
    b, bp = mk_matrix_recursive(frame)
    assert np.allclose(b @ b, bp @ bp, atol=1e-12)
    assert np.allclose(bn_squared_closed(frame), b @ b, atol=1e-12)
    assert np.allclose(commutator_closed(frame), b @ bp - bp @ b, atol=1e-12)
    assert np.allclose(b @ bp + bp @ b, anticommutator_value(frame) * np.eye(1 << n), atol=1e-12)


def test_anticommutator_vanishes_for_orthogonal_settings():
    assert anticommutator_value(canonical_mk_frame(3)) == pytest.approx(0, abs=1e-15)
    same = MeasurementFrame((0.3, 0.3), (0.3, 0.3))
    assert anticommutator_value(same) == pytest.approx(2)


def test_small_n_rejected():
    frame = MeasurementFrame((0.0,), (1.0,))
    for fn in (bn_squared_closed, commutator_closed, anticommutator_value):
        with pytest.raises(InvalidInputError):
            fn(frame)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_trace_b2(n, rng):
    assert trace_b2(n) == pytest.approx(2**n)
    assert trace_b2(n, general_frame(n, rng)) == pytest.approx(2**n)
    with pytest.raises(InvalidInputError):
        trace_b2(n, general_frame(n + 1, rng))


@pytest.mark.parametrize("n", range(2, 9))
def test_canonical_spectrum(n):
    lam = EigenvalueProfile.from_frame(canonical_mk_frame(n)).lambdas
    top = 2 ** ((n - 1) / 2)
    assert lam[0] == pytest.approx(top, abs=1e-9)
    assert lam[-1] == pytest.approx(-top, abs=1e-9)
    assert np.max(np.abs(lam[1:-1])) < 1e-9


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_profile_closed_form_matches_numeric(n, rng):
    frame = random_planar_frame(n, rng)
    a = EigenvalueProfile.from_frame(frame).lambdas
    b = EigenvalueProfile.from_frame(frame, closed_form=False).lambdas
    assert np.allclose(a, b, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 6])
def test_positive_half_sum(n, rng):
    p = EigenvalueProfile.from_frame(random_planar_frame(n, rng))
    assert p.positive_half_square_sum() == pytest.approx(2 ** (n - 1), abs=1e-9)
    assert p.reflection_residual() < 1e-12


def test_gap_and_pbar_on_samples(rng):
    applicable = 0
    for n in (2, 3, 4):
        for _ in range(60):
            p = EigenvalueProfile.from_frame(random_planar_frame(n, rng))
            report = degeneracy_check(p)
            assert report.holds
            if report.applicable:
                applicable += 1
                assert 0.5 < p_bar(p) <= 1
    assert applicable > 30


def test_pbar_canonical_chsh():
    p = EigenvalueProfile.from_frame(canonical_mk_frame(2))
    assert p_bar(p) == pytest.approx(1 / np.sqrt(2))


def test_pbar_undefined_when_degenerate():
    p = EigenvalueProfile.from_frame(MeasurementFrame((0.0, 0.0), (0.0, 0.0)))
    assert not degeneracy_check(p).applicable
    with pytest.raises(UndefinedValueError):
        p_bar(p)


def test_mermin3_constraint_random(rng):
    checked = 0
    for _ in range(50):
        try:
            lhs, rhs = mermin3_constraint(random_planar_frame(3, rng))
        except GuardedDenominator:
            continue
        checked += 1
        assert lhs == pytest.approx(rhs, abs=1e-9)
    assert checked > 40


def test_mermin3_constraint_guard():
    # equal settings make every eigenvalue +-1, so the denominator is zero
    frame = MeasurementFrame((0.2,) * 3, (0.2,) * 3)
    with pytest.raises(GuardedDenominator):
        mermin3_constraint(frame)


def test_mermin3_constraint_requires_three(rng):
    with pytest.raises(InvalidInputError):
        mermin3_constraint(random_planar_frame(4, rng))
