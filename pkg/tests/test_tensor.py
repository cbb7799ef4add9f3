import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from econn.errors import SingularMetric, SingularOperator
from econn.tensor import (antisymmetrize12, apply_slot, change_basis, checked_inverse,
                          metric_inverse, musical_op, rotate, term)

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


def spd(rng, d):
    a = rng.normal(size=(d, d))
    return a @ a.T + d * np.eye(d)


def test_inverse_identity():
    assert np.array_equal(metric_inverse(np.eye(4)), np.eye(4))


def test_inverse_diagonal():
    np.testing.assert_allclose(metric_inverse(np.diag([1.0, 4.0, 9.0])),
                               np.diag([1.0, 0.25, 1.0 / 9.0]), rtol=0, atol=1e-15)


def test_inverse_random_spd(rng):
    M = spd(rng, 5)
    assert np.abs(M @ metric_inverse(M) - np.eye(5)).max() < 1e-10


def test_inverse_of_inverse(rng):
    M = spd(rng, 6)
    assert np.abs(metric_inverse(metric_inverse(M)) - M).max() < 1e-10


def test_singular_metric_rejected():
    with pytest.raises(SingularMetric):
        metric_inverse(np.diag([1.0, 1.0, 0.0]))
    with pytest.raises(SingularMetric):
        metric_inverse(np.diag([1.0, np.nan, 1.0]))


def test_musical_zero_form():
    assert np.array_equal(musical_op(np.eye(3), np.zeros((3, 3))), np.zeros((3, 3)))


def test_musical_standard_complex_structure():
    F = np.zeros((4, 4))
    F[0, 1], F[1, 0], F[2, 3], F[3, 2] = 1, -1, 1, -1
    f = musical_op(np.eye(4), F)
    for i in range(4):
        for j in range(4):
            X, Y = np.eye(4)[i], np.eye(4)[j]
            assert X @ (f @ Y) == F[i, j]
    np.testing.assert_array_equal(f @ f, -np.eye(4))


def test_musical_weighted_metric():
    g = np.diag([2.0, 2.0, 1.0])
    F = np.zeros((3, 3))
    F[0, 1], F[1, 0] = 2.0, -2.0
    f = musical_op(g, F)
    e1, e2 = np.eye(3)[0], np.eye(3)[1]
    assert e1 @ g @ (f @ e2) == pytest.approx(2.0, abs=1e-15)
    np.testing.assert_allclose(f @ e2, [1.0, 0.0, 0.0])


@settings(max_examples=40, deadline=None)
@given(arrays(float, (4, 4), elements=finite), arrays(float, (4, 4), elements=finite))
def test_musical_op_is_g_skew(a, b):
    g = a @ a.T + 4 * np.eye(4)
    F = b - b.T
    f = musical_op(g, F)
    assert np.abs(g @ f + (g @ f).T).max() < 1e-12 * max(1.0, np.abs(F).max())


@settings(max_examples=40, deadline=None)
@given(arrays(float, (3, 3, 3), elements=finite), arrays(float, (3, 3), elements=finite),
       st.sampled_from([1, 2, 3]))
def test_apply_slot_identity_and_roundtrip(t, a, slot):
    assert np.array_equal(apply_slot(t, slot, np.eye(3)), t)
    A = a + 8 * np.eye(3)
    back = apply_slot(apply_slot(t, slot, A), slot, np.linalg.inv(A))
    assert np.abs(back - t).max() < 1e-12 * max(1.0, np.abs(t).max())


@settings(max_examples=30, deadline=None)
@given(arrays(float, (3, 3, 3), elements=finite), arrays(float, (3, 3), elements=finite))
def test_apply_slot_keeps_antisymmetry(t, A):
    t = antisymmetrize12(t)
    s = apply_slot(apply_slot(t, 1, A), 2, A)
    assert np.abs(s + s.transpose(1, 0, 2)).max() < 1e-12 * max(1.0, np.abs(s).max())


def test_apply_slot_linear(rng):
    t1, t2 = rng.normal(size=(2, 3, 3, 3))
    A, B = rng.normal(size=(2, 3, 3))
    for slot in (1, 2, 3):
        np.testing.assert_allclose(apply_slot(2 * t1 + t2, slot, A),
                                   2 * apply_slot(t1, slot, A) + apply_slot(t2, slot, A),
                                   atol=1e-12)
        np.testing.assert_allclose(apply_slot(t1, slot, A - 3 * B),
                                   apply_slot(t1, slot, A) - 3 * apply_slot(t1, slot, B),
                                   atol=1e-12)


def test_apply_slot_third_slot_meaning(rng):
    t = rng.normal(size=(3, 3, 3))
    A = rng.normal(size=(3, 3))
    X, Y, Z = rng.normal(size=(3, 3))
    lhs = np.einsum("abc,a,b,c", apply_slot(t, 3, A), X, Y, Z)
    assert lhs == pytest.approx(np.einsum("abc,a,b,c", t, X, Y, A @ Z))
    with pytest.raises(ValueError):
        apply_slot(t, 4, A)


def test_term_places_vectors(rng):
    t = rng.normal(size=(3, 3, 3))
    A, C = rng.normal(size=(2, 3, 3))
    R = term(t, "zxy", (A, None, C))
    X, Y, Z = rng.normal(size=(3, 3))
    want = np.einsum("abc,a,b,c", t, A @ Z, X, C @ Y)
    assert np.einsum("xyz,x,y,z", R, X, Y, Z) == pytest.approx(want)


def test_rotate_inverts_placement(rng):
    r = rng.normal(size=(3, 3, 3))
    s = rotate(r, "yzx")
    assert s[1, 2, 0] == r[0, 1, 2]


def test_change_basis_roundtrip(rng):
    t = rng.normal(size=(4, 4, 4))
    E = rng.normal(size=(4, 4)) + 4 * np.eye(4)
    back = change_basis(change_basis(t, E), np.linalg.inv(E))
    assert np.abs(back - t).max() < 1e-12


def test_checked_inverse_refuses_singular():
    with pytest.raises(SingularOperator):
        checked_inverse(np.diag([1.0, 1e-14]), "test")
