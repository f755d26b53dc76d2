import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import crandn, rand_herm
from genpr.core import (Ensemble, InputError, from_real, measure, polarization_gap,
                        quotient_distance, real_linearize, tau, tau_inverse, to_real)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_measure_identity_gives_squared_norm(rng):
    x = rng.standard_normal(4)
    assert measure(Ensemble(np.eye(4)[None]), x)[0] == pytest.approx(x @ x)


def test_measure_frame_is_squared_inner_products(rng):
    F = crandn(rng, 3, 2)
    ens = Ensemble(np.einsum("ji,jk->jik", F, F.conj()), field="C")
    x = crandn(rng, 2)
    np.testing.assert_allclose(measure(ens, x), np.abs(F.conj() @ x) ** 2, rtol=1e-12)


def test_measure_hand_example(triple):
    np.testing.assert_array_equal(measure(triple, [3.0, 4.0]), [25.0, -7.0, 24.0])


def test_measure_rejects_wrong_length(triple):
    with pytest.raises(InputError):
        measure(triple, [1.0, 2.0, 3.0])


def test_ensemble_rejects_non_hermitian():
    with pytest.raises(InputError):
        Ensemble(np.array([[[1.0, 2.0], [0.0, 1.0]]]))


def test_ensemble_rejects_complex_entries_for_real_field():
    with pytest.raises(InputError):
        Ensemble(np.array([[[1.0, 1j], [-1j, 1.0]]]), field="R")


@pytest.mark.parametrize("A,x,y,expected", [
    (np.eye(2), [2.0, 0.0], [0.0, 2.0], (0.0, 0.0)),
    (np.eye(2), [1.0, 2.0], [1.0, 2.0], (0.0, 0.0)),
    (np.diag([1.0, -1.0]), [1.0, 0.0], [0.0, 1.0], (2.0, 2.0)),
])
def test_polarization_examples(A, x, y, expected):
    assert polarization_gap(A, np.array(x), np.array(y)) == pytest.approx(expected)


def test_polarization_random_complex(rng):
    for _ in range(200):
        A = rand_herm(rng, 3)
        x, y = crandn(rng, 3), crandn(rng, 3)
        lhs, rhs = polarization_gap(A, x, y)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_phase_invariance(rng):
    ens = Ensemble(np.stack([rand_herm(rng, 3) for _ in range(5)]), field="C")
    x = crandn(rng, 3)
    for t in rng.uniform(0, 2 * np.pi, 20):
        np.testing.assert_allclose(measure(ens, np.exp(1j * t) * x), measure(ens, x),
                                   rtol=1e-12, atol=1e-12)


def test_tau_examples():
    E11 = np.zeros((2, 2)); E11[0, 0] = 1
    E12 = np.zeros((2, 2)); E12[0, 1] = 1
    np.testing.assert_array_equal(tau(E11), E11)
    np.testing.assert_allclose(tau(E12), [[0, (1 + 1j) / 2], [(1 - 1j) / 2, 0]])


@settings(max_examples=100, deadline=None)
@given(arrays(float, (3, 3), elements=finite))
def test_tau_hermitian_and_round_trip(A):
    H = tau(A)
    np.testing.assert_allclose(H, H.conj().T, atol=0)
    np.testing.assert_allclose(tau_inverse(H), A, atol=1e-14 * max(1.0, np.abs(A).max()))


def test_tau_rejects_complex():
    with pytest.raises(InputError):
        tau(np.eye(2) * 1j)


def test_real_linearize_examples():
    F = real_linearize(Ensemble(np.array([[[1.0 + 0j]]]), field="C"))[0].F
    np.testing.assert_array_equal(F, np.eye(2))
    F = real_linearize(Ensemble(np.diag([1.0, -1.0])[None].astype(complex), field="C"))[0].F
    np.testing.assert_array_equal(F, np.diag([1.0, -1.0, 1.0, -1.0]))


def test_real_linearize_consistency(rng):
    ens = Ensemble(np.stack([rand_herm(rng, 4) for _ in range(6)]), field="C")
    F = np.stack([lin.F for lin in real_linearize(ens)])
    for _ in range(50):
        u = crandn(rng, 4)
        xr = to_real(u)
        np.testing.assert_allclose(np.einsum("i,jik,k->j", xr, F, xr), measure(ens, u),
                                   rtol=1e-12, atol=1e-12)


def test_real_linearize_needs_complex(triple):
    with pytest.raises(InputError):
        real_linearize(triple)


def test_to_from_real_round_trip(rng):
    u = crandn(rng, 5)
    np.testing.assert_array_equal(from_real(to_real(u), "C"), u)


@pytest.mark.parametrize("x,y,expected", [
    ([1, 0], [1j, 0], 0.0),
    ([1.0, 1.0], [-1.0, -1.0], 0.0),
    ([1.0, 0.0], [0.0, 1.0], np.sqrt(2)),
])
def test_quotient_distance_examples(x, y, expected):
    assert quotient_distance(np.array(x), np.array(y)) == pytest.approx(expected, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(arrays(float, (3, 6), elements=finite), st.floats(0, 2 * np.pi))
def test_quotient_distance_metric(V, t):
    x, y, z = (from_real(v, "C") for v in V)
    d = quotient_distance
    tol = 1e-9 * (1 + np.abs(V).max())
    assert d(x, x) <= tol
    assert abs(d(x, y) - d(y, x)) <= tol
    assert d(x, z) <= d(x, y) + d(y, z) + tol
    assert abs(d(np.exp(1j * t) * x, y) - d(x, y)) <= tol
