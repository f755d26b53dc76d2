import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genpr.core import InputError, measure
from genpr.ensembles import (KINDS, GenSpec, explicit_mc2, gen, real_squaring_pair)


@st.composite
def specs(draw):
    d = draw(st.integers(2, 5))
    kind = draw(st.sampled_from(KINDS))
    N = draw(st.integers(1, 6))
    hi = d - 1 if kind == "projection" else (1 if kind == "frame_rank1" else d)
    ranks = draw(st.lists(st.integers(1, hi), min_size=N, max_size=N))
    return GenSpec(d, N, draw(st.sampled_from("RC")), kind, ranks,
                   draw(st.integers(0, 2**64 - 1)))


@settings(max_examples=100, deadline=None)
@given(specs())
def test_declared_ranks_and_projectors(spec):
    ens = gen(spec)
    assert ens.matrices.shape == (spec.N, spec.d, spec.d)
    for A, r in zip(ens.matrices, spec.ranks):
        np.testing.assert_allclose(A, A.conj().T, atol=0)
        s = np.linalg.svd(A, compute_uv=False) / max(1.0, np.linalg.norm(A))
        assert s[r - 1] > 1e-8
        if r < spec.d:
            assert s[r] < 1e-10
        if spec.kind == "projection":
            np.testing.assert_allclose(A @ A, A, atol=1e-10)
        if spec.kind in ("psd_rank", "projection", "frame_rank1"):
            assert np.linalg.eigvalsh(A)[0] > -1e-10


def test_projection_example():
    P = gen(GenSpec(3, 1, kind="projection", ranks=1, seed=7)).matrices[0]
    np.testing.assert_allclose(P @ P, P, atol=1e-12)
    assert np.linalg.matrix_rank(P) == 1
    assert gen(GenSpec(3, 1, kind="projection", seed=7)).projectors


def test_frame_is_psd_rank_one():
    ens = gen(GenSpec(2, 3, kind="frame_rank1", seed=1))
    for A in ens.matrices:
        assert np.linalg.matrix_rank(A) == 1
        assert np.linalg.eigvalsh(A)[0] > -1e-12


def test_generic_rank_has_mixed_signs_somewhere():
    ens = gen(GenSpec(4, 40, kind="generic_rank", seed=3))
    eig = np.linalg.eigvalsh(ens.matrices)
    assert np.any((eig.min(axis=1) < -1e-8) & (eig.max(axis=1) > 1e-8))


def test_determinism():
    a = gen(GenSpec(3, 5, "C", seed=42)).matrices
    b = gen(GenSpec(3, 5, "C", seed=42)).matrices
    c = gen(GenSpec(3, 5, "C", seed=43)).matrices
    assert a.tobytes() == b.tobytes()
    assert not np.allclose(a, c)


def test_prefix_stability():
    # matrix j depends only on (seed, j)
    a = gen(GenSpec(3, 3, seed=5)).matrices
    b = gen(GenSpec(3, 6, seed=5)).matrices
    np.testing.assert_array_equal(a, b[:3])


@pytest.mark.parametrize("kwargs", [
    dict(d=3, N=2, kind="projection", ranks=3),
    dict(d=3, N=2, kind="frame_rank1", ranks=2),
    dict(d=3, N=2, ranks=[1]),
    dict(d=3, N=2, kind="nope"),
    dict(d=3, N=2, field="Q"),
    dict(d=3, N=2, seed=-1),
])
def test_bad_specs(kwargs):
    with pytest.raises(InputError):
        GenSpec(**kwargs)


def test_explicit_mc2():
    ens = explicit_mc2()
    assert ens.field == "C" and ens.N == 3
    np.testing.assert_array_equal(ens.matrices[2], np.diag([1, -1]))
    for A in ens.matrices:
        np.testing.assert_array_equal(A, A.conj().T)


def test_squaring_pair():
    ens = real_squaring_pair()
    np.testing.assert_array_equal(measure(ens, [1.0, 0.0]), [1.0, 0.0])
    np.testing.assert_array_equal(measure(ens, [3.0, 4.0]), [-7.0, 24.0])
