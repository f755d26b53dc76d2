"""Bilinear forms L(x, y) = (x^T B_1 y, ..., x^T B_N y).

The normed forms come from the multiplication of the complex numbers,
quaternions and octonions, all produced by Cayley-Dickson doubling with the
convention

    (a, b)(c, d) = (a c - conj(d) b,  d a + b conj(c))

starting from the reals.  Basis element e_0 is the unit; for the quaternions
e_1 e_2 = e_3.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._rng import check_seed, substream
from .core import InputError

ALGEBRA_DIMS = {"complex": 2, "quaternion": 4, "octonion": 8}


@dataclass(frozen=True)
class BilinearForm:
    matrices: np.ndarray        # (N, p, q)

    def __post_init__(self):
        B = np.asarray(self.matrices, dtype=float)
        if B.ndim != 3 or len(B) < 1:
            raise InputError("a bilinear form needs a stack of p x q matrices")
        object.__setattr__(self, "matrices", B)

    @property
    def size(self):
        N, p, q = self.matrices.shape
        return p, q, N

    def __call__(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        p, q, _ = self.size
        if x.shape[-1] != p or y.shape[-1] != q:
            raise InputError("argument lengths do not match the form size")
        return np.einsum("...i,jik,...k->...j", x, self.matrices, y)


def from_ensemble(ensemble):
    """The symmetric form (x^T A_j y)_j of a real ensemble."""
    if ensemble.field != "R":
        raise InputError("from_ensemble needs a real-field ensemble")
    return BilinearForm(np.array(ensemble.matrices))


def _conj(a):
    out = -a
    out[0] = a[0]
    return out


def cd_multiply(x, y):
    """Cayley-Dickson product of two vectors of length 2^k."""
    n = len(x)
    if n == 1:
        return x * y
    h = n // 2
    a, b = x[:h], x[h:]
    c, d = y[:h], y[h:]
    return np.concatenate([cd_multiply(a, c) - cd_multiply(_conj(d), b),
                           cd_multiply(d, a) + cd_multiply(b, _conj(c))])


@lru_cache(maxsize=None)
def _structure(n):
    eye = np.eye(n)
    T = np.empty((n, n, n))
    for i in range(n):
        for j in range(n):
            T[:, i, j] = cd_multiply(eye[i], eye[j])
    T.setflags(write=False)
    return T


def normed_form(algebra):
    """Multiplication in the given algebra as a bilinear form of size (n, n, n)."""
    if algebra not in ALGEBRA_DIMS:
        raise InputError(f"algebra must be one of {sorted(ALGEBRA_DIMS)}")
    return BilinearForm(np.array(_structure(ALGEBRA_DIMS[algebra])))


def generic_form(p, q, N, ranks=None, seed=0):
    """N Gaussian p x q matrices with prescribed ranks r_j (default min(p, q)).

    B_j = U_j V_j^T with independent Gaussian p x r_j and q x r_j factors.
    """
    if p < 1 or q < 1 or N < 1:
        raise InputError("p, q and N must be positive")
    if ranks is None:
        ranks = [min(p, q)] * N
    elif isinstance(ranks, int):
        ranks = [ranks] * N
    ranks = list(ranks)
    if len(ranks) != N or any(not 1 <= r <= min(p, q) for r in ranks):
        raise InputError(f"need {N} ranks in [1, {min(p, q)}]")
    seed = check_seed(seed)
    mats = []
    for j, r in enumerate(ranks):
        rng = substream(seed, "bilinear-form", j)
        U, V = rng.standard_normal((p, r)), rng.standard_normal((q, r))
        mats.append(U @ V.T)
    return BilinearForm(np.stack(mats))
