"""Seeded generators for the measurement classes, plus two explicit ensembles.

Generic draws are absolutely continuous (Gaussian ingredients), so with
probability one they avoid any proper algebraic subset of the class.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._rng import check_seed, substream
from .core import Ensemble, InputError, check_field

KINDS = ("generic_rank", "psd_rank", "projection", "frame_rank1")


@dataclass(frozen=True)
class GenSpec:
    d: int
    N: int
    field: str = "R"
    kind: str = "generic_rank"
    ranks: Sequence[int] = None
    seed: int = 0

    def __post_init__(self):
        check_field(self.field)
        if self.kind not in KINDS:
            raise InputError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if self.d < 1 or self.N < 1:
            raise InputError("d and N must be positive")
        ranks = self.ranks
        if ranks is None:
            ranks = [1] * self.N if self.kind in ("frame_rank1", "projection") else [self.d] * self.N
        elif isinstance(ranks, int):
            ranks = [ranks] * self.N
        ranks = tuple(int(r) for r in ranks)
        if len(ranks) != self.N:
            raise InputError(f"need {self.N} ranks, got {len(ranks)}")
        # projections exclude r = d: the identity carries no phase information
        hi = self.d - 1 if self.kind == "projection" else self.d
        if self.kind == "frame_rank1" and set(ranks) != {1}:
            raise InputError("frame_rank1 ensembles have rank 1")
        if any(r < 1 or r > hi for r in ranks):
            raise InputError(f"ranks for kind {self.kind!r} must lie in [1, {hi}]")
        object.__setattr__(self, "ranks", ranks)
        object.__setattr__(self, "seed", check_seed(self.seed))


def _gaussian(rng, shape, field):
    if field == "R":
        return rng.standard_normal(shape)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _draw(spec, j):
    rng = substream(spec.seed, "gen", j)
    d, r, field = spec.d, spec.ranks[j], spec.field
    if spec.kind == "frame_rank1":
        f = _gaussian(rng, d, field)
        return np.outer(f, f.conj())
    if spec.kind == "projection":
        U, _ = np.linalg.qr(_gaussian(rng, (d, r), field))
        P = U @ U.conj().T
        return (P + P.conj().T) / 2
    V, _ = np.linalg.qr(_gaussian(rng, (d, r), field))
    s = 0.5 + np.abs(rng.standard_normal(r))
    if spec.kind == "generic_rank":
        s *= rng.choice([-1.0, 1.0], size=r)
    A = (V * s) @ V.conj().T
    A = (A + A.conj().T) / 2
    return A / np.linalg.norm(A)


def gen(spec):
    """Draw an ensemble; each matrix has its own substream (seed, j).

    generic_rank and psd_rank matrices are sum_i s_i v_i v_i^* with v_i the
    orthonormal QR factor of a Gaussian d x r matrix and |s_i| = 0.5 + |g_i|,
    rescaled to unit Frobenius norm; generic_rank signs are Rademacher.  The
    offset keeps the declared rank well conditioned.
    projection matrices are U U^* for the orthonormal QR factor of a Gaussian
    d x r matrix.  frame_rank1 matrices are f f^* with f standard Gaussian and
    are left unscaled.
    """
    mats = np.stack([_draw(spec, j) for j in range(spec.N)])
    if spec.field == "R":
        mats = mats.real
    return Ensemble(mats, spec.field, ranks=spec.ranks,
                    projectors=spec.kind == "projection")


def explicit_mc2():
    """Three complex 2 x 2 Hermitian matrices with the phase retrieval property."""
    mats = np.array([
        [[-1, -1], [-1, 1]],
        [[-1, -2 - 1j], [-2 + 1j, 2]],
        [[1, 0], [0, -1]],
    ], dtype=complex)
    return Ensemble(mats, "C")


def real_squaring_pair():
    """diag(1, -1) and [[0, 1], [1, 0]]: x = (a, b) maps to (a^2 - b^2, 2ab)."""
    mats = np.array([[[1.0, 0.0], [0.0, -1.0]], [[0.0, 1.0], [1.0, 0.0]]])
    return Ensemble(mats, "R")


BUILTINS = {"mc2": explicit_mc2, "squaring": real_squaring_pair}
