"""Hermitian measurement ensembles and the quadratic measurement map.

Signals are plain 1-D numpy arrays and Hermitian matrices are dense 2-D
arrays.  The field is carried by :class:`Ensemble` (``"R"`` or ``"C"``); real
ensembles are kept in real arithmetic throughout.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

FIELDS = ("R", "C")
HERMITIAN_RTOL = 1e-12
IMAG_RTOL = 1e-12
PROJECTOR_TOL = 1e-10


class InputError(ValueError):
    """Malformed or incompatible input (dimension, field, shape)."""


def check_field(field):
    if field not in FIELDS:
        raise InputError(f"field must be 'R' or 'C', got {field!r}")
    return field


def check_hermitian(A, field="C", rtol=HERMITIAN_RTOL):
    """Validate and return ``A`` as a Hermitian (symmetric if real) array."""
    check_field(field)
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise InputError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InputError("matrix has non-finite entries")
    if field == "R":
        if np.iscomplexobj(A):
            if np.any(A.imag != 0):
                raise InputError("complex entries in a real-field matrix")
            A = A.real
        A = A.astype(float)
    else:
        A = A.astype(complex)
    scale = np.max(np.abs(A))
    if np.max(np.abs(A - A.conj().T), initial=0.0) > rtol * scale:
        raise InputError("matrix is not Hermitian")
    return A


@dataclass(frozen=True)
class Ensemble:
    """An ordered tuple (A_1, ..., A_N) of d x d Hermitian matrices.

    ``matrices`` is stored as an ``(N, d, d)`` array, float for ``field="R"``
    and complex for ``field="C"``.
    """

    matrices: np.ndarray
    field: str = "R"
    ranks: Optional[Tuple[int, ...]] = None
    projectors: bool = False

    def __post_init__(self):
        check_field(self.field)
        mats = np.asarray(self.matrices)
        if mats.ndim == 2:
            mats = mats[None]
        if mats.ndim != 3 or len(mats) < 1:
            raise InputError("an ensemble needs at least one square matrix")
        mats = np.stack([check_hermitian(A, self.field) for A in mats])
        mats.setflags(write=False)
        object.__setattr__(self, "matrices", mats)
        if self.ranks is not None:
            ranks = tuple(int(r) for r in self.ranks)
            if len(ranks) != len(mats):
                raise InputError("ranks metadata must have one entry per matrix")
            object.__setattr__(self, "ranks", ranks)
        if self.projectors:
            for j, A in enumerate(mats):
                if np.max(np.abs(A @ A - A)) > PROJECTOR_TOL:
                    raise InputError(f"matrix {j} is flagged as a projector but A^2 != A")

    @property
    def d(self):
        return self.matrices.shape[1]

    @property
    def N(self):
        return self.matrices.shape[0]

    def __len__(self):
        return self.N

    def __getitem__(self, j):
        return self.matrices[j]

    def scaled(self, c):
        return Ensemble(c * self.matrices, self.field, self.ranks,
                        self.projectors and c == 1)

    def normalized(self):
        """Copy scaled to unit total Frobenius norm; PR is scale invariant."""
        norm = np.linalg.norm(self.matrices)
        return self if norm == 0 else self.scaled(1.0 / norm)


def as_signal(x, ensemble_or_d, field=None):
    """Validate a signal against an ensemble (or a dimension and field)."""
    if isinstance(ensemble_or_d, Ensemble):
        d, field = ensemble_or_d.d, ensemble_or_d.field
    else:
        d = int(ensemble_or_d)
    x = np.asarray(x)
    if x.ndim != 1 or len(x) != d:
        raise InputError(f"signal must have shape ({d},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InputError("signal has non-finite entries")
    if field == "R":
        if np.iscomplexobj(x) and np.any(x.imag != 0):
            raise InputError("complex signal given for a real-field ensemble")
        return np.real(x).astype(float)
    return x.astype(complex)


def measure(ensemble, x):
    """The measurement vector (x* A_1 x, ..., x* A_N x)."""
    x = as_signal(x, ensemble)
    vals = np.einsum("i,jik,k->j", x.conj(), ensemble.matrices, x)
    if ensemble.field == "C":
        scale = max(np.vdot(x, x).real * np.max(np.abs(ensemble.matrices)) * ensemble.d,
                    np.finfo(float).tiny)
        if np.max(np.abs(vals.imag)) > IMAG_RTOL * scale:
            raise ArithmeticError("imaginary residue in x*Ax exceeds tolerance")
        vals = vals.real
    return vals


def polarization_gap(A, x, y):
    """Both sides of x*Ax - y*Ay = 4 Re(v*Au), v = (x+y)/2, u = (x-y)/2.

    Equivalently Re((x+y)* A (x-y)).  The factor is 4 with the half-sums.
    """
    A = np.asarray(A)
    x, y = np.asarray(x), np.asarray(y)
    if x.shape != y.shape or A.shape != (len(x), len(x)):
        raise InputError("incompatible shapes in polarization_gap")
    lhs = np.vdot(x, A @ x).real - np.vdot(y, A @ y).real
    v, u = (x + y) / 2, (x - y) / 2
    return lhs, 4 * np.vdot(v, A @ u).real


def tau(A):
    """Map a real d x d matrix onto a complex Hermitian one.

    tau(A) = (A + A^T)/2 + i (A - A^T)/2 is a real-linear bijection from
    R^{d x d} onto the Hermitian matrices; :func:`tau_inverse` undoes it.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError(f"tau needs a square matrix, got shape {A.shape}")
    if np.iscomplexobj(A):
        raise InputError("tau is defined on real matrices")
    return 0.5 * (A + A.T) + 0.5j * (A - A.T)


def tau_inverse(H):
    H = np.asarray(H, dtype=complex)
    return H.real + H.imag


class RealLinearization(NamedTuple):
    B: np.ndarray
    C: np.ndarray
    F: np.ndarray


def real_linearize(ensemble):
    """Split each complex A_j = B_j + i C_j and form F_j = [[B, -C], [C, B]].

    For u = u_R + i u_I and x = [u_R; u_I], u* A_j u = x^T F_j x.
    """
    if ensemble.field != "C":
        raise InputError("real_linearize needs a complex-field ensemble")
    out = []
    for A in ensemble.matrices:
        B, C = A.real.copy(), A.imag.copy()
        out.append(RealLinearization(B, C, np.block([[B, -C], [C, B]])))
    return out


def real_stack(ensemble):
    """(N, n, n) real symmetric stack acting on real coordinates of signals.

    n = d for real ensembles (the matrices themselves) and n = 2d for complex
    ones (the F_j blocks).
    """
    if ensemble.field == "R":
        return np.asarray(ensemble.matrices)
    B, C = ensemble.matrices.real, ensemble.matrices.imag
    top = np.concatenate([B, -C], axis=2)
    bottom = np.concatenate([C, B], axis=2)
    return np.concatenate([top, bottom], axis=1)


def to_real(x):
    """Stack a complex vector as [Re x; Im x]."""
    x = np.asarray(x)
    return np.concatenate([x.real, x.imag])


def from_real(xr, field):
    if field == "R":
        return np.asarray(xr, dtype=float)
    d = len(xr) // 2
    return xr[:d] + 1j * xr[d:]


def quotient_distance(x, y, field=None):
    """Distance between the unimodular orbits of x and y.

    Real: min(|x - y|, |x + y|).  Complex: min over |b| = 1 of |x - b y|,
    attained at b = <y, x>/|<y, x>| with value
    sqrt(|x|^2 + |y|^2 - 2 |<x, y>|).  Evaluated as |x - b y| at the optimal
    b, which avoids cancellation when the orbits nearly coincide.
    """
    x, y = np.asarray(x), np.asarray(y)
    if x.shape != y.shape or x.ndim != 1:
        raise InputError("quotient_distance needs two vectors of equal length")
    if field is None:
        field = "C" if (np.iscomplexobj(x) or np.iscomplexobj(y)) else "R"
    if field == "R":
        if np.iscomplexobj(x) or np.iscomplexobj(y):
            raise InputError("complex vectors with field='R'")
        return float(min(np.linalg.norm(x - y), np.linalg.norm(x + y)))
    inner = np.vdot(y, x)
    b = inner / abs(inner) if abs(inner) > 1e-300 else 1.0
    return float(np.linalg.norm(x - b * y))


# Real coordinates of Hermitian matrices: diagonal entries, then
# sqrt(2) * (Re, Im) of strictly-upper entries in row-major order (real
# field: sqrt(2) * entry).  The sqrt(2) makes the coordinate map an isometry
# for the trace inner product <A, Q> = Tr(AQ).

def herm_dim(d, field):
    return d * (d + 1) // 2 if field == "R" else d * d


def herm_to_coords(Q, field):
    Q = np.asarray(Q)
    d = Q.shape[0]
    iu = np.triu_indices(d, 1)
    diag = np.real(np.diagonal(Q))
    upper = Q[iu] * np.sqrt(2)
    if field == "R":
        return np.concatenate([diag, np.real(upper)])
    inter = np.empty(2 * len(upper))
    inter[0::2], inter[1::2] = upper.real, upper.imag
    return np.concatenate([diag, inter])


def coords_to_herm(c, d, field):
    c = np.asarray(c, dtype=float)
    iu = np.triu_indices(d, 1)
    if field == "R":
        Q = np.zeros((d, d))
        Q[iu] = c[d:] / np.sqrt(2)
    else:
        Q = np.zeros((d, d), dtype=complex)
        Q[iu] = (c[d::2] + 1j * c[d + 1::2]) / np.sqrt(2)
    Q = Q + Q.conj().T
    Q[np.diag_indices(d)] = c[:d]
    return Q


def constraint_operator(ensemble):
    """Rows are coordinates of A_j, so that (T @ coords(Q))_j = Tr(A_j Q)."""
    return np.stack([herm_to_coords(A, ensemble.field) for A in ensemble.matrices])
