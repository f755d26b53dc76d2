"""Signal recovery from quadratic samples b_j = x* A_j x.

Pipeline: minimum-norm least-squares lift Q ~ x x*, rank-one projection of
the lift, then Levenberg-damped Gauss-Newton on r_j(x) = x* A_j x - b_j over
the real coordinates of x.
"""

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ._lm import levenberg_marquardt
from ._rng import check_seed, substream
from .core import (InputError, as_signal, constraint_operator, coords_to_herm,
                   from_real, measure, real_stack, to_real)
from .io import encode_array


@dataclass
class RecoveryConfig:
    max_gn_iters: int = 100
    gn_tol: float = 1e-12
    damping_init: float = 1e-3
    damping_shrink: float = 0.5
    damping_grow: float = 4.0
    random_starts: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.gn_tol <= 0 or self.damping_init <= 0 or self.max_gn_iters < 0:
            raise InputError("tolerances and damping must be positive")
        self.seed = check_seed(self.seed)


@dataclass
class RecoveryReport:
    estimate: np.ndarray
    residual: float             # |M(x) - b| / max(1, |b|)
    iterations: int
    converged: bool
    lifted_rank_gap: Optional[float] = None   # lambda_2 / lambda_1 of the lift
    degenerate_init: bool = False
    starts: int = 1
    history: list = field(default_factory=list, repr=False)
    non_unique: Optional[bool] = None

    def to_dict(self):
        out = asdict(self)
        out["estimate"] = encode_array(self.estimate)
        out.pop("history")
        return out


def _check_b(ensemble, b):
    b = np.asarray(b, dtype=float)
    if b.shape != (ensemble.N,):
        raise InputError(f"expected {ensemble.N} measurements, got shape {b.shape}")
    return b


def lift_solve(ensemble, b):
    """Minimum-Frobenius-norm Hermitian Q minimizing sum_j (Tr(A_j Q) - b_j)^2."""
    b = _check_b(ensemble, b)
    T = constraint_operator(ensemble)
    c, *_ = np.linalg.lstsq(T, b, rcond=None)
    return coords_to_herm(c, ensemble.d, ensemble.field)


def spectral_init(Q, rtol=1e-12):
    """Top eigenpair projection sqrt(max(l1, 0)) v1 of a Hermitian Q.

    Returns ``(x0, degenerate)``; degenerate means l1 <= rtol * |Q| and x0 = 0.
    """
    Q = np.asarray(Q)
    lam, W = np.linalg.eigh(Q)
    if lam[-1] <= rtol * np.linalg.norm(Q) or lam[-1] <= 0:
        return np.zeros(Q.shape[0], dtype=Q.dtype), True
    return np.sqrt(lam[-1]) * W[:, -1], False


def _relative_residual(ensemble, x, b):
    return float(np.linalg.norm(measure(ensemble, x) - b) / max(1.0, np.linalg.norm(b)))


def residual_jacobian(ensemble, x):
    """Jacobian of r(x) = M(x) - b with respect to the real coordinates of x."""
    F = real_stack(ensemble)
    xr = to_real(x) if ensemble.field == "C" else np.asarray(x, dtype=float)
    return 2 * F @ xr


def refine(ensemble, b, x0, config=None):
    """Levenberg-damped Gauss-Newton on x* A_j x = b_j.

    In the complex case J^T J is singular along the phase direction i x; the
    damping term keeps the step well defined and the gauge is left free.
    """
    cfg = config or RecoveryConfig()
    b = _check_b(ensemble, b)
    x0 = as_signal(x0, ensemble)
    F = real_stack(ensemble)
    scale = max(1.0, np.linalg.norm(b))
    field_ = ensemble.field

    def resid(z):
        return np.einsum("i,jik,k->j", z, F, z) - b

    def jac(z):
        return 2 * F @ z

    z0 = to_real(x0) if field_ == "C" else x0
    res = levenberg_marquardt(resid, jac, z0, max_iter=cfg.max_gn_iters,
                              ftol=cfg.gn_tol * scale, mu0=cfg.damping_init,
                              shrink=cfg.damping_shrink, grow=cfg.damping_grow)
    x = from_real(res.x, field_)
    r = _relative_residual(ensemble, x, b)
    return RecoveryReport(x, r, res.iterations, r <= cfg.gn_tol,
                          history=[h / scale for h in res.history])


def _random_start(rng, ensemble, b):
    # scale so that |x|^2 matches the least-squares level of the data
    n = ensemble.d if ensemble.field == "R" else 2 * ensemble.d
    z = rng.standard_normal(n)
    x = from_real(z, ensemble.field)
    m = measure(ensemble, x)
    denom = m @ m
    t = (m @ b) / denom if denom > 0 else 0.0
    return x * np.sqrt(t) if t > 0 else x / np.linalg.norm(x)


def recover(ensemble, b, config=None):
    """Lift, project to rank one, refine.

    If the spectral start is degenerate or does not converge, up to
    ``random_starts`` seeded random starts are tried and the result with the
    smallest residual is returned (ties go to the earlier start).
    """
    cfg = config or RecoveryConfig()
    b = _check_b(ensemble, b)
    dtype = float if ensemble.field == "R" else complex
    if not np.any(b):
        return RecoveryReport(np.zeros(ensemble.d, dtype=dtype), 0.0, 0, True, None)
    Q = lift_solve(ensemble, b)
    lam = np.linalg.eigvalsh(Q)
    gap = float(abs(lam[-2]) / abs(lam[-1])) if len(lam) > 1 and lam[-1] != 0 else None
    x0, degenerate = spectral_init(Q)
    best = None
    starts = 0
    if not degenerate:
        best = refine(ensemble, b, x0, cfg)
        starts = 1
    if best is None or not best.converged:
        for k in range(cfg.random_starts):
            rng = substream(cfg.seed, "recover", k)
            rep = refine(ensemble, b, _random_start(rng, ensemble, b), cfg)
            starts += 1
            if best is None or rep.residual < best.residual:
                best = rep
            if best.converged:
                break
    best.lifted_rank_gap = gap
    best.degenerate_init = degenerate
    best.starts = starts
    return best
