"""Deciding the phase retrieval property of a concrete ensemble.

A pair x, y with x*A_j x = y*A_j y for all j and x, y in different
unimodular orbits refutes the property.  Writing u = (x + y)/2 and
v = (x - y)/2 this is Re(v*A_j u) = 0 for all j, which on real coordinates is
a bilinear system u~^T F_j v~ = 0; every search below works in that form.

Verdicts are three-valued.  Positives are only *certified* when the trace
null space {Q Hermitian : Tr(A_j Q) = 0} has dimension <= 1, where the
rank <= 2 part of the null space can be inspected exactly.  Larger null
spaces get a randomized search and at best a ``LikelyPR`` verdict.
"""

from dataclasses import dataclass, field, asdict
from typing import List, Optional

import numpy as np

from . import bounds
from ._lm import levenberg_marquardt
from ._rng import check_seed, substream
from .core import (Ensemble, InputError, constraint_operator, coords_to_herm,
                   from_real, herm_dim, measure, quotient_distance,
                   real_stack, to_real)
from .io import encode_array

CERTIFIED_PR = "CertifiedPR"
CERTIFIED_NOT_PR = "CertifiedNotPR"
LIKELY_PR = "LikelyPR"
INCONCLUSIVE = "Inconclusive"

DEFINITE = "definite_rank2_or_less"
INDEFINITE = "indefinite_or_rank1"
RANK_GE_3 = "rank_ge_3"


@dataclass
class NullspaceBasis:
    basis: List[np.ndarray]
    coords: np.ndarray          # (dim, D) orthonormal rows
    field: str

    @property
    def dim(self):
        return len(self.basis)


def trace_nullspace(ensemble, rtol=1e-10):
    """Orthonormal basis (trace inner product) of {Q : Tr(A_j Q) = 0 for all j}.

    Singular values of the constraint operator at or below rtol * sigma_max
    count as zero.  For a one-dimensional null space the generator's largest
    coordinate is made positive so the output is reproducible.
    """
    T = constraint_operator(ensemble)
    D = herm_dim(ensemble.d, ensemble.field)
    _, s, Vt = np.linalg.svd(T, full_matrices=True)
    smax = s[0] if len(s) else 0.0
    rank = int(np.sum(s > rtol * smax)) if smax > 0 else 0
    null = Vt[rank:].copy()
    if len(null) == 1:
        i = np.argmax(np.abs(null[0]))
        null[0] *= np.sign(null[0][i])
    basis = [coords_to_herm(c, ensemble.d, ensemble.field) for c in null]
    assert null.shape[1] == D
    return NullspaceBasis(basis, null, ensemble.field)


def _nonzero_eigs(Q, rtol):
    lam = np.linalg.eigvalsh(Q)
    top = np.max(np.abs(lam))
    if top == 0:
        raise InputError("zero matrix")
    return lam[np.abs(lam) > rtol * top]


def eigen_sign_test(Q, rtol=1e-9):
    """Classify a nonzero Hermitian Q by its nonzero eigenvalues.

    Exactly two of one sign: ``definite_rank2_or_less``.  One, or two of
    opposite signs: ``indefinite_or_rank1`` (a null-space element of this
    class refutes phase retrieval).  Three or more: ``rank_ge_3``.
    """
    nz = _nonzero_eigs(np.asarray(Q), rtol)
    if len(nz) >= 3:
        return RANK_GE_3
    if len(nz) == 2 and nz[0] * nz[1] > 0:
        return DEFINITE
    return INDEFINITE


def witness_from_Q(Q, rtol=1e-9):
    """Split Q = l1 u u* - |l2| v v* into the colliding pair (sqrt(l1) u, sqrt|l2| v).

    A rank-one Q = +-x x* gives (x, 0).
    """
    Q = np.asarray(Q)
    if eigen_sign_test(Q, rtol) != INDEFINITE:
        raise InputError("Q is not rank <= 2 with opposite-sign eigenvalues")
    lam, W = np.linalg.eigh(Q)
    top = np.max(np.abs(lam))
    hi, lo = lam[-1], lam[0]
    if lo < -rtol * top and hi > rtol * top:
        return np.sqrt(hi) * W[:, -1], np.sqrt(-lo) * W[:, 0]
    k = -1 if hi > rtol * top else 0
    x = np.sqrt(abs(lam[k])) * W[:, k]
    return x, np.zeros_like(x)


def jacobian_singular_values(ensemble, x):
    """Singular values of the real Jacobian 2[F_1 x~ ... F_N x~] at x/|x|.

    Padded with zeros to length n (d real, 2d complex) so that index
    d - 1 (real) or 2d - 2 (complex) always exists.
    """
    xr = to_real(np.asarray(x)) if ensemble.field == "C" else np.asarray(x, dtype=float)
    nrm = np.linalg.norm(xr)
    if nrm == 0:
        raise InputError("Jacobian test needs a nonzero x")
    return _batch_jacobian_sv(real_stack(ensemble), (xr / nrm)[None])[0]


def _batch_jacobian_sv(F, X):
    n = F.shape[1]
    J = 2 * np.einsum("jab,sb->saj", F, X)
    s = np.linalg.svd(J, compute_uv=False)
    if s.shape[1] < n:
        s = np.concatenate([s, np.zeros((len(X), n - s.shape[1]))], axis=1)
    return s


def _rank_index(ensemble):
    return ensemble.d - 1 if ensemble.field == "R" else 2 * ensemble.d - 2


def jacobian_min_sv(ensemble, x):
    """sigma_d (real) or sigma_{2d-1} (complex) of the Jacobian at x/|x|.

    In the complex case sigma_{2d} is structurally zero (the phase direction
    [-u_I; u_R] is annihilated), so sigma_{2d-1} is the relevant one.
    """
    return float(jacobian_singular_values(ensemble, x)[_rank_index(ensemble)])


def _phase_map(n):
    """Real form of multiplication by i on [Re; Im] coordinates."""
    d = n // 2
    J = np.zeros((n, n))
    J[:d, d:] = -np.eye(d)
    J[d:, :d] = np.eye(d)
    return J


def _bilinear_lm(F, x0, y0, gauge=None, max_iter=150):
    """Drive (x^T F_j y)_j to zero over |x| = |y| = 1 (and y^T G x = 0).

    The constraints enter as extra residuals; the result is renormalized.
    """
    p, q = F.shape[1], F.shape[2]

    def split(z):
        return z[:p], z[p:]

    def resid(z):
        x, y = split(z)
        r = [np.einsum("i,jik,k->j", x, F, y), [x @ x - 1, y @ y - 1]]
        if gauge is not None:
            r.append([y @ gauge @ x])
        return np.concatenate(r)

    def jac(z):
        x, y = split(z)
        rows = [np.hstack([F @ y, np.einsum("i,jik->jk", x, F)]),
                np.hstack([2 * x, np.zeros(q)])[None],
                np.hstack([np.zeros(p), 2 * y])[None]]
        if gauge is not None:
            rows.append(np.hstack([gauge.T @ y, gauge @ x])[None])
        return np.vstack(rows)

    res = levenberg_marquardt(resid, jac, np.concatenate([x0, y0]),
                              max_iter=max_iter, ftol=1e-15, stall=1e-3, max_mu=1e8)
    x, y = split(res.x)
    if gauge is not None:
        g = gauge @ x
        y = y - (y @ g) / max(g @ g, 1e-300) * g
    x = x / max(np.linalg.norm(x), 1e-300)
    y = y / max(np.linalg.norm(y), 1e-300)
    return x, y, float(np.linalg.norm(np.einsum("i,jik,k->j", x, F, y)))


def _unit(rng, n):
    z = rng.standard_normal(n)
    return z / np.linalg.norm(z)


@dataclass
class Collision:
    x: np.ndarray
    y: np.ndarray
    residual: float             # |M(x) - M(y)| on the unit-norm ensemble
    separation: float           # quotient_distance(x, y)
    restart: int


def _pair_from_uv(ur, vr, field):
    u, v = from_real(ur, field), from_real(vr, field)
    return u + v, u - v


def _collision_from_uv(ens_n, ur, vr, restart):
    x, y = _pair_from_uv(ur, vr, ens_n.field)
    resid = float(np.linalg.norm(measure(ens_n, x) - measure(ens_n, y)))
    return Collision(x, y, resid, quotient_distance(x, y, ens_n.field), restart)


def _polish_pair(ens_n, x, y, restart=-1):
    """Refine an approximate colliding pair through its (u, v) form."""
    F = real_stack(ens_n)
    gauge = _phase_map(F.shape[1]) if ens_n.field == "C" else None
    u, v = (x + y) / 2, (x - y) / 2
    if np.linalg.norm(v) < 1e-12 * max(np.linalg.norm(u), 1e-300):
        v = u.copy()
    ur = to_real(u) if ens_n.field == "C" else np.real(u)
    vr = to_real(v) if ens_n.field == "C" else np.real(v)
    ur = ur / np.linalg.norm(ur)
    vr = vr / np.linalg.norm(vr)
    ur, vr, _ = _bilinear_lm(F, ur, vr, gauge, max_iter=50)
    return _collision_from_uv(ens_n, ur, vr, restart)


def _search_collisions(ensemble, restarts, seed, tol=1e-10, min_sep=1e-3):
    """Multistart search; returns (first qualifying collision or None, best seen)."""
    ens_n = ensemble.normalized()
    F = real_stack(ens_n)
    n = F.shape[1]
    gauge = _phase_map(n) if ensemble.field == "C" else None
    best = None
    for k in range(restarts):
        rng = substream(seed, "collision", k)
        u0, v0 = _unit(rng, n), _unit(rng, n)
        if gauge is not None:
            g = gauge @ u0
            v0 = v0 - (v0 @ g) * g
            v0 /= np.linalg.norm(v0)
        ur, vr, _ = _bilinear_lm(F, u0, v0, gauge)
        c = _collision_from_uv(ens_n, ur, vr, k)
        if best is None or (c.residual, c.restart) < (best.residual, best.restart):
            best = c
        if c.residual <= tol and c.separation >= min_sep:
            return c, best
    return None, best


def collision_search(ensemble, restarts=64, seed=0, tol=1e-10):
    """Look for x, y in different orbits with equal measurements.

    Damped Gauss-Newton from ``restarts`` random unit pairs (u, v) on the
    bilinear system Re(v*A_j u) = 0, with v kept real-orthogonal to i u in
    the complex case.  The pair is x = u + v, y = u - v, whose quotient
    distance is then 2.  Returns a :class:`Collision` when the residual on the
    unit-norm ensemble is at most ``tol``, otherwise None.
    """
    if restarts < 1:
        raise InputError("restarts must be >= 1")
    found, _ = _search_collisions(ensemble, restarts, check_seed(seed), tol)
    return found


def verify_witness(ensemble, x, y, tol=1e-8):
    """Re-check a claimed collision using only the measurement map."""
    mx, my = measure(ensemble, x), measure(ensemble, y)
    gap = np.max(np.abs(mx - my))
    if gap > tol * max(1.0, np.max(np.abs(mx))):
        return False
    sep = quotient_distance(np.asarray(x), np.asarray(y), ensemble.field)
    return sep >= 1e-3 * (np.linalg.norm(x) + np.linalg.norm(y) + 1)


def _witness_class_search(ns, d, restarts, seed, max_iter=100):
    """Search the null space for Q with at most one positive and one negative eigenvalue.

    On the coefficient sphere |c| = 1 the residuals are max(l_k, 0) for all
    eigenvalues but the largest and min(l_k, 0) for all but the smallest;
    they vanish exactly on the witness class.  Yields (residual, restart, Q)
    per restart, in restart order.
    """
    G = np.stack(ns.basis)
    m = len(G)
    Gflat = G.reshape(m, -1)

    def Q_of(c):
        return (c @ Gflat).reshape(d, d)

    def resid(c):
        lam = np.linalg.eigvalsh(Q_of(c))
        return np.concatenate([np.maximum(lam[:-1], 0), np.minimum(lam[1:], 0), [c @ c - 1]])

    def jac(c):
        lam, W = np.linalg.eigh(Q_of(c))
        dl = np.einsum("ak,iab,bk->ki", W.conj(), G, W).real   # dl_k/dc_i
        top = dl[:-1] * (lam[:-1] > 0)[:, None]
        bot = dl[1:] * (lam[1:] < 0)[:, None]
        return np.vstack([top, bot, 2 * c[None]])

    for k in range(restarts):
        rng = substream(seed, "nullspace", k)
        res = levenberg_marquardt(resid, jac, _unit(rng, m), max_iter=max_iter,
                                  ftol=1e-13, stall=1e-3, max_mu=1e8)
        c = res.x / np.linalg.norm(res.x)
        yield float(np.linalg.norm(resid(c)[:-1])), k, Q_of(c)


def _truncated_witness(Q):
    lam, W = np.linalg.eigh(Q)
    hi, lo = max(lam[-1], 0.0), min(lam[0], 0.0)
    return np.sqrt(hi) * W[:, -1], np.sqrt(-lo) * W[:, 0]


@dataclass
class CertifyConfig:
    restarts: int = 64
    sphere_samples: int = 512
    seed: int = 0
    null_rtol: float = 1e-10
    eig_rtol: float = 1e-9
    jacobian_tol: float = 1e-6
    collision_tol: float = 1e-10
    witness_tol: float = 1e-8
    # After a bounds-layer verdict, still look for an explicit witness.
    witness_on_bounds: bool = True

    def __post_init__(self):
        if self.restarts < 1 or self.sphere_samples < 1:
            raise InputError("restarts and sphere_samples must be >= 1")
        for name in ("null_rtol", "eig_rtol", "jacobian_tol", "collision_tol", "witness_tol"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive")
        self.seed = check_seed(self.seed)


@dataclass
class Certificate:
    verdict: str
    decided_by: str
    witness: Optional[tuple] = None           # (x, y) signal pair
    witness_Q: Optional[np.ndarray] = None
    witness_absent: bool = False
    nullspace_dim: Optional[int] = None
    generator_class: Optional[str] = None
    evidence: dict = field(default_factory=dict)
    config: Optional[CertifyConfig] = None

    def to_dict(self):
        out = {
            "verdict": self.verdict,
            "decided_by": self.decided_by,
            "witness": None,
            "witness_Q": None,
            "witness_absent": self.witness_absent,
            "nullspace_dim": self.nullspace_dim,
            "generator_class": self.generator_class,
            "evidence": self.evidence,
            "config": asdict(self.config) if self.config else None,
            "seed": self.config.seed if self.config else None,
        }
        if self.witness is not None:
            out["witness"] = {"x": encode_array(self.witness[0]),
                              "y": encode_array(self.witness[1])}
        if self.witness_Q is not None:
            out["witness_Q"] = encode_array(self.witness_Q)
        return out


def necessary_count(ensemble):
    """Smallest N that the measurement-number bounds leave possible."""
    d = ensemble.d
    floor = d if ensemble.field == "R" else 2 * d - 1
    if d < 2:
        return floor, "trivial"
    rep = bounds.bounds_report(d, ensemble.field)
    m = rep.certified_minimum
    if m is None or m < floor:
        return floor, "jacobian rank floor"
    return m, "exact" if rep.exact is not None else "lower"


def _verified(ensemble, x, y, cfg):
    x, y = np.asarray(x), np.asarray(y)
    if ensemble.field == "R":
        x, y = np.real(x), np.real(y)
    return verify_witness(ensemble, x, y, cfg.witness_tol), x, y


def certify_pr(ensemble, config=None):
    """Layered decision of the phase retrieval property.

    1. bounds: N below the minimal measurement number refutes PR outright.
    2. null space of dimension 0 certifies PR; dimension 1 is decided exactly
       by the eigenvalue signs of its generator.
    3. larger null spaces: randomized witness searches plus sampled Jacobian
       singular values.
    """
    cfg = config or CertifyConfig()
    if not isinstance(ensemble, Ensemble):
        raise InputError("certify_pr needs an Ensemble")
    ens_n = ensemble.normalized()
    evidence = {"min_sigma_jacobian": None, "restarts": 0, "collision_best": None}

    need, how = necessary_count(ensemble)
    if ensemble.N < need:
        cert = Certificate(CERTIFIED_NOT_PR, "bounds", witness_absent=True,
                           evidence=dict(evidence, bound=need, bound_kind=how), config=cfg)
        if cfg.witness_on_bounds:
            found, best = _search_collisions(ensemble, cfg.restarts, cfg.seed, cfg.collision_tol)
            cert.evidence["restarts"] = cfg.restarts if found is None else found.restart + 1
            cert.evidence["collision_best"] = best.residual
            if found is not None:
                ok, x, y = _verified(ensemble, found.x, found.y, cfg)
                if ok:
                    cert.witness, cert.witness_absent = (x, y), False
        return cert

    ns = trace_nullspace(ens_n, cfg.null_rtol)
    if ns.dim == 0:
        return Certificate(CERTIFIED_PR, "nullspace_exact", nullspace_dim=0,
                           evidence=evidence, config=cfg)
    if ns.dim == 1:
        Q = ns.basis[0]
        cls = eigen_sign_test(Q, cfg.eig_rtol)
        if cls != INDEFINITE:
            return Certificate(CERTIFIED_PR, "nullspace_exact", nullspace_dim=1,
                               generator_class=cls, evidence=evidence, config=cfg)
        x, y = witness_from_Q(Q, cfg.eig_rtol)
        ok, x, y = _verified(ensemble, x, y, cfg)
        if not ok:
            c = _polish_pair(ens_n, x, y)
            ok, x, y = _verified(ensemble, c.x, c.y, cfg)
        if ok:
            return Certificate(CERTIFIED_NOT_PR, "nullspace_exact", witness=(x, y),
                               witness_Q=Q, nullspace_dim=1, generator_class=cls,
                               evidence=evidence, config=cfg)
        # Numerically marginal generator; fall through to the randomized layer.

    # Randomized layer.
    evidence["restarts"] = cfg.restarts
    for resid, _, Q in _witness_class_search(ns, ensemble.d, cfg.restarts, cfg.seed):
        if resid > 1e-6:
            continue
        x, y = _truncated_witness(Q)
        c = _polish_pair(ens_n, x, y)
        if c.residual <= cfg.collision_tol:
            ok, x, y = _verified(ensemble, c.x, c.y, cfg)
            if ok:
                return Certificate(CERTIFIED_NOT_PR, "witness", witness=(x, y), witness_Q=Q,
                                   nullspace_dim=ns.dim, evidence=evidence, config=cfg)

    found, best = _search_collisions(ensemble, cfg.restarts, cfg.seed, cfg.collision_tol)
    evidence["collision_best"] = best.residual
    if found is not None:
        ok, x, y = _verified(ensemble, found.x, found.y, cfg)
        if ok:
            return Certificate(CERTIFIED_NOT_PR, "witness", witness=(x, y),
                               nullspace_dim=ns.dim, evidence=evidence, config=cfg)

    F = real_stack(ens_n)
    rng = substream(cfg.seed, "sphere")
    X = rng.standard_normal((cfg.sphere_samples, F.shape[1]))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    sv = _batch_jacobian_sv(F, X)[:, _rank_index(ensemble)]
    evidence["min_sigma_jacobian"] = float(sv.min())
    if sv.min() > cfg.jacobian_tol:
        return Certificate(LIKELY_PR, "randomized", nullspace_dim=ns.dim,
                           evidence=evidence, config=cfg)
    return Certificate(INCONCLUSIVE, "randomized", nullspace_dim=ns.dim,
                       evidence=evidence, config=cfg)


@dataclass
class BilinearVerdict:
    verdict: str                    # "likely_nonsingular" | "singular"
    witness: Optional[tuple] = None
    min_found: float = float("nan")
    restarts: int = 0

    @property
    def singular(self):
        return self.verdict == "singular"

    def to_dict(self):
        return {"verdict": self.verdict,
                "witness": None if self.witness is None else
                {"x": self.witness[0].tolist(), "y": self.witness[1].tolist()},
                "min_found": self.min_found, "restarts": self.restarts}


def bilinear_nonsingularity(matrices, restarts=64, seed=0, tol=1e-10):
    """Search for unit x, y with x^T B_j y = 0 for all j.

    The B_j are scaled to unit total Frobenius norm first.  A residual at or
    below ``tol`` yields ``singular`` with a witness that has been re-checked
    by direct evaluation; otherwise ``likely_nonsingular`` with the smallest
    residual seen.
    """
    B = np.asarray(matrices, dtype=float)
    if B.ndim == 2:
        B = B[None]
    if B.ndim != 3 or len(B) < 1:
        raise InputError("expected a stack of p x q matrices")
    if restarts < 1:
        raise InputError("restarts must be >= 1")
    nrm = np.linalg.norm(B)
    Bn = B / nrm if nrm > 0 else B
    p, q = B.shape[1:]
    seed = check_seed(seed)
    best = np.inf
    for k in range(restarts):
        rng = substream(seed, "bilinear", k)
        x, y, r = _bilinear_lm(Bn, _unit(rng, p), _unit(rng, q))
        best = min(best, r)
        if r <= tol:
            direct = np.max(np.abs(np.einsum("i,jik,k->j", x, Bn, y)))
            if direct <= 1e-9:
                return BilinearVerdict("singular", (x, y), r, k + 1)
    return BilinearVerdict("likely_nonsingular", None, float(best), restarts)
