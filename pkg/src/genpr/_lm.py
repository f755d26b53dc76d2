"""Levenberg-damped Gauss-Newton for small dense least-squares problems."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class LMResult:
    x: np.ndarray
    cost: float                 # 0.5 * |r|^2 at x
    iterations: int
    converged: bool
    history: list = field(default_factory=list)   # |r| after each accepted step


def levenberg_marquardt(resid, jac, x0, *, max_iter=200, ftol=0.0, mu0=1e-3,
                        shrink=0.5, grow=4.0, max_mu=1e12, stall=None, stop=None):
    """Minimize 0.5 * |resid(x)|^2.

    Steps solve (J^T J + mu * s I) dx = -J^T r with s the mean diagonal of
    J^T J, so ``mu`` is dimensionless.  A step is accepted only if it lowers
    the cost; mu is multiplied by ``shrink`` on acceptance and by ``grow`` on
    rejection.  Iteration stops when ``|r| <= ftol``, when ``stop(x, r)``
    returns true, when mu exceeds ``max_mu``, after ``max_iter`` steps, or,
    if ``stall`` is given, after three consecutive accepted steps that each
    reduce |r| by less than the fraction ``stall``.
    """
    x = np.array(x0, dtype=float)
    r = resid(x)
    norm = np.linalg.norm(r)
    history = [norm]
    mu = mu0
    it = 0
    slow = 0
    done = lambda: norm <= ftol or (stop is not None and stop(x, r))
    while it < max_iter and not done():
        J = jac(x)
        g = J.T @ r
        H = J.T @ J
        s = max(np.trace(H) / len(x), np.finfo(float).tiny)
        accepted = False
        while mu <= max_mu:
            try:
                dx = np.linalg.solve(H + mu * s * np.eye(len(x)), -g)
            except np.linalg.LinAlgError:
                mu *= grow
                continue
            x_new = x + dx
            r_new = resid(x_new)
            n_new = np.linalg.norm(r_new)
            if n_new < norm:
                slow = slow + 1 if stall is not None and n_new > (1 - stall) * norm else 0
                x, r, norm = x_new, r_new, n_new
                mu = max(mu * shrink, 1e-15)
                accepted = True
                break
            mu *= grow
        it += 1
        if not accepted:
            break
        history.append(norm)
        if slow >= 3:
            break
    return LMResult(x, 0.5 * norm ** 2, it, bool(done()), history)
