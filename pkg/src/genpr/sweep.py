"""Monte Carlo sweeps of certify_pr over (d, N) grids of generated ensembles."""

import csv
import io
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from ._rng import check_seed, mix, substream
from .certify import (CERTIFIED_NOT_PR, CERTIFIED_PR, INCONCLUSIVE, LIKELY_PR,
                      CertifyConfig, certify_pr)
from .core import InputError, check_field
from .ensembles import KINDS, GenSpec, gen

SCHEMA = "genpr.sweep/1"
COLUMNS = ["row_type", "d", "N", "trial", "verdict", "decided_by", "witness",
           "nullspace_dim", "min_sigma_jacobian", "collision_best",
           "rate_certified_pr", "rate_likely_pr", "rate_not_pr",
           "rate_inconclusive", "rate_witness"]


@dataclass(frozen=True)
class SweepSpec:
    dmin: int
    dmax: int
    nmin: int
    nmax: int
    field: str = "R"
    kind: str = "generic_rank"
    ranks_policy: str = "fixed"     # "fixed" or "random"
    rank: int = None                # fixed policy; default per kind
    trials: int = 10
    restarts: int = 64
    seed: int = 0

    def __post_init__(self):
        check_field(self.field)
        if self.kind not in KINDS:
            raise InputError(f"unknown kind {self.kind!r}")
        if self.ranks_policy not in ("fixed", "random"):
            raise InputError("ranks policy must be 'fixed' or 'random'")
        if not (1 <= self.dmin <= self.dmax and 1 <= self.nmin <= self.nmax):
            raise InputError("empty d or N range")
        if self.trials < 1 or self.restarts < 1:
            raise InputError("trials and restarts must be >= 1")
        check_seed(self.seed)

    def cells(self):
        return [(d, N) for d in range(self.dmin, self.dmax + 1)
                for N in range(self.nmin, self.nmax + 1)]


def _ranks(spec, d, N, trial):
    if spec.kind == "frame_rank1":
        return [1] * N
    hi = d - 1 if spec.kind == "projection" else d
    if hi < 1:
        raise InputError(f"kind {spec.kind!r} needs d >= 2")
    if spec.ranks_policy == "random":
        rng = substream(spec.seed, "ranks", d, N, trial)
        return [int(r) for r in rng.integers(1, hi + 1, size=N)]
    r = spec.rank if spec.rank is not None else (1 if spec.kind == "projection" else d)
    return [min(r, hi)] * N


def run_trial(spec, d, N, trial):
    """One generated ensemble and its certificate; seeds derive from (seed, d, N, trial)."""
    tseed = mix(spec.seed, d, N, trial)
    ens = gen(GenSpec(d, N, spec.field, spec.kind, _ranks(spec, d, N, trial), tseed))
    t0 = time.perf_counter()
    cert = certify_pr(ens, CertifyConfig(restarts=spec.restarts, seed=tseed))
    ev = cert.evidence
    return {
        "row_type": "trial", "d": d, "N": N, "trial": trial,
        "verdict": cert.verdict, "decided_by": cert.decided_by,
        "witness": int(cert.witness is not None),
        "nullspace_dim": "" if cert.nullspace_dim is None else cert.nullspace_dim,
        "min_sigma_jacobian": _fmt(ev.get("min_sigma_jacobian")),
        "collision_best": _fmt(ev.get("collision_best")),
        "wall_time": f"{time.perf_counter() - t0:.4f}",
    }


def _fmt(v):
    return "" if v is None else f"{v:.6e}"


def _run_star(args):
    return run_trial(*args)


def summarize(rows):
    cells = {}
    for r in rows:
        cells.setdefault((r["d"], r["N"]), []).append(r)
    out = []
    for (d, N), rs in sorted(cells.items()):
        n = len(rs)
        c = Counter(r["verdict"] for r in rs)
        out.append({
            "row_type": "summary", "d": d, "N": N, "trial": n,
            "rate_certified_pr": f"{c[CERTIFIED_PR] / n:.4f}",
            "rate_likely_pr": f"{c[LIKELY_PR] / n:.4f}",
            "rate_not_pr": f"{c[CERTIFIED_NOT_PR] / n:.4f}",
            "rate_inconclusive": f"{c[INCONCLUSIVE] / n:.4f}",
            "rate_witness": f"{sum(r['witness'] for r in rs) / n:.4f}",
        })
    return out


def run_sweep(spec, workers=1):
    jobs = [(spec, d, N, t) for d, N in spec.cells() for t in range(spec.trials)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_run_star, jobs, chunksize=4))
    else:
        rows = [_run_star(j) for j in jobs]
    return rows, summarize(rows)


def write_csv(rows, summary, fh, timing=False):
    cols = COLUMNS + (["wall_time"] if timing else [])
    fh.write(f"# schema: {SCHEMA}\n")
    w = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows + summary:
        w.writerow(r)


def sweep_csv(spec, workers=1, timing=False):
    rows, summary = run_sweep(spec, workers)
    buf = io.StringIO()
    write_csv(rows, summary, buf, timing)
    return buf.getvalue()
