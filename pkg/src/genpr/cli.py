"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 inconclusive certification.
"""

import argparse
import csv
import json
import sys

import numpy as np

from . import bilinear as bl
from ._rng import substream
from .bounds import bounds_report, bounds_table, sharp_lower_bound
from .certify import (CERTIFIED_NOT_PR, INCONCLUSIVE, CertifyConfig,
                      bilinear_nonsingularity, certify_pr)
from .core import InputError, measure
from .ensembles import BUILTINS, KINDS, GenSpec, gen
from .io import (encode_array, ensemble_to_dict, load_ensemble, load_vector)
from .recover import RecoveryConfig, recover
from .sweep import SweepSpec, run_sweep, write_csv

EXIT_OK, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 2, 3


def _emit(obj, out):
    text = json.dumps(obj, indent=1) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _ensemble_arg(args):
    if getattr(args, "builtin", None):
        return BUILTINS[args.builtin]()
    if not args.ensemble:
        raise InputError("give --ensemble PATH or --builtin NAME")
    return load_ensemble(args.ensemble)


def _parse_ranks(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"--ranks: expected comma-separated integers, got {text!r}") from None


def cmd_gen(args):
    if args.ranks is not None:
        ranks = _parse_ranks(args.ranks)
    else:
        ranks = args.rank
    spec = GenSpec(args.d, args.n, args.field, args.kind, ranks, args.seed)
    _emit(ensemble_to_dict(gen(spec)), args.out)
    return EXIT_OK


def cmd_certify(args):
    ens = _ensemble_arg(args)
    cfg = CertifyConfig(restarts=args.restarts, sphere_samples=args.samples,
                        seed=args.seed, witness_tol=args.tol)
    cert = certify_pr(ens, cfg)
    _emit(cert.to_dict(), args.out)
    return EXIT_INCONCLUSIVE if cert.verdict == INCONCLUSIVE else EXIT_OK


def cmd_bounds(args):
    if args.table:
        if not args.dmax:
            raise InputError("--table needs --dmax")
        fields = (args.field,) if args.field else ("R", "C")
        fh = open(args.out, "w", newline="") if args.out else sys.stdout
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["d", "field", "lower", "upper", "exact", "provenance"])
        for rep in bounds_table(args.dmax, fields):
            w.writerow([rep.d, rep.field, _blank(rep.lower), _blank(rep.upper),
                        _blank(rep.exact), json.dumps(rep.provenance, sort_keys=True)])
        if args.out:
            fh.close()
        return EXIT_OK
    if not args.d:
        raise InputError("bounds needs --d D or --table --dmax D")
    _emit(bounds_report(args.d, args.field or "R").to_dict(), args.out)
    return EXIT_OK


def _blank(v):
    return "" if v is None else v


def cmd_recover(args):
    ens = _ensemble_arg(args)
    if args.b:
        b = load_vector(args.b, "R")
    elif args.signal:
        b = measure(ens, load_vector(args.signal, ens.field))
    else:
        raise InputError("give --b PATH (measurements) or --signal PATH")
    if b.shape != (ens.N,):
        raise InputError(f"{args.b}: expected {ens.N} measurements, got {len(b)}")
    if args.noise:
        b = b + args.noise * substream(args.seed, "noise").standard_normal(len(b))
    rep = recover(ens, b, RecoveryConfig(seed=args.seed, gn_tol=args.tol))
    if not args.no_certify:
        cert = certify_pr(ens, CertifyConfig(restarts=args.restarts, seed=args.seed))
        rep.non_unique = cert.verdict == CERTIFIED_NOT_PR
    out = rep.to_dict()
    out["b"] = np.asarray(b).tolist()
    _emit(out, args.out)
    return EXIT_OK


def cmd_bilinear(args):
    if args.algebra:
        form = bl.normed_form(args.algebra)
    elif args.p and args.q and args.n:
        form = bl.generic_form(args.p, args.q, args.n, args.rank, args.seed)
    else:
        raise InputError("bilinear needs --algebra NAME or --p P --q Q --n N")
    p, q, N = form.size
    verdict = bilinear_nonsingularity(form.matrices, args.restarts, args.seed)
    _emit({
        "size": [p, q, N],
        "matrices": encode_array(form.matrices),
        "stiefel_hopf_lower_bound": sharp_lower_bound(p, q),
        **verdict.to_dict(),
    }, args.out)
    return EXIT_OK


def cmd_sweep(args):
    spec = SweepSpec(args.dmin, args.dmax, args.nmin, args.nmax, args.field or "R",
                     args.kind, args.ranks_policy, args.rank, args.trials,
                     args.restarts, args.seed)
    rows, summary = run_sweep(spec, args.workers)
    try:
        fh = open(args.out, "w", newline="") if args.out else sys.stdout
    except OSError as exc:
        raise InputError(f"{args.out}: {exc.strerror}") from None
    write_csv(rows, summary, fh, args.timing)
    if args.out:
        fh.close()
    return EXIT_OK


def _shared(p, field_default="R"):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--field", choices=["R", "C"], default=field_default)


def build_parser():
    ap = argparse.ArgumentParser(prog="genpr", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a measurement ensemble (JSON)")
    _shared(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kind", choices=KINDS, default="generic_rank")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--ranks", help="comma-separated r1,r2,...")
    g.add_argument("--rank", type=int)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("certify", help="decide the phase retrieval property")
    _shared(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--ensemble", metavar="PATH")
    g.add_argument("--builtin", choices=sorted(BUILTINS))
    p.add_argument("--samples", type=int, default=512, help="Jacobian sphere samples")
    p.add_argument("--tol", type=float, default=1e-8, help="witness verification tolerance")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("bounds", help="minimal measurement number bounds")
    _shared(p, field_default=None)
    p.add_argument("--d", type=int)
    p.add_argument("--table", action="store_true")
    p.add_argument("--dmax", type=int)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("recover", help="reconstruct a signal from measurements")
    _shared(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--ensemble", metavar="PATH")
    g.add_argument("--builtin", choices=sorted(BUILTINS))
    p.add_argument("--b", metavar="PATH", help="JSON list of measurements")
    p.add_argument("--signal", metavar="PATH", help="measure this signal instead")
    p.add_argument("--noise", type=float, default=0.0, help="Gaussian noise sigma added to b")
    p.add_argument("--tol", type=float, default=1e-12, help="relative residual target")
    p.add_argument("--no-certify", action="store_true",
                   help="skip the uniqueness check via certify")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("sweep", help="Monte Carlo certification sweep (CSV)")
    _shared(p)
    p.add_argument("--dmin", type=int, required=True)
    p.add_argument("--dmax", type=int, required=True)
    p.add_argument("--nmin", type=int, required=True)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--kind", choices=KINDS, default="generic_rank")
    p.add_argument("--ranks-policy", choices=["fixed", "random"], default="fixed")
    p.add_argument("--rank", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true",
                   help="add a wall_time column (output is then not reproducible)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bilinear", help="normed or generic bilinear forms")
    _shared(p)
    p.add_argument("--algebra", choices=sorted(bl.ALGEBRA_DIMS))
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--rank", type=int)
    p.set_defaults(func=cmd_bilinear)
    return ap


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
