"""Command-line driver.

    tensormm [--seed N] simulate --config PATH --out CSV [--n-jobs J]
    tensormm [--seed N] estimate --tensor PATH --ranks r1,r2,r3
                                 [--kmedians] [--iters N | --auto-iters] [--tol X]
                                 [--out-dir DIR]
    tensormm rank-select --tensor PATH --max-rank K

Exit codes: 0 success, 1 runtime failure, 2 usage or input error.
"""

import argparse
import logging
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .evaluation import kmedians
from .exceptions import TensorFormatError, TensorMMError
from .hooi import HooiOptions, estimate_snr
from .model import make_rng
from .rank import select_ranks
from .simulate import load_config, run_sweep, write_csv
from .spa import estimate_all
from .tensor_core import MODES, read_tensor

log = logging.getLogger("tensormm")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _ranks(text):
    try:
        ranks = tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"ranks must be integers, got {text!r}") from None
    if len(ranks) != 3 or min(ranks) < 1:
        raise argparse.ArgumentTypeError("ranks must be three positive integers r1,r2,r3")
    return ranks


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tensormm", description="Tensor mixed-membership estimation via HOOI + SPA.")
    parser.add_argument("--seed", type=int, default=None, help="global random seed")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a simulation sweep and write CSV")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", required=True)
    sim.add_argument("--n-jobs", type=int, default=None)

    est = sub.add_parser("estimate", help="estimate memberships of a tensor file")
    est.add_argument("--tensor", required=True)
    est.add_argument("--ranks", required=True, type=_ranks)
    est.add_argument("--kmedians", action="store_true",
                     help="also cluster factor rows with K-medians and emit labels")
    iters = est.add_mutually_exclusive_group()
    iters.add_argument("--iters", type=int, default=None, help="maximum HOOI iterations")
    iters.add_argument("--auto-iters", action="store_true",
                       help="derive the iteration count from a plug-in SNR estimate")
    est.add_argument("--tol", type=float, default=1e-9)
    est.add_argument("--out-dir", default=".")

    rs = sub.add_parser("rank-select", help="elbow rank selection per mode")
    rs.add_argument("--tensor", required=True)
    rs.add_argument("--max-rank", required=True, type=int)
    return parser


def _load_tensor(path):
    if not os.path.isfile(path):
        raise UsageError(f"no such tensor file: {path}")
    try:
        return read_tensor(path)
    except TensorFormatError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _save_matrix(path, m, header=None):
    np.savetxt(path, np.atleast_2d(m), delimiter=",", fmt="%.17g",
               header=header or "", comments="")


def cmd_simulate(args):
    if not os.path.isfile(args.config):
        raise UsageError(f"no such config file: {args.config}")
    try:
        config = load_config(args.config)
    except ValueError as exc:
        raise UsageError(f"{args.config}: {exc}") from None
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.n_jobs is not None:
        config = replace(config, n_jobs=args.n_jobs)
    records = run_sweep(config)
    write_csv(args.out, records)
    n_failed = sum(rec["status"] != "ok" for rec in records)
    print(f"wrote {len(records)} records to {args.out} ({n_failed} failed)")
    return EXIT_OK


def cmd_estimate(args):
    that = _load_tensor(args.tensor)
    for mode, (p, r) in enumerate(zip(that.shape, args.ranks), start=1):
        if r > p:
            raise UsageError(f"rank {r} exceeds dimension {p} of mode {mode}")
    if args.auto_iters:
        snr, kappa = estimate_snr(that, args.ranks)
        opts = HooiOptions(tol=args.tol, auto_iters=True, snr=snr, kappa=kappa)
    else:
        opts = HooiOptions(t_max=args.iters or 100, tol=args.tol)

    est = estimate_all(that, args.ranks, opts)
    os.makedirs(args.out_dir, exist_ok=True)
    names = ",".join(f"community_{l + 1}" for l in range(max(args.ranks)))
    with open(os.path.join(args.out_dir, "corners.csv"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write("mode,pick,index\n")
        for mode, em in zip(MODES, est.memberships):
            for pick, idx in enumerate(em.corners.indices, start=1):
                fh.write(f"{mode},{pick},{idx}\n")
    for mode, em, u in zip(MODES, est.memberships, est.factors.factors):
        r = args.ranks[mode - 1]
        header = ",".join(names.split(",")[:r])
        _save_matrix(os.path.join(args.out_dir, f"pi_mode{mode}.csv"), em.membership, header)
        _save_matrix(os.path.join(args.out_dir, f"factor_mode{mode}.csv"), u)
    with open(os.path.join(args.out_dir, "trace.csv"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write("iteration,mode,sintheta_change\n")
        for rec in est.factors.history:
            fh.write(f"{rec.iteration},{rec.mode},{rec.change:.17g}\n")

    if args.kmedians:
        seed = 0 if args.seed is None else args.seed
        for mode, u in zip(MODES, est.factors.factors):
            res = kmedians(u, args.ranks[mode - 1], rng=make_rng(seed, mode))
            np.savetxt(os.path.join(args.out_dir, f"labels_mode{mode}.csv"),
                       res.labels[:, None], fmt="%d", header="label", comments="")

    fs = est.factors
    print(f"tensor {that.shape[0]}x{that.shape[1]}x{that.shape[2]}, ranks {args.ranks}")
    print(f"HOOI iterations: {fs.iterations_run} (converged: {fs.converged})")
    last = fs.changes()[-1] if fs.history else math.nan
    print(f"final subspace change: {last:.3e}")
    for mode, em in zip(MODES, est.memberships):
        print(f"mode {mode}: corners {list(em.corners.indices)}, "
              f"cleaned rows {em.n_degenerate_rows} degenerate")
    print(f"outputs written to {args.out_dir}")
    return EXIT_OK


def cmd_rank_select(args):
    that = _load_tensor(args.tensor)
    if not 1 <= args.max_rank <= min(that.shape):
        raise UsageError(f"--max-rank must be in [1, {min(that.shape)}]")
    ranks = select_ranks(that, args.max_rank)
    print(",".join(str(r) for r in ranks))
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "rank-select": cmd_rank_select}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"tensormm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TensorMMError, OSError, np.linalg.LinAlgError) as exc:
        print(f"tensormm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
