"""Residual against outer cutoff K for one identity point.

    python3 scripts/convergence.py --id ipfd-pointwise --at s=2.5+1j,t=3,x=2,y=5
    python3 scripts/convergence.py --id shuffle-double --at s=2.5,t=3.5 --tail none

Prints a table and writes CSV (K, residual, err_est) to --out if given.
"""
import argparse
import csv
import sys

from mzfshuffle.cli import parse_bindings
from mzfshuffle.realize import TruncationPlan
from mzfshuffle.verifier import DEFAULT_TOL, check_point


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--id", default="ipfd-pointwise")
    ap.add_argument("--at", default="s=2.5+1j,t=3,x=2,y=5")
    ap.add_argument("--cutoffs", default="16,32,64,128,256,512")
    ap.add_argument("--tail", default="fit", choices=("fit", "none"))
    ap.add_argument("--out")
    args = ap.parse_args()

    point = parse_bindings(args.at)
    rows = []
    for K in (int(k) for k in args.cutoffs.split(",")):
        # pin the cutoff so the curve shows truncation error, not the doubling loop
        plan = TruncationPlan(cutoff=K, max_cutoff=K, tail=args.tail)
        r = check_point(args.id, point, plan, DEFAULT_TOL[args.id])
        rows.append((K, r.residual, r.err_est, r.error or ""))
        print(f"{K:6d}  {r.residual:10.3e}  {r.err_est:10.3e}  {r.error or ''}", flush=True)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["K", "residual", "err_est", "error"])
            w.writerows(rows)


if __name__ == "__main__":
    sys.exit(main())
