"""Run every identity over its shipped catalog and write reports.

    python3 scripts/acceptance_campaign.py --out runs/campaign
    python3 scripts/acceptance_campaign.py --only kmt-21,kmt-31 --workers 2

The general shuffle identities use the reduced plan that fits the depth 2x2
point into a few minutes on one core; everything else uses defaults.
"""
import argparse
import json
import time
from pathlib import Path

from mzfshuffle.realize import TruncationPlan
from mzfshuffle.verifier import IDENTITIES, IdentitySpec, check_identity, load_catalog

REDUCED = TruncationPlan(cutoff=32, inner_cutoffs=(32,), max_cutoff=256, tail_tol=1e-6)
PLANS = {"shuffle-general": REDUCED, "double-shuffle-general": REDUCED}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="runs/campaign")
    ap.add_argument("--only", help="comma separated identity ids")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ids = args.only.split(",") if args.only else IDENTITIES
    print(f"{'identity':24s} {'points':>6s} {'max residual':>13s} {'seconds':>8s}  verdict")
    for ident in ids:
        spec = IdentitySpec(ident, tuple(load_catalog(ident)), PLANS.get(ident, TruncationPlan()))
        t0 = time.perf_counter()
        rep = check_identity(spec, args.workers)
        dt = time.perf_counter() - t0
        (out / f"{ident}.json").write_text(json.dumps(rep.to_json(), indent=1))
        (out / f"{ident}.csv").write_text(rep.to_csv())
        worst = max(r.residual for r in rep.results)
        print(f"{ident:24s} {len(rep.results):6d} {worst:13.3e} {dt:8.1f}  {'pass' if rep.verdict else 'FAIL'}", flush=True)


if __name__ == "__main__":
    main()
