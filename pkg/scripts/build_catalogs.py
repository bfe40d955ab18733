"""Regenerate the shipped point catalogs (src/mzfshuffle/catalogs/*.json).

Random entries come from numpy's default_rng(seed); rerunning with the same
seed rewrites byte-identical files.
"""
import argparse
import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "mzfshuffle" / "catalogs"


def c(z: complex) -> str | float:
    z = complex(z)
    if z.imag == 0:
        return float(z.real)
    return f"{z.real:g}{z.imag:+g}j"


def catalogs(seed: int) -> dict:
    rng = np.random.default_rng(seed)
    cat = {}

    pts = []
    for _ in range(10):
        s = complex(round(rng.uniform(1.1, 3.5), 3), round(rng.uniform(-2, 2), 3))
        t = complex(round(rng.uniform(1.1, 3.5), 3), round(rng.uniform(-2, 2), 3))
        x, y = (int(v) for v in rng.integers(1, 6, size=2))
        pts.append({"s": c(s), "t": c(t), "x": x, "y": y})
    # a worked example outside the sampled box, kept as an extra point
    pts.append({"s": "1.5+0.5j", "t": 2.25, "x": 3, "y": 7})
    cat["ipfd-pointwise"] = {"points": pts}

    grid = []
    # real parts of every parameter range over {0.5, 1.5, 2.5}
    for s in (0.5, 1.5 + 0.5j, 2.5 - 0.25j):
        for t in (0.5 + 0.3j, 1.5, 2.5):
            for x in (0.5, 1.5, 2.5 + 1j):
                for y in (0.5, 1.5 - 0.5j, 2.5):
                    grid.append({"s": c(s), "t": c(t), "x": c(x), "y": c(y)})
    cat["connection-formula"] = {"points": grid}

    cat["pfd-classical"] = {"generator": {"kind": "rational-pfd", "a_max": 8, "b_max": 8, "per_pair": 50}}
    cat["binomial-inversion"] = {"generator": {"kind": "integer-tables", "tables": 100, "lmax": 8}}

    dbl = [{"s": 2, "t": 2}, {"s": 2.5, "t": 3.5}, {"s": 3, "t": "2+1j"}]
    cat["shuffle-double"] = {"points": dbl}
    cat["double-shuffle-double"] = {"points": dbl}

    cat["shuffle-general"] = {
        "points": [
            {"left": [1.5, 2.5], "right": [2.25]},
            {"left": [1.5, 2.5], "right": [1.5, 2.5]},
        ]
    }
    stuffle = [{"left": [2.5], "right": [3.5]}]
    for depth in ((1, 1), (2, 1), (1, 2), (2, 2)):
        left = [c(complex(round(rng.uniform(1.2, 3.0), 3), round(rng.uniform(-1.5, 1.5), 3))) for _ in range(depth[0])]
        right = [c(complex(round(rng.uniform(1.2, 3.0), 3), round(rng.uniform(-1.5, 1.5), 3))) for _ in range(depth[1])]
        # the last entry of each side needs Re > 1; a little margin keeps the
        # lattice tails short
        stuffle.append({"left": left, "right": right})
    cat["stuffle-general"] = {"points": stuffle}
    cat["double-shuffle-general"] = {"points": [{"left": [2.5], "right": [3.5]}, {"left": [1.5, 2.5], "right": [2.25]}]}

    cat["kmt-21"] = {"points": [{"s": "1.5+0.5j", "b": 2, "c": 2}, {"s": 2.5, "b": 3, "c": 2}]}
    cat["kmt-31"] = {"points": [{"s1": 1.5, "s2": 2.5, "c": 2, "d": 2}]}
    cat["sum-formula"] = {"points": [{"s": 3}, {"s": 2.5}, {"s": "2.5+1j"}]}
    return cat


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=20240611)
    ap.add_argument("--out", type=Path, default=OUT)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, body in catalogs(args.seed).items():
        body = {"id": name, "seed": args.seed, **body}
        (args.out / f"{name}.json").write_text(json.dumps(body, indent=1) + "\n")
        print(f"wrote {name}.json")


if __name__ == "__main__":
    main()
