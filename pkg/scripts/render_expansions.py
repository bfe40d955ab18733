"""Print symbolic shuffle expansions and finite integer identities.

    python3 scripts/render_expansions.py            # depth pairs up to 2x2
    python3 scripts/render_expansions.py --integer  # Euler-type tables, 2 <= a,b <= 5
"""
import argparse

from mzfshuffle.engine import expand_shuffle, finite_identity, integer_specialize

PAIRS = [(["s"], ["t"]), (["s1", "s2"], ["t"]), (["s1", "s2"], ["t1", "t2"])]


def show_symbolic(layout):
    for left, right in PAIRS:
        e = expand_shuffle(left, right)
        print(f"# {len(left)}x{len(right)}: {len(e.terms)} terms")
        print(e.render(layout))
        print()


def show_integer(top):
    e = expand_shuffle(["s"], ["t"])
    for a in range(2, top + 1):
        for b in range(a, top + 1):
            table = finite_identity(integer_specialize(e, {"s": a, "t": b}))
            rhs = " + ".join(f"{c}*zeta({i},{j})" for (i, j), c in table.items())
            print(f"zeta({a}) zeta({b}) = {rhs}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--integer", action="store_true")
    ap.add_argument("--layout", default="zeta", choices=("zeta", "matrix"))
    ap.add_argument("--top", type=int, default=5)
    args = ap.parse_args()
    if args.integer:
        show_integer(args.top)
    else:
        show_symbolic(args.layout)
