"""Root-zeta matrices of type A_r: representation, path detection,
relabeling moves, product embedding and numeric evaluation.

Entry (i, j) holds the exponent of the interval sum m_i + ... + m_j.
Entries are complex numbers or :class:`AffineExpr`; zero entries are never
stored.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence


from .affine import AffineExpr
from .errors import ConvergenceCheckFailed, OutOfDomain
from .lattice import generic_sum, two_chain_sum
from .mzf import LatticePlan, mzf_eval

SYMBOLIC_MAX_R = 6
NUMERIC_MAX_R = 4


def _is_zero(v) -> bool:
    if isinstance(v, AffineExpr):
        return v.is_zero()
    return complex(v) == 0


def _norm_value(v):
    if isinstance(v, AffineExpr):
        return v
    if isinstance(v, str):
        return AffineExpr.parse(v)
    return complex(v)


class RootZetaMatrix:
    __slots__ = ("r", "entries")

    def __init__(self, r: int, entries: Mapping[tuple[int, int], object] | None = None):
        if r < 1 or r > SYMBOLIC_MAX_R:
            raise ValueError(f"depth r={r} outside 1..{SYMBOLIC_MAX_R}")
        self.r = r
        ent = {}
        for (i, j), v in (entries or {}).items():
            if not (1 <= i <= j <= r):
                raise ValueError(f"entry ({i},{j}) is not upper-triangular in r={r}")
            v = _norm_value(v)
            if not _is_zero(v):
                ent[(i, j)] = v
        self.entries = dict(sorted(ent.items()))

    def get(self, i: int, j: int):
        return self.entries.get((i, j), 0)

    def with_entries(self, updates: Mapping[tuple[int, int], object]) -> "RootZetaMatrix":
        ent = dict(self.entries)
        for k, v in updates.items():
            ent[k] = v
        return RootZetaMatrix(self.r, ent)

    def is_concrete(self) -> bool:
        return all(not isinstance(v, AffineExpr) or v.is_constant() for v in self.entries.values())

    def concrete(self, bindings: Mapping[str, object] | None = None) -> "RootZetaMatrix":
        b = bindings or {}
        ent = {}
        for k, v in self.entries.items():
            ent[k] = complex(v.evaluate(b)) if isinstance(v, AffineExpr) else complex(v)
        return RootZetaMatrix(self.r, ent)

    def substitute(self, mapping) -> "RootZetaMatrix":
        ent = {}
        for k, v in self.entries.items():
            ent[k] = v.substitute(mapping) if isinstance(v, AffineExpr) else v
        return RootZetaMatrix(self.r, ent)

    def intervals(self) -> list[tuple[int, int]]:
        return list(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, RootZetaMatrix) and self.r == other.r and self.entries == other.entries

    def __hash__(self):
        return hash((self.r, tuple((k, _val_key(v)) for k, v in self.entries.items())))

    # text form: row-major upper triangle, "_" or "0" for zero
    def to_text(self) -> str:
        rows = []
        for i in range(1, self.r + 1):
            cells = [_fmt(self.get(i, j)) for j in range(i, self.r + 1)]
            rows.append("[" + ",".join(cells) + "]")
        return "[" + ",".join(rows) + "]"

    @classmethod
    def parse(cls, text: str) -> "RootZetaMatrix":
        body = text.strip()
        if not (body.startswith("[[") and body.endswith("]]")):
            raise ValueError(f"matrix text must look like [[a,b],[c]], got {text!r}")
        rows = re.findall(r"\[([^\[\]]*)\]", body[1:-1])
        r = len(rows)
        ent = {}
        for i, row in enumerate(rows, start=1):
            cells = [c.strip() for c in row.split(",")]
            if len(cells) != r - i + 1:
                raise ValueError(f"row {i} must have {r - i + 1} cells")
            for off, c in enumerate(cells):
                if c in ("_", "0", ""):
                    continue
                ent[(i, i + off)] = AffineExpr.parse(c)
        m = cls(r, ent)
        if all(isinstance(v, AffineExpr) and v.is_constant() for v in m.entries.values()):
            m = m.concrete()
        return m

    def to_json(self) -> dict:
        ent = []
        for (i, j), v in self.entries.items():
            val = v.to_json() if isinstance(v, AffineExpr) else AffineExpr(v).to_json()
            ent.append({"pos": [i, j], "exp": val})
        return {"r": self.r, "entries": ent}

    @classmethod
    def from_json(cls, d) -> "RootZetaMatrix":
        return cls(d["r"], {(e["pos"][0], e["pos"][1]): AffineExpr.from_json(e["exp"]) for e in d["entries"]})

    def __repr__(self) -> str:
        return f"RootZetaMatrix({self.to_text()})"

    def render(self) -> str:
        """Multi-line rendering in the upper-triangular layout."""
        cells = [[_fmt(self.get(i, j)) for j in range(i, self.r + 1)] for i in range(1, self.r + 1)]
        width = max(len(c) for row in cells for c in row)
        lines = []
        for i, row in enumerate(cells):
            lines.append(" " * ((width + 1) * i) + " ".join(c.rjust(width) for c in row))
        return "\n".join(lines)


def _fmt(v) -> str:
    if isinstance(v, AffineExpr):
        return str(v)
    v = complex(v)
    if v == 0:
        return "0"
    return str(AffineExpr(v))


def _val_key(v):
    return v.key() if isinstance(v, AffineExpr) else (complex(v).real, complex(v).imag, ())


# ---------------------------------------------------------------- shape


def _parent_map(ivs: Sequence[tuple[int, int]]):
    """Smallest strictly containing interval for each interval, or None.
    Returns None overall when the family is not laminar."""
    for a, b in itertools.combinations(ivs, 2):
        inter = not (a[1] < b[0] or b[1] < a[0])
        nested = (a[0] <= b[0] and b[1] <= a[1]) or (b[0] <= a[0] and a[1] <= b[1])
        if inter and not nested:
            return None
    parent = {}
    for x in ivs:
        best = None
        for y in ivs:
            if y != x and y[0] <= x[0] and x[1] <= y[1]:
                if best is None or (y[1] - y[0]) < (best[1] - best[0]):
                    best = y
        parent[x] = best
    return parent


def _size(iv) -> int:
    return iv[1] - iv[0] + 1


@dataclass
class Shape:
    kind: str  # path | two_chain | other
    path: list = field(default_factory=list)  # intervals, inner to outer (path kind)
    A: list = field(default_factory=list)
    B: list = field(default_factory=list)
    merged: tuple | None = None
    totals: list = field(default_factory=list)


def analyze(m: RootZetaMatrix) -> Shape:
    """Classify the nonzero support of ``m``.

    path: a single nested chain of intervals ending at [1, r].
    two_chain: two chains (each step adding one variable) below a branch
    node, then nested totals each adding one variable.  The branch node is
    the merged entry when it adds no variable of its own; a product of two
    chains (no branch node at all) also counts, with no totals.
    The chains need not be adjacent; such layouts are normalized by
    relabeling before a partial-fraction step.
    """
    ivs = m.intervals()
    if not ivs:
        return Shape("other")
    parent = _parent_map(ivs)
    if parent is None:
        return Shape("other")
    children: dict = {iv: [] for iv in ivs}
    roots = []
    for iv, p in parent.items():
        if p is None:
            roots.append(iv)
        else:
            children[p].append(iv)

    def own(iv) -> int:
        return _size(iv) - sum(_size(c) for c in children[iv])

    def chain_down(top):
        seq = [top]
        while children[seq[-1]]:
            if len(children[seq[-1]]) != 1:
                return None
            seq.append(children[seq[-1]][0])
        seq.reverse()
        if any(own(iv) != 1 for iv in seq):
            return None
        return seq

    if len(roots) == 2:
        c1, c2 = sorted(roots)
        A, B = chain_down(c1), chain_down(c2)
        if A is None or B is None or _size(c1) + _size(c2) != m.r:
            return Shape("other")
        return Shape("two_chain", A=A, B=B)
    if len(roots) != 1 or roots[0] != (1, m.r):
        return Shape("other")
    upper = []
    node = roots[0]
    while len(children[node]) == 1:
        upper.append(node)
        node = children[node][0]
    if not children[node]:
        chain = list(reversed(upper + [node]))
        return Shape("path", path=chain)
    if len(children[node]) != 2:
        return Shape("other")
    c1, c2 = sorted(children[node])
    A, B = chain_down(c1), chain_down(c2)
    if A is None or B is None:
        return Shape("other")
    totals_ivs = list(reversed(upper + [node]))
    merged = None
    if own(node) == 0:
        merged = node
        totals_ivs = totals_ivs[1:]
    if any(own(t) != 1 for t in totals_ivs):
        return Shape("other")
    return Shape("two_chain", A=A, B=B, merged=merged, totals=totals_ivs)


def canonical_two_chain(m: RootZetaMatrix, sh: Shape) -> RootZetaMatrix:
    """Layout with A on row 1 (cols 1..p), B on row p+1 (cols p+1..p+q),
    the merged entry at (1, p+q) and totals at (1, p+q+1..r)."""
    p, q = len(sh.A), len(sh.B)
    ent = {}
    for i, iv in enumerate(sh.A, start=1):
        ent[(1, i)] = m.entries[iv]
    for i, iv in enumerate(sh.B, start=1):
        ent[(p + 1, p + i)] = m.entries[iv]
    if sh.merged is not None:
        ent[(1, p + q)] = m.entries[sh.merged]
    for i, iv in enumerate(sh.totals, start=1):
        ent[(1, p + q + i)] = m.entries[iv]
    return RootZetaMatrix(m.r, ent)


def is_ez_path(m: RootZetaMatrix) -> tuple | None:
    """MZF index of a path-shaped matrix (zeros filled in where a path step
    adds several variables), or None."""
    sh = analyze(m)
    if sh.kind != "path":
        return None
    idx = []
    prev = 0
    for iv in sh.path:
        gap = _size(iv) - prev
        idx.extend([0] * (gap - 1))
        idx.append(m.entries[iv])
        prev = _size(iv)
    if prev != m.r:
        return None
    return tuple(idx)


def path_matrix(index: Sequence, shape: Sequence[str] | None = None) -> RootZetaMatrix:
    """Embed an MZF index along a path; ``shape`` lists moves 'U' (extend
    upward, i.e. grow the interval to the left) or 'R' (grow right), one per
    step after the starting diagonal cell."""
    r = len(index)
    shape = list(shape or ["R"] * (r - 1))
    if len(shape) != r - 1:
        raise ValueError("shape needs r-1 moves")
    start = 1 + shape.count("U")
    i = j = start
    ent = {(i, j): index[0]}
    for mv, v in zip(shape, index[1:]):
        if mv == "U":
            i -= 1
        else:
            j += 1
        ent[(i, j)] = v
    return RootZetaMatrix(r, ent)


def all_path_shapes(r: int):
    return [list(p) for p in itertools.product("UR", repeat=r - 1)]


# ---------------------------------------------------------------- relabel


def permute(m: RootZetaMatrix, perm: Sequence[int]) -> RootZetaMatrix | None:
    """Transport entries by the variable map i -> perm[i-1]; None if some
    interval is not mapped onto an interval."""
    ent = {}
    for (i, j), v in m.entries.items():
        imgs = sorted(perm[x - 1] for x in range(i, j + 1))
        if imgs[-1] - imgs[0] != j - i:
            return None
        ent[(imgs[0], imgs[-1])] = v
    return RootZetaMatrix(m.r, ent)


def find_relabel(m1: RootZetaMatrix, m2: RootZetaMatrix) -> tuple[int, ...] | None:
    if m1.r != m2.r or len(m1.entries) != len(m2.entries):
        return None
    if sorted(_val_key(v) for v in m1.entries.values()) != sorted(_val_key(v) for v in m2.entries.values()):
        return None
    for perm in itertools.permutations(range(1, m1.r + 1)):
        img = permute(m1, perm)
        if img is not None and img == m2:
            return perm
    return None


def relabel_equivalent(m1: RootZetaMatrix, m2: RootZetaMatrix) -> bool:
    return find_relabel(m1, m2) is not None


def embed_product(a: Sequence, b: Sequence) -> RootZetaMatrix:
    p, q = len(a), len(b)
    if p + q > SYMBOLIC_MAX_R:
        raise ValueError("embedProduct needs depth(a)+depth(b) <= 6")
    ent = {}
    for i, v in enumerate(a, start=1):
        ent[(1, i)] = v
    for i, v in enumerate(b, start=1):
        ent[(p + 1, p + i)] = v
    return RootZetaMatrix(p + q, ent)


# ---------------------------------------------------------------- numerics


def convergence_guard(m: RootZetaMatrix) -> None:
    for i in range(1, m.r + 1):
        tot = sum(complex(v).real for (a, b), v in m.entries.items() if a <= i <= b)
        if not tot > 1:
            raise ConvergenceCheckFailed(f"variable {i} has total exponent {tot:.4g} <= 1 in {m.to_text()}")


def blocks(m: RootZetaMatrix) -> list[tuple[int, int]]:
    """Contiguous variable ranges that do not share any entry."""
    cover = [0] * (m.r + 2)
    for (i, j) in m.entries:
        for x in range(i, j):
            cover[x] = 1  # x and x+1 are linked
    out = []
    start = 1
    for x in range(1, m.r + 1):
        if not cover[x]:
            out.append((start, x))
            start = x + 1
    return out


def sub_matrix(m: RootZetaMatrix, lo: int, hi: int) -> RootZetaMatrix:
    ent = {(i - lo + 1, j - lo + 1): v for (i, j), v in m.entries.items() if lo <= i and j <= hi}
    return RootZetaMatrix(hi - lo + 1, ent)


def root_zeta_eval(m: RootZetaMatrix, plan: LatticePlan | None = None) -> tuple[complex, float]:
    """Numeric value of a concrete root-zeta matrix."""
    plan = plan or LatticePlan()
    if not m.is_concrete():
        raise ValueError("root_zeta_eval needs concrete entries")
    m = m.concrete()
    if m.r > NUMERIC_MAX_R:
        raise OutOfDomain(f"numeric evaluation is capped at r={NUMERIC_MAX_R}")
    convergence_guard(m)
    val, err = 1.0 + 0j, 0.0
    for lo, hi in blocks(m):
        v, e = _eval_block(sub_matrix(m, lo, hi), plan)
        err = abs(val) * e + abs(v) * err + e * err
        val *= v
    return val, err


def _eval_block(m: RootZetaMatrix, plan: LatticePlan) -> tuple[complex, float]:
    idx = is_ez_path(m)
    if idx is not None:
        try:
            return mzf_eval([complex(v) for v in idx], plan)
        except OutOfDomain as exc:
            raise ConvergenceCheckFailed(str(exc)) from exc
    sh = analyze(m)
    if sh.kind == "two_chain":
        A = [m.entries[iv] for iv in sh.A]
        B = [m.entries[iv] for iv in sh.B]
        merged = m.entries[sh.merged] if sh.merged else 0j
        totals = [m.entries[iv] for iv in sh.totals]
        return two_chain_sum(A, B, merged, totals, plan)
    return generic_sum(m.entries, m.r, plan)


def mzf_index_values(idx: Iterable, bindings: Mapping[str, object]) -> list[complex]:
    return [complex(v.evaluate(bindings)) if isinstance(v, AffineExpr) else complex(v) for v in idx]
