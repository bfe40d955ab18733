"""Symbolic shuffle-product expansion by repeated infinite partial fractions.

A product zeta(a) zeta(b) is embedded as a two-chain root-zeta matrix.  Each
step splits the last entries x^-s, y^-t of the two chains:

    x^-s y^-t = sum_k [ B(t+k-1,k) x^(k-s) (x+y)^-(t+k)
                      - B(s+t+k-1,s+k) x^-k (x+y)^-(s+t+k) ]
              + sum_k [ B(s+k-1,k) y^(k-t) (x+y)^-(s+k)
                      - B(s+t+k-1,t+k) y^-k (x+y)^-(s+t+k) ]

with B the generalized binomial.  When a split exponent is a nonpositive
integer -n, x^-s (x+y - x)^n is expanded by the binomial theorem instead,
giving one finite alternating family.  The recursion stops when every
matrix is a single chain, i.e. a multiple zeta function.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .affine import AffineExpr
from .errors import DepthCapExceeded, InvalidTarget, NoCertifiedMove, NotAnInteger
from .rootzeta import (
    RootZetaMatrix,
    analyze,
    canonical_two_chain,
    embed_product,
    find_relabel,
    is_ez_path,
)

DEPTH_CAP = 4
_INDEX_NAME = re.compile(r"[kjl]\d*$")


@dataclass(frozen=True)
class CoeffFactor:
    """``binom``: B(top, bottom).  ``signed``: (-1)^bottom C(top, bottom) with
    an integer-valued top and a finite bottom index."""

    kind: str
    top: AffineExpr
    bottom: AffineExpr
    sign: int = 1

    def __post_init__(self):
        if self.kind not in ("binom", "signed"):
            raise ValueError(f"unknown coefficient kind {self.kind!r}")

    def substitute(self, mapping) -> "CoeffFactor":
        return replace(self, top=self.top.substitute(mapping), bottom=self.bottom.substitute(mapping))

    def symbols(self) -> set[str]:
        return self.top.symbols() | self.bottom.symbols()

    def to_json(self) -> dict:
        return {"kind": self.kind, "top": self.top.to_json(), "bottom": self.bottom.to_json(), "sign": self.sign}

    @classmethod
    def from_json(cls, d) -> "CoeffFactor":
        return cls(d["kind"], AffineExpr.from_json(d["top"]), AffineExpr.from_json(d["bottom"]), d.get("sign", 1))

    def __str__(self) -> str:
        s = "-" if self.sign < 0 else ""
        if self.kind == "binom":
            return f"{s}B({self.top}, {self.bottom})"
        return f"{s}(-1)^{self.bottom} C({self.top}, {self.bottom})"


@dataclass(frozen=True)
class SumIndex:
    name: str
    upper: AffineExpr | None = None  # inclusive upper bound; None means 0..infinity

    @property
    def finite(self) -> bool:
        return self.upper is not None

    def to_json(self) -> dict:
        return {"name": self.name, "upper": None if self.upper is None else self.upper.to_json()}

    @classmethod
    def from_json(cls, d) -> "SumIndex":
        up = d.get("upper")
        return cls(d["name"], None if up is None else AffineExpr.from_json(up))

    def __str__(self) -> str:
        return f"sum_{{{self.name}>=0}}" if self.upper is None else f"sum_{{{self.name}=0}}^{{{self.upper}}}"


@dataclass(frozen=True)
class ShuffleTerm:
    sign: int
    coeffs: tuple[CoeffFactor, ...]
    indices: tuple[SumIndex, ...]
    matrix: RootZetaMatrix

    def path_index(self):
        return is_ez_path(self.matrix)

    def rename(self, mapping: Mapping[str, str]) -> "ShuffleTerm":
        sub = {k: AffineExpr.sym(v) for k, v in mapping.items()}
        return ShuffleTerm(
            self.sign,
            tuple(c.substitute(sub) for c in self.coeffs),
            tuple(SumIndex(mapping.get(i.name, i.name), None if i.upper is None else i.upper.substitute(sub)) for i in self.indices),
            self.matrix.substitute(sub),
        )

    def to_json(self) -> dict:
        return {
            "sign": self.sign,
            "coeffs": [c.to_json() for c in self.coeffs],
            "indices": [i.to_json() for i in self.indices],
            "matrix": self.matrix.to_json(),
        }

    @classmethod
    def from_json(cls, d) -> "ShuffleTerm":
        return cls(
            d["sign"],
            tuple(CoeffFactor.from_json(c) for c in d["coeffs"]),
            tuple(SumIndex.from_json(i) for i in d["indices"]),
            RootZetaMatrix.from_json(d["matrix"]),
        )

    def canonical_key(self) -> str:
        """Serialization with indices locally renamed k1, k2, ... outermost
        first; equal keys mean structurally identical terms."""
        local = {ix.name: f"k{n}" for n, ix in enumerate(self.indices, start=1)}
        return json.dumps(self.rename(local).to_json(), sort_keys=True)

    def structural_key(self) -> tuple:
        """Sign, coefficients, index ranges and MZF index as strings, with
        indices locally renamed k1, k2, ... (outermost first)."""
        local = {ix.name: f"k{n}" for n, ix in enumerate(self.indices, start=1)}
        t = self.rename(local)
        idx = t.path_index()
        if idx is None:
            raise ValueError("structural keys are defined for path terms only")
        return (
            t.sign,
            tuple((c.kind, str(c.top), str(c.bottom)) for c in t.coeffs),
            tuple((ix.name, "inf" if ix.upper is None else str(ix.upper)) for ix in t.indices),
            tuple(str(AffineExpr.coerce(v)) for v in idx),
        )

    def render(self) -> str:
        sums = " ".join(str(i) for i in self.indices)
        coeffs = " ".join(str(c) for c in self.coeffs)
        idx = self.path_index()
        if idx is not None:
            z = f"zeta_{len(idx)}(" + ", ".join(str(AffineExpr.coerce(v)) for v in idx) + ")"
        else:
            z = f"zeta_{self.matrix.r}{self.matrix.to_text()}"
        body = " ".join(p for p in (sums, coeffs, z) if p)
        return ("+ " if self.sign > 0 else "- ") + body


@dataclass
class Expansion:
    terms: list[ShuffleTerm]
    params: list[str]
    left: list[AffineExpr]
    right: list[AffineExpr]
    origins: dict[str, ShuffleTerm] = field(default_factory=dict)  # index -> the term whose split created it
    integer_bindings: dict[str, int] = field(default_factory=dict)

    def last_params(self) -> set[str]:
        out = set()
        for side in (self.left, self.right):
            if side:
                out |= side[-1].symbols()
        return out

    def check_bindings(self, bindings: Mapping[str, complex]) -> None:
        """Domain: real part > 1 for last entries, >= 1 for the others."""
        from .errors import OutOfDomain

        for side in (self.left, self.right):
            for n, e in enumerate(side):
                v = complex(e.evaluate({**bindings, **self.integer_bindings}))
                is_last = n == len(side) - 1
                if (is_last and not v.real > 1) or (not is_last and not v.real >= 1):
                    raise OutOfDomain(f"entry {e} = {v} outside the expansion's convergence domain")

    def to_json(self) -> dict:
        return {
            "params": list(self.params),
            "left": [e.to_json() for e in self.left],
            "right": [e.to_json() for e in self.right],
            "integer_bindings": dict(self.integer_bindings),
            "terms": [t.to_json() for t in self.terms],
            "origins": {k: v.to_json() for k, v in self.origins.items()},
        }

    @classmethod
    def from_json(cls, d) -> "Expansion":
        return cls(
            terms=[ShuffleTerm.from_json(t) for t in d["terms"]],
            params=list(d["params"]),
            left=[AffineExpr.from_json(e) for e in d["left"]],
            right=[AffineExpr.from_json(e) for e in d["right"]],
            origins={k: ShuffleTerm.from_json(v) for k, v in d.get("origins", {}).items()},
            integer_bindings={k: int(v) for k, v in d.get("integer_bindings", {}).items()},
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    def render(self, layout: str = "zeta") -> str:
        """One line per term; ``layout="matrix"`` adds each term's
        upper-triangular root-zeta matrix below its line."""
        lhs = _product_text(self.left, self.right, self.integer_bindings)
        lines = [f"{lhs} ="]
        for t in self.terms:
            lines.append("  " + t.render())
            if layout == "matrix":
                lines += ["      " + row for row in t.matrix.render().splitlines()]
        return "\n".join(lines)

    def is_finite(self) -> bool:
        return all(ix.finite for t in self.terms for ix in t.indices)


def _product_text(left, right, bindings) -> str:
    def z(side):
        vals = [str(e.substitute(bindings)) for e in side]
        return f"zeta_{len(vals)}(" + ", ".join(vals) + ")"

    return f"{z(left)} {z(right)}"


# ---------------------------------------------------------------- helpers


class _Context:
    """Fresh-name counter, split origins and integer-mode flag for one
    expansion session."""

    def __init__(self, integer: bool = False):
        self.count = 0
        self.integer = integer
        self.origins: dict[str, ShuffleTerm] = {}

    def fresh(self) -> str:
        self.count += 1
        return f"_i{self.count}"


def _entry(m: RootZetaMatrix, pos) -> AffineExpr:
    return AffineExpr.coerce(m.get(*pos))


def _integer_valued(e: AffineExpr, index_names: set[str]) -> bool:
    c = e.constant
    return c.imag == 0 and float(c.real).is_integer() and e.symbols() <= index_names


def _index_bounds(e: AffineExpr, indices: Sequence[SumIndex], limit: int = 200_000):
    """(min, max) of an integer-valued expression over the index ranges.
    Infinite or hard-to-enumerate indices are treated as ranging over
    [0, inf), which keeps the bounds conservative."""
    involved = e.symbols()
    # indices whose ranges matter: those in e, and any finite-range index
    # whose bound mentions them (closure)
    names = [ix.name for ix in indices]
    pos = {n: i for i, n in enumerate(names)}
    needed = set(involved)
    changed = True
    while changed:
        changed = False
        for ix in indices:
            if ix.name in needed and ix.upper is not None:
                for s in ix.upper.symbols():
                    if s in pos and s not in needed:
                        needed.add(s)
                        changed = True
    order = [ix for ix in indices if ix.name in needed]
    if any(ix.upper is None for ix in order):
        lo, hi = float(e.constant.real), float(e.constant.real)
        for s, c in e.terms.items():
            if c > 0:
                hi = math.inf
            else:
                lo = -math.inf
        return lo, hi
    lo, hi = math.inf, -math.inf
    count = 0

    def rec(i, env):
        nonlocal lo, hi, count
        if i == len(order):
            v = e.evaluate(env).real
            lo, hi = min(lo, v), max(hi, v)
            count += 1
            if count > limit:
                raise OverflowError
            return
        ub = order[i].upper.evaluate(env).real
        for v in range(0, int(round(ub)) + 1):
            env[order[i].name] = v
            rec(i + 1, env)
        env.pop(order[i].name, None)

    try:
        rec(0, {})
    except OverflowError:
        return -math.inf, math.inf
    return lo, hi


def _add(a, b) -> AffineExpr:
    return AffineExpr.coerce(a) + AffineExpr.coerce(b)


# ---------------------------------------------------------------- moves


def normalize_move(term: ShuffleTerm) -> ShuffleTerm:
    """Relabel variables so the two active chains sit in the canonical
    layout; the move is applied only when a variable permutation certifies
    it."""
    m = term.matrix
    if is_ez_path(m) is not None:
        return term
    sh = analyze(m)
    if sh.kind != "two_chain":
        raise NoCertifiedMove(f"matrix {m.to_text()} is neither a path nor a two-chain shape")
    target = canonical_two_chain(m, sh)
    if target == m:
        return term
    if find_relabel(m, target) is None:
        raise NoCertifiedMove(f"no variable relabeling maps {m.to_text()} to {target.to_text()}")
    return replace(term, matrix=target)


def split_target(m: RootZetaMatrix):
    sh = analyze(m)
    if sh.kind != "two_chain":
        raise InvalidTarget(f"{m.to_text()} has no pair of chains to split")
    return sh.A[-1], sh.B[-1]


def ipfd_step(term: ShuffleTerm, target, ctx: _Context | None = None) -> list[ShuffleTerm]:
    """Split the entries at ``target = (pos_x, pos_y)`` and return the new
    terms, each with the merged exponent on the union interval."""
    ctx = ctx or _Context()
    m = term.matrix
    sh = analyze(m)
    if sh.kind != "two_chain":
        raise InvalidTarget(f"{m.to_text()} is not in a splittable configuration")
    px, py = tuple(target[0]), tuple(target[1])
    if {px, py} != {sh.A[-1], sh.B[-1]}:
        raise InvalidTarget(f"target {target} is not the pair of chain ends {sh.A[-1]}, {sh.B[-1]}")
    if px[1] + 1 != py[0] and py[1] + 1 != px[0]:
        raise InvalidTarget(f"chain ends {px}, {py} are not adjacent; normalize first")
    union = (min(px[0], py[0]), max(px[1], py[1]))
    s, t = _entry(m, px), _entry(m, py)
    if s.is_zero() or t.is_zero():
        raise InvalidTarget("split exponents must be nonzero")
    m0 = _entry(m, union)
    idx_names = {ix.name for ix in term.indices}

    def child(sign, coeffs, new_index, x_val, y_val, u_val):
        mat = m.with_entries({px: x_val, py: y_val, union: m0 + u_val})
        return ShuffleTerm(term.sign * sign, term.coeffs + tuple(coeffs), term.indices + (new_index,), mat)

    def nonpositive(e):
        return _integer_valued(e, idx_names) and _index_bounds(e, term.indices)[1] <= 0

    def positive(e):
        return _integer_valued(e, idx_names) and _index_bounds(e, term.indices)[0] >= 1

    # binomial collapse: y^n = (x+y - x)^n, or the mirror image
    for (e_neg, e_other, p_neg, p_other) in ((t, s, py, px), (s, t, px, py)):
        if nonpositive(e_neg):
            j = ctx.fresh()
            J = AffineExpr.sym(j)
            ix = SumIndex(j, -e_neg)
            ctx.origins[j] = term
            cf = CoeffFactor("signed", -e_neg, J)
            if p_neg == py:
                kids = [child(1, [cf], ix, e_other - J, 0, e_neg + J)]
            else:
                kids = [child(1, [cf], ix, 0, e_other - J, e_neg + J)]
            return kids

    if ctx.integer:
        if not (positive(s) and positive(t)):
            raise NotAnInteger(f"integer mode needs integer exponents of fixed sign, got {s} and {t}")
        k, l = ctx.fresh(), ctx.fresh()
        ctx.origins[k] = ctx.origins[l] = term
        K, L = AffineExpr.sym(k), AffineExpr.sym(l)
        return [
            child(1, [CoeffFactor("binom", t + K - 1, K)], SumIndex(k, s - 1), s - K, 0, t + K),
            child(1, [CoeffFactor("binom", s + L - 1, L)], SumIndex(l, t - 1), 0, t - L, s + L),
        ]

    k, l = ctx.fresh(), ctx.fresh()
    ctx.origins[k] = ctx.origins[l] = term
    K, L = AffineExpr.sym(k), AffineExpr.sym(l)
    ik, il = SumIndex(k), SumIndex(l)
    return [
        child(1, [CoeffFactor("binom", t + K - 1, K)], ik, s - K, 0, t + K),
        child(-1, [CoeffFactor("binom", s + t + K - 1, s + K)], ik, -K, 0, s + t + K),
        child(1, [CoeffFactor("binom", s + L - 1, L)], il, 0, t - L, s + L),
        child(-1, [CoeffFactor("binom", s + t + L - 1, t + L)], il, 0, -L, s + t + L),
    ]


# ---------------------------------------------------------------- expansion


def _coerce_side(side) -> list[AffineExpr]:
    if isinstance(side, str):
        side = [p for p in side.split(",") if p.strip()]
    return [AffineExpr.coerce(v) for v in side]


def _params_of(left, right) -> list[str]:
    seen = []
    for e in list(left) + list(right):
        for s in e.symbols():
            if s not in seen:
                seen.append(s)
    for s in seen:
        if _INDEX_NAME.match(s) or s.startswith("_"):
            raise ValueError(f"parameter name {s!r} is reserved for summation indices")
    return seen


def _expand(left, right, ctx: _Context, cap: int) -> list[ShuffleTerm]:
    if len(left) + len(right) > cap:
        raise DepthCapExceeded(f"depth {len(left)}+{len(right)} exceeds the cap {cap}")
    if not left or not right:
        raise ValueError("both factors need depth >= 1")
    root = ShuffleTerm(1, (), (), embed_product(left, right))
    stack = [root]
    out = []
    while stack:
        t = stack.pop()
        if is_ez_path(t.matrix) is not None:
            out.append(t)
            continue
        t = normalize_move(t)
        kids = ipfd_step(t, split_target(t.matrix), ctx)
        stack.extend(reversed(kids))
    return out


def _canonical_names(terms: Sequence[ShuffleTerm], origins) -> tuple[list[ShuffleTerm], dict]:
    created = sorted({ix.name for t in terms for ix in t.indices} | set(origins), key=lambda n: int(n[2:]))
    mapping = {old: f"k{n}" for n, old in enumerate(created, start=1)}
    new_terms = [t.rename(mapping) for t in terms]
    new_origins = {mapping[k]: v.rename(mapping) for k, v in sorted(origins.items(), key=lambda kv: int(kv[0][2:]))}
    return new_terms, new_origins


def expand_shuffle(a, b, cap: int = DEPTH_CAP) -> Expansion:
    """Symbolic shuffle expansion of zeta(a) zeta(b) for symbolic indices
    such as ``["s1", "s2"]`` and ``["t"]``."""
    left, right = _coerce_side(a), _coerce_side(b)
    params = _params_of(left, right)
    ctx = _Context()
    terms = _expand(left, right, ctx, cap)
    terms, origins = _canonical_names(terms, ctx.origins)
    return Expansion(terms, params, left, right, origins)


def integer_specialize(e: Expansion, bindings: Mapping[str, object]) -> Expansion:
    """Finite shuffle identity at integer parameters.

    The expansion is re-derived from the product with the parameters bound;
    every split then has integer exponents and uses the finite partial
    fraction decomposition, so each index runs over a finite range (all
    coefficients of the infinite families beyond it vanish)."""
    ints: dict[str, int] = {}
    for name, v in bindings.items():
        if name not in e.params:
            raise NotAnInteger(f"{name!r} is not a parameter of this expansion")
        c = complex(v)
        if c.imag != 0 or not float(c.real).is_integer():
            raise NotAnInteger(f"{name}={v} is not an integer")
        ints[name] = int(c.real)
    missing = [p for p in e.params if p not in ints]
    if missing:
        raise NotAnInteger(f"integer specialization needs every parameter bound; missing {missing}")
    left = [x.substitute(ints) for x in e.left]
    right = [x.substitute(ints) for x in e.right]
    for side in (left, right):
        for n, x in enumerate(side):
            v = int(x.constant.real)
            need = 2 if n == len(side) - 1 else 1
            if v < need:
                raise NotAnInteger(f"entry {v} must be an integer >= {need}")
    ctx = _Context(integer=True)
    terms = _expand(left, right, ctx, DEPTH_CAP)
    terms, origins = _canonical_names(terms, ctx.origins)
    return Expansion(terms, list(e.params), list(e.left), list(e.right), origins, ints)


# ---------------------------------------------------------------- exact integer view


def exact_coefficient(term: ShuffleTerm, env: Mapping[str, int]) -> int:
    """Integer coefficient of a term of an integer-specialized expansion at
    the index values ``env``."""
    val = term.sign
    for c in term.coeffs:
        top = c.top.evaluate(env)
        bot = c.bottom.evaluate(env)
        n, k = int(round(complex(top).real)), int(round(complex(bot).real))
        if c.kind == "binom":
            v = math.comb(n, k) if 0 <= k <= n else 0
        else:
            v = (-1) ** k * math.comb(n, k)
        val *= c.sign * v
    return val


def enumerate_finite(term: ShuffleTerm, env: Mapping[str, int] | None = None):
    """Yield every index assignment of a term whose indices are all finite."""
    env = dict(env or {})
    if any(not ix.finite for ix in term.indices):
        raise ValueError("term has an infinite index")

    def rec(i):
        if i == len(term.indices):
            yield dict(env)
            return
        ix = term.indices[i]
        ub = int(round(complex(ix.upper.evaluate(env)).real))
        for v in range(ub + 1):
            env[ix.name] = v
            yield from rec(i + 1)
        env.pop(ix.name, None)

    yield from rec(0)


def finite_identity(e: Expansion) -> dict[tuple[int, ...], int]:
    """Collect an integer-specialized expansion into {MZF index: integer
    coefficient}."""
    if not e.is_finite():
        raise ValueError("expansion still has infinite indices")
    out: dict[tuple[int, ...], int] = {}
    for t in e.terms:
        idx = t.path_index()
        for env in enumerate_finite(t, e.integer_bindings):
            key = tuple(int(round(complex(AffineExpr.coerce(v).evaluate(env)).real)) for v in idx)
            c = exact_coefficient(t, env)
            out[key] = out.get(key, 0) + c
    return {k: v for k, v in sorted(out.items()) if v != 0}


def iter_terms(e: Expansion) -> Iterable[ShuffleTerm]:
    return iter(e.terms)
