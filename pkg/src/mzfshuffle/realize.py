"""Numeric value of a symbolic expansion.

Terms are organized in a tree keyed by their summation indices, so terms
born in the same partial-fraction step (the +/- partners) share a node and
are added before any series is accumulated.  Finite indices are summed
exactly; each infinite index is truncated at a cutoff and its remainder is
extrapolated by a power-law tail fit.

Two numerical hazards get special treatment:

* sibling families born in one split cancel catastrophically once the
  enclosing indices are large (binomials like B(t-k+j-1, j) grow like
  2^k), so beyond ``direct_above`` the parent term of the split is
  evaluated directly as a two-chain lattice sum instead of being expanded;
* at parameter values where a generalized binomial has a pole that only
  cancels between index values, the expansion is evaluated on a small circle
  of nearby parameters and averaged (the mean of an analytic function over a
  circle is its value at the center).
"""
from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .accel import csum, power_tail
from .affine import AffineExpr
from .engine import Expansion, ShuffleTerm, SumIndex
from .errors import NoConvergence, SingularTerm
from .mzf import LatticePlan, mzf_eval_batch
from .rootzeta import root_zeta_eval
from .specfun import gen_binomial_array


@dataclass(frozen=True)
class TruncationPlan:
    cutoff: int = 400  # infinite indices at the outermost nesting level
    inner_cutoffs: tuple[int, ...] = ()  # nesting levels 1, 2, ...; last entry repeats
    tail: str = "fit"  # "fit" | "none"
    shifts: int = 4
    direct_above: int = 12  # ancestor index value beyond which split parents are evaluated directly
    tail_tol: float = 1e-9  # relative tail-fit error that triggers a longer cutoff
    max_cutoff: int = 2048
    singular_radius: float = 0.02
    singular_points: int = 4
    lattice: LatticePlan = field(default_factory=LatticePlan)

    def __post_init__(self):
        if self.cutoff < 16 or any(c < 16 for c in self.inner_cutoffs):
            raise ValueError("cutoffs must be at least 16 for the tail fit")
        if self.tail not in ("fit", "none"):
            raise ValueError(f"unknown tail mode {self.tail!r}")
        if self.singular_points < 2:
            raise ValueError("singular_points must be >= 2")

    def cutoff_at(self, level: int) -> int:
        if level == 0 or not self.inner_cutoffs:
            return self.cutoff
        return self.inner_cutoffs[min(level - 1, len(self.inner_cutoffs) - 1)]

    def to_json(self) -> dict:
        return {
            "cutoff": self.cutoff,
            "inner_cutoffs": list(self.inner_cutoffs),
            "tail": self.tail,
            "shifts": self.shifts,
            "direct_above": self.direct_above,
            "tail_tol": self.tail_tol,
            "max_cutoff": self.max_cutoff,
            "singular_radius": self.singular_radius,
            "singular_points": self.singular_points,
        }


@dataclass
class _Node:
    index: SumIndex | None
    level: int  # number of infinite indices strictly above
    terms: list = field(default_factory=list)
    children: dict = field(default_factory=dict)


def _build_tree(terms) -> _Node:
    root = _Node(None, 0)
    for t in terms:
        node = root
        inf_above = 0
        for ix in t.indices:
            if ix.name not in node.children:
                node.children[ix.name] = _Node(ix, inf_above)
            node = node.children[ix.name]
            inf_above += 0 if ix.finite else 1
        node.terms.append(t)
    return root


@dataclass
class RealizeStats:
    leaf_evals: int = 0
    tail_fits: int = 0
    origin_evals: int = 0
    extensions: int = 0
    wall: float = 0.0
    singular: bool = False


class _Realizer:
    def __init__(self, e: Expansion, bindings: Mapping[str, complex], plan: TruncationPlan):
        self.e = e
        self.env = {k: complex(v) for k, v in bindings.items()}
        self.env.update({k: complex(v) for k, v in e.integer_bindings.items()})
        self.plan = plan
        self.stats = RealizeStats()
        self.paths = {id(t): t.path_index() for t in e.terms}

    # -- leaves
    def _bind(self, names, rows: np.ndarray) -> dict:
        b = dict(self.env)
        for i, n in enumerate(names):
            b[n] = rows[:, i].astype(float)
        return b

    def term_values(self, t: ShuffleTerm, names, rows: np.ndarray):
        n = rows.shape[0]
        b = self._bind(names, rows)
        coef = np.full(n, float(t.sign), dtype=complex)
        for c in t.coeffs:
            top = np.broadcast_to(np.asarray(c.top.evaluate(b), dtype=complex), (n,))
            bot = np.broadcast_to(np.asarray(c.bottom.evaluate(b), dtype=complex), (n,))
            if c.kind == "binom":
                v = gen_binomial_array(top, bot)
            else:
                v = np.array([(-1) ** int(round(q.real)) * math.comb(int(round(p.real)), int(round(q.real))) for p, q in zip(top, bot)], dtype=float)
            with np.errstate(invalid="ignore", over="ignore"):
                coef = coef * c.sign * v
        if not np.all(np.isfinite(coef)):
            raise SingularTerm("a binomial coefficient has an uncancelled pole at these parameters")
        idx = self.paths[id(t)]
        S = np.stack([np.broadcast_to(np.asarray(AffineExpr.coerce(x).evaluate(b), dtype=complex), (n,)) for x in idx], axis=1)
        live = coef != 0
        vals = np.zeros(n, dtype=complex)
        errs = np.zeros(n)
        if np.any(live):
            v, e = mzf_eval_batch(S[live], self.plan.lattice)
            vals[live] = coef[live] * v
            errs[live] = np.abs(coef[live]) * e + 1e-16 * np.abs(vals[live])
            self.stats.leaf_evals += int(live.sum())
        return vals, errs

    def origin_values(self, t: ShuffleTerm, names, rows: np.ndarray):
        vals = np.zeros(rows.shape[0], dtype=complex)
        errs = np.zeros(rows.shape[0])
        for r in range(rows.shape[0]):
            b = {k: v for k, v in self.env.items()}
            for i, n in enumerate(names):
                b[n] = float(rows[r, i])
            coef = complex(t.sign)
            for c in t.coeffs:
                top = np.asarray([complex(c.top.evaluate(b))])
                bot = np.asarray([complex(c.bottom.evaluate(b))])
                if c.kind == "binom":
                    coef *= c.sign * complex(gen_binomial_array(top, bot)[0])
                else:
                    k = int(round(bot[0].real))
                    coef *= c.sign * (-1) ** k * math.comb(int(round(top[0].real)), k)
            if not cmath.isfinite(coef):
                raise SingularTerm("a binomial coefficient has an uncancelled pole at these parameters")
            if coef == 0:
                continue
            v, e = root_zeta_eval(t.matrix.concrete(b), self.plan.lattice)
            vals[r] = coef * v
            errs[r] = abs(coef) * e
            self.stats.origin_evals += 1
        return vals, errs

    # -- tree
    def node_value(self, node: _Node, names: list[str], rows: np.ndarray):
        """Value of ``node`` (sum over its own index, including everything
        below) for each prefix row of ancestor index values."""
        ix = node.index
        n = rows.shape[0]
        b = self._bind(names, rows)
        if ix.finite:
            ub = np.rint(np.real(np.broadcast_to(np.asarray(ix.upper.evaluate(b), dtype=complex), (n,)))).astype(int)
        else:
            ub = np.full(n, self.plan.cutoff_at(node.level), dtype=int)
        vals = np.zeros(n, dtype=complex)
        errs = np.zeros(n)
        sel = np.nonzero(ub >= 0)[0]
        if sel.size == 0:
            return vals, errs
        counts = ub[sel] + 1
        seg = np.repeat(np.arange(sel.size), counts)
        offs = np.concatenate([np.arange(c) for c in counts])
        sub_rows = np.concatenate([rows[sel][seg], offs[:, None]], axis=1) if rows.shape[1] else offs[:, None]
        sub_names = names + [ix.name]
        sv, se = self.summand(node, sub_names, sub_rows)
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        for q, i in enumerate(sel):
            a, z = starts[q], starts[q] + counts[q]
            terms, terr = sv[a:z], se[a:z]
            if ix.finite:
                vals[i], errs[i] = self._finite_total(terms, terr)
            else:
                vals[i], errs[i] = self._series_total(node, names, rows[i], terms, terr)
        return vals, errs

    @staticmethod
    def _finite_total(terms, terr):
        head = csum(terms)
        err = float(np.sum(terr)) + 1e-16 * math.sqrt(len(terms)) * float(np.max(np.abs(terms), initial=0.0))
        return head, err

    def _series_total(self, node: _Node, names, prefix, terms, terr):
        def more(idx):
            sub = np.concatenate([np.broadcast_to(prefix, (idx.size, prefix.size)), idx[:, None]], axis=1)
            self.stats.extensions += 1
            return self.summand(node, names + [node.index.name], sub)

        v, e, _, fits = sum_series(more, self.plan, terms, terr, label=node.index.name)
        self.stats.tail_fits += fits
        return v, e

    def summand(self, node: _Node, names: list[str], rows: np.ndarray):
        vals = np.zeros(rows.shape[0], dtype=complex)
        errs = np.zeros(rows.shape[0])
        for t in node.terms:
            v, e = self.term_values(t, names, rows)
            vals += v
            errs += e
        # sibling families born in one split share their parent term; where
        # the ancestor indices are large the families cancel badly, so the
        # parent is evaluated directly there
        direct = np.zeros(rows.shape[0], dtype=bool)
        if rows.shape[1]:
            direct = rows.max(axis=1) > self.plan.direct_above
        for parent, kids in self._groups(node):
            use = direct if parent is not None else np.zeros_like(direct)
            if np.any(use):
                v, e = self.origin_values(parent, names, rows[use])
                vals[use] += v
                errs[use] += e
            keep = ~use
            if np.any(keep):
                for child in kids:
                    v, e = self.node_value(child, names, rows[keep])
                    vals[keep] += v
                    errs[keep] += e
        return vals, errs

    def _groups(self, node: _Node):
        groups: list[tuple[ShuffleTerm | None, list[_Node]]] = []
        for child in node.children.values():
            parent = self.e.origins.get(child.index.name)
            for g in groups:
                if parent is not None and g[0] == parent:
                    g[1].append(child)
                    break
            else:
                groups.append((parent, [child]))
        return groups

    def run(self) -> tuple[complex, float]:
        root = _build_tree(self.e.terms)
        rows = np.zeros((1, 0), dtype=int)
        v, e = self.summand(root, [], rows)
        return complex(v[0]), float(e[0])


def sum_series(fn, plan: TruncationPlan, terms=None, terr=None, label: str = "k"):
    """sum_{k>=0} a_k where ``fn(k_array) -> (a, err)`` yields terms.

    Starts from ``terms`` (or a_0..a_cutoff), fits a power-law tail and
    doubles the cutoff while the fit fails or its error estimate exceeds
    ``plan.tail_tol`` relative to the sum.  Returns (value, err_est,
    cutoff used, number of fits)."""
    if terms is None:
        terms, terr = fn(np.arange(plan.cutoff + 1))
    terms = np.asarray(terms, dtype=complex)
    terr = np.asarray(terr, dtype=float)
    fits = 0
    while True:
        if not np.all(np.isfinite(terms)):
            raise NoConvergence(f"non-finite terms in the series over {label}")
        head = csum(terms)
        err = float(np.sum(terr)) + 1e-16 * math.sqrt(len(terms)) * float(np.max(np.abs(terms), initial=0.0))
        if plan.tail == "none":
            return head, err + abs(terms[-1]) * len(terms), len(terms) - 1, fits
        try:
            tf = power_tail(terms, shifts=plan.shifts)
            fits += 1
            ok = tf.err <= plan.tail_tol * max(abs(head), float(np.max(np.abs(terms))))
        except NoConvergence:
            tf, ok = None, False
        if ok or len(terms) >= plan.max_cutoff:
            if tf is None:
                raise NoConvergence(f"tail of index {label} did not settle by cutoff {len(terms) - 1}")
            return head + tf.tail, err + tf.err, len(terms) - 1, fits
        n0 = len(terms)
        ev, ee = fn(np.arange(n0, min(2 * n0, plan.max_cutoff + 1)))
        terms = np.concatenate([terms, ev])
        terr = np.concatenate([terr, ee])


def _direction(params) -> dict[str, complex]:
    # fixed, generic direction so the circle avoids integer lattices
    d = {}
    for n, p in enumerate(params):
        d[p] = complex(math.cos(1.0 + 0.7 * n * math.sqrt(2.0)), 0.0)
    norm = math.sqrt(sum(abs(v) ** 2 for v in d.values())) or 1.0
    return {k: v / norm for k, v in d.items()}


def realize(e: Expansion, bindings: Mapping[str, complex], plan: TruncationPlan | None = None, stats: RealizeStats | None = None) -> tuple[complex, float]:
    """Numeric value of the expansion at ``bindings`` with an error estimate."""
    plan = plan or TruncationPlan()
    e.check_bindings(bindings)
    t0 = time.perf_counter()
    st = stats if stats is not None else RealizeStats()
    try:
        r = _Realizer(e, bindings, plan)
        val, err = r.run()
        _merge(st, r.stats)
    except SingularTerm:
        st.singular = True
        val, err = _circle_average(e, bindings, plan, st)
    st.wall += time.perf_counter() - t0
    return val, err


def _merge(dst: RealizeStats, src: RealizeStats) -> None:
    dst.leaf_evals += src.leaf_evals
    dst.tail_fits += src.tail_fits
    dst.origin_evals += src.origin_evals
    dst.extensions += src.extensions


def _circle_average(e: Expansion, bindings, plan: TruncationPlan, st: RealizeStats):
    free = [p for p in e.params if p not in e.integer_bindings]
    d = _direction(free)
    M = plan.singular_points
    delta = plan.singular_radius
    vals, errs = [], []
    for m in range(M):
        w = cmath.exp(2j * math.pi * (m + 0.5) / M)
        b = {k: complex(v) + (delta * w * d[k] if k in d else 0) for k, v in bindings.items()}
        r = _Realizer(e, b, plan)
        v, er = r.run()
        _merge(st, r.stats)
        vals.append(v)
        errs.append(er)
    val, rem = _circle_extrapolate(vals)
    return val, float(max(errs) + rem)


def _circle_extrapolate(vals) -> tuple[complex, float]:
    """Centre value from M values on a circle, and the error of that step.

    The plain mean equals f(c) - a_M delta^M + O(delta^2M), because the
    nodes satisfy w^M = -1.  The Fourier modes b_n = a_n delta^n (n < M)
    are known from the same values; the missing a_M delta^M is extrapolated
    geometrically from the last two modes and added back.  The next
    geometric step is reported as the remaining error."""
    M = len(vals)
    v = np.asarray(vals, dtype=complex)
    w = np.exp(2j * np.pi * (np.arange(M) + 0.5) / M)
    b = [complex(np.mean(v * w ** (-n))) for n in range(M)]
    if M < 3 or b[M - 2] == 0:
        return b[0], abs(b[M - 1])
    ratio = b[M - 1] / b[M - 2]
    bM = b[M - 1] * ratio
    return b[0] + bM, abs(bM) * min(1.0, abs(ratio))
