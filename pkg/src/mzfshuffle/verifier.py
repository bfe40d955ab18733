"""Identity checks: each identity evaluates a left and a right side at
catalog points and reports residuals against a tolerance."""
from __future__ import annotations

import csv
import io
import json
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .affine import AffineExpr
from .engine import expand_shuffle, finite_identity, integer_specialize
from .errors import MissingTableEntry, MzfError, OutOfDomain
from .parallel import ordered_map
from .mzf import LatticePlan, mzf_eval, mzf_eval_batch
from .realize import TruncationPlan, realize, sum_series
from .rootzeta import RootZetaMatrix, root_zeta_eval
from .specfun import connection_sides, gen_binomial_array

IDENTITIES = (
    "ipfd-pointwise",
    "pfd-classical",
    "shuffle-double",
    "double-shuffle-double",
    "shuffle-general",
    "stuffle-general",
    "double-shuffle-general",
    "kmt-21",
    "kmt-31",
    "sum-formula",
    "connection-formula",
    "binomial-inversion",
)

DEFAULT_TOL = {
    "ipfd-pointwise": 1e-8,
    "pfd-classical": 0.0,
    "shuffle-double": 1e-6,
    "double-shuffle-double": 1e-6,
    "shuffle-general": 1e-5,
    "stuffle-general": 1e-7,
    "double-shuffle-general": 1e-5,
    "kmt-21": 1e-5,
    "kmt-31": 1e-5,
    "sum-formula": 1e-6,
    "connection-formula": 1e-10,
    "binomial-inversion": 0.0,
}


# ---------------------------------------------------------------- stuffle


def stuffle_expand(a: Sequence, b: Sequence) -> list[tuple]:
    """Quasi-shuffle of two indices, recursing on the last letters:
    (u,x)*(v,y) = ((u,x)*v, y) + (u*(v,y), x) + (u*v, x+y)."""
    a = tuple(AffineExpr.coerce(x) for x in a)
    b = tuple(AffineExpr.coerce(x) for x in b)
    return [tuple(w) for w in _stuffle(a, b)]


@lru_cache(maxsize=None)
def _stuffle(a: tuple, b: tuple) -> tuple:
    if not a:
        return (b,)
    if not b:
        return (a,)
    u, x = a[:-1], a[-1]
    v, y = b[:-1], b[-1]
    out = [w + (y,) for w in _stuffle(a, v)]
    out += [w + (x,) for w in _stuffle(u, b)]
    out += [w + (x + y,) for w in _stuffle(u, v)]
    return tuple(out)


def stuffle_count(p: int, q: int) -> int:
    """Number of quasi-shuffle words of depths p and q."""
    return sum(math.factorial(p + q - k) // (math.factorial(k) * math.factorial(p - k) * math.factorial(q - k)) for k in range(min(p, q) + 1))


# ---------------------------------------------------------------- exact checks


def pfd_sides(a: int, b: int, x: Fraction, y: Fraction) -> tuple[Fraction, Fraction]:
    """1/(x^a y^b) and its classical partial fraction decomposition."""
    lhs = 1 / (x**a * y**b)
    rhs = Fraction(0)
    for k in range(a):
        rhs += Fraction(math.comb(b + k - 1, k)) / (x ** (a - k) * (x + y) ** (b + k))
    for k in range(b):
        rhs += Fraction(math.comb(a + k - 1, k)) / (y ** (b - k) * (x + y) ** (a + k))
    return lhs, rhs


def check_classical_pfd(a: int, b: int, samples: Sequence[tuple]) -> "VerificationReport":
    results = []
    for x, y in samples:
        t0 = time.perf_counter()
        x, y = Fraction(x), Fraction(y)
        lhs, rhs = pfd_sides(a, b, x, y)
        res = abs(lhs - rhs)
        results.append(PointResult({"a": a, "b": b, "x": str(x), "y": str(y)}, float(lhs), float(rhs), float(res), 0.0, {}, time.perf_counter() - t0, res == 0, exact=res == 0))
    return VerificationReport("pfd-classical", 0.0, results)


def binomial_forward(f: Mapping[tuple, object], points: Sequence[tuple]) -> dict:
    """g(s;-l) = sum_k C(l,k) f(s-k; -l+k), tables keyed by (s, l)."""
    out = {}
    for s, l in points:
        total = 0
        for k in range(l + 1):
            key = (s - k, l - k)
            if key not in f:
                raise MissingTableEntry(f"f{key} needed for g({s}, {l})")
            total += math.comb(l, k) * f[key]
        out[(s, l)] = total
    return out


def binomial_invert(g: Mapping[tuple, object], points: Sequence[tuple]) -> dict:
    """f(s;-l) = sum_k (-1)^k C(l,k) g(s-k; -l+k)."""
    out = {}
    for s, l in points:
        total = 0
        for k in range(l + 1):
            key = (s - k, l - k)
            if key not in g:
                raise MissingTableEntry(f"g{key} needed for f({s}, {l})")
            total += (-1) ** k * math.comb(l, k) * g[key]
        out[(s, l)] = total
    return out


def random_integer_table(rng: random.Random, lmax: int, s_range: int = 12) -> dict:
    return {(s, l): rng.randint(-10**6, 10**6) for s in range(-lmax, s_range + 1) for l in range(lmax + 1)}


def inversion_roundtrip(seed: int, lmax: int) -> int:
    """Largest |f - invert(forward(f))| on a random integer table (exact)."""
    rng = random.Random(seed)
    f = random_integer_table(rng, lmax)
    pts = [(s, l) for s in range(0, 13) for l in range(lmax + 1)]
    g = binomial_forward(f, [(s, l) for (s, l) in f if all((s - k, l - k) in f for k in range(l + 1))])
    back = binomial_invert(g, pts)
    return max(abs(back[p] - f[p]) for p in pts)


# ---------------------------------------------------------------- reports


@dataclass
class PointResult:
    point: dict
    lhs: complex
    rhs: complex
    residual: float
    err_est: float
    cutoffs: dict
    wall: float
    passed: bool
    error: str | None = None
    exact: bool = False

    def payload(self) -> dict:
        return {
            "point": self.point,
            "lhs": _cjson(self.lhs),
            "rhs": _cjson(self.rhs),
            "residual": self.residual,
            "err_est": self.err_est,
            "cutoffs": self.cutoffs,
            "passed": self.passed,
            "error": self.error,
        }


def _cjson(z):
    if z is None:
        return None
    z = complex(z)
    return [z.real, z.imag]


@dataclass
class VerificationReport:
    id: str
    tol: float
    results: list[PointResult]
    config: dict = field(default_factory=dict)
    runtime: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def has_error(self) -> bool:
        return any(r.error for r in self.results)

    def payload(self) -> dict:
        return {
            "id": self.id,
            "tol": self.tol,
            "verdict": "pass" if self.verdict else "fail",
            "config": self.config,
            "points": [r.payload() for r in self.results],
        }

    def to_json(self) -> dict:
        rt = dict(self.runtime)
        rt["wall"] = [r.wall for r in self.results]
        return {"payload": self.payload(), "runtime": rt}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "point", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "residual", "err_est", "passed", "error", "wall"])
        for r in self.results:
            l = _cjson(r.lhs) or ["", ""]
            h = _cjson(r.rhs) or ["", ""]
            w.writerow([self.id, json.dumps(r.point, sort_keys=True), *l, *h, repr(r.residual), repr(r.err_est), r.passed, r.error or "", f"{r.wall:.3f}"])
        return buf.getvalue()


# ---------------------------------------------------------------- numeric identities


@dataclass(frozen=True)
class IdentitySpec:
    id: str
    points: tuple
    plan: TruncationPlan = field(default_factory=TruncationPlan)
    tol: float | None = None

    def __post_init__(self):
        if self.id not in IDENTITIES:
            raise ValueError(f"unknown identity {self.id!r}; choose from {', '.join(IDENTITIES)}")

    @property
    def tolerance(self) -> float:
        return DEFAULT_TOL[self.id] if self.tol is None else self.tol


def _c(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    if isinstance(v, str):
        return complex(v.replace(" ", "").replace("i", "j"))
    return complex(v)


def _zeta(idx) -> tuple[complex, float]:
    return mzf_eval([complex(v) for v in idx])


def _is_int(z: complex) -> bool:
    return z.imag == 0 and float(z.real).is_integer()


def _ipfd(p, plan):
    s, t, x, y = (_c(p[k]) for k in ("s", "t", "x", "y"))
    lhs = x ** (-s) * y ** (-t)
    u = x + y

    px, py = x / u, y / u  # |px|, |py| < 1 drive the geometric decay

    def fn(k):
        k = k.astype(float)
        a1 = _binom(t + k - 1, k) * px**k * x ** (-s) * u ** (-t)
        a2 = _binom(s + t + k - 1, s + k) * px**k * u ** (-s - t)
        b1 = _binom(s + k - 1, k) * py**k * y ** (-t) * u ** (-s)
        b2 = _binom(s + t + k - 1, t + k) * py**k * u ** (-s - t)
        v = (a1 - a2) + (b1 - b2)
        return v, 1e-16 * (abs(a1) + abs(a2) + abs(b1) + abs(b2))

    rhs, err, K, _ = sum_series(fn, plan)
    return lhs, rhs, err, {"K": K}


def _binom(top, bottom):
    top, bottom = np.broadcast_arrays(np.asarray(top, dtype=complex), np.asarray(bottom, dtype=complex))
    return gen_binomial_array(top, bottom)


def _connection(p, plan):
    s, t, x, y = (_c(p[k]) for k in ("s", "t", "x", "y"))
    lhs, rhs = connection_sides(s, t, x, y)
    return lhs, rhs, 1e-15 * abs(lhs), {}


def _shuffle_rhs(left, right, vals: dict, plan):
    """Shuffle side: finite identity when every parameter is an integer
    (>= 2 for last entries), otherwise the realized infinite expansion."""
    e = expand_shuffle(left, right)
    if all(_is_int(v) for v in vals.values()) and all(vals[x] .real >= 2 for x in (left[-1], right[-1])):
        fin = integer_specialize(e, {k: int(v.real) for k, v in vals.items()})
        total, err = 0j, 0.0
        for idx, c in finite_identity(fin).items():
            v, er = _zeta(idx)
            total += c * v
            err += abs(c) * er
        return total, err, {"finite": True}
    v, err = realize(e, vals, plan)
    return v, err, {"K": plan.cutoff, "inner": list(plan.inner_cutoffs)}


def _depth_sides(p):
    left = [_c(v) for v in p["left"]]
    right = [_c(v) for v in p["right"]]
    ls = [f"s{i}" for i in range(1, len(left) + 1)]
    rs = [f"t{i}" for i in range(1, len(right) + 1)]
    return left, right, ls, rs


def _product(left, right):
    a, ea = _zeta(left)
    b, eb = _zeta(right)
    return a * b, abs(a) * eb + abs(b) * ea


def _stuffle_sum(left, right):
    total, err = 0j, 0.0
    for w in stuffle_expand(left, right):
        v, e = _zeta([complex(x.constant) for x in w])
        total += v
        err += e
    return total, err


def _shuffle_double(p, plan):
    s, t = _c(p["s"]), _c(p["t"])
    lhs, el = _product([s], [t])
    rhs, er, cut = _shuffle_rhs(["s"], ["t"], {"s": s, "t": t}, plan)
    return lhs, rhs, el + er, cut


def _double_shuffle_double(p, plan):
    s, t = _c(p["s"]), _c(p["t"])
    lhs, el = _stuffle_sum([s], [t])
    rhs, er, cut = _shuffle_rhs(["s"], ["t"], {"s": s, "t": t}, plan)
    return lhs, rhs, el + er, cut


def _shuffle_general(p, plan):
    left, right, ls, rs = _depth_sides(p)
    lhs, el = _product(left, right)
    rhs, er, cut = _shuffle_rhs(ls, rs, dict(zip(ls + rs, left + right)), plan)
    return lhs, rhs, el + er, cut


def _stuffle_general(p, plan):
    left, right, _, _ = _depth_sides(p)
    lhs, el = _product(left, right)
    rhs, er = _stuffle_sum(left, right)
    return lhs, rhs, el + er, {}


def _double_shuffle_general(p, plan):
    left, right, ls, rs = _depth_sides(p)
    lhs, el = _stuffle_sum(left, right)
    rhs, er, cut = _shuffle_rhs(ls, rs, dict(zip(ls + rs, left + right)), plan)
    return lhs, rhs, el + er, cut


def _int_param(p, name, lo=2) -> int:
    v = _c(p[name])
    if not _is_int(v) or v.real < lo:
        raise OutOfDomain(f"{name}={p[name]} must be an integer >= {lo}")
    return int(v.real)


def _kmt21(p, plan):
    s = _c(p["s"])
    b, c = _int_param(p, "b"), _int_param(p, "c")
    lhs, el = _product([s, b], [c])
    rhs, err = 0j, 0.0
    for k in range(b):
        v, e = _zeta([s, b - k, c + k])
        rhs += math.comb(c + k - 1, k) * v
        err += math.comb(c + k - 1, k) * e
    for k in range(c):
        m = RootZetaMatrix(3, {(1, 1): s, (1, 3): b + k, (3, 3): c - k})
        v, e = root_zeta_eval(m, plan.lattice)
        rhs += math.comb(b + k - 1, k) * v
        err += math.comb(b + k - 1, k) * e
    return lhs, rhs, el + err, {"conv_cutoff": plan.lattice.conv_cutoff}


def _kmt31(p, plan):
    s1, s2 = _c(p["s1"]), _c(p["s2"])
    c, d = _int_param(p, "c"), _int_param(p, "d")
    lhs, el = _product([s1, s2, c], [d])
    rhs, err = 0j, 0.0
    for k in range(c):
        v, e = _zeta([s1, s2, c - k, d + k])
        rhs += math.comb(d + k - 1, k) * v
        err += math.comb(d + k - 1, k) * e
    for k in range(d):
        m = RootZetaMatrix(4, {(1, 1): s1, (1, 2): s2, (1, 4): c + k, (4, 4): d - k})
        v, e = root_zeta_eval(m, plan.lattice)
        rhs += math.comb(c + k - 1, k) * v
        err += math.comb(c + k - 1, k) * e
    return lhs, rhs, el + err, {"conv_cutoff": plan.lattice.conv_cutoff}


def _sum_formula(p, plan):
    s = _c(p["s"])
    lhs, el = _zeta([s])

    def fn(k):
        k = k.astype(float)
        va, ea = mzf_eval_batch(np.stack([s - k - 2, k + 2], 1).astype(complex), plan.lattice)
        vb, eb = mzf_eval_batch(np.stack([-k, s + k], 1).astype(complex), plan.lattice)
        return va - vb, ea + eb

    rhs, err, K, _ = sum_series(fn, plan)
    return lhs, rhs, el + err, {"K": K}


def _pfd_point(p, plan):
    a, b = int(p["a"]), int(p["b"])
    lhs, rhs = pfd_sides(a, b, Fraction(p["x"]), Fraction(p["y"]))
    return lhs, rhs, 0.0, {}


def _inversion_point(p, plan):
    worst = inversion_roundtrip(int(p["seed"]), int(p["lmax"]))
    return 0, worst, 0.0, {}


CHECKS: dict[str, Callable] = {
    "ipfd-pointwise": _ipfd,
    "pfd-classical": _pfd_point,
    "shuffle-double": _shuffle_double,
    "double-shuffle-double": _double_shuffle_double,
    "shuffle-general": _shuffle_general,
    "stuffle-general": _stuffle_general,
    "double-shuffle-general": _double_shuffle_general,
    "kmt-21": _kmt21,
    "kmt-31": _kmt31,
    "sum-formula": _sum_formula,
    "connection-formula": _connection,
    "binomial-inversion": _inversion_point,
}


def check_point(identity: str, point: dict, plan: TruncationPlan, tol: float) -> PointResult:
    t0 = time.perf_counter()
    try:
        lhs, rhs, err, cut = CHECKS[identity](point, plan)
    except MzfError as exc:
        return PointResult(point, None, None, math.inf, math.inf, {}, time.perf_counter() - t0, False, f"{type(exc).__name__}: {exc}")
    if isinstance(lhs, Fraction) or isinstance(rhs, Fraction) or identity == "binomial-inversion":
        res = abs(Fraction(lhs) - Fraction(rhs))
        passed = res <= tol
        return PointResult(point, complex(float(lhs)), complex(float(rhs)), float(res), 0.0, cut, time.perf_counter() - t0, passed, exact=res == 0)
    lhs, rhs = complex(lhs), complex(rhs)
    res = abs(lhs - rhs)
    passed = bool(res <= max(tol, 3.0 * err))
    return PointResult(point, lhs, rhs, float(res), float(err), cut, time.perf_counter() - t0, passed)


def _check_task(args):
    identity, point, plan, tol = args
    return check_point(identity, point, plan, tol)


def check_identity(spec: IdentitySpec, workers: int = 1) -> VerificationReport:
    """Evaluate both sides at every point; results keep catalog order."""
    tol = spec.tolerance
    tasks = [(spec.id, dict(p), spec.plan, tol) for p in spec.points]
    results = ordered_map(_check_task, tasks, workers)
    cfg = {"plan": spec.plan.to_json(), "lattice": _lattice_json(spec.plan.lattice)}
    return VerificationReport(spec.id, tol, results, config=cfg, runtime={"workers": workers})


def _lattice_json(lp: LatticePlan) -> dict:
    return {
        "outer_cutoff": lp.outer_cutoff,
        "tail_mode": lp.tail_mode,
        "tol": lp.tol,
        "em_terms": lp.em_terms,
        "max_cutoff": lp.max_cutoff,
        "conv_cutoff": lp.conv_cutoff,
    }


# ---------------------------------------------------------------- catalogs


CATALOG_DIR = Path(__file__).with_name("catalogs")


def _expand_generator(gen: dict, seed: int) -> list[dict]:
    rng = random.Random(seed)
    if gen["kind"] == "rational-pfd":
        pts = []
        for a in range(1, gen["a_max"] + 1):
            for b in range(1, gen["b_max"] + 1):
                for _ in range(gen["per_pair"]):
                    x = Fraction(rng.randint(1, 99), rng.randint(1, 40))
                    y = Fraction(rng.randint(1, 99), rng.randint(1, 40))
                    pts.append({"a": a, "b": b, "x": str(x), "y": str(y)})
        return pts
    if gen["kind"] == "integer-tables":
        return [{"seed": rng.randrange(2**31), "lmax": gen["lmax"]} for _ in range(gen["tables"])]
    raise ValueError(f"unknown catalog generator {gen['kind']!r}")


def load_catalog(identity: str, path: str | Path | None = None, seed: int | None = None) -> list[dict]:
    """Points for ``identity`` from ``path`` or the shipped catalog.  A file
    may list ``points`` or describe a ``generator`` expanded with ``seed``
    (default: the seed stored in the file)."""
    p = Path(path) if path else CATALOG_DIR / f"{identity}.json"
    body = json.loads(p.read_text())
    if isinstance(body, list):
        return body
    pts = list(body.get("points", []))
    if "generator" in body:
        pts += _expand_generator(body["generator"], body.get("seed", 0) if seed is None else seed)
    return pts
