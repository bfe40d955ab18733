"""Euler-Zagier multiple zeta functions inside the convergence domain.

The default evaluator works on nested tail sums

    T_j(n) = sum_{n < n_j < ... < n_r} n_j^-s_j ... n_r^-s_r,

started at a cutoff N from their asymptotic expansion in 1/N (built from
Euler-Maclaurin coefficients level by level) and carried down to n = 0 by
the exact recursion T_j(n) = T_j(n+1) + (n+1)^-s_j T_{j+1}(n+1).  Values are
kept scaled by (n+1)^{w_j}, w_j = s_j + ... + s_r, so large exponents of
either sign stay representable.  Many indices of equal depth are evaluated
in one vectorized pass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .accel import aitken
from .errors import NoConvergence, OutOfDomain
from .specfun import em_factors, hurwitz_zeta, EvalOptions

MAX_DEPTH = 4
TAIL_MODES = ("asymptotic", "algebraic-fit", "none")


@dataclass(frozen=True)
class LatticePlan:
    """Truncation settings for lattice sums.

    ``outer_cutoff`` is the minimum cutoff N; the asymptotic mode raises it
    when exponents are large.  ``tail_mode`` picks how the part beyond N is
    handled: the asymptotic expansion (default), an Aitken fit over three
    dyadic truncations with Hurwitz zeta for the innermost variable, or
    nothing at all.
    """

    outer_cutoff: int = 32
    tail_mode: str = "asymptotic"
    tol: float = 1e-13
    em_terms: int = 24
    max_cutoff: int = 16384
    conv_cutoff: int = 4096  # lattice size for the two-chain root-zeta evaluator

    def __post_init__(self):
        if self.outer_cutoff < 8:
            raise ValueError("outer_cutoff must be >= 8")
        if self.tail_mode not in TAIL_MODES:
            raise ValueError(f"tail_mode must be one of {TAIL_MODES}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


# cutoffs and tolerances for the plain-truncation modes, by depth
DEPTH_DEFAULTS = {1: (2000, 1e-8), 2: (2000, 1e-8), 3: (400, 1e-6), 4: (120, 1e-5)}


def default_plan(depth: int, tail_mode: str = "asymptotic") -> LatticePlan:
    if tail_mode == "asymptotic":
        return LatticePlan()
    n, tol = DEPTH_DEFAULTS[depth]
    return LatticePlan(outer_cutoff=n, tail_mode=tail_mode, tol=tol)


def in_domain(idx: Sequence[complex]) -> bool:
    """Re(s_j + ... + s_r) > r - j + 1 for every j."""
    r = len(idx)
    acc = 0.0
    for j in range(r - 1, -1, -1):
        acc += complex(idx[j]).real
        if not acc > r - j:
            return False
    return True


def domain_margin(S: np.ndarray) -> np.ndarray:
    """min_j Re(w_j) - (r - j + 1) per row; positive means in domain."""
    r = S.shape[1]
    w = np.cumsum(S[:, ::-1].real, axis=1)[:, ::-1]
    need = np.arange(r, 0, -1, dtype=float)
    return np.min(w - need, axis=1)


def _em_coeffs(sigma: np.ndarray, L: int, fac) -> np.ndarray:
    """e_l with sum_{m>n} m^-sigma ~ n^{1-sigma} sum_l e_l n^-l, l < L."""
    B = sigma.shape[0]
    e = np.zeros((B, L), dtype=sigma.dtype)
    e[:, 0] = 1.0 / (sigma - 1.0)
    if L > 1:
        e[:, 1] = -0.5
    poch = sigma.copy()  # (sigma)_{2k-1}
    k = 1
    while 2 * k < L:
        e[:, 2 * k] = fac[k - 1] * poch
        poch = poch * (sigma + 2 * k - 1) * (sigma + 2 * k)
        k += 1
    return e


def _tail_start(S: np.ndarray, N: int, P: int):
    """Scaled starting values U_j(N) = (N+1)^{w_j} T_j(N) and relative
    truncation error estimates of the asymptotic series."""
    B, r = S.shape
    fac = em_factors(P // 2 + 1)
    w = np.zeros((B, r + 1), dtype=S.dtype)
    w[:, :r] = np.cumsum(S[:, ::-1], axis=1)[:, ::-1]
    U = np.zeros((B, r + 1), dtype=S.dtype)
    U[:, r] = 1.0
    c = np.zeros((B, P), dtype=S.dtype)
    c[:, 0] = 1.0
    alpha = np.zeros(B, dtype=S.dtype)
    rel = np.zeros(B)
    powN = float(N) ** -np.arange(P, dtype=float)
    logN = math.log(N)
    logN1 = math.log(N + 1)
    for j in range(r - 1, -1, -1):
        sig0 = S[:, j] + alpha
        newc = np.zeros_like(c)
        for i in range(P):
            ci = c[:, i : i + 1]
            if not np.any(ci):
                continue
            newc[:, i:] += ci * _em_coeffs(sig0 + i, P - i, fac)
        c = newc
        alpha = sig0 - 1.0
        terms = c * powN
        poly = terms.sum(axis=1)
        last = np.max(np.abs(terms[:, -3:]), axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.maximum(rel, np.where(np.abs(poly) > 0, last / np.abs(poly), 0.0))
        U[:, j] = np.exp(w[:, j] * logN1 - alpha * logN) * poly
    return U, w, rel


def _backward(U: np.ndarray, w: np.ndarray, N: int, keep_table: bool = False):
    """Carry U_j(n) from n = N down to 0; returns U(0) (and optionally the
    whole table indexed [n, row, j])."""
    r = U.shape[1] - 1
    table = None
    if keep_table:
        table = np.empty((N + 1,) + U.shape, dtype=U.dtype)
        table[N] = U
    for n in range(N - 1, -1, -1):
        f = np.exp(w * math.log((n + 1) / (n + 2)))
        U = U.copy()
        U[:, :r] = f[:, :r] * U[:, :r] + f[:, 1:] * U[:, 1:]
        if keep_table:
            table[n] = U
    return U, table


def _choose_cutoff(S: np.ndarray, plan: LatticePlan) -> int:
    r = S.shape[1]
    w = np.cumsum(S[:, ::-1], axis=1)[:, ::-1]
    sig = np.abs(w - np.arange(r - 1, -1, -1)[None, :])
    big = float(np.max(np.concatenate([sig.ravel(), np.abs(S).ravel()]))) if S.size else 0.0
    return int(min(plan.max_cutoff, max(plan.outer_cutoff, math.ceil(0.5 * big) + 10)))


def _asymptotic_batch(S: np.ndarray, plan: LatticePlan):
    N = _choose_cutoff(S, plan)
    eps = np.finfo(S.real.dtype).eps
    vals = np.empty(len(S), dtype=S.dtype)
    errs = np.empty(len(S))
    todo = np.arange(len(S))
    while todo.size:
        Sb = S[todo]
        U0, w, rel = _tail_start(Sb, N, plan.em_terms)
        U, _ = _backward(U0, w, N)
        v = U[:, 0]
        scale = np.max(np.abs(U0[:, :-1]), axis=1) if S.shape[1] else np.zeros(len(Sb))
        trunc = rel * np.maximum(scale, np.abs(v))
        # rounding in the recursion grows with N, so only truncation drives doubling
        err = trunc + eps * N * S.shape[1] * np.maximum(np.abs(v), 1e-300)
        bad = trunc > plan.tol * np.abs(v)
        if N >= plan.max_cutoff:
            bad[:] = False
        done = ~bad
        vals[todo[done]] = v[done]
        errs[todo[done]] = err[done]
        todo = todo[bad]
        N = min(plan.max_cutoff, 2 * N)
    if not np.all(np.isfinite(vals)):
        raise NoConvergence("non-finite value in MZF recursion")
    return vals, errs


def _truncated(S: np.ndarray, N: int, hurwitz_inner: bool):
    B, r = S.shape
    w = np.zeros((B, r + 1), dtype=S.dtype)
    w[:, :r] = np.cumsum(S[:, ::-1], axis=1)[:, ::-1]
    U = np.zeros((B, r + 1), dtype=S.dtype)
    U[:, r] = 1.0
    if hurwitz_inner:
        opts = EvalOptions(tol=1e-15)
        for b in range(B):
            # T_r(N) = zeta_H(s_r, N+1), scaled by (N+1)^{s_r}
            U[b, r - 1] = hurwitz_zeta(S[b, r - 1], N + 1.0, opts) * (N + 1.0) ** S[b, r - 1]
    U, _ = _backward(U, w, N)
    return U[:, 0]


def _fit_batch(S: np.ndarray, plan: LatticePlan):
    N = plan.outer_cutoff
    inner = plan.tail_mode == "algebraic-fit"
    if plan.tail_mode == "none":
        v = _truncated(S, N, False)
        v2 = _truncated(S, N // 2, False)
        return v, np.abs(v - v2)
    cuts = [N // 8, N // 4, N // 2, N]
    sums = [_truncated(S, n, inner) for n in cuts]
    vals = np.empty(len(S), dtype=complex)
    errs = np.empty(len(S))
    for b in range(len(S)):
        e1, _ = aitken(sums[0][b], sums[1][b], sums[2][b])
        e2, d = aitken(sums[1][b], sums[2][b], sums[3][b])
        vals[b] = e2
        errs[b] = abs(e2 - e1)
    return vals, errs


def mzf_eval_batch(S, plan: LatticePlan | None = None, check: bool = True):
    """Evaluate rows of S (shape (B, r)) as MZF indices.  Returns (values,
    error estimates)."""
    plan = plan or LatticePlan()
    S = np.atleast_2d(np.asarray(S))
    if S.dtype != np.clongdouble:
        S = S.astype(complex)
    if S.shape[1] > MAX_DEPTH:
        raise OutOfDomain(f"depth {S.shape[1]} exceeds the numeric cap {MAX_DEPTH}")
    if S.shape[0] == 0:
        return np.zeros(0, dtype=S.dtype), np.zeros(0)
    if check:
        m = domain_margin(S)
        if np.any(~(m > 0)):
            bad = S[np.argmin(m)]
            raise OutOfDomain(f"index {tuple(complex(v) for v in bad)} is outside the convergence domain")
    if plan.tail_mode == "asymptotic":
        return _asymptotic_batch(S, plan)
    return _fit_batch(S, plan)


def mzf_eval(idx: Sequence[complex], plan: LatticePlan | None = None) -> tuple[complex, float]:
    if len(idx) == 0:
        return 1.0 + 0j, 0.0
    if not in_domain(idx):
        raise OutOfDomain(f"{tuple(idx)} is outside the convergence domain")
    v, e = mzf_eval_batch(np.asarray([list(idx)], dtype=complex), plan, check=False)
    return complex(v[0]), float(e[0])


def mzf_tail_table(exponents: Sequence[complex], N: int, plan: LatticePlan | None = None) -> np.ndarray:
    """T_1(n) for n = 0..N of the nested sum with the given exponents,
    i.e. sum_{n < n_1 < ... < n_q} prod n_i^-u_i, returned unscaled."""
    plan = plan or LatticePlan()
    S = np.asarray([list(exponents)], dtype=complex)
    Nst = max(N, _choose_cutoff(S, plan))
    U0, w, _ = _tail_start(S, Nst, plan.em_terms)
    _, table = _backward(U0, w, Nst, keep_table=True)
    n = np.arange(N + 1, dtype=float)
    return table[: N + 1, 0, 0] * np.exp(-w[0, 0] * np.log(n + 1.0))


def mzf_eval_many(indices: Sequence[Sequence[complex]], plan: LatticePlan | None = None, chunk: int = 8192):
    """Evaluate a mixed-depth list; grouping by depth and fixed-size chunks
    keeps results independent of how callers partition their work."""
    plan = plan or LatticePlan()
    vals = np.empty(len(indices), dtype=complex)
    errs = np.empty(len(indices))
    by_depth: dict[int, list[int]] = {}
    for i, idx in enumerate(indices):
        by_depth.setdefault(len(idx), []).append(i)
    for depth, rows in sorted(by_depth.items()):
        if depth == 0:
            vals[rows] = 1.0
            errs[rows] = 0.0
            continue
        S = np.asarray([indices[i] for i in rows], dtype=complex)
        for lo in range(0, len(rows), chunk):
            v, e = mzf_eval_batch(S[lo : lo + chunk], plan)
            vals[rows[lo : lo + chunk]] = v
            errs[rows[lo : lo + chunk]] = e
    return vals, errs


def mt_double_zeta(r: complex, s: complex, t: complex, plan: LatticePlan | None = None) -> tuple[complex, float]:
    """Mordell-Tornheim sum over m, n >= 1 of m^-r n^-s (m+n)^-t."""
    from .lattice import two_chain_sum

    r, s, t = complex(r), complex(s), complex(t)
    if not ((r + t).real > 1 and (s + t).real > 1 and (r + s + t).real > 2):
        raise OutOfDomain(f"Mordell-Tornheim ({r}, {s}, {t}) outside its domain")
    return two_chain_sum([r], [s], merged=t, totals=[], plan=plan or LatticePlan())


def with_tail_mode(plan: LatticePlan, mode: str) -> LatticePlan:
    return replace(plan, tail_mode=mode)
