"""Lattice sums for root-zeta shapes that are not a single MZF path.

``two_chain_sum`` covers the shape produced by every partial-fraction step:
two nested chains of partial sums a_1 < ... < a_p = a and b_1 < ... < b_q = b,
an optional factor (a+b)^-u on their union, and nested totals above it:

    sum_{a,b} F_A(a) F_B(b) (a+b)^-u  sum_{a+b < n_1 < ...} n_1^-v_1 ...

The inner double sum is a convolution in M = a+b, done exactly up to a
cutoff; the remaining one-dimensional series in M gets a power-law tail.
"""
from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .accel import aitken, csum, family_tail, group_families
from .errors import NoConvergence
from .mzf import LatticePlan, _choose_cutoff, _tail_start


def _chain_values(exps: Sequence[complex], N: int, dtype=complex) -> tuple[np.ndarray, float]:
    """F(a) for a = 0..N (F(0) = 0), scaled by N^-g with g the total growth
    of the chain; returns (values, g)."""
    real = np.longdouble if dtype == np.clongdouble else float
    a = np.arange(N + 1, dtype=real)
    loga = np.log(np.maximum(a, 1.0))
    g = 0.0
    P = None
    for e in exps:
        e = complex(e)
        grow = max(0.0, -e.real)
        g += grow
        fac = np.exp(-e.real * loga - real(grow * math.log(N))).astype(dtype)
        if e.imag:
            fac = fac * np.exp(-1j * e.imag * loga.astype(float)).astype(dtype)
        fac[0] = 0.0
        if P is None:
            P = fac
        else:
            prev = np.concatenate([np.zeros(1, dtype=dtype), np.cumsum(P)[:-1]])  # sum over a' < a
            P = fac * prev
    return P, g


# above this log-magnitude the scaled chain products leave double range
_LONG_THRESHOLD = 600.0


def _totals_log_table(totals: Sequence[complex], N: int, plan: LatticePlan):
    """(U, w) with H(M) = U[M] * (M+1)^-w for M = 0..N, where H(M) is the
    nested tail sum_{M < n_1 < n_2 < ...} n_1^-v_1 n_2^-v_2 ...

    Each level is a reversed cumulative sum (in long double, which keeps
    n^-v representable for large v) closed by the asymptotic tail at the
    start cutoff."""
    if not totals:
        return np.ones(N + 1, dtype=complex), 0j
    S = np.asarray([list(totals)], dtype=complex)
    Nst = max(N, _choose_cutoff(S, plan))
    U0, w, _ = _tail_start(S, Nst, plan.em_terms)
    r = S.shape[1]
    m = np.arange(1, Nst + 1, dtype=np.longdouble)
    logm = np.log(m)
    log_end = np.log(np.longdouble(Nst + 1))
    T_next = np.ones(Nst + 1, dtype=np.clongdouble)  # T_{j+1}(n), n = 0..Nst
    for j in range(r - 1, -1, -1):
        v = complex(S[0, j])
        a = np.exp(-np.longdouble(v.real) * logm) * np.exp(-1j * v.imag * logm.astype(float)).astype(np.clongdouble)
        a = a * T_next[1:]
        tail_sum = np.concatenate([np.cumsum(a[::-1])[::-1], np.zeros(1, dtype=np.clongdouble)])
        wj = complex(w[0, j])
        end = np.clongdouble(U0[0, j]) * np.exp(-np.longdouble(wj.real) * log_end) * np.clongdouble(np.exp(-1j * wj.imag * float(log_end)))
        T_next = tail_sum + end
    w1 = complex(w[0, 0])
    n1 = np.log(np.arange(1, N + 2, dtype=np.longdouble))
    scale = np.exp(np.longdouble(w1.real) * n1) * np.exp(1j * w1.imag * n1.astype(float)).astype(np.clongdouble)
    return (T_next[: N + 1] * scale).astype(complex), w1


def two_chain_summand(A, B, merged, totals, N: int, plan: LatticePlan) -> np.ndarray:
    """g(M) for M = 0..N; the value is sum_M g(M)."""
    growth = sum(max(0.0, -complex(e).real) for e in list(A) + list(B)) * math.log(N)
    wide = growth > _LONG_THRESHOLD
    dtype = np.clongdouble if wide else complex
    real = np.longdouble if wide else float
    FA, gA = _chain_values(A, N, dtype)
    FB, gB = _chain_values(B, N, dtype)
    G = np.convolve(FA, FB)[: N + 1]  # index = a + b
    U, w = _totals_log_table(totals, N, plan)
    M = np.arange(N + 1, dtype=real)
    logM = np.log(np.maximum(M, 1.0))
    mg = complex(merged)
    expo_re = -w.real * np.log(M + 1.0) - mg.real * logM + real((gA + gB) * math.log(N))
    expo_im = -w.imag * np.log(M + 1.0) - mg.imag * logM
    H = U.astype(dtype) * np.exp(expo_re) * np.exp(1j * expo_im.astype(float)).astype(dtype)
    g = (G * H).astype(complex)
    g[:2] = 0.0
    if not np.all(np.isfinite(g)):
        raise NoConvergence("overflow in two-chain lattice sum; exponents too large for the cutoff")
    return g


def two_chain_sum(A, B, merged, totals, plan: LatticePlan) -> tuple[complex, float]:
    N = plan.conv_cutoff
    g = two_chain_summand(A, B, merged, totals, N, plan)
    head = csum(g)
    fams = summand_families(A, B, merged, totals)
    tf = family_tail(g, fams, shifts=plan_shifts(fams))
    return head + tf.tail, float(tf.err + 1e-15 * abs(head) * math.sqrt(N))


def chain_exponents(exps) -> list[complex]:
    """Leading exponents e with F(a) ~ sum c a^-e for a chain."""
    exps = [complex(e) for e in exps]
    last = exps[-1]
    out = [last]
    for i in range(len(exps) - 1):
        out.append(last + sum(exps[i:-1]) - (len(exps) - 1 - i))
    return out


def summand_families(A, B, merged, totals):
    EA = chain_exponents(A)
    EB = chain_exponents(B)
    EG = EA + EB + [e + f - 1 for e in EA for f in EB]
    shift = complex(merged)
    if totals:
        shift += sum(complex(v) for v in totals) - len(totals)
    return group_families([e + shift for e in EG])


def plan_shifts(fams) -> int:
    # keep the basis small enough for a well-posed least-squares fit
    nb = sum(min(m, 3) for _, m in fams)
    return max(2, min(5, 16 // max(nb, 1)))


def generic_sum(entries: dict, r: int, plan: LatticePlan, N: int | None = None) -> tuple[complex, float]:
    """Plain truncation of every variable at N (and N/2, N/4) with an
    Aitken fit; slow and approximate, used only for unusual shapes."""
    N = N or {1: 4096, 2: 512, 3: 96, 4: 40}[r]
    items = [((i, j), complex(v)) for (i, j), v in entries.items() if v != 0]

    def trunc(n):
        grids = np.meshgrid(*([np.arange(1, n + 1, dtype=float)] * r), indexing="ij")
        cum = np.zeros((r + 1,) + grids[0].shape)
        for k in range(r):
            cum[k + 1] = cum[k] + grids[k]
        logterm = np.zeros(grids[0].shape, dtype=complex)
        for (i, j), v in items:
            logterm -= v * np.log(cum[j] - cum[i - 1])
        return csum(np.exp(logterm))

    s = [trunc(n) for n in (N // 4, N // 2, N)]
    est, err = aitken(*s)
    return est, err


def brute_force(entries: dict, r: int, N: int) -> complex:
    """Truncated lattice sum without any tail (test oracle)."""
    total = 0j
    for m in itertools.product(range(1, N + 1), repeat=r):
        pre = [0]
        for x in m:
            pre.append(pre[-1] + x)
        term = 1.0 + 0j
        for (i, j), v in entries.items():
            if v != 0:
                term *= (pre[j] - pre[i - 1]) ** (-complex(v))
        total += term
    return total
