"""Tail extrapolation for slowly convergent series and exact-rounded sums."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import NoConvergence
from .specfun import EvalOptions, hurwitz_zeta

_HZ_OPTS = EvalOptions(series_cutoff=16, tol=1e-15)


def csum(values) -> complex:
    """Correctly rounded sum of complex values (order independent)."""
    v = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(v.real.tolist()), math.fsum(v.imag.tolist()))


def aitken(s1: complex, s2: complex, s3: complex) -> tuple[complex, float]:
    """Extrapolate three partial sums at geometrically spaced cutoffs."""
    d1 = s2 - s1
    d2 = s3 - s2
    den = d2 - d1
    if den == 0 or d2 == 0:
        return s3, abs(d2)
    est = s3 - d2 * d2 / den
    return est, abs(est - s3)


@dataclass(frozen=True)
class TailFit:
    tail: complex  # estimate of sum_{k > K} a_k
    err: float
    p: complex  # fitted leading decay exponent, a_k ~ k^-p
    shifts: int


def _design(k: np.ndarray, p: complex, m: int) -> np.ndarray:
    base = np.exp(-p * np.log(k))
    return np.stack([base * k ** (-float(i)) for i in range(m)], axis=1)


def _fit_coeffs(k, a, p, m):
    A = _design(k, p, m)
    # scale columns for conditioning
    scale = np.linalg.norm(A, axis=0)
    scale[scale == 0] = 1.0
    c, *_ = np.linalg.lstsq(A / scale, a, rcond=None)
    c = c / scale
    resid = a - A @ c
    return c, resid


def _hz_tail(c, p, start: int) -> complex:
    total = 0j
    for i, ci in enumerate(c):
        total += ci * hurwitz_zeta(p + i, float(start), _HZ_OPTS)
    return total


def _fit_window(k, a, m, p0):
    wts = 1.0 / np.maximum(np.abs(a), 1e-300)

    def res(x):
        p = complex(x[0], x[1])
        _, r = _fit_coeffs(k, a, p, m)
        r = r * wts
        return np.concatenate([r.real, r.imag])

    sol = optimize.least_squares(res, x0=[p0.real, p0.imag], method="lm", xtol=1e-14, ftol=1e-14, max_nfev=400)
    p = complex(sol.x[0], sol.x[1])
    c, _ = _fit_coeffs(k, a, p, m)
    return p, c


def power_tail(terms, shifts: int = 4, lo_frac: float = 0.25) -> TailFit:
    """Fit a_k ~ k^-p (c_0 + c_1/k + ...) on the last part of ``terms``
    (a_0..a_K) and return the model sum over k > K via Hurwitz zeta.

    The error estimate repeats the fit on a window ending at 3K/4 and
    compares its prediction with the observed terms plus the new tail.
    """
    a = np.asarray(terms, dtype=complex)
    K = len(a) - 1
    if K < 16:
        raise NoConvergence("power_tail needs at least 17 terms")
    lo = max(int(K * lo_frac), 4)
    mag = np.abs(a[lo:])
    if not np.any(mag > 0):
        return TailFit(0j, 0.0, complex(math.inf), 0)
    peak = np.max(np.abs(a))
    if peak == 0 or np.max(mag[-(K - lo) // 4 :]) <= 1e-300 or np.max(mag[-(K - lo) // 4 :]) < 1e-17 * peak:
        # effectively terminated (exact zeros or underflow)
        return TailFit(0j, float(np.max(mag[-4:]) * K), complex(math.inf), 0)
    ratio = a[K] / a[K // 2] if a[K // 2] != 0 else 0
    if ratio == 0 or abs(ratio) < 2.0**-60:
        return TailFit(0j, float(abs(a[K]) * 2), complex(math.inf), 0)
    p0 = -np.log(ratio) / math.log(K / (K // 2))

    def fit_to(end):
        k = np.arange(lo, end + 1, dtype=float)
        p, c = _fit_window(k, a[lo : end + 1], shifts, complex(p0))
        if p.real <= 1.0 + 1e-6:
            raise NoConvergence(f"fitted decay exponent {p:.4g} gives a divergent tail")
        return p, c

    p, c = fit_to(K)
    tail = _hz_tail(c, p, K + 1)
    mid = (3 * K) // 4
    try:
        p2, c2 = fit_to(mid)
        tail2 = _hz_tail(c2, p2, mid + 1)
        err = abs(csum(a[mid + 1 :]) + tail - tail2)
    except NoConvergence:
        err = abs(tail)
    # geometric or faster decay: the model tail is harmless but meaningless
    if p.real > 60:
        tail, err = 0j, float(abs(a[K]) * 2)
    return TailFit(complex(tail), float(err), p, shifts)


def sum_with_tail(terms, mode: str = "fit", shifts: int = 4) -> tuple[complex, float, TailFit | None]:
    """Partial sum of all terms plus an extrapolated remainder."""
    a = np.asarray(terms, dtype=complex)
    head = csum(a)
    if mode == "none":
        return head, float(abs(a[-1]) * len(a)), None
    tf = power_tail(a, shifts=shifts)
    return head + tf.tail, tf.err, tf


def group_families(exps, tol: float = 1e-9) -> list[tuple[complex, int]]:
    """Merge exponents that differ by integers; returns (representative with
    the smallest real part, multiplicity) pairs.  Multiplicity > 1 signals
    logarithmic terms in the asymptotics."""
    groups: list[list[complex]] = []
    for e in exps:
        e = complex(e)
        for g in groups:
            d = e - g[0]
            if abs(d.imag) < tol and abs(d.real - round(d.real)) < tol:
                g.append(e)
                break
        else:
            groups.append([e])
    out = []
    for g in groups:
        out.append((min(g, key=lambda z: z.real), len(g)))
    return out


def _hz_log_tail(p: complex, start: int, power: int) -> complex:
    """sum_{M >= start} M^-p log(M)^power for power in {0, 1, 2}."""
    if power == 0:
        return hurwitz_zeta(p, float(start), _HZ_OPTS)
    h = 1e-3
    if power == 1:
        f1 = hurwitz_zeta(p + h, float(start), _HZ_OPTS)
        f2 = hurwitz_zeta(p - h, float(start), _HZ_OPTS)
        f3 = hurwitz_zeta(p + 2 * h, float(start), _HZ_OPTS)
        f4 = hurwitz_zeta(p - 2 * h, float(start), _HZ_OPTS)
        return -(8 * (f1 - f2) - (f3 - f4)) / (12 * h)
    f0 = hurwitz_zeta(p, float(start), _HZ_OPTS)
    f1 = hurwitz_zeta(p + h, float(start), _HZ_OPTS)
    f2 = hurwitz_zeta(p - h, float(start), _HZ_OPTS)
    return (f1 - 2 * f0 + f2) / (h * h)


def family_tail(g, families, shifts: int = 4, lo_frac: float = 0.125) -> TailFit:
    """Tail of sum_M g(M) beyond M = K = len(g)-1, fitting g on [lo, K] by
    a linear combination of M^-(p+n) log(M)^l over known exponent families
    (p, multiplicity) with n < shifts and l < multiplicity."""
    g = np.asarray(g, dtype=complex)
    K = len(g) - 1
    lo = max(int(K * lo_frac), 8)
    basis = []
    for p, mult in families:
        if complex(p).real <= 1.0 + 1e-9:
            raise NoConvergence(f"summand exponent {p} does not give a convergent tail")
        for n in range(shifts):
            for ell in range(min(mult, 3)):
                basis.append((complex(p) + n, ell))

    def fit(end):
        M = np.arange(lo, end + 1, dtype=float)
        logM = np.log(M)
        cols = [np.exp(-p * logM) * logM**ell for p, ell in basis]
        A = np.stack(cols, axis=1)
        y = g[lo : end + 1]
        w = 1.0 / np.maximum(np.abs(y), 1e-300)
        Aw = A * w[:, None]
        sc = np.linalg.norm(Aw, axis=0)
        sc[sc == 0] = 1.0
        c, *_ = np.linalg.lstsq(Aw / sc, y * w, rcond=None)
        c = c / sc
        return sum(ci * _hz_log_tail(p, end + 1, ell) for ci, (p, ell) in zip(c, basis))

    if not np.any(g[lo:]):
        return TailFit(0j, 0.0, complex(math.inf), 0)
    tail = fit(K)
    half = K // 2
    tail2 = fit(half)
    err = abs(csum(g[half + 1 :]) + tail - tail2)
    p0 = min((complex(p) for p, _ in families), key=lambda z: z.real)
    return TailFit(complex(tail), float(err), p0, shifts)
