"""Complex special functions: log-gamma, generalized binomial, Pochhammer,
Gauss 2F1, Hurwitz zeta, Bernoulli numbers and the incomplete-gamma ratio.

Array-valued helpers (suffix ``_array``) are used by the numeric back ends;
the scalar functions are the public surface.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .errors import GammaPoleInC, NoConvergence, PoleOfGamma

INT_TOL = 1e-9

@dataclass(frozen=True)
class EvalOptions:
    series_cutoff: int = 16
    tol: float = 1e-14
    max_terms: int = 200_000

    def __post_init__(self):
        if self.tol <= 0 or self.series_cutoff < 1 or self.max_terms < 1:
            raise ValueError("EvalOptions needs tol > 0 and cutoffs >= 1")


DEFAULT_OPTS = EvalOptions()


def near_nonpositive_integer(z, tol: float = INT_TOL):
    """Elementwise: is z within tol (both components) of 0, -1, -2, ...?"""
    z = np.asarray(z, dtype=complex)
    n = np.round(z.real)
    return (np.abs(z.real - n) <= tol) & (np.abs(z.imag) <= tol) & (n <= 0)


def _nearest_int(z, tol: float = INT_TOL):
    """(is_int mask, nearest integer as int64 array)."""
    z = np.asarray(z, dtype=complex)
    n = np.round(z.real)
    mask = (np.abs(z.real - n) <= tol) & (np.abs(z.imag) <= tol)
    return mask, n.astype(np.int64)


def log_gamma_array(z) -> np.ndarray:
    """Principal-branch log Gamma without pole checks (poles give inf)."""
    z = np.asarray(z, dtype=complex)
    out = special.loggamma(z)
    pole = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    return np.where(pole, np.inf + 0j, out)


def log_gamma(z: complex, tol: float = INT_TOL) -> complex:
    """Principal-branch log Gamma(z), continuous off the negative real axis."""
    if bool(near_nonpositive_integer(z, tol)):
        raise PoleOfGamma(f"Gamma has a pole at {z}")
    return complex(log_gamma_array(np.asarray([z], dtype=complex))[0])


def gamma(z: complex) -> complex:
    return complex(np.exp(log_gamma(z)))


def pochhammer(x: complex, n: int) -> complex:
    """Rising factorial (x)_n."""
    if n < 0:
        raise ValueError("pochhammer needs n >= 0")
    out = 1.0 + 0j
    for i in range(n):
        out *= x + i
    return complex(out)


def _binom_int_bottom(s: np.ndarray, j: np.ndarray) -> np.ndarray:
    """Binomial(s, j) for nonnegative integer j as a finite product."""
    out = np.ones(s.shape, dtype=complex)
    if s.size == 0:
        return out
    jmax = int(j.max())
    for i in range(1, jmax + 1):
        act = j >= i
        # factor (s - j + i) / i
        out = np.where(act, out * (s - j + i) / i, out)
    return out


def gen_binomial_array(s, t, tol: float = INT_TOL) -> np.ndarray:
    """Vectorized generalized binomial Gamma(s+1)/(Gamma(t+1)Gamma(s-t+1)).

    Limit convention: integer bottom (or integer s-t) uses the finite
    product; a single pole in the denominator with a finite numerator gives
    0; a numerator pole with no compensating denominator pole gives inf.
    """
    s, t = np.broadcast_arrays(np.asarray(s, dtype=complex), np.asarray(t, dtype=complex))
    s = s.ravel().copy()
    t = t.ravel().copy()
    out = np.empty(s.shape, dtype=complex)
    done = np.zeros(s.shape, dtype=bool)

    t_int, t_n = _nearest_int(t, tol)
    d_int, d_n = _nearest_int(s - t, tol)
    s_int, s_n = _nearest_int(s, tol)
    s_pole = s_int & (s_n <= -1)

    # integer bottom; the product is only needed when s is near an integer
    a = t_int & (t_n >= 0)
    b = (~a) & d_int & (d_n >= 0)
    for mask, jj in ((a, t_n), (b, d_n)):
        prod = mask & s_int
        if prod.any():
            out[prod] = _binom_int_bottom(s[prod], jj[prod])
            done |= prod
        gam = mask & ~s_int
        if gam.any():
            ss, j = s[gam], jj[gam].astype(float)
            out[gam] = np.exp(
                log_gamma_array(ss + 1.0) - log_gamma_array(j + 1.0) - log_gamma_array(ss - j + 1.0)
            )
            done |= gam

    rest = ~done
    den1 = rest & t_int & (t_n <= -1)
    den2 = rest & d_int & (d_n <= -1)
    zero = rest & (den1 | den2) & ~s_pole
    out[zero] = 0.0
    done |= zero
    # numerator pole against denominator poles: both denominators singular
    # only happens together with s_pole; take the generic-direction limit 0
    both = (~done) & s_pole & den1 & den2
    out[both] = 0.0
    done |= both
    inf = (~done) & s_pole
    out[inf] = complex(math.inf, 0.0)
    done |= inf
    gen = ~done
    if gen.any():
        ss, tt = s[gen], t[gen]
        out[gen] = np.exp(log_gamma_array(ss + 1.0) - log_gamma_array(tt + 1.0) - log_gamma_array(ss - tt + 1.0))
    return out


def gen_binomial(s: complex, t: complex, tol: float = INT_TOL) -> complex:
    return complex(gen_binomial_array(np.asarray([s]), np.asarray([t]), tol)[0])


def hyp2f1(a: complex, b: complex, c: complex, z: complex, opts: EvalOptions = DEFAULT_OPTS) -> complex:
    """Gauss hypergeometric series for |z| <= 0.99."""
    if abs(z) > 0.99 + 1e-15:
        raise ValueError("hyp2f1 is restricted to |z| <= 0.99")
    if bool(near_nonpositive_integer(c)):
        raise GammaPoleInC(f"c = {c} is a nonpositive integer")
    # the term recursion runs in extended precision: near |z| = 0.99 a few
    # thousand ratios are multiplied and double rounding would drift
    a, b, c, z = (np.clongdouble(complex(v)) for v in (a, b, c, z))
    one = np.longdouble(1)
    term = np.clongdouble(1)
    total = np.clongdouble(1)
    for n in range(opts.max_terms):
        ratio = (a + n) * (b + n) / ((c + n) * (n + one)) * z
        term = term * ratio
        total = total + term
        if term == 0:
            return complex(total)
        # for m > n every ratio is at most rho: |a+m|/|c+m| <= 1 + |a-c|/(Re c + m)
        # and |b+m|/(m+1) <= 1 + |b-1|/(m+1), so the tail is geometric
        den = c.real + n + 1
        if n >= 2 and den > 0:
            rho = abs(z) * (1 + abs(a - c) / den) * (1 + abs(b - 1) / (n + 2))
            if rho < 1 and abs(term) * rho / (1 - rho) < opts.tol * 1e-2 * abs(total):
                return complex(total)
    raise NoConvergence(f"hyp2f1 did not converge within {opts.max_terms} terms")


def _loggamma_ld(z: complex) -> np.clongdouble:
    # extended-precision Stirling series after shifting Re z past 20
    z = np.clongdouble(z)
    n = max(0, 20 - int(math.floor(float(z.real))))
    shift = np.clongdouble(0)
    for k in range(n):
        shift += np.log(z + k)
    w = z + n
    half_log_2pi = np.longdouble(0.5) * np.log(2 * np.longdouble(np.pi))
    out = (w - np.longdouble(0.5)) * np.log(w) - w + half_log_2pi
    w2 = w * w
    p = 1 / w
    for m in range(1, 12):
        b = bernoulli(2 * m)
        out += np.longdouble(b.numerator) / np.longdouble(b.denominator * 2 * m * (2 * m - 1)) * p
        p = p / w2
    return out - shift


def gamma_ratio(a: complex, b: complex, c: complex) -> complex:
    """Gamma(a) / (Gamma(b) Gamma(c)) for Re a, b, c >= 0.5, carried in
    extended precision so the ratio keeps full double accuracy even when
    it is large.  Other arguments fall back to double log-gamma."""
    if min(complex(v).real for v in (a, b, c)) >= 0.5:
        return complex(np.exp(_loggamma_ld(a) - _loggamma_ld(b) - _loggamma_ld(c)))
    return complex(np.exp(log_gamma(a) - log_gamma(b) - log_gamma(c)))


def connection_sides(s, t, x, y, opts: EvalOptions = DEFAULT_OPTS) -> tuple[complex, complex]:
    """Both sides of (x+y)^(s+t)/(x^s y^t) = Gamma-ratio * (F/s + F/t)."""
    s, t, x, y = (complex(v) for v in (s, t, x, y))
    u = x + y
    lhs = (u / x) ** s * (u / y) ** t
    pref = gamma_ratio(s + t, s, t)
    rhs = pref * (hyp2f1(s + t, 1, s + 1, x / u, opts) / s + hyp2f1(s + t, 1, t + 1, y / u, opts) / t)
    return complex(lhs), complex(rhs)


def connection_residual(s, t, x, y, opts: EvalOptions = DEFAULT_OPTS) -> float:
    lhs, rhs = connection_sides(s, t, x, y, opts)
    return abs(lhs - rhs)


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n with B_1 = -1/2."""
    if n < 0:
        raise ValueError("n >= 0")
    table = _bernoulli_table(max(n, 32))
    return table[n]


@lru_cache(maxsize=4)
def _bernoulli_table(nmax: int) -> tuple[Fraction, ...]:
    B = [Fraction(0)] * (nmax + 1)
    B[0] = Fraction(1)
    for m in range(1, nmax + 1):
        acc = Fraction(0)
        for k in range(m):
            acc += math.comb(m + 1, k) * B[k]
        B[m] = -acc / (m + 1)
    return tuple(B)


# B_{2k}/(2k)! for k = 1..
@lru_cache(maxsize=4)
def em_factors(count: int) -> tuple[float, ...]:
    return tuple(float(bernoulli(2 * k) / math.factorial(2 * k)) for k in range(1, count + 1))


def hurwitz_zeta(s: complex, a: float, opts: EvalOptions = DEFAULT_OPTS, order: int = 5) -> complex:
    """sum_{n>=0} (n+a)^-s by partial sums plus Euler-Maclaurin through B_{2*order}."""
    s = complex(s)
    if s.real <= 1:
        raise ValueError("hurwitz_zeta needs Re(s) > 1")
    if a <= 0:
        raise ValueError("hurwitz_zeta needs a > 0")
    fac = em_factors(order + 1)
    n0 = max(opts.series_cutoff, int(math.ceil(max(10.0, abs(s)) - a)), 0)
    for _ in range(12):
        val, bound = _hurwitz_em(s, a, n0, fac, order)
        if bound <= opts.tol * max(1.0, abs(val)):
            return val
        n0 *= 2
    raise NoConvergence(f"hurwitz_zeta remainder {bound:.3e} above tol at s={s}")


def _hurwitz_em(s, a, n0, fac, order):
    n = np.arange(n0, dtype=float) + a
    head = math.fsum(np.exp(-s * np.log(n)).real) + 1j * math.fsum(np.exp(-s * np.log(n)).imag)
    x = n0 + a
    xs = x ** (-s)
    tail = x ** (1 - s) / (s - 1) + 0.5 * xs
    # (s)_{2k-1} x^{-s-2k+1}
    poch = s
    xp = xs / x
    for k in range(1, order + 1):
        tail += fac[k - 1] * poch * xp
        poch *= (s + 2 * k - 1) * (s + 2 * k)
        xp /= x * x
    first_omitted = abs(fac[order] * poch * xp)
    bound = first_omitted * abs(s + 2 * order + 1) / (s.real + 2 * order + 1)
    return complex(head + tail), bound


def upper_gamma_ratio(R: float, x: float) -> float:
    """Gamma(R, x) / Gamma(R) by quadrature of the tail integral."""
    if R <= 0:
        raise ValueError("R > 0 required")
    if x < 0:
        raise ValueError("x >= 0 required")
    if x == 0:
        return 1.0
    lg = math.lgamma(R)

    def f(u):
        return math.exp((R - 1.0) * math.log(u) - u - lg) if u > 0 else 0.0

    mode = max(R - 1.0, 0.0)
    width = 40.0 * math.sqrt(max(R, 1.0)) + 60.0
    upper = mode + width
    if x >= upper:
        val, _ = integrate.quad(f, x, math.inf, limit=200, epsabs=1e-15, epsrel=1e-13)
        return min(max(val, 0.0), 1.0)
    lower_tail = 0.0
    if x < mode:
        # integrate [0, x] instead and subtract; quad handles the u^(R-1) endpoint
        lo, _ = integrate.quad(f, 0.0, x, limit=200, epsabs=1e-15, epsrel=1e-13)
        lower_tail = lo
        val = 1.0 - lower_tail
    else:
        pts = [p for p in (mode, mode + 0.25 * width) if x < p < upper]
        val, _ = integrate.quad(f, x, upper, points=pts or None, limit=400, epsabs=1e-15, epsrel=1e-13)
        tail, _ = integrate.quad(f, upper, math.inf, limit=200, epsabs=1e-15, epsrel=1e-13)
        val += tail
    return min(max(val, 0.0), 1.0)
