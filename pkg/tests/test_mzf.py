import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mzfshuffle.errors import OutOfDomain
from mzfshuffle.mzf import LatticePlan, in_domain, mt_double_zeta, mzf_eval, mzf_eval_batch, mzf_eval_many
from mzfshuffle.specfun import hurwitz_zeta

ZETA2 = math.pi**2 / 6
ZETA3 = 1.2020569031595942
ZETA4 = math.pi**4 / 90
ZETA6 = math.pi**6 / 945


def brute_mt(r, s, t, N=2000):
    m = np.arange(1, N + 1, dtype=float)
    M, Nn = np.meshgrid(m, m, indexing="ij")
    return float(np.sum(M**-r * Nn**-s * (M + Nn) ** -t))


@pytest.mark.parametrize(
    "idx,ok",
    [([2], True), ([1], False), ([1, 2], True), ([-1, 5, 2], True), ([2, 1], False)],
)
def test_in_domain(idx, ok):
    assert in_domain(idx) is ok


def test_known_values():
    assert mzf_eval([2])[0] == pytest.approx(ZETA2, abs=1e-12)
    assert mzf_eval([1, 2])[0] == pytest.approx(ZETA3, abs=1e-12)
    # stuffle at a=b=2: 2 zeta2(2,2) + zeta(4) = zeta(2)^2
    z22 = (ZETA2**2 - ZETA4) / 2
    assert mzf_eval([2, 2])[0] == pytest.approx(z22, abs=1e-12)
    assert z22 == pytest.approx(0.8117424, abs=1e-7)
    # shuffle at a=b=2: zeta(2)^2 = 2 zeta2(2,2) + 4 zeta2(1,3)
    assert mzf_eval([1, 3])[0] == pytest.approx((ZETA2**2 - 2 * z22) / 4, abs=1e-12)


def test_out_of_domain_raises():
    with pytest.raises(OutOfDomain):
        mzf_eval([0.5, 1.2])


def test_error_estimate_covers_error():
    v, err = mzf_eval([1, 2])
    assert abs(v - ZETA3) <= 3 * err + 1e-15


@settings(max_examples=25, deadline=None)
@given(st.builds(complex, st.floats(2.0, 6.0), st.floats(-5, 5)))
def test_depth_one_matches_hurwitz(s):
    v, _ = mzf_eval([s])
    assert abs(v - hurwitz_zeta(s, 1)) <= 1e-11 * max(1, abs(v))


@settings(max_examples=25, deadline=None)
@given(
    st.builds(complex, st.floats(2.0, 4.0), st.floats(-3, 3)),
    st.builds(complex, st.floats(2.0, 4.0), st.floats(-3, 3)),
)
def test_stuffle_closure(a, b):
    za, ea = mzf_eval([a])
    zb, eb = mzf_eval([b])
    v1, e1 = mzf_eval([a, b])
    v2, e2 = mzf_eval([b, a])
    v3, e3 = mzf_eval([a + b])
    assert abs(za * zb - (v1 + v2 + v3)) <= ea + eb + e1 + e2 + e3 + 1e-8


def test_monotone_truncation_without_tail():
    exact = (ZETA2**2 - ZETA4) / 2
    errs = []
    for N in (16, 32, 64, 128, 256):
        plan = LatticePlan(outer_cutoff=N, tail_mode="none", max_cutoff=N)
        errs.append(abs(mzf_eval([2, 2], plan)[0] - exact))
    assert all(b <= a for a, b in zip(errs, errs[1:]))


@pytest.mark.parametrize("mode", ["asymptotic", "algebraic-fit"])
def test_tail_modes_agree(mode):
    v, err = mzf_eval([1.5, 2.5 + 1j, 2.0], LatticePlan(tail_mode=mode))
    ref, _ = mzf_eval([1.5, 2.5 + 1j, 2.0])
    assert abs(v - ref) <= 3 * err + 1e-12


def test_batch_matches_scalar():
    rows = [[2.5, 3.0], [1.5 + 1j, 2.25], [-1.0, 4.5]]
    vals, errs = mzf_eval_batch(np.array(rows, dtype=complex))
    for row, v in zip(rows, vals):
        assert abs(v - mzf_eval(row)[0]) < 1e-13
    many = mzf_eval_many(rows)
    assert np.allclose(many[0], vals, atol=1e-14)


def test_depth_four():
    # zeta({2}^n) = pi^(2n) / (2n+1)!
    v, err = mzf_eval([2, 2, 2, 2])
    assert v == pytest.approx(math.pi**8 / math.factorial(9), abs=1e-9)


def test_mt_values():
    v, err = mt_double_zeta(2, 2, 0)
    assert abs(v - ZETA2**2) <= 3 * err + 1e-12
    assert mt_double_zeta(0, 0, 3)[0] == pytest.approx(ZETA2 - ZETA3, abs=1e-9)
    v = mt_double_zeta(2, 2, 2)[0]
    assert v == pytest.approx(ZETA6 / 3, abs=1e-12)
    assert v == pytest.approx(brute_mt(2, 2, 2), abs=1e-9)


@settings(max_examples=10, deadline=None)
@given(
    st.builds(complex, st.floats(1.2, 3.0), st.floats(-1, 1)),
    st.builds(complex, st.floats(1.2, 3.0), st.floats(-1, 1)),
    st.builds(complex, st.floats(0.5, 2.5), st.floats(-1, 1)),
)
def test_mt_symmetry(r, s, t):
    a, _ = mt_double_zeta(r, s, t)
    b, _ = mt_double_zeta(s, r, t)
    assert abs(a - b) <= 1e-9 * max(1, abs(a))
