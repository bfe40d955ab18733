import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mzfshuffle.engine import expand_shuffle
from mzfshuffle.errors import OutOfDomain
from mzfshuffle.mzf import mzf_eval
from mzfshuffle.realize import RealizeStats, TruncationPlan, _circle_extrapolate, realize, sum_series


def product(left, right):
    return mzf_eval(left)[0] * mzf_eval(right)[0]


@pytest.mark.parametrize("s,t", [(2, 2), (2.5, 3.5), (3, 2 + 1j)])
def test_double_shuffle_realize(s, t):
    e = expand_shuffle(["s"], ["t"])
    v, err = realize(e, {"s": s, "t": t})
    assert abs(v - product([s], [t])) < 1e-6
    assert err < 1e-6


def test_depth_2x1_generic_point():
    e = expand_shuffle(["s1", "s2"], ["t"])
    plan = TruncationPlan(cutoff=32, inner_cutoffs=(32,), max_cutoff=256, tail_tol=1e-6)
    v, err = realize(e, {"s1": 1.5, "s2": 2.5, "t": 2.25}, plan)
    assert abs(v - product([1.5, 2.5], [2.25])) < max(1e-5, 3 * err)


@pytest.mark.slow
def test_singular_point_uses_circle():
    # s1 + t integer puts a gamma pole inside a binomial of the depth 2x1 terms
    e = expand_shuffle(["s1", "s2"], ["t"])
    plan = TruncationPlan(cutoff=32, inner_cutoffs=(32,), max_cutoff=1024, tail_tol=1e-8)
    st = RealizeStats()
    v, err = realize(e, {"s1": 1.5, "s2": 2.5, "t": 1.5}, plan, st)
    assert st.singular
    res = abs(v - product([1.5, 2.5], [1.5]))
    assert res < 1e-6 and res < 3 * err


def test_out_of_domain():
    e = expand_shuffle(["s"], ["t"])
    with pytest.raises(OutOfDomain):
        realize(e, {"s": 1.0, "t": 2})


def test_plan_validation():
    with pytest.raises(ValueError):
        TruncationPlan(cutoff=8)
    with pytest.raises(ValueError):
        TruncationPlan(singular_points=1)
    assert TruncationPlan(cutoff=20, inner_cutoffs=(16,)).cutoff_at(3) == 16


def test_sum_series_geometric():
    plan = TruncationPlan(cutoff=20, max_cutoff=2048)
    val, err, K, _ = sum_series(lambda k: (0.5 ** k.astype(float), np.zeros(len(k))), plan)
    assert abs(val - 2.0) < max(1e-14, 3 * err) and err < 1e-8


def test_sum_series_algebraic_tail():
    # sum 1/(k+1)^3 = zeta(3); the tail fit handles the slow decay
    plan = TruncationPlan(cutoff=50)
    val, err, K, _ = sum_series(lambda k: ((k + 1.0) ** -3, np.zeros(len(k))), plan)
    assert abs(val - 1.2020569031595942) < max(1e-9, 3 * err)


def test_plan_json():
    d = TruncationPlan().to_json()
    assert d["singular_points"] == 4 and d["cutoff"] == 400


@settings(max_examples=40, deadline=None)
@given(st.floats(0.6, 3.0), st.floats(0, 6.28), st.sampled_from([4, 6, 8]))
def test_circle_extrapolation_simple_pole(R, phase, M):
    # f(z) = 1/(z0 - z) with |z0| = R; centre value 1/z0
    z0 = R * cmath.exp(1j * phase)
    delta = 0.02
    w = np.exp(2j * np.pi * (np.arange(M) + 0.5) / M)
    vals = 1 / (z0 - delta * w)
    val, err = _circle_extrapolate(list(vals))
    plain = abs(np.mean(vals) - 1 / z0)
    assert abs(val - 1 / z0) <= max(err, 1e-15) * 3
    assert abs(val - 1 / z0) <= plain + 1e-15
