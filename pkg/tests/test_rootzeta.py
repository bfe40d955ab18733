import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mzfshuffle.affine import AffineExpr
from mzfshuffle.errors import ConvergenceCheckFailed
from mzfshuffle.lattice import brute_force, generic_sum, two_chain_sum
from mzfshuffle.mzf import LatticePlan, mzf_eval
from mzfshuffle.rootzeta import (
    RootZetaMatrix,
    all_path_shapes,
    analyze,
    embed_product,
    find_relabel,
    is_ez_path,
    path_matrix,
    permute,
    relabel_equivalent,
    root_zeta_eval,
)

P = RootZetaMatrix.parse


def test_text_roundtrip():
    m = P("[[s1,0,s2+k],[t-k,0],[0]]")
    assert m.r == 3
    assert P(m.to_text()) == m or relabel_equivalent(P(m.to_text()), m)
    assert RootZetaMatrix.from_json(m.to_json()).to_text() == m.to_text()


def test_eval_examples():
    z2 = mzf_eval([2])[0]
    assert root_zeta_eval(P("[[2,0],[2]]"))[0] == pytest.approx(z2**2, abs=1e-12)
    assert root_zeta_eval(P("[[2,2],[0]]"))[0] == pytest.approx(mzf_eval([2, 2])[0], abs=1e-12)
    assert root_zeta_eval(P("[[3]]"))[0] == pytest.approx(mzf_eval([3])[0], abs=1e-14)


def test_ez_path_examples():
    s = [AffineExpr.parse(x) for x in ("s1", "s2", "s3")]
    assert list(is_ez_path(P("[[s1,s2,s3],[0,0],[0]]"))) == s
    assert list(is_ez_path(P("[[0,0,s3],[s1,s2],[0]]"))) == s
    assert is_ez_path(P("[[s1,0,s2],[0,0],[s3]]")) is None


def test_relabel_examples():
    a = P("[[s1,0,s2],[0,0],[s3]]")
    b = P("[[s1,0,s2],[s3,0],[0]]")
    assert relabel_equivalent(a, b)
    assert relabel_equivalent(a, a)
    assert not relabel_equivalent(P("[[2,3],[0]]"), P("[[2,0],[3]]"))


def test_embed_product_examples():
    assert embed_product(["s"], ["t"]).to_text() == "[[s,0],[t]]"
    assert embed_product(["s1", "s2"], ["t1"]).to_text() == "[[s1,s2,0],[0,0],[t1]]"
    assert embed_product(["s1", "s2"], ["t1", "t2"]).to_text() == "[[s1,s2,0,0],[0,0,0],[t1,t2],[0]]"


def test_convergence_guard():
    with pytest.raises(ConvergenceCheckFailed):
        root_zeta_eval(P("[[0.5,0],[0.5]]"))


def _random_index(rng, r):
    # every tail sum real part comfortably inside the domain
    return [complex(round(rng.uniform(1.3, 3.0), 3), round(rng.uniform(-1, 1), 3)) for _ in range(r)]


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_path_embeddings_agree(r):
    rng = random.Random(r)
    idx = _random_index(rng, r)
    ref, ref_err = mzf_eval(idx)
    for shape in all_path_shapes(r):
        m = path_matrix(idx, shape)
        assert np.allclose(is_ez_path(m), idx)
        v, e = root_zeta_eval(m)
        assert abs(v - ref) <= 3 * (e + ref_err) + 1e-12


def test_relabel_preserves_value():
    rng = random.Random(5)
    for _ in range(20):
        r = rng.choice([2, 3])
        m = path_matrix(_random_index(rng, r), rng.choice(all_path_shapes(r)))
        perm = rng.sample(range(1, r + 1), r)
        p = permute(m, perm)
        if p is None:
            continue
        assert relabel_equivalent(m, p)
        v1, e1 = root_zeta_eval(m)
        v2, e2 = root_zeta_eval(p)
        assert abs(v1 - v2) <= 3 * (e1 + e2) + 1e-12


def test_embed_product_value():
    a, b = [1.5, 2.5], [2.25 + 0.5j]
    v, e = root_zeta_eval(embed_product(a, b))
    ref = mzf_eval(a)[0] * mzf_eval(b)[0]
    assert abs(v - ref) <= 3 * e + 1e-12


mats = st.sampled_from(
    [
        "[[s1,0,s2],[0,0],[s3]]",
        "[[s1,0,s2],[s3,0],[0]]",
        "[[0,0,s2],[s1,0],[s3]]",
        "[[s1,s2,0],[0,0],[s3]]",
        "[[s1,s2,s3],[0,0],[0]]",
        "[[0,s2,s3],[s1,0],[0]]",
    ]
)


@given(mats, mats, mats)
def test_relabel_is_equivalence(a, b, c):
    a, b, c = P(a), P(b), P(c)
    assert relabel_equivalent(a, a)
    assert relabel_equivalent(a, b) == relabel_equivalent(b, a)
    if relabel_equivalent(a, b) and relabel_equivalent(b, c):
        assert relabel_equivalent(a, c)


def test_find_relabel_gives_permutation():
    a = P("[[s1,0,s2],[0,0],[s3]]")
    b = P("[[s1,0,s2],[s3,0],[0]]")
    perm = find_relabel(a, b)
    assert sorted(perm) == [1, 2, 3]
    assert permute(a, perm) == b or relabel_equivalent(permute(a, perm), b)


def test_analyze_two_chain():
    sh = analyze(P("[[1.5,0,2.25],[2.5,0],[0]]"))
    assert sh.kind == "two_chain"
    assert analyze(P("[[2,3],[0]]")).kind == "path"


def test_two_chain_against_brute_force():
    entries = {(1, 1): 1.5, (1, 3): 2.25, (2, 2): 2.5}
    v, err = root_zeta_eval(RootZetaMatrix(3, entries))
    assert v == pytest.approx(0.43920045503456534, abs=1e-12)
    # cube truncation is dominated by the m3 tail, which decays like N^-1.25,
    # so doubling N shrinks the gap by about 2^1.25
    b1 = brute_force(entries, 3, 40)
    b2 = brute_force(entries, 3, 80)
    ratio = abs(v - b1) / abs(v - b2)
    assert 2.0 < ratio < 2.8


def test_generic_matches_specialized():
    entries = {(1, 1): 2.5, (1, 2): 1.75, (2, 2): 2.0, (1, 3): 2.5}
    m = RootZetaMatrix(3, entries)
    v, err = root_zeta_eval(m)
    g, gerr = generic_sum(entries, 3, LatticePlan(), N=200)
    assert abs(v - g) <= 3 * (err + gerr) + 1e-6
