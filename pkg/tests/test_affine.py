import pytest
from hypothesis import given, strategies as st

from mzfshuffle.affine import AffineExpr

names = st.sampled_from(["s", "t", "s1", "s2", "t1", "k", "j", "k2"])
coeffs = st.integers(-5, 5)
exprs = st.builds(
    lambda c, terms: AffineExpr(c, dict(terms)),
    st.integers(-20, 20) | st.sampled_from([0.5, -1.25, 2.5]),
    st.lists(st.tuples(names, coeffs), max_size=4),
)


def test_parse_basic():
    e = AffineExpr.parse("s2+t+k-1")
    assert e.terms == {"s2": 1, "t": 1, "k": 1}
    assert e.constant == -1


def test_index_j_is_a_symbol_not_imaginary():
    e = AffineExpr.parse("-k+j-1")
    assert e.terms == {"k": -1, "j": 1}
    assert e.constant == -1


def test_complex_constant_roundtrip():
    e = AffineExpr.parse("s+0.5-1j")
    assert e.constant == 0.5 - 1j
    assert AffineExpr.parse(str(e)) == e


def test_multiplier_syntax():
    assert AffineExpr.parse("2*s1-j+0.5") == AffineExpr(0.5, {"s1": 2, "j": -1})


def test_parameters_print_before_indices():
    assert str(AffineExpr.parse("k+t-1+s")) == "s+t+k-1"


@pytest.mark.parametrize("bad", ["", "s+*", "s t", "3s"])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        AffineExpr.parse(bad)


@given(exprs)
def test_str_parse_roundtrip(e):
    assert AffineExpr.parse(str(e)) == e


@given(exprs)
def test_json_roundtrip(e):
    assert AffineExpr.from_json(e.to_json()) == e


@given(exprs, exprs)
def test_addition_commutes_and_subtraction_inverts(a, b):
    assert a + b == b + a
    assert (a + b) - b == a
    assert (a - a).is_zero()


@given(exprs, st.integers(-3, 3))
def test_substitute_then_evaluate(e, v):
    env = {n: v for n in ["s", "t", "s1", "s2", "t1", "k", "j", "k2"]}
    sub = e.substitute({"k": AffineExpr.parse("j+1")})
    assert sub.evaluate(env) == pytest.approx(e.evaluate({**env, "k": v + 1}))


def test_integer_scaling_only():
    with pytest.raises(TypeError):
        AffineExpr.parse("s") * 0.5
    assert AffineExpr.parse("s-k") * 2 == AffineExpr.parse("2*s-2*k")


def test_unbound_symbol():
    with pytest.raises(KeyError):
        AffineExpr.parse("s+k").evaluate({"s": 1})
