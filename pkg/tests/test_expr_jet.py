import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semireg import expr as ex
from semireg.expr import BinOp, Coord, Num, ParseError, eval_jet, eval_value, parse, to_text
from semireg.jet import DomainError, Jet, directional

UV = ["u", "v"]


# -- parsing -------------------------------------------------------------------


def test_parse_tree_shape():
    assert parse("u^2 + 3", UV) == BinOp("+", BinOp("^", Coord(0), Num(2.0)), Num(3.0))


def test_parse_error_offset():
    with pytest.raises(ParseError) as info:
        parse("2*", ["u"])
    assert info.value.offset == 2


def test_pow_binds_tighter_than_unary_minus():
    assert eval_value(parse("-u^2", ["u"]), (3.0,)) == -9.0


def test_pow_is_right_associative():
    assert eval_value(parse("2^3^2", ["u"]), (0.0,)) == 512.0


def test_unknown_identifier_names_it():
    with pytest.raises(ParseError) as info:
        parse("u + w", UV)
    assert "w" in str(info.value)
    assert info.value.offset == 4


@pytest.mark.parametrize("bad", ["", "(u", "u)", "sin u", "3 4", "u ^", "cos()", "1..2"])
def test_malformed_inputs_raise(bad):
    with pytest.raises(ParseError):
        parse(bad, UV)


@pytest.mark.parametrize("coords", [[], ["u", "u"], ["sin"], ["1x"]])
def test_bad_coordinate_lists(coords):
    with pytest.raises(ValueError):
        parse("1", coords)


# -- evaluation ------------------------------------------------------------------


def test_eval_examples():
    assert eval_value(parse("u^2 + 3", UV), (2.0, 0.0)) == 7.0
    assert eval_value(parse("sin(u)*v", UV), (0.0, 5.0)) == 0.0


@pytest.mark.parametrize("text,p", [("1/u", (0.0, 1.0)), ("log(u)", (0.0, 1.0)), ("log(u)", (-1.0, 1.0)),
                                    ("sqrt(u)", (-1.0, 1.0)), ("u^v", (-1.0, 0.5))])
def test_domain_errors_raise(text, p):
    with pytest.raises(DomainError):
        eval_value(parse(text, UV), p)
    with pytest.raises(DomainError):
        eval_jet(parse(text, UV), p)


def test_jet_of_cube():
    j = eval_jet(parse("u^3", ["u"]), (2.0,))
    assert j.value == 8.0
    np.testing.assert_allclose(j.grad, [12.0])
    np.testing.assert_allclose(j.hess, [[12.0]])


def test_jet_of_constant():
    j = eval_jet(parse("5", UV), (0.3, -2.0))
    assert j.value == 5.0
    assert not j.grad.any() and not j.hess.any()


def test_jet_of_product():
    j = eval_jet(parse("u*v", UV), (2.0, 3.0))
    assert j.value == 6.0
    np.testing.assert_allclose(j.grad, [3.0, 2.0])
    np.testing.assert_allclose(j.hess, [[0.0, 1.0], [1.0, 0.0]])


def test_jet_orders_truncate():
    e = parse("exp(u)*sin(v)", UV)
    j2 = eval_jet(e, (0.1, 0.2), 2)
    j1 = eval_jet(e, (0.1, 0.2), 1)
    assert j1.order == 1 and j2.order == 2
    np.testing.assert_array_equal(j1.grad, j2.grad)


def test_directional_lowers_order():
    x = Jet.variable(2.0, 0, 2)
    y = Jet.variable(3.0, 1, 2)
    f = x * x * y  # u^2 v
    d = directional(f, [Jet.constant(1.0, 2), Jet.constant(0.0, 2)])
    assert d.order == 1
    assert d.value == pytest.approx(12.0)
    np.testing.assert_allclose(d.grad, [6.0, 4.0])
    assert directional(4.0, [x, y]) == 0.0


# -- properties ------------------------------------------------------------------

_leaf = st.one_of(
    st.sampled_from([Coord(0), Coord(1)]),
    st.floats(min_value=-5, max_value=5, allow_nan=False).map(ex.num),
)


def _extend(children):
    return st.one_of(
        st.builds(ex.add, children, children),
        st.builds(ex.sub, children, children),
        st.builds(ex.mul, children, children),
        st.builds(lambda a: ex.Call("sin", a), children),
        st.builds(lambda a: ex.Call("exp", ex.Call("cos", a)), children),
        st.builds(lambda a: ex.power(a, Num(2.0)), children),
    )


exprs = st.recursive(_leaf, _extend, max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(exprs)
def test_print_parse_round_trip(e):
    assert parse(to_text(e, UV), UV) == e


@settings(max_examples=100, deadline=None)
@given(exprs, st.floats(-2, 2), st.floats(-2, 2))
def test_jet_value_matches_plain_evaluation(e, u, v):
    try:
        plain = eval_value(e, (u, v))
    except DomainError:
        return
    j = eval_jet(e, (u, v))
    assert j.value == plain or (math.isnan(j.value) and math.isnan(plain))
    np.testing.assert_array_equal(j.hess, j.hess.T)


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 3), st.floats(-3, 3))
def test_jet_arithmetic_rules(a, b, c, d):
    x = Jet.variable(a, 0, 2)
    y = Jet.variable(c, 1, 2)
    prod = (x + b) * (y + d)
    np.testing.assert_allclose(prod.grad, [c + d, a + b], atol=1e-12)
    q = x / y
    np.testing.assert_allclose(q.grad, [1 / c, -a / c**2], rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(q.hess, [[0, -1 / c**2], [-1 / c**2, 2 * a / c**3]], rtol=1e-12, atol=1e-12)
