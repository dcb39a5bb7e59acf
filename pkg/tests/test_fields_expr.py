import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from ricciforge import fields as F
from ricciforge.errors import ExpressionError
from ricciforge.expr import compile_expr
from oracles import sym, SYMS


# random expressions that stay finite on [0.2, 1.5]^3
_leaf = st.sampled_from(["x2", "x3", "v", "0.5", "2", "1.25", "pi"])


def _combine(children):
    unary = st.tuples(st.sampled_from(["sin", "cos", "exp", "atan", "tanh", "sech", "sqrt1"]), children).map(
        lambda t: f"sqrt(1 + ({t[1]})^2)" if t[0] == "sqrt1" else f"{t[0]}({t[1]})")
    binary = st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(lambda t: f"({t[0]} {t[1]} {t[2]})")
    div = st.tuples(children, children).map(lambda t: f"({t[0]})/(2 + ({t[1]})^2)")
    power = st.tuples(children, st.sampled_from(["2", "3"])).map(lambda t: f"({t[0]})^{t[1]}")
    return unary | binary | div | power


EXPRS = st.recursive(_leaf, _combine, max_leaves=6)
PTS = st.tuples(*(st.floats(0.2, 1.5) for _ in range(3)))


@given(EXPRS, PTS)
def test_value_and_partials_match_sympy(text, p):
    f = compile_expr(text)
    s = sym(text)
    env = dict(zip(("x2", "x3", "v"), p))
    pt = F.ChartPoint(**env)
    subs = {SYMS[k]: val for k, val in env.items()}
    ref = float(s.subs(subs).evalf(25))
    assert f.at(**env) == pytest.approx(ref, rel=1e-12, abs=1e-12)
    for ax in ("x2", "v"):
        d1 = float(sp.diff(s, SYMS[ax]).subs(subs).evalf(25))
        assert float(f.diff(ax)(pt)) == pytest.approx(d1, rel=1e-10, abs=1e-10)
    d2 = float(sp.diff(s, SYMS["x3"], SYMS["v"]).subs(subs).evalf(25))
    assert float(f.diff("x3").diff("v")(pt)) == pytest.approx(d2, rel=1e-9, abs=1e-9)


@given(EXPRS, PTS)
def test_mp_backend_agrees_with_double(text, p):
    f = compile_expr(text)
    pt = F.ChartPoint(x2=p[0], x3=p[1], v=p[2])
    mp = F.MPBackend(128)
    a = float(f(pt))
    b = float(mp.to_float(f(pt, mp)))
    assert b == pytest.approx(a, rel=1e-13, abs=1e-14)


def test_constants_and_precedence():
    f = compile_expr("-x2^2 + 2*theta/4 - 2^3^2", {"theta": 3.0})
    assert f.at(x2=3.0) == -9.0 + 1.5 - 2.0 ** 9
    assert compile_expr("e").at() == pytest.approx(math.e)
    assert compile_expr("2 ** 3").at() == 8.0
    assert compile_expr("1.5e-3 * .5").at() == pytest.approx(7.5e-4)


@pytest.mark.parametrize("text,col,needle", [
    ("x2 + * v", 6, "unexpected '*'"),
    ("sin(v", 6, "expected ')'"),
    ("x2 + foo", 6, "unknown identifier 'foo'"),
    ("x2 $ 1", 4, "unexpected character '$'"),
    ("bogus(v)", 1, "unknown function 'bogus'"),
])
def test_parse_errors_report_line_and_column(text, col, needle):
    with pytest.raises(ExpressionError) as ei:
        compile_expr(text)
    assert ei.value.line == 1 and ei.value.col == col
    assert needle in str(ei.value)


def test_error_on_second_line():
    with pytest.raises(ExpressionError) as ei:
        compile_expr("x2 +\n  )")
    assert (ei.value.line, ei.value.col) == (2, 3)


def test_chartpoint_is_immutable_and_rejects_negative_chi():
    p = F.ChartPoint(x2=1.0)
    with pytest.raises(AttributeError):
        p.x2 = 2.0
    with pytest.raises(ValueError):
        F.ChartPoint(chi=-0.1)
    q = p.shifted("v", 0.5)
    assert float(q.v) == 0.5 and float(p.v) == 0.0


def test_field_is_immutable_and_subs_freezes_axis():
    f = F.sin(F.X2) * F.CHI
    with pytest.raises(AttributeError):
        f.symbol = "x"
    g = f.subs("chi", 2.0)
    assert not g.depends_on("chi")
    assert g.at(x2=0.3) == pytest.approx(2 * math.sin(0.3))


def test_exact_axes_bookkeeping():
    assert F.X2.carries("v")
    prod = F.X2 * F.V
    assert not prod.carries("v")
    assert prod.with_exact({"v"}).carries("v")


def test_batch_evaluation_broadcasts():
    f = compile_expr("x2 * v + 1")
    p = F.ChartPoint(x2=np.array([1.0, 2.0]), v=3.0)
    np.testing.assert_array_equal(f(p), [4.0, 7.0])
    assert compile_expr("3")(p).shape == (2,)
