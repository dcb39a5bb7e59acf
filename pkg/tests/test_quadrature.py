import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from ricciforge import fields as F
from ricciforge.errors import QuadratureError
from ricciforge.quadrature import adaptive_simpson, simpson_batch, running_integral, MonotoneMap
from ricciforge.dcalculus import DiffContext, partial

s = sp.Symbol("s", real=True)
CASES = [
    (lambda t: np.exp(-t * t), sp.exp(-s ** 2)),
    (lambda t: np.sin(3 * t) + t ** 3, sp.sin(3 * s) + s ** 3),
    (lambda t: 1 / (1 + t * t), 1 / (1 + s ** 2)),
    (lambda t: np.sqrt(2 + np.cos(t)), None),
]


@given(st.integers(0, 2), st.floats(-2, 2), st.floats(0.01, 3))
def test_simpson_matches_sympy_antiderivative(k, a, width):
    f, fs = CASES[k]
    b = a + width
    exact = float(sp.integrate(fs, (s, a, b)).evalf(30))
    assert adaptive_simpson(f, a, b, tol=1e-11) == pytest.approx(exact, abs=1e-10)


def test_simpson_non_elementary_against_sympy_quadrature():
    f, _ = CASES[3]
    ref = float(sp.Integral(sp.sqrt(2 + sp.cos(s)), (s, 0, 5)).evalf(30))
    assert adaptive_simpson(f, 0.0, 5.0) == pytest.approx(ref, abs=1e-9)


@given(st.lists(st.floats(0.1, 2.0), min_size=2, max_size=6), st.integers(0, 5))
def test_row_value_independent_of_batch(uppers, pick):
    pick = pick % len(uppers)
    fn = lambda t, rows: np.sin(t * (1 + 0.1 * np.asarray(uppers)[rows])) ** 2
    full = simpson_batch(fn, 0.0, np.array(uppers))
    one = simpson_batch(lambda t, rows: fn(t, np.full(rows.shape, pick)), 0.0, np.array([uppers[pick]]))
    assert full[pick] == one[0]


def test_empty_interval_and_reversed_sign():
    assert adaptive_simpson(np.exp, 1.0, 1.0) == 0.0
    assert adaptive_simpson(np.exp, 1.0, 0.0) == pytest.approx(-(math.e - 1), abs=1e-10)


def test_nonfinite_integrand_raises():
    with pytest.raises(QuadratureError), np.errstate(divide="ignore"):
        adaptive_simpson(lambda t: 1.0 / t, 0.0, 1.0)


def test_running_integral_partials_are_exact():
    integrand = F.sech(F.V + 0.3 * F.X2) ** 2
    Q = running_integral(integrand, "v", 0.2)
    p = F.ChartPoint(x2=0.7, v=1.1)
    # d/dv Q = integrand; d/dx2 Q = 0.3 [sech^2(v + .3x2)] between the limits
    assert float(partial(Q, p, "v")) == pytest.approx(float(integrand(p)), abs=1e-14)
    exact_dx = 0.3 * (1 / math.cosh(1.31) ** 2 - 1 / math.cosh(0.41) ** 2)
    assert float(partial(Q, p, "x2")) == pytest.approx(exact_dx, abs=1e-10)
    assert Q.carries("x2") and Q.carries("v")


def test_running_integral_closed_form():
    Q = running_integral(F.cos(F.V) * F.X3, "v", 0.0)
    p = F.ChartPoint(x3=2.0, v=np.linspace(0, 2, 7))
    np.testing.assert_allclose(Q(p), 2.0 * np.sin(p.v), atol=1e-10)


def test_monotone_map_round_trip():
    g = lambda r: np.sqrt(1 - 2 / r)
    m = MonotoneMap(g, 3.0, 2.5, 6.0)
    r = np.linspace(2.5, 6.0, 41)
    np.testing.assert_allclose(m.inverse(m.forward(r)), r, atol=1e-12)
    # closed form of int sqrt(1 - 2/r) dr
    G = lambda r: math.sqrt(r * (r - 2)) - 2 * math.log(math.sqrt(r) + math.sqrt(r - 2))
    assert float(m.forward(5.0)) == pytest.approx(G(5.0) - G(3.0), abs=1e-12)
    with pytest.raises(QuadratureError):
        m.forward(7.0)
