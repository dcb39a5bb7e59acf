from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from ricciforge import fields as F
from ricciforge.ansatz import AnsatzMetric, NConnection, GridSpec
from ricciforge.dcalculus import (DiffContext, central_weights, partial, derivative, reduced_residuals,
                                  lc_residuals, anholonomy, aux_coeffs, fit_order, convergence_study)
from ricciforge.errors import DegenerateMetricError, KinkError, StencilDomainError
from ricciforge.expr import compile_expr
import oracles
from oracles import sym


def test_central_weights_known_values():
    assert central_weights(1, 2) == ((-1, 0, 1), (Fraction(-1, 2), 0, Fraction(1, 2)))
    offs, w = central_weights(2, 4)
    assert offs == (-2, -1, 0, 1, 2)
    assert w == (Fraction(-1, 12), Fraction(4, 3), Fraction(-5, 2), Fraction(4, 3), Fraction(-1, 12))


@given(st.integers(1, 2), st.sampled_from([2, 4]))
def test_weights_annihilate_low_powers(deriv, acc):
    offs, w = central_weights(deriv, acc)
    for k in range(len(offs)):
        val = sum(wi * Fraction(o) ** k for o, wi in zip(offs, w))
        assert val == (Fraction(1) if k == 1 and deriv == 1 else Fraction(2) if k == 2 and deriv == 2 else 0)


def test_fd_exact_for_polynomials_within_order():
    f = compile_expr("x2^4 - 3*x2^2*v + v^3")
    p = F.ChartPoint(x2=0.7, v=0.4)
    ctx = DiffContext(h=1e-2, fd_order=4, mode="fd")
    assert float(partial(f, p, "x2", 1, ctx)) == pytest.approx(4 * 0.7 ** 3 - 6 * 0.7 * 0.4, abs=1e-11)
    assert float(partial(f, p, "v", 2, ctx)) == pytest.approx(6 * 0.4, abs=1e-9)
    mixed = derivative(f, p, {"x2": 1, "v": 1}, ctx)
    assert float(mixed) == pytest.approx(-6 * 0.7, abs=1e-9)


def test_fd_truncation_order():
    f = compile_expr("sin(3*v)")
    p = F.ChartPoint(v=0.3)
    for order in (2, 4):
        rows, fitted = convergence_study(
            lambda h: abs(float(partial(f, p, "v", 2, DiffContext(h=h, fd_order=order, mode="fd")))
                          + 9 * np.sin(0.9)), (4e-2, 2e-2, 1e-2))
        assert fitted == pytest.approx(order, abs=0.15)


def test_mp_backend_removes_rounding_floor():
    f = compile_expr("exp(v)*sin(x2)")
    p = F.ChartPoint(x2=0.5, v=0.5)
    exact = np.exp(0.5) * np.sin(0.5)
    err = lambda prec: abs(float(partial(f, p, "v", 2, DiffContext(h=1e-4, mode="fd", precision=prec))) - exact)
    assert err("mp") < 1e-14 < err("double")


def test_stencil_domain_guard():
    f = compile_expr("v")
    ctx = DiffContext(h=1e-2, mode="fd", domain={"v": (0.0, 1.0)})
    with pytest.raises(StencilDomainError):
        partial(f, F.ChartPoint(v=0.01), "v", 1, ctx)


# ---------------------------------------------------------------- reduced system vs sympy oracle

METRICS = [
    dict(g2="-exp(0.3*x2)", g3="-exp(0.3*x2)", h4="-(1 + x2*v^2)", h5="2 + sin(v + x3)",
         w2="x3*v", w3="0.2*x2", n2="v^2*x3", n3="cos(v)", lam=0.1),
    dict(g2="1 + 0.1*x3^2", g3="2 + x2", h4="x2*exp(v)", h5="(1 + v*x2)^2",
         w2="sin(v)", w3="x2 - v", n2="x2*v^3", n3="0", lam=-0.5),
]


def _metric(d):
    f = compile_expr
    return AnsatzMetric(g2=f(d["g2"]), g3=f(d["g3"]), h4=f(d["h4"]), h5=f(d["h5"]),
                        nconn=NConnection(f(d["w2"]), f(d["w3"]), f(d["n2"]), f(d["n3"])), lam=d["lam"])


@pytest.mark.parametrize("k", [0, 1])
@given(st.floats(0.5, 1.0), st.floats(0.3, 0.8), st.floats(0.4, 0.9))
def test_reduced_residuals_match_sympy(k, a, b, c):
    d = METRICS[k]
    m = _metric(d)
    ref = oracles.reduced(*(sym(d[x]) for x in ("g2", "g3", "h4", "h5", "w2", "w3", "n2", "n3")), d["lam"])
    p = F.ChartPoint(x2=a, x3=b, v=c)
    exact = reduced_residuals(m, p, DiffContext(mode="exact", kink_guard=False))
    fd = reduced_residuals(m, p, DiffContext(h=1e-3, kink_guard=False))
    for comp, expr in ref.items():
        want = oracles.evaluate(expr, x2=a, x3=b, v=c)
        assert float(getattr(exact, comp)) == pytest.approx(want, rel=1e-11, abs=1e-11)
        assert float(getattr(fd, comp)) == pytest.approx(want, rel=1e-7, abs=1e-7)


def test_trivial_metric_linear_h5_has_analytic_r_v():
    # g = 1, h4 = -1, h5 = a + b v, N = 0: r_v = -b^2/(4 h5^2), other residuals zero
    m = AnsatzMetric(g2=1.0, g3=1.0, h4=-1.0, h5=compile_expr("2 + 0.5*v"))
    p = F.ChartPoint(x2=0.3, x3=0.2, v=np.linspace(0.1, 1, 5))
    want = -0.25 / (4 * (2 + 0.5 * p.v) ** 2)
    np.testing.assert_allclose(reduced_residuals(m, p, DiffContext(mode="exact")).r_v, want, rtol=1e-14)
    r = reduced_residuals(m, p, DiffContext(h=1e-3))
    np.testing.assert_allclose(r.r_v, want, rtol=1e-7)
    for c in ("r_h", "r_w2", "r_w3", "r_n2", "r_n3"):
        assert np.all(getattr(r, c) == 0)


def test_squared_linear_h5_solves_v_equation():
    m = AnsatzMetric(g2=1.0, g3=1.0, h4=-1.0, h5=compile_expr("(2 + 0.5*v)^2"))
    r = reduced_residuals(m, F.ChartPoint(x2=0.3, x3=0.2, v=np.linspace(0.1, 1, 5)), DiffContext(h=1e-3))
    assert np.max(np.abs(r.r_v)) < 1e-9


def test_degenerate_h5_star_raises():
    m = AnsatzMetric(g2=1.0, g3=1.0, h4=-1.0, h5=2.0)
    with pytest.raises(DegenerateMetricError):
        reduced_residuals(m, F.ChartPoint(v=0.5))


def test_kink_guard_refuses_sign_change():
    m = AnsatzMetric(g2=1.0, g3=1.0, h4=-1.0, h5=compile_expr("(v - 0.5)^3 + 2"))
    m2 = AnsatzMetric(g2=1.0, g3=1.0, h4=compile_expr("v - 0.5"), h5=compile_expr("exp(v)"))
    reduced_residuals(m, F.ChartPoint(v=0.3))
    with pytest.raises(KinkError):
        reduced_residuals(m2, F.ChartPoint(v=0.5 + 3e-3))


def test_aux_coefficients():
    m = _metric(METRICS[1])
    p = F.ChartPoint(x2=0.7, x3=0.4, v=0.6)
    a = aux_coeffs(m, p, DiffContext(mode="exact"))
    h4, h5, h5s = 0.7 * np.exp(0.6), (1 + 0.42) ** 2, 2 * 0.7 * 1.42
    assert float(a.phi) == pytest.approx(np.log(abs(h5s / np.sqrt(abs(h4 * h5)))), rel=1e-13)
    assert float(a.gamma) == pytest.approx(1.5 * h5s / h5 - 1.0, rel=1e-13)


@given(st.floats(0.5, 1.5), st.floats(0.5, 1.5), st.floats(0.5, 1.5))
def test_lc_c3_vanishes_for_gradient_type_w(a, b, c):
    # w_i = -d_i Phi / Phi* makes c3 vanish identically for any Phi
    Phi = compile_expr("x2*v + sin(x3*v) + v^3")
    w2 = -Phi.diff("x2") / Phi.diff("v")
    w3 = -Phi.diff("x3") / Phi.diff("v")
    m = AnsatzMetric(g2=1.0, g3=1.0, h4=-1.0, h5=compile_expr("exp(v)"), nconn=NConnection(w2, w3))
    lc = lc_residuals(m, F.ChartPoint(x2=a, x3=b, v=c), 0.0, ctx=DiffContext(mode="exact"))
    assert abs(float(lc.c3)) < 1e-12


def test_lc_curl_and_laplacian():
    m = AnsatzMetric(g2=1.0, g3=1.0, h4=-1.0, h5=compile_expr("exp(v)"),
                     nconn=NConnection(0.0, 0.0, compile_expr("x3"), compile_expr("-x2")), lam=0.5)
    p = F.ChartPoint(x2=0.3, x3=0.4, v=0.2)
    lc = lc_residuals(m, p, compile_expr("x2^2"), ctx=DiffContext(mode="exact"))
    assert float(lc.c4) == pytest.approx(2.0)
    assert float(lc.c1) == pytest.approx(2.0 - 0.5)
    assert float(lc.c1_alt) == pytest.approx(2.0 + 0.5)


def test_anholonomy_of_simple_connection():
    m = AnsatzMetric(g2=1.0, g3=1.0, h4=-1.0, h5=compile_expr("exp(v)"),
                     nconn=NConnection(compile_expr("x3*v"), 0.0, 0.0, 0.0))
    p = F.ChartPoint(x2=0.3, x3=0.4, v=0.2)
    an = anholonomy(m, p, DiffContext(mode="exact"))
    assert float(an.w_ia_b[(2, 4, 4)]) == pytest.approx(0.4)
    # Omega_23^4 = e_3(w2) - e_2(w3) = d3 w2 - w3 d_v w2 - (d2 w3 - w2 d_v w3) = v
    assert float(an.omega_ij_a[(2, 3, 4)]) == pytest.approx(0.2)
    assert float(an.omega_ij_a[(3, 2, 4)]) == pytest.approx(-0.2)
    assert not an.is_holonomic()
    trivial = AnsatzMetric(g2=1.0, g3=1.0, h4=-1.0, h5=compile_expr("exp(v)"))
    assert anholonomy(trivial, p).is_holonomic()


def test_fit_order():
    hs = [1e-1, 5e-2, 2.5e-2]
    assert fit_order(hs, [3 * h ** 4 for h in hs]) == pytest.approx(4.0)
    assert np.isnan(fit_order(hs, [0, 0, 1e-3]))
