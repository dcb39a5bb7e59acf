import numpy as np
import pytest
from hypothesis import given, strategies as st

from ricciforge import fields as F
from ricciforge.ansatz import AnsatzMetric, NConnection, sample_points
from ricciforge.errors import PolarizationError
from ricciforge.expr import compile_expr
from ricciforge.transforms import (PolarizationSet, apply_polarizations, compose_two_parameter,
                                   conformal_renormalize, coefficient_difference, set_difference)

BOX = {"x2": (0.2, 1.0), "x3": (0.2, 1.0), "v": (0.2, 1.0), "chi": (0.0, 0.0)}
BASE = AnsatzMetric(g2=compile_expr("1 + x2^2"), g3=compile_expr("2 + x3"), h4=compile_expr("-exp(v)"),
                    h5=compile_expr("1 + v^2"), nconn=NConnection(compile_expr("x3*v"), 0.3, compile_expr("x2"), 0.0))
PTS = sample_points(30, BOX, seed=11)


def _set(a, b, theta):
    return PolarizationSet.from_expressions({
        "eta2": f"1 + {a}*theta*x2", "eta4": f"exp({b}*theta*v)", "eta5": "2 + sin(theta*x3)",
        "eta_2_4": f"1 + {b}*v", "zeta_2_4": f"{a}*x3", "zeta_3_5": f"theta*v"}, theta=theta)


def test_identity_set_leaves_metric_unchanged():
    m = apply_polarizations(BASE, PolarizationSet.identity(), PTS)
    assert coefficient_difference(m, BASE, PTS) == 0.0
    assert "unverified" in m.tags


@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(0, 1), st.floats(0, 1))
def test_composition_matches_sequential_application(a, b, t1, t2):
    A, B = _set(a, b, t1), _set(b, a, t2)
    seq = apply_polarizations(apply_polarizations(BASE, A), B)
    one = apply_polarizations(BASE, compose_two_parameter(A, B))
    assert coefficient_difference(seq, one, PTS) < 1e-12


def test_composed_zeta_is_affine():
    A, B = _set(0.2, 0.3, 0.4), _set(-0.1, 0.5, 0.7)
    C = compose_two_parameter(A, B)
    k = (2, 4)
    want = B.eta_i_a[k](PTS) * A.zeta_i_a[k](PTS) + B.zeta_i_a[k](PTS)
    np.testing.assert_allclose(C.zeta_i_a[k](PTS), want, rtol=1e-15)
    assert set_difference(C, C, PTS) == 0.0


def test_conformal_round_trip():
    pol = PolarizationSet(eta2=compile_expr("2 + x2"), eta3=compile_expr("2 + x2"),
                          eta4=compile_expr("2 + x2"), eta5=compile_expr("2 + x2"))
    back = conformal_renormalize(apply_polarizations(BASE, pol), points=PTS)
    for k in ("g2", "g3", "h4", "h5"):
        np.testing.assert_allclose(back.coefficient(k)(PTS), BASE.coefficient(k)(PTS), rtol=1e-14)


def test_polarization_errors():
    with pytest.raises(PolarizationError):
        PolarizationSet.from_expressions({"eta7": "1"})
    with pytest.raises(PolarizationError):
        PolarizationSet.from_expressions({"eta_2": "1"})
    with pytest.raises(PolarizationError):
        PolarizationSet(eta_i_a={(4, 2): F.const(1.0)})
    with pytest.raises(PolarizationError):
        apply_polarizations(BASE, PolarizationSet(eta4=0.0))
    with pytest.raises(PolarizationError):
        apply_polarizations(BASE, PolarizationSet(eta5=compile_expr("x2 - 0.6")),
                            F.ChartPoint(x2=np.array([0.5, 0.6]), v=0.5))
    with pytest.raises(PolarizationError):
        conformal_renormalize(BASE)
    with pytest.raises(ValueError):
        conformal_renormalize(BASE, "eta3")
