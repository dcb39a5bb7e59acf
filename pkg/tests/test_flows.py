import numpy as np
import pytest

from ricciforge import fields as F
from ricciforge.ansatz import GridSpec, sample_points
from ricciforge.dcalculus import DiffContext, evolution_residuals
from ricciforge.errors import ChiBoundaryError, DomainError
from ricciforge.flows import (amplitude, exponential_flow_family, flow_constraint_residuals, flow_report,
                              n0_of_chi, static_family)
from ricciforge.generators.vacuum import vacuum_solitonic_metric

BOX = {"x2": (0.3, 0.9), "x3": (0.3, 0.9), "v": (0.3, 0.9)}


@pytest.mark.parametrize("lam", [-1.0, 0.0, 0.5])
def test_amplitude_and_n0_closed_forms(lam):
    chi = np.linspace(0, 0.4, 9)
    p = F.ChartPoint(chi=chi)
    A = amplitude(1.3, lam)
    np.testing.assert_allclose(A.diff("chi")(p), 2 * lam * A(p), rtol=1e-14, atol=1e-15)
    n = n0_of_chi(1.3, 2.0, lam)(p)
    np.testing.assert_allclose(A(p) * n * n, 1.3 * 4 - 2 * lam * chi, rtol=1e-14)


@pytest.mark.parametrize("lam", [-1.0, 0.0, 1.0])
def test_exponential_family_constraints(lam):
    fam = exponential_flow_family(b0sq=1.0, n0=2.0, lam=lam, chi_range=(0.0, 0.5))
    pts = sample_points(20, {**BOX, "chi": (0.1, 0.4)}, seed=5)
    c = flow_constraint_residuals(fam, pts)
    assert np.max(np.abs(c.c_5const5a_1)) < 1e-8
    assert np.max(np.abs(c.c_5const5a_2)) < 1e-12
    assert np.all(np.isnan(c.c_5aux5e_2))
    ev = evolution_residuals(fam, pts)
    assert max(np.max(np.abs(ev.e_v4)), np.max(np.abs(ev.e_v5))) < 1e-8


def test_exponential_family_domain_checks():
    with pytest.raises(DomainError):
        exponential_flow_family(b0sq=1.0, n0=1.0, lam=1.0, chi_range=(0.0, 0.6))
    with pytest.raises(ValueError):
        exponential_flow_family(b0sq=0.0)
    fam = exponential_flow_family(chi_range=(0.0, 0.5))
    with pytest.raises(ChiBoundaryError):
        fam.metric_at(0.7)
    assert not fam.metric_at(0.2).h5.depends_on("chi")
    with pytest.raises(ChiBoundaryError):
        static_family(vacuum_solitonic_metric(), chi_range=(0.5, 0.2))


def test_static_family_evolution():
    m = vacuum_solitonic_metric()
    fam = static_family(m)
    pts = sample_points(10, {**BOX, "chi": (0.2, 0.8)}, seed=6)
    ev = evolution_residuals(fam, pts)
    # chi-independent h_a with vanishing reduced residual: e_v = -2 lam h_a, zero for lam = metric lam = 0
    assert fam.lam == m.lam
    np.testing.assert_allclose(ev.e_v5, -2 * fam.lam * m.h5(pts) + 0 * ev.e_v5, atol=1e-8)
    shifted = static_family(m, lam=0.25)
    ev2 = evolution_residuals(shifted, pts)
    np.testing.assert_allclose(ev2.e_v4, -0.5 * m.h4(pts), atol=1e-8)


def test_flow_report_rejects_chi_grid_outside_range():
    fam = exponential_flow_family(chi_range=(0.0, 0.5))
    grid = GridSpec({"x2": (0.3, 0.9, 5), "x3": (0.3, 0.9, 5), "v": (0.3, 0.9, 5), "chi": (0.1, 0.9, 5)})
    with pytest.raises(ChiBoundaryError):
        flow_report(fam, grid)
    ok = GridSpec({"x2": (0.3, 0.9, 5), "x3": (0.3, 0.9, 5), "v": (0.3, 0.9, 5), "chi": (0.1, 0.4, 5)})
    rep = flow_report(fam, ok, suites=[{"name": "flow-constraints", "components": ["c_5const5a_1", "c_5const5a_2"]}])
    assert rep.exit_code == 0
