"""Nonholonomic deformations of the Schwarzschild primary (chart x2 = xi,
x3 = theta, v = phi, y5 = t).
"""
from dataclasses import dataclass
import math
import warnings

import numpy as np
from scipy.optimize import brentq

from .. import fields as F
from ..ansatz import (AnsatzMetric, NConnection, CoordinateRoles, SchwarzschildChart,
                      SchwarzschildParams, sample_points)
from ..errors import Eta5StarZeroError, ConstraintError, RootError
from .vacuum import curl_residual

STATIONARY_ROLES = CoordinateRoles(("extra", "radial-like", "angular", "angular", "time"),
                                   ("varkappa", "xi", "theta", "phi", "t"))


def _chart_fields(params, r_range, r0=None):
    chart = SchwarzschildChart(params, r_range, r0)
    r = chart.r_of_xi("x2")
    vp2 = F.ScalarField(chart.varpi2_node(r.node), symbol="varpi^2")
    return chart, r, vp2


def stationary_deformation(params, eta5, h0=2.0, n2=0.0, n3=0.0, psi=0.0, r_range=(2.5, 6.0),
                           domain=None, r0=None):
    """Stationary deformation with polarizations (eta4, eta5) of the primary.

    h4 = -h0^2 varpi^2 [(sqrt|eta5|)*]^2, h5 = eta5 varpi^2,
    w2 = d_xi(sqrt|eta5| varpi)/((sqrt|eta5|)* varpi), w3 = d_theta sqrt|eta5|/(sqrt|eta5|)*,
    g2 = g3 = -e^psi (psi harmonic), lambda = 0.
    Strict LC compatibility needs eta5 separable, a1(xi, theta) a2(phi).
    """
    eta5 = F.field(eta5)
    if eta5.diff("v").node is F.ZERO:
        raise Eta5StarZeroError("eta5 does not depend on phi (eta5* = 0)")
    chart, r, vp2 = _chart_fields(params, r_range, r0)
    n2, n3 = F.field(n2), F.field(n3)
    if domain is not None:
        box = dict(domain)
        box.setdefault("chi", (0.0, 0.0))
        curl = curl_residual(n2, n3, sample_points(64, box, seed=5))
        if np.max(np.abs(curl)) > 1e-10:
            raise ConstraintError("n2' - n3. must vanish")
    psi = F.field(psi)
    varpi = F.sqrt(F.fabs(vp2))
    sq = F.sqrt(F.fabs(eta5))
    sqs = sq.diff("v")
    h4 = (-(h0 ** 2) * vp2 * sqs * sqs).named("h4")
    h5 = (eta5 * vp2).named("h5")
    w2 = ((sq * varpi).diff("x2") / (sqs * varpi)).named("w2")
    w3 = (sq.diff("x3") / sqs).named("w3")
    g = (-F.exp(psi)).named("g2 = g3 = -e^psi")
    h4_hat = -(r * r) * F.sin(F.X3) ** 2
    extras = {"eta5": eta5, "eta4": (h4 / h4_hat).named("eta4"), "h0": h0, "psi": psi,
              "r": r, "varpi2": vp2, "chart": chart, "h4_hat": h4_hat, "h5_hat": vp2,
              "aux5e_applicable": True}
    return AnsatzMetric(g2=g, g3=g, h4=h4, h5=h5, nconn=NConnection(w2, w3, n2, n3), g1=1.0,
                        roles=STATIONARY_ROLES, lam=0.0, extras=extras,
                        provenance=(("stationary_deformation", params.mu, params.eps, h0),))


def xi_domain(params, r_range=(2.5, 6.0), theta=(1.0, 1.4), phi=(0.3, 1.3), r0=None, margin=0.02):
    """Chart box (x2 = xi, x3 = theta, v = phi) covering r in r_range."""
    chart = SchwarzschildChart(params, r_range, r0)
    lo, hi = chart.xi(np.array(r_range, dtype=float))
    d = margin * (hi - lo)
    return {"x2": (float(lo + d), float(hi - d)), "x3": theta, "v": phi}


# ---------------------------------------------------------------- rotoid

@dataclass(frozen=True)
class RotoidHorizon:
    phi: np.ndarray
    r_root: np.ndarray
    r_formula: np.ndarray
    r_first_order: np.ndarray

    @property
    def difference(self):
        return self.r_root - self.r_formula

    @property
    def difference_first_order(self):
        return self.r_root - self.r_first_order


def _q0(q0, r):
    return q0(r) if callable(q0) else float(q0)


def rotoid_f(params, q0, omega0, phi0, phi, r):
    """eta5 varpi^2 = 1 - 2mu/r + eps(1/r^2 + 2 q5^1) with
    2 q5^1 = q0(r)/(4 mu^2) sin(omega0 phi + phi0) - 1/r^2."""
    mu, eps = params.mu, params.eps
    two_q51 = _q0(q0, r) / (4 * mu * mu) * math.sin(omega0 * phi + phi0) - 1.0 / r ** 2
    return 1.0 - 2.0 * mu / r + eps * (1.0 / r ** 2 + two_q51)


def rotoid_horizon(params, q0=1.0, omega0=1.0, phi0=0.0, phi=0.0, bracket=None, xtol=1e-15):
    """Horizon radius r+(phi) by bracketed root finding near 2 mu.

    Also returns the resummed value 2mu/(1 + eps q0 s/(4mu^2)) and its
    linearization 2mu(1 - eps q0 s/(4mu^2)), s = sin(omega0 phi + phi0),
    with q0 taken at r = 2 mu.
    """
    mu, eps = params.mu, params.eps
    if eps > 0.1:
        warnings.warn(f"eps = {eps} is not small; first-order formula unreliable", stacklevel=2)
    phis = np.atleast_1d(np.asarray(phi, dtype=float))
    lo, hi = bracket or (mu, 4.0 * mu)
    roots = np.empty_like(phis)
    for k, ph in enumerate(phis):
        if eps == 0:
            roots[k] = 2.0 * mu
            continue
        f = lambda r: rotoid_f(params, q0, omega0, phi0, ph, r)
        if f(lo) * f(hi) > 0:
            raise RootError(f"no sign change of the horizon function in [{lo}, {hi}] at phi = {ph}")
        roots[k] = brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
    a = eps * _q0(q0, 2.0 * mu) * np.sin(omega0 * phis + phi0) / (4 * mu * mu)
    return RotoidHorizon(phis, roots, 2.0 * mu / (1.0 + a), 2.0 * mu * (1.0 - a))


def rotoid_K(params_mu=1.0, eps_sweep=(1e-2, 1e-3, 1e-4), q0=1.0, omega0=1.0, phi0=0.0, n_phi=360):
    """max_phi |r_root - r_first_order| / eps^2 for each eps."""
    phis = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    out = []
    for e in eps_sweep:
        res = rotoid_horizon(SchwarzschildParams(params_mu, e), q0, omega0, phi0, phis)
        out.append(float(np.max(np.abs(res.difference_first_order))) / e ** 2)
    return out


# ---------------------------------------------------------------- small eps

@dataclass(frozen=True)
class SmallEpsPolarizations:
    eta4: F.ScalarField
    eta5: F.ScalarField
    q4_0: F.ScalarField
    q4_1: F.ScalarField
    matching0: F.ScalarField
    matching1: F.ScalarField
    q4_limit_imposed: bool
    eps: float
    h0: float


def small_eps_polarizations(params, q5_hat1, q5_hat2=0.0, eps=1e-2, q4_hat0=None,
                            r_range=(2.5, 6.0), r0=None):
    """Order-by-order polarizations in the gauge eps*h0 = 1.

    sqrt|eta5| = 1 + eps q5^1 + eps^2 q5^2, sqrt|eta4| = q4^0 + eps q4^1 with
    q4^0 = sqrt|h5/h4|(q5^1)*, q4^1 = sqrt|h5/h4|(q5^2)* (hat primaries).
    A prescribed q4_hat0 is used as given and its matching residual reported.
    If q5^1 vanishes identically the matching makes q4^0 = 0; the
    Schwarzschild limit q4^0 -> 1 is then imposed and flagged.
    """
    q51, q52 = F.field(q5_hat1), F.field(q5_hat2)
    chart, r, vp2 = _chart_fields(params, r_range, r0)
    ratio = F.sqrt(F.fabs(vp2)) / F.fabs(r * F.sin(F.X3))
    q40_match = ratio * q51.diff("v")
    q41 = (ratio * q52.diff("v")).named("q4^1")
    imposed = False
    if q4_hat0 is not None:
        q40 = F.field(q4_hat0)
    elif q51.diff("v").node is F.ZERO:
        q40, imposed = F.const(1.0), True
    else:
        q40 = q40_match
    eta5 = ((1.0 + eps * q51 + eps * eps * q52) ** 2).named("eta5")
    eta4 = ((q40 + eps * q41) ** 2).named("eta4")
    h0 = 1.0 / eps if eps else math.inf
    return SmallEpsPolarizations(eta4, eta5, q40.named("q4^0"), q41, (q40 - q40_match).named("matching k=0"),
                                 (q41 - ratio * q52.diff("v")).named("matching k=1"), imposed, eps, h0)
