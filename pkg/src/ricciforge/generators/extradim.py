"""Extra-dimension and time-anisotropic deformations.

Chart of the conformally transformed primary: x2 = theta_check,
x3 = xi_check, v = varkappa (extra) or t (time-anisotropic), g1 = -r_g^2.

Exact solution of the reduced system used here (sigma = varsigma):
    g2 = g3 = e^{2 psi},  psi.. + psi'' = lambda
    h5 = (f - f0)^2,  h4 = eps4 h0^2 (f*)^2 sigma
    1/sigma = 1/sigma0 + 2 lambda eps4 h0^2 I,  I = int_{v_lo}^v f*(f - f0) dv
    w_i = -(sigma d_i ln h0^2 + d_i sigma)/sigma*
    n_i = n_k1 + n_k2 int_{v_lo}^v (f*)^2 sigma/(f - f0)^3 dv
"""
from dataclasses import dataclass, replace
import math

import numpy as np

from .. import fields as F
from ..ansatz import (AnsatzMetric, NConnection, CoordinateRoles, GridSpec, SchwarzschildChart,
                      theta_of_thetacheck, sample_points)
from ..errors import DegenerateMetricError, DomainError
from ..quadrature import running_integral, DEFAULT_TOL
from .string import _pair

EXTRA_ROLES = CoordinateRoles(("angular", "angular", "radial-like", "extra", "time"),
                              ("phi", "theta_check", "xi_check", "varkappa", "t"))
TIME_ROLES = EXTRA_ROLES.swapped45()

EXTRADIM_DOMAIN = {"x2": (0.2, 0.6), "x3": (0.1, 0.5), "v": (0.4, 1.2)}


@dataclass(frozen=True)
class ExtraDimSpec:
    f: F.ScalarField
    f0: F.ScalarField = 0.0
    h0sq: F.ScalarField = 1.0
    varsigma0: F.ScalarField = 1.0
    n_k1: object = 0.0
    n_k2: object = 0.0
    lambda_H: float = 1.0
    eps4: int = 1
    v_lo: float = 0.0
    r_g: float = 2.0

    def __post_init__(self):
        for k in ("f", "f0", "h0sq", "varsigma0"):
            object.__setattr__(self, k, F.field(getattr(self, k)))
        if self.eps4 not in (1, -1):
            raise ValueError("eps4 must be +1 or -1")
        if "v" in self.f0.free or "v" in self.h0sq.free or "v" in self.varsigma0.free:
            raise ValueError("f0, h0sq and varsigma0 must not depend on v")
        if self.f.diff("v").node is F.ZERO:
            raise DegenerateMetricError("f* vanishes identically")

    @property
    def lam(self):
        return -0.5 * self.lambda_H ** 2


def sech2_profile(a=0.3, b=-0.2, shift=0.0):
    """f = sech^2(v + a x2 + b x3 + shift)."""
    return (F.sech(F.V + a * F.X2 + b * F.X3 + shift) ** 2).named("f (sech^2 profile)")


def default_spec(**kw):
    base = dict(f=sech2_profile(), f0=0.0, h0sq=1.0 + 0.1 * F.X2 * F.X2, varsigma0=1.0,
                n_k1=(0.1 * F.X3, 0.1 * F.X2), n_k2=(0.05, 0.02), lambda_H=1.0, eps4=1, v_lo=0.4)
    base.update(kw)
    return ExtraDimSpec(**base)


def extradim_parts(spec, lam=None, tol=DEFAULT_TOL):
    """Building blocks as a dict of fields (shared by both role variants)."""
    lam = spec.lam if lam is None else float(lam)
    f, f0, h0sq = spec.f, spec.f0, spec.h0sq
    Fd = (f - f0).named("f - f0")
    fs = f.diff("v")
    I = ((Fd * Fd - Fd.subs("v", spec.v_lo) ** 2) / 2.0).named("I")
    c = 2.0 * lam * spec.eps4
    sigma = (1.0 / (1.0 / spec.varsigma0 + c * h0sq * I)).named("varsigma")
    Iq = running_integral(fs * Fd, "v", spec.v_lo, tol, symbol="I (quadrature)")
    sigma_q = (1.0 / (1.0 / spec.varsigma0 + c * h0sq * Iq)).named("varsigma (quadrature)")
    h4 = (spec.eps4 * h0sq * fs * fs * sigma).named("h4")
    h5 = (Fd * Fd).named("h5")
    ss = sigma.diff("v")
    degenerate = ss.node is F.ZERO
    if degenerate:
        w2 = w3 = F.const(0.0)
    else:
        lnh = F.log(h0sq)
        w2 = (-(sigma * lnh.diff("x2") + sigma.diff("x2")) / ss).named("w2")
        w3 = (-(sigma * lnh.diff("x3") + sigma.diff("x3")) / ss).named("w3")
    k12, k13 = _pair(spec.n_k1)
    k22, k23 = _pair(spec.n_k2)
    if k22.node is F.ZERO and k23.node is F.ZERO:
        n2, n3, Qn = k12, k13, None
    else:
        Qn = running_integral(fs * fs * sigma / Fd ** 3, "v", spec.v_lo, tol, symbol="n-integral")
        n2, n3 = (k12 + k22 * Qn).named("n2"), (k13 + k23 * Qn).named("n3")
    return dict(lam=lam, I=I, I_quadrature=Iq, varsigma=sigma, varsigma_quadrature=sigma_q,
                h4=h4, h5=h5, w2=w2, w3=w3, n2=n2, n3=n3, n_integral=Qn, degenerate=degenerate,
                f=f, f0=f0, h0sq=h0sq)


def _check_domain(parts, domain):
    if domain is None:
        return
    box = dict(domain)
    box.setdefault("chi", (0.0, 0.0))
    pts = sample_points(256, box, seed=3)
    sig = parts["varsigma"](pts)
    if np.any(~np.isfinite(sig)) or np.any(sig <= 0):
        raise DomainError("varsigma must stay positive on the domain")
    Fd = (parts["f"] - parts["f0"])(pts)
    if np.any(Fd == 0):
        raise DomainError("f = f0 on the domain (singular n-integrand)")


def _hat_chart(params, r_range):
    chart = SchwarzschildChart(params, r_range)
    r = chart.r_of_xicheck("x3")
    th = theta_of_thetacheck("x2")
    vp2 = F.ScalarField(chart.varpi2_node(r.node))
    return (vp2 / ((r * r) * F.sin(th) ** 2)).named("varpi^2/(r^2 sin^2 theta)")


def _assemble(spec, psi, lam, roles, tag, params=None, r_range=(2.5, 6.0), domain=None, tol=DEFAULT_TOL):
    parts = extradim_parts(spec, lam, tol)
    _check_domain(parts, domain)
    psi = F.field(psi)
    g = F.exp(2.0 * psi).named("g2 = g3 = e^{2 psi}")
    extras = {k: parts[k] for k in ("I", "I_quadrature", "varsigma", "varsigma_quadrature", "f", "f0", "h0sq")}
    if parts["n_integral"] is not None:
        extras["n_integral"] = parts["n_integral"]
    extras["psi"] = psi
    extras["h0"] = F.sqrt(F.fabs(spec.h0sq))
    tags = frozenset({"degenerate-sourceless"}) if parts["degenerate"] else frozenset()
    if params is not None:
        hat = _hat_chart(params, r_range)
        if tag == "extradim":
            extras["eta4"] = (parts["h4"] / spec.eps4).named("eta4")
            extras["eta5"] = (parts["h5"] / hat).named("eta5")
        else:
            extras["eta4"] = (parts["h4"] / hat).named("eta4")
            extras["eta5"] = (parts["h5"] / spec.eps4).named("eta5")
    return AnsatzMetric(g2=g, g3=g, h4=parts["h4"], h5=parts["h5"],
                        nconn=NConnection(parts["w2"], parts["w3"], parts["n2"], parts["n3"]),
                        g1=-spec.r_g ** 2, roles=roles, lam=parts["lam"], extras=extras, tags=tags,
                        provenance=((tag, spec.lambda_H, spec.eps4),))


def extradim_metric(spec, psi=None, lam=None, params=None, r_range=(2.5, 6.0), domain=None, tol=DEFAULT_TOL):
    """Off-diagonal extra-dimension metric (v = varkappa, y5 = t).

    psi defaults to lam*x2^2/2, a particular solution of psi.. + psi'' = lam.
    With varsigma0 = 1 and lambda_H = 0 the result is tagged
    'degenerate-sourceless' and w = 0.
    """
    lam = spec.lam if lam is None else lam
    psi = 0.5 * lam * F.X2 * F.X2 if psi is None else psi
    return _assemble(spec, psi, lam, EXTRA_ROLES, "extradim", params, r_range, domain, tol)


def time_anisotropic_metric(spec, psi=None, lam=None, params=None, r_range=(2.5, 6.0), domain=None,
                            tol=DEFAULT_TOL):
    """Same coefficients with the anisotropic coordinate read as time
    (y4 = t, y5 = varkappa)."""
    lam = spec.lam if lam is None else lam
    psi = 0.5 * lam * F.X2 * F.X2 if psi is None else psi
    return _assemble(spec, psi, lam, TIME_ROLES, "time-anisotropic", params, r_range, domain, tol)


def extradim_grid(n=9, h=1e-3, fd_order=4):
    return GridSpec({a: (lo, hi, n) for a, (lo, hi) in EXTRADIM_DOMAIN.items()},
                    h={a: h for a in F.AXES}, fd_order=fd_order)
