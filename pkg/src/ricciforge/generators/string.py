"""Solitonic pp-wave metrics with an H-field source.

The v-sector is built in h-form: h5 = h50 + e^{2 eta}/(2 lam_H^2) and
h4 = -e^{-2 eta}(h5*)^2/h5, which makes the auxiliary phi equal to eta
and turns the v-equation into lambda = -lam_H^2/2.  The pp-wave profile
kappa enters only through the reported polarizations
eta4 = h4/(-2 kappa), eta5 = 8 kappa h5.
"""
import numpy as np

from .. import fields as F
from ..ansatz import AnsatzMetric, NConnection, CoordinateRoles, GridSpec
from ..errors import PhiStarZeroError, DegenerateMetricError, LambdaZeroError
from ..quadrature import running_integral, DEFAULT_TOL
from .ppwave import PpWaveChoice, kappa_field
from .solitons import SolitonChoice, soliton_field

PP_ROLES = CoordinateRoles(("extra", "transverse", "transverse", "wave-phase", "wave-phase"),
                           ("kappa_x", "x", "y", "p", "v"))

# regular patch used by the demos and tests: kappa > 0, no kinks
STRING_DOMAIN = {"x2": (1.5, 2.0), "x3": (0.0, 0.5), "v": (0.5, 1.5)}


def _pair(x):
    if isinstance(x, (tuple, list)):
        if len(x) != 2:
            raise ValueError("expected a pair of fields")
        return F.field(x[0]), F.field(x[1])
    f = F.field(x)
    return f, f


def w_from_phi(phi, sign=1):
    """w_i = sign * d_i phi / phi* for i = x2, x3.

    sign=+1 is the literal LC form; sign=-1 solves the reduced w-equation
    for the same phi.  Output carries exact partials when phi does.
    """
    phi = F.field(phi)
    ps = phi.diff("v")
    if ps.node is F.ZERO:
        raise PhiStarZeroError("phi* vanishes identically")
    axes = phi.exact_axes
    w2 = (sign * phi.diff("x2") / ps).with_exact(axes).named("w2")
    w3 = (sign * phi.diff("x3") / ps).with_exact(axes).named("w3")
    return w2, w3


def n_from_quadrature(eta4, eta5, n0, n1, p_lo, tol=DEFAULT_TOL):
    """n_i = n0_i + n1_i * Q,  Q(p) = int_{p_lo}^p |eta4 eta5^{-3/2}| dp.

    n0, n1 are single fields or (i=2, i=3) pairs.  With n1 == 0 the
    quadrature is skipped.
    """
    n02, n03 = _pair(n0)
    n12, n13 = _pair(n1)
    if n12.node is F.ZERO and n13.node is F.ZERO:
        return n02.named("n2"), n03.named("n3")
    Q = quadrature_Q(eta4, eta5, p_lo, tol)
    return (n02 + n12 * Q).named("n2"), (n03 + n13 * Q).named("n3")


def quadrature_Q(eta4, eta5, p_lo, tol=DEFAULT_TOL):
    integrand = F.fabs(F.field(eta4) * F.field(eta5) ** -1.5)
    return running_integral(integrand, "v", p_lo, tol, symbol="Q")


def string_polarizations(kappa, lambda_H, eta=0.0, h5_0=0.0):
    """(eta4, eta5) of the h-form pipeline relative to the pp-wave primary.

    eta = 0, h5_0 = 0 gives eta5 = 4 kappa / lambda_H^2.
    """
    if lambda_H == 0:
        raise LambdaZeroError("lambda_H = 0: the v-coefficient is proportional to 1/lambda_H^2")
    kappa, eta, h50 = F.field(kappa), F.field(eta), F.field(h5_0)
    h5 = h50 + F.exp(2.0 * eta) / (2.0 * lambda_H ** 2)
    eta5 = 8.0 * kappa * h5
    h5s = h5.diff("v")
    eta4 = (-F.exp(-2.0 * eta) * h5s * h5s / h5) / (-2.0 * kappa)
    return eta4.named("eta4"), eta5.named("eta5")


def solitonic_string_metric(soliton=None, wave=None, lambda_H=1.0, psi=0.0, h5_0=0.0,
                            n0=0.0, n1=0.0, p_lo=0.5, tol=DEFAULT_TOL):
    """Assemble the string-gravity solitonic pp-wave metric.

    g2 = g3 = -e^psi, h5 = h50 + e^{2 eta}/(2 lambda_H^2),
    h4 = -e^{-2 eta}(h5*)^2/h5, w = -d eta/eta*,
    n = n0 + n1 int_{p_lo}^p |h4 h5^{-3/2}| dp, lambda = -lambda_H^2/2.
    h5_0 must not depend on v.
    """
    soliton = soliton or SolitonChoice("sine_gordon_1d", 1, {"c2": 0.3, "c3": 0.2})
    wave = wave or PpWaveChoice("plane_monochromatic")
    if lambda_H == 0:
        raise LambdaZeroError("lambda_H = 0: the v-coefficient is proportional to 1/lambda_H^2")
    eta = soliton_field(soliton)
    kappa = kappa_field(wave)
    h50 = F.field(h5_0)
    if "v" in h50.free:
        raise ValueError("h5_0 must be independent of v")
    psi = F.field(psi)
    g = (-F.exp(psi)).named("g2 = g3 = -e^psi")
    h5 = (h50 + F.exp(2.0 * eta) / (2.0 * lambda_H ** 2)).named("h5")
    h5s = h5.diff("v")
    if h5s.node is F.ZERO:
        raise DegenerateMetricError("h5* vanishes identically (eta independent of v)")
    h4 = (-F.exp(-2.0 * eta) * h5s * h5s / h5).named("h4")
    w2, w3 = w_from_phi(eta, sign=-1)
    w2, w3 = w2.with_exact(()), w3.with_exact(())
    n2, n3 = n_from_quadrature(h4, h5, n0, n1, p_lo, tol)
    extras = {"eta": eta, "kappa": kappa, "phi": eta, "psi": psi, "lambda_H": lambda_H,
              "eta4": (h4 / (-2.0 * kappa)).named("eta4"), "eta5": (8.0 * kappa * h5).named("eta5")}
    return AnsatzMetric(g2=g, g3=g, h4=h4, h5=h5, nconn=NConnection(w2, w3, n2, n3),
                        g1=1.0, roles=PP_ROLES, lam=-0.5 * lambda_H ** 2, extras=extras,
                        provenance=(("solitonic_string_metric", soliton.kind, wave.kind),))


def string_grid(n=9, h=1e-3, fd_order=4, margin=0.05):
    """9^3 verification grid inside STRING_DOMAIN."""
    ax = {a: (lo + margin, hi - margin, n) for a, (lo, hi) in STRING_DOMAIN.items()}
    return GridSpec(ax, h={a: h for a in F.AXES}, fd_order=fd_order)
