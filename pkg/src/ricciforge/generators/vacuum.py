"""Vacuum solitonic pp-wave metrics.

h4 = -h0^2 b^2 [(qk)*]^2, h5 = b^2 (qk)^2, w_i = d_i ln|b| * qk/(qk)*,
n_i = n0_i (v-independent, curl-free), lambda = 0, g2 = g3 = -1.
"""
import numpy as np

from .. import fields as F
from ..ansatz import AnsatzMetric, NConnection, GridSpec, sample_points
from ..dcalculus import DiffContext, derivative
from ..errors import ConstraintError
from .ppwave import PpWaveChoice, k_of_p_default, breve_plane
from .solitons import sine_gordon_field
from .string import PP_ROLES

VACUUM_DOMAIN = {"x2": (1.5, 2.0), "x3": (0.0, 0.5), "v": (0.2, 1.2)}


def curl_residual(n2, n3, point):
    """(n2)' - (n3). with exact partials."""
    ctx = DiffContext(mode="exact")
    return derivative(n2, point, {"x3": 1}, ctx) - derivative(n3, point, {"x2": 1}, ctx)


def vacuum_solitonic_metric(breve_b=None, wave=None, h0=2.0, n0_2=0.0, n0_3=0.0, q=None,
                            domain=None, curl_tol=1e-10):
    """Assemble the vacuum solitonic pp-wave metric.

    breve_b: amplitude b(x2, x3[, chi]); wave supplies k(p) (default sin p);
    q: soliton of p (default sine-Gordon kink).  The n0 pair must be
    v-independent and curl-free on `domain` (checked at sample points).
    """
    b = F.field(breve_b) if breve_b is not None else breve_plane()
    wave = wave or PpWaveChoice("separable_breve")
    k = k_of_p_default(wave)
    q = F.field(q) if q is not None else sine_gordon_field(1)
    n2, n3 = F.field(n0_2), F.field(n0_3)
    for nm, f in (("n0_2", n2), ("n0_3", n3), ("breve_b", b)):
        if "v" in f.free:
            raise ValueError(f"{nm} must not depend on v")
    box = dict(domain or VACUUM_DOMAIN)
    box.setdefault("chi", (0.0, 0.0))
    pts = sample_points(64, box, seed=11)
    curl = curl_residual(n2, n3, pts)
    if np.max(np.abs(curl)) > curl_tol:
        raise ConstraintError(f"n0 is not curl-free: max |(n2)' - (n3).| = {np.max(np.abs(curl)):.3g}")
    qk = q * k
    qks = qk.diff("v")
    h4 = (-(h0 ** 2) * b * b * qks * qks).named("h4")
    h5 = (b * b * qk * qk).named("h5")
    ratio = qk / qks
    w2 = (b.diff("x2") / b * ratio).named("w2")
    w3 = (b.diff("x3") / b * ratio).named("w3")
    g = F.const(-1.0).named("g2 = g3 = -1")
    extras = {"breve_b": b, "q": q, "k": k, "h0": h0, "psi": F.const(0.0),
              "eta5": (qk * qk).named("eta5"), "phi": F.const(float(np.log(2.0 / h0)))}
    return AnsatzMetric(g2=g, g3=g, h4=h4, h5=h5, nconn=NConnection(w2, w3, n2, n3),
                        g1=1.0, roles=PP_ROLES, lam=0.0, extras=extras,
                        provenance=(("vacuum_solitonic_metric", wave.kind),))


def vacuum_grid(n=9, h=1e-3, fd_order=4, margin=0.05):
    ax = {a: (lo + margin, hi - margin, n) for a, (lo, hi) in VACUUM_DOMAIN.items()}
    return GridSpec(ax, h={a: h for a in F.AXES}, fd_order=fd_order)
