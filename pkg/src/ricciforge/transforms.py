"""Parametric polarizations acting on an ansatz metric.

A PolarizationSet maps
    g_i -> eta_i g_i,  h_a -> eta_a h_a,  N_i^a -> eta_i^a N_i^a + zeta_i^a.
The additive zeta carries the transform's own N-connection generators
(zero by default, which gives the pure multiplicative form).  Applying A
then B is again a set, with products for the eta and zeta = eta_B zeta_A + zeta_B.
"""
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from . import fields as F
from .ansatz import AnsatzMetric, NConnection
from .errors import PolarizationError

NKEYS = ((2, 4), (3, 4), (2, 5), (3, 5))
_ONE = F.const(1.0)
_ZERO = F.const(0.0)


def _nfield(i, a):
    return ("w" if a == 4 else "n") + str(i)


@dataclass(frozen=True)
class PolarizationSet:
    eta2: F.ScalarField = _ONE
    eta3: F.ScalarField = _ONE
    eta4: F.ScalarField = _ONE
    eta5: F.ScalarField = _ONE
    eta_i_a: dict = dc_field(default_factory=dict)
    zeta_i_a: dict = dc_field(default_factory=dict)
    theta: object = 0.0

    def __post_init__(self):
        for k in ("eta2", "eta3", "eta4", "eta5"):
            object.__setattr__(self, k, F.field(getattr(self, k)))
        bad = set(self.eta_i_a) - set(NKEYS) | set(self.zeta_i_a) - set(NKEYS)
        if bad:
            raise PolarizationError(f"unknown N-connection index pairs {sorted(bad)}")
        object.__setattr__(self, "eta_i_a", {k: F.field(self.eta_i_a.get(k, 1.0)) for k in NKEYS})
        object.__setattr__(self, "zeta_i_a", {k: F.field(self.zeta_i_a.get(k, 0.0)) for k in NKEYS})

    @classmethod
    def identity(cls, theta=0.0):
        return cls(theta=theta)

    @classmethod
    def from_expressions(cls, exprs, theta=0.0, constants=None):
        """Build from expression strings over x2, x3, v, theta.

        Keys: eta2..eta5 and eta_2_4, eta_3_4, eta_2_5, eta_3_5 (zeta_* likewise).
        """
        from .expr import compile_expr
        consts = {"theta": float(theta)}
        consts.update(constants or {})
        kw, ea, za = {}, {}, {}
        for key, text in exprs.items():
            fld = compile_expr(str(text), consts, symbol=key)
            if key in ("eta2", "eta3", "eta4", "eta5"):
                kw[key] = fld
            elif key.startswith(("eta_", "zeta_")):
                parts = key.split("_")
                if len(parts) != 3 or not parts[1].isdigit() or not parts[2].isdigit():
                    raise PolarizationError(f"bad polarization key {key!r}")
                (ea if parts[0] == "eta" else za)[(int(parts[1]), int(parts[2]))] = fld
            else:
                raise PolarizationError(f"unknown polarization key {key!r}")
        return cls(eta_i_a=ea, zeta_i_a=za, theta=theta, **kw)

    def fields(self):
        out = {k: getattr(self, k) for k in ("eta2", "eta3", "eta4", "eta5")}
        for (i, a), f in self.eta_i_a.items():
            out[f"eta_{i}_{a}"] = f
        for (i, a), f in self.zeta_i_a.items():
            out[f"zeta_{i}_{a}"] = f
        return out


def _const_zero(f):
    return f.node.is_const() and f.node.value == 0.0


def _check_nonzero(pol, points):
    for name, f in pol.fields().items():
        if name.startswith("zeta"):
            continue
        if _const_zero(f):
            raise PolarizationError(f"{name} vanishes identically")
        if points is not None:
            val = f(points)
            if np.any(val == 0) or not np.all(np.isfinite(val)):
                raise PolarizationError(f"{name} vanishes or is non-finite on the domain")


def apply_polarizations(metric, pol, points=None):
    """Deformed metric, tagged 'unverified'.  `points` optionally checks
    that every eta is nonzero on a sample of the domain."""
    _check_nonzero(pol, points)
    nc = {}
    for (i, a) in NKEYS:
        base = metric.nconn.get(i, a)
        nc[_nfield(i, a)] = pol.eta_i_a[(i, a)] * base + pol.zeta_i_a[(i, a)]
    extras = dict(metric.extras)
    extras.update({"pol_" + k: v for k, v in pol.fields().items()})
    extras["eta2"] = pol.eta2
    return replace(metric, g2=pol.eta2 * metric.g2, g3=pol.eta3 * metric.g3,
                   h4=pol.eta4 * metric.h4, h5=pol.eta5 * metric.h5,
                   nconn=NConnection(nc["w2"], nc["w3"], nc["n2"], nc["n3"]), extras=extras,
                   tags=metric.tags | {"unverified"},
                   provenance=metric.provenance + (("apply_polarizations", pol.theta),))


def conformal_renormalize(metric, factor_source="eta2", points=None):
    """Divide g2, g3, h4, h5 by a conformal factor.

    factor_source: 'eta2' (taken from metric.extras) or an explicit field.
    g1 and the N-connection are unchanged.
    """
    if isinstance(factor_source, str):
        if factor_source != "eta2":
            raise ValueError("factor_source must be 'eta2' or a field")
        if "eta2" not in metric.extras:
            raise PolarizationError("metric carries no eta2 (apply a polarization set first)")
        factor = F.field(metric.extras["eta2"])
    else:
        factor = F.field(factor_source)
    if _const_zero(factor):
        raise PolarizationError("zero conformal factor")
    if points is not None:
        val = factor(points)
        if np.any(val == 0) or not np.all(np.isfinite(val)):
            raise PolarizationError("conformal factor vanishes on the domain")
    extras = dict(metric.extras)
    extras["conformal_factor"] = factor
    return replace(metric, g2=metric.g2 / factor, g3=metric.g3 / factor, h4=metric.h4 / factor,
                   h5=metric.h5 / factor, extras=extras, tags=metric.tags | {"unverified"},
                   provenance=metric.provenance + (("conformal_renormalize", factor.symbol),))


def compose_two_parameter(setA, setB):
    """Set equivalent to applying setA (theta) and then setB (theta')."""
    kw = {k: getattr(setA, k) * getattr(setB, k) for k in ("eta2", "eta3", "eta4", "eta5")}
    ea = {k: setA.eta_i_a[k] * setB.eta_i_a[k] for k in NKEYS}
    za = {k: setB.eta_i_a[k] * setA.zeta_i_a[k] + setB.zeta_i_a[k] for k in NKEYS}
    return PolarizationSet(eta_i_a=ea, zeta_i_a=za, theta=(setA.theta, setB.theta), **kw)


def coefficient_difference(m1, m2, points):
    """max |m1 - m2| over all coefficient slots at `points`."""
    worst = 0.0
    for k in ("g2", "g3", "h4", "h5", "w2", "w3", "n2", "n3"):
        a, b = m1.coefficient(k)(points), m2.coefficient(k)(points)
        worst = max(worst, float(np.max(np.abs(a - b))))
    return worst


def set_difference(A, B, points):
    fa, fb = A.fields(), B.fields()
    return max(float(np.max(np.abs(fa[k](points) - fb[k](points)))) for k in fa)
