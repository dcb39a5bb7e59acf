"""chi-parametrized metric families and their flow constraints."""
from dataclasses import dataclass, field as dc_field, replace
import math

import numpy as np

from . import fields as F
from .ansatz import AnsatzMetric, NConnection
from .dcalculus import DiffContext, _Jet, evolution_residuals
from .errors import DomainError, ChiBoundaryError
from .generators.vacuum import vacuum_solitonic_metric
from .generators.schwarzschild import stationary_deformation
from .generators.extradim import extradim_metric, time_anisotropic_metric


@dataclass(frozen=True)
class FlowFamily:
    """metric: an AnsatzMetric whose fields may depend on chi;
    lam: flow normalization constant; chi_range: [0, chi0]."""
    metric: AnsatzMetric
    lam: float = 0.0
    chi_range: tuple = (0.0, 1.0)
    extras: dict = dc_field(default_factory=dict)
    kind: str = "custom"

    def __post_init__(self):
        lo, hi = map(float, self.chi_range)
        if lo < 0 or not hi > lo:
            raise ChiBoundaryError("chi range must satisfy 0 <= lo < hi")
        object.__setattr__(self, "chi_range", (lo, hi))

    def metric_at(self, chi):
        lo, hi = self.chi_range
        if not lo <= chi <= hi:
            raise ChiBoundaryError(f"chi = {chi} outside [{lo}, {hi}]")
        return self.metric.subs("chi", chi)


@dataclass(frozen=True)
class FlowConstraintResiduals:
    c_eq1b_2: np.ndarray
    c_eq1b_3: np.ndarray
    c_5aux5e_2: np.ndarray
    c_5aux5e_3: np.ndarray
    c_5const5a_1: np.ndarray
    c_5const5a_2: np.ndarray

    COMPONENTS = ("c_eq1b_2", "c_eq1b_3", "c_5aux5e_2", "c_5aux5e_3", "c_5const5a_1", "c_5const5a_2")

    def as_dict(self):
        return {k: getattr(self, k) for k in self.COMPONENTS}


def _exact_chi(metric):
    """Mark chi as an exact axis on every coefficient and extra."""
    ex = lambda f: f.with_exact(f.exact_axes | {"chi"})
    nc = NConnection(*(ex(metric.nconn.get(i, a)) for a in (4, 5) for i in (2, 3)))
    extras = {k: (ex(v) if isinstance(v, F.ScalarField) else v) for k, v in metric.extras.items()}
    return replace(metric, g2=ex(metric.g2), g3=ex(metric.g3), h4=ex(metric.h4), h5=ex(metric.h5),
                   nconn=nc, extras=extras)


def amplitude(b0sq, lam):
    """A(chi) = b0sq e^{2 lam chi}, the closed form of d_chi A = 2 lam A."""
    return (b0sq * F.exp(2.0 * lam * F.CHI)).with_exact().named("A(chi)")


def n0_of_chi(b0sq, n0, lam):
    """n0(chi) with A n0^2 = b0sq n0^2 - 2 lam chi."""
    return F.sqrt((b0sq * n0 * n0 - 2.0 * lam * F.CHI) / amplitude(b0sq, lam)).with_exact().named("n0(chi)")


def exponential_flow_family(b0sq=1.0, n0=1.0, lam=0.0, chi_range=(0.0, 1.0), breve_b=None, wave=None,
                            h0=2.0, q=None):
    """Vacuum solitonic pp-wave family under normalized flow.

    b(x, y, chi) = b_base(x, y) sqrt(A(chi)), A = b0sq e^{2 lam chi};
    n_2 = n_3 = n0(chi) = sqrt((b0sq n0^2 - 2 lam chi)/A).
    """
    if not b0sq > 0:
        raise ValueError("b0sq must be positive")
    lo, hi = map(float, chi_range)
    if lam > 0 and not hi < b0sq * n0 * n0 / (2.0 * lam):
        raise DomainError(f"chi0 = {hi} must stay below b0sq n0^2/(2 lam) = {b0sq * n0 * n0 / (2 * lam):.6g}")
    A = amplitude(b0sq, lam)
    nchi = n0_of_chi(b0sq, n0, lam)
    from .generators.ppwave import breve_plane
    base = F.field(breve_b) if breve_b is not None else breve_plane()
    b = base * F.sqrt(A)
    m = vacuum_solitonic_metric(b, wave, h0, nchi, nchi, q)
    m = _exact_chi(replace(m, extras={**m.extras, "amplitude": A, "n0_chi": nchi}))
    return FlowFamily(m, lam, (lo, hi), {"b0sq": b0sq, "n0": n0}, kind="exponential")


def static_family(metric, lam=None, chi_range=(0.0, 1.0)):
    """chi-independent lift of a metric; flow constant defaults to metric.lam."""
    lam = metric.lam if lam is None else lam
    return FlowFamily(_exact_chi(metric), lam, chi_range, kind="static")


def stationary_flow_family(params, eta5, h0=2.0, n2=0.0, n3=0.0, psi=0.0, lam=0.0, chi_range=(0.0, 1.0),
                           **kw):
    """Stationary deformation with chi-dependent n_i (and psi)."""
    m = stationary_deformation(params, eta5, h0, n2, n3, psi, **kw)
    return FlowFamily(_exact_chi(m), lam, chi_range, kind="stationary")


def extradim_flow_family(spec, psi=None, chi_range=(0.0, 1.0), **kw):
    """Extra-dimension family with chi-dependent psi and n_k1(chi)."""
    m = extradim_metric(spec, psi, **kw)
    return FlowFamily(_exact_chi(m), spec.lam, chi_range, kind="extradim")


def time_anisotropic_flow_family(spec, psi=None, chi_range=(0.0, 1.0), **kw):
    m = time_anisotropic_metric(spec, psi, **kw)
    return FlowFamily(_exact_chi(m), spec.lam, chi_range, kind="time-anisotropic")


def flow_constraint_residuals(family, point, ctx=None):
    """Flow constraints at a batch of points (chi interior).

    c_eq1b_i = d_chi[g_i + h5 n_i^2]
    c_5aux5e_i = h0^2 [(sqrt|eta5|)*]^2 d_chi(w_i^2) - eta5 d_chi(n_i^2)   (stationary families)
    c_5const5a_1 = max_i |d_chi[A n_i^2] + 2 lam|, c_5const5a_2 = d_chi A - 2 lam A   (needs extras amplitude)
    Missing ingredients give NaN.
    """
    ctx = ctx or DiffContext()
    lo, hi = family.chi_range
    dom = dict(ctx.domain or {})
    dom["chi"] = (lo, hi)
    ctx = replace(ctx, domain=dom)
    m, lam = family.metric, family.lam
    bk = ctx.backend
    nan = np.full(point.shape, np.nan)
    out = {}
    with bk.context():
        J = _Jet(m, point, ctx)
        f = bk.to_float
        h5, h5c = f(J("h5")), f(J("h5", chi=1))
        for i in (2, 3):
            n, nc = f(J(f"n{i}")), f(J(f"n{i}", chi=1))
            out[f"c_eq1b_{i}"] = f(J(f"g{i}", chi=1)) + h5c * n * n + 2 * h5 * n * nc
        ex = m.extras
        if ex.get("aux5e_applicable") and "h0" in ex and "eta5" in ex:
            h0 = F.field(ex["h0"])
            sq = F.sqrt(F.fabs(F.field(ex["eta5"])))
            h0v, sqs, e5 = f(J(h0)), f(J(sq, v=1)), f(J(F.field(ex["eta5"])))
            for i in (2, 3):
                w, wc = f(J(f"w{i}")), f(J(f"w{i}", chi=1))
                n, nc = f(J(f"n{i}")), f(J(f"n{i}", chi=1))
                out[f"c_5aux5e_{i}"] = h0v ** 2 * sqs ** 2 * 2 * w * wc - e5 * 2 * n * nc
        else:
            out["c_5aux5e_2"] = out["c_5aux5e_3"] = nan
        if "amplitude" in ex:
            A = F.field(ex["amplitude"])
            Av, Ac = f(J(A)), f(J(A, chi=1))
            vals = []
            for i in (2, 3):
                n, nc = f(J(f"n{i}")), f(J(f"n{i}", chi=1))
                vals.append(Ac * n * n + Av * 2 * n * nc + 2 * lam)
            out["c_5const5a_1"] = np.where(np.abs(vals[0]) >= np.abs(vals[1]), vals[0], vals[1])
            out["c_5const5a_2"] = Ac - 2 * lam * Av
        else:
            out["c_5const5a_1"] = out["c_5const5a_2"] = nan
    return FlowConstraintResiduals(**out)


def flow_report(family, grid, suites=("reduced", "evolution", "flow-constraints"), tolerances=None,
                ctx=None, name="flow"):
    """ResidualReport over the grid (chi samples from grid's chi axis)."""
    from .report import run_suites
    lo, hi, _ = grid.axes["chi"]
    flo, fhi = family.chi_range
    if lo < flo or hi > fhi:
        raise ChiBoundaryError("grid chi-axis leaves the family range")
    return run_suites(family, grid, suites, tolerances or {}, ctx=ctx, name=name)
