"""Finite differences and residual evaluators for the reduced system.

Notation: a. = d/dx2, a' = d/dx3, a* = d/dv.  Every evaluator accepts a
ChartPoint batch and returns arrays of the batch shape.
"""
from dataclasses import dataclass, field as dc_field, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import fields as F
from .errors import (StencilDomainError, ChiBoundaryError, KinkError,
                     DegenerateMetricError, PhiStarZeroError)

FD_ENVELOPE_C = 1e4
KINK_GUARD = 10
PHI_STAR_TOL = 1e-7


@lru_cache(maxsize=None)
def central_weights(deriv, accuracy):
    """Exact central-difference weights (offsets, weights) as Fractions."""
    half = (deriv + 1) // 2 - 1 + accuracy // 2
    offs = list(range(-half, half + 1))
    n = len(offs)
    # Vandermonde system sum_j w_j o_j^k = k! delta_{k,deriv}
    A = [[Fraction(o) ** k for o in offs] for k in range(n)]
    b = [Fraction(0)] * n
    fact = 1
    for k in range(2, deriv + 1):
        fact *= k
    b[deriv] = Fraction(fact)
    # Gauss-Jordan in exact arithmetic
    M = [row + [bb] for row, bb in zip(A, b)]
    for c in range(n):
        piv = next(r for r in range(c, n) if M[r][c] != 0)
        M[c], M[piv] = M[piv], M[c]
        pv = M[c][c]
        M[c] = [x / pv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                fac = M[r][c]
                M[r] = [x - fac * y for x, y in zip(M[r], M[c])]
    w = [M[r][n] for r in range(n)]
    return tuple(offs), tuple(w)


@dataclass(frozen=True)
class DiffContext:
    """How derivatives are taken.

    mode: 'auto' uses exact partials where the field carries them and
    finite differences elsewhere; 'fd' differences everything that is
    differentiable by stencils; 'exact' is fully symbolic.
    precision: 'double' or 'mp' (gmpy2, `mp_bits`).
    domain: optional {axis: (lo, hi)} that stencils must not leave.
    """
    h: dict = dc_field(default_factory=lambda: {a: 1e-3 for a in F.AXES})
    fd_order: int = 4
    mode: str = "auto"
    precision: str = "double"
    mp_bits: int = 128
    domain: dict = None
    kink_guard: bool = True
    phi_star_tol: float = PHI_STAR_TOL

    def __post_init__(self):
        if isinstance(self.h, (int, float)):
            object.__setattr__(self, "h", {a: float(self.h) for a in F.AXES})
        else:
            hh = {a: 1e-3 for a in F.AXES}
            hh.update(self.h)
            object.__setattr__(self, "h", hh)
        if self.fd_order not in (2, 4):
            raise ValueError("fd_order must be 2 or 4")
        if self.mode not in ("auto", "fd", "exact"):
            raise ValueError("mode must be auto, fd or exact")

    @classmethod
    def from_grid(cls, grid, **kw):
        return cls(h=dict(grid.h), fd_order=grid.fd_order, **kw)

    @property
    def backend(self):
        if self.precision == "mp":
            return _mp_backend(self.mp_bits)
        return F.DOUBLE

    def use_exact(self, fld, axis):
        if fld.node.rough or self.mode == "exact":
            return True
        if self.mode == "fd":
            return False
        return axis in fld.exact_axes

    def envelope(self, axis="v"):
        return FD_ENVELOPE_C * self.h[axis] ** self.fd_order

    def replace(self, **kw):
        return replace(self, **kw)


@lru_cache(maxsize=8)
def _mp_backend(bits):
    return F.MPBackend(bits)


def _bcast(val, shape, bk):
    if bk is F.DOUBLE:
        return np.broadcast_to(np.asarray(val, dtype=float), shape).copy()
    out = np.empty(shape, dtype=object)
    out[...] = val
    return out


def _ev(fld, p, bk):
    return _bcast(fld.node.ev(p.coords(), bk, {}), p.shape, bk)


def _check_domain(p, axis, lo_off, hi_off, ctx):
    if not ctx.domain or axis not in ctx.domain:
        return
    lo, hi = ctx.domain[axis]
    x = F.DOUBLE.to_float(getattr(p, axis)) if np.asarray(getattr(p, axis)).dtype == object else getattr(p, axis)
    if np.any(x + lo_off < lo - 1e-12) or np.any(x + hi_off > hi + 1e-12):
        cls = ChiBoundaryError if axis == "chi" else StencilDomainError
        raise cls(f"{axis}-stencil leaves the declared domain [{lo}, {hi}]")


def _deriv(fld, p, orders, ctx, bk):
    if not orders:
        return _ev(fld, p, bk)
    exact = [o for o in orders if ctx.use_exact(fld, o[0])]
    if exact:
        g = fld
        for ax, k in exact:
            g = g.diff(ax, k)
        return _deriv(g, p, tuple(o for o in orders if o not in exact), ctx, bk)
    (axis, k), rest = orders[0], orders[1:]
    if axis not in fld.free:
        return _bcast(bk.const(0.0), p.shape, bk)
    offs, wts = central_weights(k, ctx.fd_order)
    h = ctx.h[axis]
    _check_domain(p, axis, offs[0] * h, offs[-1] * h, ctx)
    hb = bk.const(h)
    acc = None
    for o, w in zip(offs, wts):
        if w == 0:
            continue
        term = _deriv(fld, p.shifted(axis, hb * o), rest, ctx, bk)
        wb = bk.const(w.numerator) / bk.const(w.denominator)
        term = term * wb
        acc = term if acc is None else acc + term
    return acc / hb ** k


def derivative(fld, point, orders, ctx=None):
    """Mixed partial of `fld` at `point`.  orders: {axis: k}.

    Returns backend-native values (float64 or mpfr object arrays).
    """
    ctx = ctx or DiffContext()
    bk = ctx.backend
    ords = tuple((a, int(k)) for a, k in sorted(orders.items(), key=lambda t: F.AXES.index(t[0])) if k)
    with bk.context():
        p = point.converted(bk) if bk is not F.DOUBLE else point
        return _deriv(F.field(fld), p, ords, ctx, bk)


def partial(fld, point, axis, order=1, ctx=None):
    """Exact partial if the field carries one along `axis`, else central FD."""
    if axis not in F.AXES:
        raise ValueError(f"axis must be one of {F.AXES}")
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    ctx = ctx or DiffContext()
    return ctx.backend.to_float(derivative(fld, point, {axis: order}, ctx))


# ---------------------------------------------------------------- result types

@dataclass(frozen=True)
class AuxCoeffs:
    phi: np.ndarray
    alpha2: np.ndarray
    alpha3: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    phi_star: np.ndarray = None


@dataclass(frozen=True)
class ReducedResiduals:
    r_h: np.ndarray
    r_v: np.ndarray
    r_w2: np.ndarray
    r_w3: np.ndarray
    r_n2: np.ndarray
    r_n3: np.ndarray
    point: F.ChartPoint = None

    COMPONENTS = ("r_h", "r_v", "r_w2", "r_w3", "r_n2", "r_n3")

    def as_dict(self):
        return {k: getattr(self, k) for k in self.COMPONENTS}

    def max_abs(self, components=None):
        comps = components or self.COMPONENTS
        return max(float(np.max(np.abs(getattr(self, k)))) for k in comps)


@dataclass(frozen=True)
class LCResiduals:
    c1: np.ndarray
    c2: np.ndarray
    c3: np.ndarray
    c4: np.ndarray
    cw2: np.ndarray
    cw3: np.ndarray
    c1_alt: np.ndarray = None
    cw_applicable: np.ndarray = None

    COMPONENTS = ("c1", "c2", "c3", "c4", "cw2", "cw3")

    def as_dict(self):
        return {k: getattr(self, k) for k in self.COMPONENTS}


@dataclass(frozen=True)
class AnholonomyCoeffs:
    w_ia_b: dict
    omega_ij_a: dict

    def is_holonomic(self, tol=1e-10):
        vals = list(self.w_ia_b.values()) + list(self.omega_ij_a.values())
        return all(float(np.max(np.abs(v))) <= tol for v in vals)


@dataclass(frozen=True)
class EvolutionResiduals:
    e_h2: np.ndarray
    e_h3: np.ndarray
    e_v4: np.ndarray
    e_v5: np.ndarray
    offdiag_flags: tuple
    eq1b_2: np.ndarray = None
    eq1b_3: np.ndarray = None
    notes: tuple = ("h_cc d_chi (N_i^c)^2 summed over c in {4,5}",)

    COMPONENTS = ("e_h2", "e_h3", "e_v4", "e_v5", "eq1b_2", "eq1b_3")

    def as_dict(self):
        d = {k: getattr(self, k) for k in self.COMPONENTS}
        for name, val in self.offdiag_flags:
            d[name] = val
        return d


# ---------------------------------------------------------------- jets

class _Jet:
    """Lazily cached derivatives of named metric fields at one batch."""

    def __init__(self, metric, point, ctx):
        self.m, self.ctx = metric, ctx
        self.bk = ctx.backend
        self.p = point.converted(self.bk) if self.bk is not F.DOUBLE else point
        self.cache = {}

    def __call__(self, name, **orders):
        key = (name, tuple(sorted(orders.items())))
        if key not in self.cache:
            fld = self.m.coefficient(name) if isinstance(name, str) else name
            ords = tuple((a, k) for a, k in sorted(orders.items(), key=lambda t: F.AXES.index(t[0])) if k)
            self.cache[key] = _deriv(fld, self.p, ords, self.ctx, self.bk)
        return self.cache[key]


def _kink_guard(metric, point, ctx):
    """Refuse points within KINK_GUARD*h of a sign change of h4, h5, h5*."""
    if not ctx.kink_guard:
        return
    dctx = replace(ctx, precision="double", domain=None)
    fp = point.as_float()
    base = {}
    for name in ("h4", "h5"):
        base[name] = np.sign(metric.coefficient(name)(fp))
    base["h5*"] = np.sign(F.DOUBLE.to_float(derivative(metric.h5, fp, {"v": 1}, dctx)))
    for axis in ("x2", "x3", "v"):
        d = KINK_GUARD * ctx.h[axis]
        for s in (-d, d):
            q = fp.shifted(axis, s)
            for name in ("h4", "h5"):
                if np.any(np.sign(metric.coefficient(name)(q)) != base[name]):
                    raise KinkError(f"{name} changes sign within {KINK_GUARD}h of a sample point (axis {axis})")
            hs = np.sign(F.DOUBLE.to_float(derivative(metric.h5, q, {"v": 1}, dctx)))
            if np.any(hs != base["h5*"]):
                raise KinkError(f"h5* changes sign within {KINK_GUARD}h of a sample point (axis {axis})")


def _first_bad(mask, point):
    idx = np.flatnonzero(np.asarray(mask).ravel())
    if idx.size == 0:
        return ""
    return f" at {point.as_float().take(np.unravel_index(idx[0], point.shape))!r}" if point.shape else f" at {point!r}"


def _aux(J, point):
    bk = J.bk
    h4, h5 = J("h4"), J("h5")
    h4s, h5s, h5ss = J("h4", v=1), J("h5", v=1), J("h5", v=2)
    f4, f5, f5s = (bk.to_float(x) for x in (h4, h5, h5s))
    bad = (f4 * f5 == 0) | ~np.isfinite(f4 * f5)
    if np.any(bad):
        raise DegenerateMetricError("h4*h5 = 0" + _first_bad(bad, point))
    bad = np.abs(f5s) <= 1e-13 * np.maximum(1.0, np.abs(f5))
    if np.any(bad):
        raise DegenerateMetricError("h5* = 0 (degenerate v-metric)" + _first_bad(bad, point))
    phi = bk.log(bk.abs(h5s / bk.sqrt(bk.abs(h4 * h5))))
    lnsq_s = (h4s / h4 + h5s / h5) / 2
    phi_s = h5ss / h5s - lnsq_s
    dphi = {}
    for ax in ("x2", "x3"):
        dphi[ax] = J("h5", v=1, **{ax: 1}) / h5s - (J("h4", **{ax: 1}) / h4 + J("h5", **{ax: 1}) / h5) / 2
    gamma = 3 * h5s / (2 * h5) - h4s / h4
    return dict(phi=phi, phi_s=phi_s, dphi=dphi, alpha2=h5s * dphi["x2"], alpha3=h5s * dphi["x3"],
                beta=h5s * phi_s, gamma=gamma, lnsq_s=lnsq_s)


def _out(bk, x):
    return bk.to_float(x)


def aux_coeffs(metric, point, ctx=None):
    """phi, alpha_i, beta, gamma of the v-metric."""
    ctx = ctx or DiffContext()
    bk = ctx.backend
    with bk.context():
        J = _Jet(metric, point, ctx)
        a = _aux(J, point)
        return AuxCoeffs(*(_out(bk, a[k]) for k in ("phi", "alpha2", "alpha3", "beta", "gamma")),
                         phi_star=_out(bk, a["phi_s"]))


def _h_bracket(J):
    g2, g3 = J("g2"), J("g3")
    g2d, g3d, g3dd = J("g2", x2=1), J("g3", x2=1), J("g3", x2=2)
    g2p, g3p, g2pp = J("g2", x3=1), J("g3", x3=1), J("g2", x3=2)
    br = (g2d * g3d / (2 * g2) + g3d * g3d / (2 * g3) - g3dd
          + g2p * g3p / (2 * g3) + g2p * g2p / (2 * g2) - g2pp)
    return br / (2 * g2 * g3)


def reduced_residuals(metric, point, ctx=None, components=None):
    """r_h, r_v, r_w2, r_w3, r_n2, r_n3; a solution makes all vanish.

    lambda enters with the right-hand side moved left.
    `components` restricts the work (others are returned as NaN).
    """
    ctx = ctx or DiffContext()
    comps = set(components or ReducedResiduals.COMPONENTS)
    bk = ctx.backend
    lam = metric.lam
    out = {}
    nan = np.full(point.shape, np.nan)
    if comps - {"r_h"}:
        _kink_guard(metric, point, ctx)
    with bk.context():
        J = _Jet(metric, point, ctx)
        g2, g3 = bk.to_float(J("g2")), bk.to_float(J("g3"))
        if np.any(g2 * g3 == 0):
            raise DegenerateMetricError("g2*g3 = 0" + _first_bad(g2 * g3 == 0, point))
        out["r_h"] = _out(bk, _h_bracket(J) + lam) if "r_h" in comps else nan
        if comps - {"r_h"}:
            a = _aux(J, point)
            h4, h5 = J("h4"), J("h5")
            h5s, h5ss = J("h5", v=1), J("h5", v=2)
            out["r_v"] = _out(bk, (h5s * a["lnsq_s"] - h5ss) / (2 * h4 * h5) + lam)
            for i, al in ((2, a["alpha2"]), (3, a["alpha3"])):
                w = J(f"w{i}")
                out[f"r_w{i}"] = _out(bk, -w * a["beta"] / (2 * h5) - al / (2 * h5))
                out[f"r_n{i}"] = _out(bk, -(h5 / (2 * h4)) * (J(f"n{i}", v=2) + a["gamma"] * J(f"n{i}", v=1)))
        for k in ReducedResiduals.COMPONENTS:
            out.setdefault(k, nan)
            if k not in comps:
                out[k] = nan
    return ReducedResiduals(point=point, **out)


def lc_residuals(metric, point, psi, eps2=1, eps3=1, ctx=None, lambda_sign=1):
    """Levi-Civita conditions.  c1 uses lambda_sign*lambda; c1_alt the
    opposite convention.  cw entries are NaN where |phi*| <= tol."""
    ctx = ctx or DiffContext()
    bk = ctx.backend
    lam = metric.lam
    psi = F.field(psi)
    with bk.context():
        J = _Jet(metric, point, ctx)
        lap = eps2 * J(psi, x2=2) + eps3 * J(psi, x3=2)
        c1 = _out(bk, lap - lambda_sign * lam)
        c1_alt = _out(bk, lap + lambda_sign * lam)
        a = _aux(J, point)
        h4, h5, h5s = J("h4"), J("h5"), J("h5", v=1)
        c2 = _out(bk, h5s * a["phi"] / (h4 * h5) - lam)
        w2, w3 = J("w2"), J("w3")
        c3 = _out(bk, J("w2", x3=1) - J("w3", x2=1) + w3 * J("w2", v=1) - w2 * J("w3", v=1))
        c4 = _out(bk, J("n2", x3=1) - J("n3", x2=1))
        ps = bk.to_float(a["phi_s"])
        ok = np.abs(ps) > ctx.phi_star_tol
        cw = {}
        for i, ax in ((2, "x2"), (3, "x3")):
            with np.errstate(all="ignore"):
                val = bk.to_float(J(f"w{i}")) - bk.to_float(a["dphi"][ax]) / np.where(ok, ps, 1.0)
            cw[i] = np.where(ok, val, np.nan)
    return LCResiduals(c1, c2, c3, c4, cw[2], cw[3], c1_alt=c1_alt, cw_applicable=ok)


def anholonomy(metric, point, ctx=None):
    """W^b_{ia} = d_a N_i^b and Omega^a_{ij} = e_j(N_i^a) - e_i(N_j^a)."""
    ctx = ctx or DiffContext()
    bk = ctx.backend
    nc = metric.nconn
    W, Om = {}, {}
    zero = np.zeros(point.shape)
    with bk.context():
        J = _Jet(metric, point, ctx)
        for i in (1, 2, 3):
            for a in (4, 5):
                for b in (4, 5):
                    if i == 1 or a == 5:
                        W[(i, a, b)] = zero.copy()
                    else:
                        W[(i, a, b)] = _out(bk, J(nc.get(i, b), v=1))
        w = {2: J("w2"), 3: J("w3")}
        for a in (4, 5):
            N2, N3 = nc.get(2, a), nc.get(3, a)
            o23 = (J(N2, x3=1) - w[3] * J(N2, v=1)) - (J(N3, x2=1) - w[2] * J(N3, v=1))
            o23 = _out(bk, o23)
            for i in (1, 2, 3):
                for j in (1, 2, 3):
                    if (i, j) == (2, 3):
                        Om[(i, j, a)] = o23
                    elif (i, j) == (3, 2):
                        Om[(i, j, a)] = -o23
                    else:
                        Om[(i, j, a)] = zero.copy()
    return AnholonomyCoeffs(W, Om)


def evolution_residuals(family, point, ctx=None):
    """Normalized evolution equations for a chi-family.

    With E_h = r_h - lam_m, E_v = r_v - lam_m the bare h- and v-sector
    combinations (lam_m = metric.lam), the Ricci coefficients are
    R_ii = -g_ii E_h and R_aa = -h_aa E_v.  With the flow constant lam_f:
    e_h_i = d_chi g_i - 2 g_i E_h - 2 lam_f g_i + sum_c h_c d_chi (N_i^c)^2
    e_v_a = d_chi h_a - 2 h_a E_v - 2 lam_f h_a.
    """
    ctx = ctx or DiffContext()
    lo, hi = family.chi_range
    dom = dict(ctx.domain or {})
    dom["chi"] = (lo, hi)
    ctx = replace(ctx, domain=dom)
    metric = family.metric
    lam_m, lam_f = metric.lam, family.lam
    red = reduced_residuals(metric, point, ctx)
    bk = ctx.backend
    with bk.context():
        J = _Jet(metric, point, ctx)
        f = lambda x: bk.to_float(x)
        h4, h5 = f(J("h4")), f(J("h5"))
        out = {}
        for i in (2, 3):
            g = f(J(f"g{i}"))
            s = 0.0
            for c, hc in ((4, h4), (5, h5)):
                N = family.metric.nconn.get(i, c)
                s = s + hc * 2 * f(J(N)) * f(J(N, chi=1))
            out[f"e_h{i}"] = f(J(f"g{i}", chi=1)) - 2 * g * (red.r_h - lam_m) - 2 * lam_f * g + s
            n = f(J(f"n{i}"))
            out[f"eq1b_{i}"] = (f(J(f"g{i}", chi=1)) + f(J("h5", chi=1)) * n * n
                                + h5 * 2 * n * f(J(f"n{i}", chi=1)))
        out["e_v4"] = f(J("h4", chi=1)) - 2 * h4 * (red.r_v - lam_m) - 2 * lam_f * h4
        out["e_v5"] = f(J("h5", chi=1)) - 2 * h5 * (red.r_v - lam_m) - 2 * lam_f * h5
    flags = tuple((k, getattr(red, k)) for k in ("r_w2", "r_w3", "r_n2", "r_n3"))
    return EvolutionResiduals(offdiag_flags=flags, **out)


# ---------------------------------------------------------------- convergence

def fit_order(hs, errs):
    """Least-squares slope of log(err) against log(h)."""
    hs, errs = np.asarray(hs, float), np.asarray(errs, float)
    good = errs > 0
    if good.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(hs[good]), np.log(errs[good]), 1)[0])


def convergence_study(fn, hs):
    """fn(h) -> error norm.  Returns (list of (h, err), fitted order)."""
    rows = [(float(h), float(fn(h))) for h in hs]
    return rows, fit_order([r[0] for r in rows], [r[1] for r in rows])
