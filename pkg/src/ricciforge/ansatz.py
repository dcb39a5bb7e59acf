"""Data model of the off-diagonal ansatz and the five primary metrics.

Line element (signs folded into the coefficients):

    g1 dx1^2 + g2 dx2^2 + g3 dx3^2 + h4 (dv + w_i dx^i)^2 + h5 (dy5 + n_i dx^i)^2
"""
from dataclasses import dataclass, field as dc_field, replace
import itertools
import math

import numpy as np

from . import fields as F
from .errors import HorizonDomainError, DomainError, DegenerateMetricError
from .quadrature import MonotoneMap, InverseMapLeaf, adaptive_simpson

SLOTS = ("x1", "x2", "x3", "y4", "y5")
ROLE_KINDS = ("extra", "radial-like", "angular", "time", "wave-phase", "transverse", "flow-only")


@dataclass(frozen=True)
class CoordinateRoles:
    """Role and label of each of the five coordinate slots.

    The anisotropic coordinate v is always slot y4.
    """
    roles: tuple = ("extra", "transverse", "transverse", "wave-phase", "wave-phase")
    labels: tuple = ("x1", "x2", "x3", "v", "y5")

    def __post_init__(self):
        if len(self.roles) != 5 or len(self.labels) != 5:
            raise ValueError("five slots required")
        bad = [r for r in self.roles if r not in ROLE_KINDS]
        if bad:
            raise ValueError(f"unknown role(s) {bad}")

    @property
    def anisotropic(self):
        return "y4"

    def swapped45(self):
        r, l = list(self.roles), list(self.labels)
        r[3], r[4] = r[4], r[3]
        l[3], l[4] = l[4], l[3]
        return CoordinateRoles(tuple(r), tuple(l))

    def as_dict(self):
        return {s: {"role": r, "label": l} for s, r, l in zip(SLOTS, self.roles, self.labels)}


_ZERO = F.const(0.0)


@dataclass(frozen=True)
class NConnection:
    w2: F.ScalarField = _ZERO
    w3: F.ScalarField = _ZERO
    n2: F.ScalarField = _ZERO
    n3: F.ScalarField = _ZERO

    def __post_init__(self):
        for k in ("w2", "w3", "n2", "n3"):
            object.__setattr__(self, k, F.field(getattr(self, k)))

    def get(self, i, a):
        """N_i^a for i in {1,2,3}, a in {4,5}; i = 1 is identically zero."""
        if i == 1:
            return _ZERO
        return getattr(self, ("w" if a == 4 else "n") + str(i))


@dataclass(frozen=True)
class AnsatzMetric:
    g2: F.ScalarField
    g3: F.ScalarField
    h4: F.ScalarField
    h5: F.ScalarField
    nconn: NConnection = NConnection()
    g1: float = 1.0
    roles: CoordinateRoles = CoordinateRoles()
    lam: float = 0.0
    extras: dict = dc_field(default_factory=dict)
    tags: frozenset = frozenset()
    provenance: tuple = ()

    def __post_init__(self):
        for k in ("g2", "g3", "h4", "h5"):
            object.__setattr__(self, k, F.field(getattr(self, k)))
        if not isinstance(self.nconn, NConnection):
            raise TypeError("nconn must be an NConnection")
        for k in ("g2", "g3"):
            if "v" in getattr(self, k).free:
                raise ValueError(f"{k} depends on v; h-coefficients must be v-independent")

    @property
    def g1sign(self):
        return 1 if self.g1 > 0 else -1

    @property
    def w2(self):
        return self.nconn.w2

    @property
    def w3(self):
        return self.nconn.w3

    @property
    def n2(self):
        return self.nconn.n2

    @property
    def n3(self):
        return self.nconn.n3

    def coefficient(self, name):
        if name in ("g2", "g3", "h4", "h5"):
            return getattr(self, name)
        return getattr(self.nconn, name)

    def evolve(self, **changes):
        return replace(self, **changes)

    def with_tag(self, *tags, drop=()):
        return replace(self, tags=(self.tags - frozenset(drop)) | frozenset(tags))

    def check_nondegenerate(self, point):
        """h4, h5 nowhere zero at the given points."""
        for k in ("h4", "h5"):
            val = getattr(self, k)(point)
            if np.any(val == 0) or not np.all(np.isfinite(val)):
                raise DegenerateMetricError(f"{k} vanishes or is non-finite on the verification domain")

    def subs(self, name, value):
        """Freeze one coordinate (used for chi snapshots)."""
        s = lambda f: f.subs(name, value)
        nc = NConnection(*(s(getattr(self.nconn, k)) for k in ("w2", "w3", "n2", "n3")))
        ex = {k: (s(v) if isinstance(v, F.ScalarField) else v) for k, v in self.extras.items()}
        return replace(self, g2=s(self.g2), g3=s(self.g3), h4=s(self.h4), h5=s(self.h5),
                       nconn=nc, extras=ex)

    def swapped45(self):
        """Exchange the y4 and y5 coefficient slots (pure relabeling, N must vanish)."""
        return replace(self, h4=self.h5, h5=self.h4,
                       nconn=NConnection(self.n2, self.n3, self.w2, self.w3),
                       roles=self.roles.swapped45())


@dataclass(frozen=True)
class GridSpec:
    """Sample box for verification sweeps.

    axes: {axis: (lo, hi, count)} for x2, x3, v, chi.  count 1 means the
    axis is inactive and sampled at lo.  h: FD step per axis.
    """
    axes: dict
    h: dict = dc_field(default_factory=lambda: {a: 1e-3 for a in F.AXES})
    fd_order: int = 4

    def __post_init__(self):
        ax = {a: (0.0, 0.0, 1) for a in F.AXES}
        for a, spec in self.axes.items():
            if a not in F.AXES:
                raise ValueError(f"unknown grid axis {a!r}")
            lo, hi, n = spec
            n = int(n)
            if n > 1 and n < 5:
                raise ValueError(f"axis {a}: at least 5 samples needed on an active axis")
            if n < 1 or (n > 1 and not hi > lo):
                raise ValueError(f"axis {a}: bad range")
            ax[a] = (float(lo), float(hi), n)
        object.__setattr__(self, "axes", ax)
        hh = {a: 1e-3 for a in F.AXES}
        hh.update({k: float(v) for k, v in dict(self.h).items()})
        if any(v <= 0 for v in hh.values()):
            raise ValueError("FD step must be positive")
        object.__setattr__(self, "h", hh)
        if self.fd_order not in (2, 4):
            raise ValueError("fd_order must be 2 or 4")
        if ax["chi"][0] < 0:
            raise ValueError("chi range must be >= 0")

    def samples(self, axis):
        lo, hi, n = self.axes[axis]
        return np.linspace(lo, hi, n) if n > 1 else np.array([lo])

    def points(self):
        """All grid points, C-order over (x2, x3, v, chi)."""
        mesh = np.meshgrid(*(self.samples(a) for a in F.AXES), indexing="ij")
        return F.ChartPoint(**{a: m.ravel() for a, m in zip(F.AXES, mesh)})

    def scaled_h(self, factor):
        return replace(self, h={a: v * factor for a, v in self.h.items()})

    def with_step(self, h):
        return replace(self, h={a: float(h) for a in F.AXES})

    @property
    def shape(self):
        return tuple(self.axes[a][2] for a in F.AXES)


def unit_box(n=9, center=(1.5, 0.5, 0.5), half=0.25):
    """Default verification box away from singular loci."""
    return GridSpec({a: (c - half, c + half, n) for a, c in zip(("x2", "x3", "v"), center)})


# ---------------------------------------------------------------- Schwarzschild chart

@dataclass(frozen=True)
class SchwarzschildParams:
    mu: float = 1.0
    eps: float = 0.0
    r_g: float = 2.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be > 0")
        if self.eps < 0:
            raise ValueError("eps must be >= 0")


def varpi2(mu, eps, r):
    r = np.asarray(r, dtype=float)
    return 1.0 - 2.0 * mu / r + eps / r ** 2


def horizon_roots(mu, eps):
    """Real roots of r^2 varpi^2 = r^2 - 2 mu r + eps."""
    disc = mu * mu - eps
    if disc < 0:
        return ()
    s = math.sqrt(disc)
    return tuple(sorted({mu - s, mu + s}))


def schwarzschild_chart(mu, eps, r, r0=None, tol=1e-10):
    """(varpi^2, xi) at radius r; xi = integral of |varpi^2|^{1/2} from r0 (default 3 mu)."""
    if not r > 0:
        raise ValueError("r must be > 0")
    r0 = 3.0 * mu if r0 is None else r0
    g = lambda s: np.sqrt(np.abs(varpi2(mu, eps, s)))
    sign = 1.0 if r >= r0 else -1.0
    lo, hi = (r0, r) if r >= r0 else (r, r0)
    xi = sign * adaptive_simpson(g, lo, hi, tol)
    return float(varpi2(mu, eps, r)), xi


class SchwarzschildChart:
    """Radial maps of the Schwarzschild-type primaries.

    xi(r) = int |varpi^2|^{1/2} dr, xi_check(r) = int dr/(r |varpi^2|^{1/2}),
    both from r0.  The inverse maps give r as a field of the chart
    coordinate with exact derivatives.
    """

    def __init__(self, params, r_range=(2.5, 6.0), r0=None):
        mu, eps = params.mu, params.eps
        self.params = params
        lo, hi = map(float, r_range)
        for root in horizon_roots(mu, eps):
            if lo - 1e-12 <= root <= hi + 1e-12:
                raise HorizonDomainError(f"r-range [{lo}, {hi}] contains a root of varpi^2 at r = {root:.12g}")
        if lo <= 0:
            raise DomainError("r-range must be positive")
        self.r_range = (lo, hi)
        self.r0 = 3.0 * mu if r0 is None else float(r0)
        r0c = min(max(self.r0, lo), hi)
        g_xi = lambda r: np.sqrt(np.abs(varpi2(mu, eps, r)))
        g_chk = lambda r: 1.0 / (r * np.sqrt(np.abs(varpi2(mu, eps, r))))
        self.xi_map = MonotoneMap(g_xi, r0c, lo, hi)
        self.xichk_map = MonotoneMap(g_chk, r0c, lo, hi)
        if r0c != self.r0:
            # re-base so that xi(r0) = 0 even when r0 lies outside the table
            off = schwarzschild_chart(mu, eps, r0c, self.r0)[1]
            self.xi_map.X_nodes = self.xi_map.X_nodes + off
            lo_, hi_ = sorted((self.r0, r0c))
            off_chk = adaptive_simpson(g_chk, lo_, hi_) * (1.0 if r0c > self.r0 else -1.0)
            self.xichk_map.X_nodes = self.xichk_map.X_nodes + off_chk
        self._mu, self._eps = mu, eps

    def varpi2_node(self, r):
        return F.add(1.0, F.mul(-2.0 * self._mu, F.power(r, -1.0)), F.mul(self._eps, F.power(r, -2.0)))

    def _sqrt_abs_varpi2(self, r):
        return F.func("sqrt", F.func("abs", self.varpi2_node(r)))

    def r_of_xi(self, var="x2"):
        leaf = InverseMapLeaf(self.xi_map, var, self._sqrt_abs_varpi2)
        leaf.label = "r(xi)"
        return F.ScalarField(leaf, symbol="r(xi)")

    def r_of_xicheck(self, var="x3"):
        leaf = InverseMapLeaf(self.xichk_map, var, lambda r: F.power(F.mul(r, self._sqrt_abs_varpi2(r)), -1.0))
        leaf.label = "r(xi_check)"
        return F.ScalarField(leaf, symbol="r(xi_check)")

    def xi(self, r):
        return self.xi_map.forward(r)

    def xi_check(self, r):
        return self.xichk_map.forward(r)

    def varpi2(self, r):
        return varpi2(self._mu, self._eps, r)


def theta_of_thetacheck(var="x2"):
    """theta = 2 atan(e^{theta_check}), from d theta_check = d theta / sin theta."""
    return F.ScalarField(F.mul(2.0, F.func("atan", F.func("exp", F.Var(var)))), symbol="theta")


def thetacheck_of_theta(theta):
    return np.log(np.tan(np.asarray(theta) / 2.0))


# ---------------------------------------------------------------- primary metrics

def build_primary(kind, params, r_range=(2.5, 6.0), eps1=1.0, r0=None):
    """Diagonal primary metrics aux1..aux5 with trivial N-connection.

    aux1/aux4: x2 = xi, x3 = theta, (v, y5) = (phi, t) resp. (t, phi).
    aux2/aux3: x2 = theta_check, x3 = xi_check, (v, y5) = (chi-extra, t) resp. (t, extra).
    aux5: x2 = x, x3 = y, v = p, y5 = v_light; params is a PpWaveChoice.
    """
    if kind == "aux5":
        from .generators.ppwave import PpWaveChoice, kappa_field, check_harmonic
        if not isinstance(params, PpWaveChoice):
            raise TypeError("aux5 needs a PpWaveChoice")
        kappa = kappa_field(params)
        if params.kind in ("plane_monochromatic", "wave_packet"):
            check_harmonic(kappa)
        roles = CoordinateRoles(("extra", "transverse", "transverse", "wave-phase", "wave-phase"),
                                ("kappa_x", "x", "y", "p", "v"))
        return AnsatzMetric(g2=F.const(-1.0), g3=F.const(-1.0), h4=-2.0 * kappa, h5=1.0 / (8.0 * kappa),
                            g1=eps1, roles=roles, extras={"kappa": kappa},
                            provenance=(("build_primary", "aux5", params.kind),))
    if not isinstance(params, SchwarzschildParams):
        raise TypeError(f"{kind} needs SchwarzschildParams")
    chart = SchwarzschildChart(params, r_range, r0)
    if kind in ("aux1", "aux4"):
        r = chart.r_of_xi("x2")
        th = F.X3
        vp2 = F.ScalarField(chart.varpi2_node(r.node))
        ha = -(r * r) * F.sin(th) ** 2
        g3 = -(r * r)
        if kind == "aux1":
            h4, h5 = ha, vp2
            roles = CoordinateRoles(("extra", "radial-like", "angular", "angular", "time"),
                                    ("varkappa", "xi", "theta", "phi", "t"))
        else:
            h4, h5 = vp2, ha
            roles = CoordinateRoles(("extra", "radial-like", "angular", "time", "angular"),
                                    ("varkappa", "xi", "theta", "t", "phi"))
        return AnsatzMetric(g2=F.const(-1.0), g3=g3, h4=h4, h5=h5, g1=eps1, roles=roles,
                            extras={"r": r, "varpi2": vp2, "chart": chart},
                            provenance=(("build_primary", kind),))
    if kind in ("aux2", "aux3"):
        rg2 = params.r_g ** 2
        r = chart.r_of_xicheck("x3")
        th = theta_of_thetacheck("x2")
        vp2 = F.ScalarField(chart.varpi2_node(r.node))
        g3 = -1.0 / F.sin(th) ** 2
        hv = vp2 / ((r * r) * F.sin(th) ** 2)
        if kind == "aux2":
            h4, h5 = F.const(eps1), hv
            roles = CoordinateRoles(("angular", "angular", "radial-like", "extra", "time"),
                                    ("phi", "theta_check", "xi_check", "varkappa", "t"))
        else:
            h4, h5 = hv, F.const(eps1)
            roles = CoordinateRoles(("angular", "angular", "radial-like", "time", "extra"),
                                    ("phi", "theta_check", "xi_check", "t", "varkappa"))
        return AnsatzMetric(g2=F.const(-rg2), g3=g3, h4=h4, h5=h5, g1=-rg2, roles=roles,
                            extras={"r": r, "theta": th, "varpi2": vp2, "chart": chart},
                            provenance=(("build_primary", kind),))
    raise ValueError(f"unknown primary kind {kind!r}")


def sample_points(n, box, seed=0):
    """n pseudo-random points in a box {axis: (lo, hi)} (deterministic)."""
    rng = np.random.default_rng(seed)
    return F.ChartPoint(**{a: rng.uniform(lo, hi, n) for a, (lo, hi) in box.items()})


def cube_points(box, n=3):
    axes = list(box)
    mesh = np.meshgrid(*(np.linspace(*box[a], n) for a in axes), indexing="ij")
    return F.ChartPoint(**{a: m.ravel() for a, m in zip(axes, mesh)})
