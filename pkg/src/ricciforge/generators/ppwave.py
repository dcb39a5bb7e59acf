"""pp-wave profiles kappa(x, y, p) with x = x2, y = x3, p = v."""
from dataclasses import dataclass

import numpy as np

from .. import fields as F
from ..dcalculus import DiffContext, derivative

PP_KINDS = ("plane_monochromatic", "wave_packet", "separable_breve", "user_field")


class Window(F.Leaf):
    """1 for |var| < bound, else 0.  Derivative zero (the jump is not a
    differentiable point and is excluded from verification domains)."""

    label = "window"

    def __init__(self, var, bound):
        self.var, self.bound = var, float(bound)
        self.free = frozenset([var])

    def compute(self, env, bk):
        x = env[self.var]
        xf = F.DOUBLE.to_float(x) if np.asarray(x).dtype == object else np.asarray(x)
        w = (np.abs(xf) < self.bound).astype(float)
        return w if bk is F.DOUBLE else bk.asarray(w)

    def _d(self, axis):
        return F.ZERO


@dataclass(frozen=True)
class PpWaveChoice:
    kind: str = "plane_monochromatic"
    p0: float = 1.0
    breve_kappa: F.ScalarField = None
    k_of_p: F.ScalarField = None
    user: F.ScalarField = None

    def __post_init__(self):
        if self.kind not in PP_KINDS:
            raise ValueError(f"unknown pp-wave kind {self.kind!r}")
        if self.kind == "wave_packet" and not self.p0 > 0:
            raise ValueError("p0 must be positive")


def plane_wave():
    """kappa = (x^2 - y^2) sin p."""
    return ((F.X2 ** 2 - F.X3 ** 2) * F.sin(F.V)).with_exact().named("kappa (plane wave)")


def wave_packet(p0=1.0):
    """kappa = x y / ((x^2 + y^2)^2 exp(p0^2 - p^2)) for |p| < p0, else 0."""
    core = F.X2 * F.X3 / ((F.X2 ** 2 + F.X3 ** 2) ** 2 * F.exp(p0 * p0 - F.V ** 2))
    return (core * F.ScalarField(Window("v", p0))).with_exact().named("kappa (wave packet)")


def breve_plane():
    return (F.X2 ** 2 - F.X3 ** 2).with_exact().named("kappa-breve = x^2 - y^2")


def breve_radial():
    return (F.X2 * F.X3 / F.sqrt(F.X2 ** 2 + F.X3 ** 2)).with_exact().named("kappa-breve = xy/sqrt(x^2+y^2)")


def k_of_p_default(choice):
    if choice.k_of_p is not None:
        return choice.k_of_p
    return F.sin(F.V).with_exact().named("k = sin p")


def kappa_field(choice):
    if choice.kind == "plane_monochromatic":
        return plane_wave()
    if choice.kind == "wave_packet":
        return wave_packet(choice.p0)
    if choice.kind == "separable_breve":
        kb = choice.breve_kappa if choice.breve_kappa is not None else breve_plane()
        return (kb * k_of_p_default(choice)).with_exact().named("kappa = kappa-breve k(p)")
    if choice.user is None:
        raise ValueError("user_field pp-wave needs `user`")
    return choice.user


def laplacian_xy(kappa, point):
    ctx = DiffContext(mode="exact")
    return derivative(kappa, point, {"x2": 2}, ctx) + derivative(kappa, point, {"x3": 2}, ctx)


def check_harmonic(kappa, point=None, tol=1e-10):
    """Raise ValueError unless kappa_xx + kappa_yy vanishes on sample points."""
    if point is None:
        rng = np.random.default_rng(7)
        point = F.ChartPoint(x2=rng.uniform(0.5, 1.5, 64), x3=rng.uniform(0.5, 1.5, 64),
                             v=rng.uniform(-0.5, 0.5, 64))
    lap = laplacian_xy(kappa, point)
    if np.max(np.abs(lap)) > tol:
        raise ValueError(f"kappa is not harmonic in (x, y): max |Lap kappa| = {np.max(np.abs(lap)):.3g}")
    return float(np.max(np.abs(lap)))
