"""Soliton generating functions.

sine-Gordon kink q = 4 atan(e^{+-p}) solves q** = sin q.  The KdV-type
travelling wave A sech^2(B s), s = v + a x2 + b x3, solves
eta.. + eps (eta' + 6 eta eta* + eta***)* = 0 when A = 2B^2 and
b = -4B^2 - a^2/eps (integrate the equation twice in s).
"""
from dataclasses import dataclass, field as dc_field

import numpy as np

from .. import fields as F
from ..dcalculus import DiffContext, derivative

SOLITON_KINDS = ("sine_gordon_1d", "kdv_like_3d", "user_field")


@dataclass(frozen=True)
class SolitonChoice:
    """kind, sign (+-1) and parameters.

    sine_gordon_1d: eta = q(v - c2*x2 - c3*x3) with params c2, c3 (default 0).
    kdv_like_3d: params B, a, eps (A and the x3-speed follow).
    user_field: params["field"] is a ScalarField.
    """
    kind: str = "sine_gordon_1d"
    sign: int = 1
    params: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SOLITON_KINDS:
            raise ValueError(f"unknown soliton kind {self.kind!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")


def sine_gordon_q(p, sign=1):
    """q = 4 atan(exp(sign*p))."""
    return 4.0 * np.arctan(np.exp(sign * np.asarray(p, dtype=float)))


def sine_gordon_dq(p, sign=1):
    """q* = 2 sign sech p."""
    return 2.0 * sign / np.cosh(np.asarray(p, dtype=float))


def sine_gordon_ddq(p, sign=1):
    """q** = -2 sign sech p tanh p."""
    p = np.asarray(p, dtype=float)
    return -2.0 * sign * np.tanh(p) / np.cosh(p)


def sine_gordon_field(sign=1, c2=0.0, c3=0.0):
    """eta(x2, x3, v) = q(v - c2 x2 - c3 x3); exact partials on all axes."""
    s = F.V - c2 * F.X2 - c3 * F.X3 if (c2 or c3) else F.V
    return (4.0 * F.atan(F.exp(sign * s))).with_exact().named("q (sine-Gordon)")


def kdv_travelling_wave(B=0.5, a=0.5, eps=1):
    """eta = 2B^2 sech^2(B(v + a x2 + b x3)), b = -4B^2 - a^2/eps."""
    b = -4.0 * B * B - a * a / eps
    s = B * (F.V + a * F.X2 + b * F.X3)
    return (2.0 * B * B * F.sech(s) ** 2).with_exact().named("eta (KdV travelling wave)")


def kdv_parameters(B=0.5, a=0.5, eps=1):
    return {"A": 2.0 * B * B, "B": B, "a": a, "b": -4.0 * B * B - a * a / eps, "eps": eps}


def soliton_field(choice):
    p = choice.params
    if choice.kind == "sine_gordon_1d":
        return sine_gordon_field(choice.sign, p.get("c2", 0.0), p.get("c3", 0.0))
    if choice.kind == "kdv_like_3d":
        return kdv_travelling_wave(p.get("B", 0.5), p.get("a", 0.5), p.get("eps", choice.sign))
    fld = p.get("field")
    if not isinstance(fld, F.ScalarField):
        raise ValueError("user_field soliton needs params['field']")
    return fld


def kdv_soliton_residual(eta, point, eps=1, ctx=None):
    """eta.. + eps*(eta' + 6 eta eta* + eta***)*, by finite differences
    (exact partials are ignored so user fields and builtins are treated
    alike unless ctx says otherwise)."""
    ctx = ctx or DiffContext(mode="fd", fd_order=2, h=1e-2)
    bk = ctx.backend
    d = lambda **o: derivative(eta, point, o, ctx)
    with bk.context():
        e = d()
        r = d(x2=2) + eps * (d(x3=1, v=1) + 6 * (d(v=1) * d(v=1) + e * d(v=2)) + d(v=4))
        return bk.to_float(r)
