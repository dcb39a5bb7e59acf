"""Builtin catalog: stable ids for fields, primary metrics, generators and
flow families, each with a parameter schema and a default domain."""
from dataclasses import dataclass
import difflib

import numpy as np

from . import fields as F
from .errors import UnknownIdentifierError, ScenarioError

# parameter kinds: num, int, field, pair (two fields), choice:<a|b>, builder
_KINDS = ("num", "int", "field", "pair", "builder", "str")


@dataclass(frozen=True)
class Entry:
    id: str
    kind: str           # field | metric | family
    summary: str
    params: dict        # name -> (kind, default)
    build: object       # callable(params) -> (object, domain)


def _box(d, chi=None):
    out = {k: tuple(v) for k, v in d.items()}
    if chi is not None:
        out["chi"] = chi
    return out


# ---------------------------------------------------------------- builders

def _pp(kind):
    def build(p):
        from .ansatz import build_primary
        from .generators.ppwave import PpWaveChoice
        choice = PpWaveChoice(kind, p0=p.get("p0", 2.0))
        dom = {"x2": (1.5, 2.0), "x3": (0.1, 0.5), "v": (0.5, 1.5)}
        return build_primary("aux5", choice), dom
    return build


def _sg(p):
    from .generators.solitons import sine_gordon_field
    return sine_gordon_field(int(p["sign"]), p["c2"], p["c3"]), {"x2": (1.5, 2.0), "x3": (0.0, 0.5), "v": (-1.0, 1.0)}


def _kdv(p):
    from .generators.solitons import kdv_travelling_wave
    return kdv_travelling_wave(p["B"], p["a"], p["eps"]), {"x2": (0.0, 0.5), "x3": (0.0, 0.5), "v": (-1.0, 1.0)}


def _schw(kind):
    def build(p):
        from .ansatz import build_primary, SchwarzschildParams, SchwarzschildChart
        params = SchwarzschildParams(p["mu"], p["eps"], p["r_g"])
        rr = (p["r_lo"], p["r_hi"])
        m = build_primary(kind, params, rr)
        chart = m.extras["chart"]
        if kind in ("aux1", "aux4"):
            lo, hi = chart.xi(np.array(rr))
            d = 0.02 * (hi - lo)
            dom = {"x2": (lo + d, hi - d), "x3": (1.0, 1.4), "v": (0.3, 1.3)}
        else:
            lo, hi = chart.xi_check(np.array(rr))
            d = 0.02 * (hi - lo)
            dom = {"x2": (-0.4, 0.4), "x3": (lo + d, hi - d), "v": (0.3, 1.3)}
        return m, {k: (float(a), float(b)) for k, (a, b) in dom.items()}
    return build


def _psi(value, lam, s, m, x0):
    from .generators.poisson import liouville_psi
    if isinstance(value, str) and value == "liouville":
        return liouville_psi(lam, s, m, "x2", 1.0, x0)
    return F.field(value)


def _string(p):
    from .generators.string import solitonic_string_metric, STRING_DOMAIN
    from .generators.solitons import SolitonChoice
    from .generators.ppwave import PpWaveChoice
    lam_H = p["lambda_H"]
    sol = SolitonChoice("sine_gordon_1d", 1, {"c2": 0.3, "c3": 0.2}) if p["eta"] is None else \
        SolitonChoice("user_field", 1, {"field": p["eta"]})
    wave = PpWaveChoice("wave_packet" if p["wave"] == "packet" else "plane_monochromatic", p0=2.0)
    psi = _psi(p["psi"], -0.5 * lam_H ** 2, -1, 1, 0.5)
    m = solitonic_string_metric(sol, wave, lam_H, psi, p["h5_0"], p["n0"], p["n1"], p["p_lo"])
    return m, dict(STRING_DOMAIN)


def _vacuum(p):
    from .generators.vacuum import vacuum_solitonic_metric, VACUUM_DOMAIN
    from .generators.ppwave import PpWaveChoice
    wave = PpWaveChoice("separable_breve", k_of_p=p["k"]) if p["k"] is not None else None
    n2, n3 = p["n0"]
    m = vacuum_solitonic_metric(p["breve_b"], wave, p["h0"], n2, n3, p["q"])
    return m, dict(VACUUM_DOMAIN)


def _stationary(p):
    from .ansatz import SchwarzschildParams
    from .generators.schwarzschild import stationary_deformation, xi_domain
    params = SchwarzschildParams(p["mu"], p["eps"])
    rr = (p["r_lo"], p["r_hi"])
    dom = xi_domain(params, rr, phi=(0.2, 1.0))
    n2, n3 = p["n"]
    m = stationary_deformation(params, p["eta5"], p["h0"], n2, n3, p["psi"], rr, domain=dom)
    return m, dom


def _extradim(time_role):
    def build(p):
        from .generators.extradim import (ExtraDimSpec, extradim_metric, time_anisotropic_metric,
                                          EXTRADIM_DOMAIN, sech2_profile)
        spec = ExtraDimSpec(f=p["f"] if p["f"] is not None else sech2_profile(), f0=p["f0"], h0sq=p["h0sq"],
                            varsigma0=p["varsigma0"], n_k1=p["n_k1"], n_k2=p["n_k2"],
                            lambda_H=p["lambda_H"], eps4=int(p["eps4"]), v_lo=p["v_lo"])
        psi = _psi(p["psi"], spec.lam, 1, 2, 0.0)
        fn = time_anisotropic_metric if time_role else extradim_metric
        return fn(spec, psi, domain=EXTRADIM_DOMAIN), dict(EXTRADIM_DOMAIN)
    return build


def _flow_exp(p):
    from .flows import exponential_flow_family
    from .generators.vacuum import VACUUM_DOMAIN
    chi0 = p["chi0"]
    fam = exponential_flow_family(p["b0sq"], p["n0"], p["lambda"], (0.0, chi0), p["breve_b"], None, p["h0"])
    return fam, _box(VACUUM_DOMAIN, (0.1 * chi0, 0.9 * chi0))


def _flow_static(p):
    from .flows import static_family
    from .flows import FlowFamily
    base = p["base"]
    obj, dom = base
    if isinstance(obj, FlowFamily):
        raise ScenarioError("flow.static needs a metric builder as base")
    chi0 = p["chi0"]
    fam = static_family(obj, p["lambda"], (0.0, chi0))
    return fam, _box(dom, (0.1 * chi0, 0.9 * chi0))


_PAIR0 = ("pair", (0.0, 0.0))
_SCHW = {"mu": ("num", 1.0), "eps": ("num", 0.0), "r_g": ("num", 2.0), "r_lo": ("num", 2.5), "r_hi": ("num", 6.0)}
_EXTRA = {"f": ("field", None), "f0": ("field", 0.0), "h0sq": ("field", "1 + 0.1*x2^2"), "varsigma0": ("field", 1.0),
          "n_k1": ("pair", ("0.1*x3", "0.1*x2")), "n_k2": ("pair", (0.05, 0.02)), "lambda_H": ("num", 1.0),
          "eps4": ("int", 1), "v_lo": ("num", 0.4), "psi": ("field", "liouville")}

ENTRIES = [
    Entry("pp.plane", "metric", "pp-wave primary with kappa = (x^2 - y^2) sin p", {}, _pp("plane_monochromatic")),
    Entry("pp.packet", "metric", "pp-wave primary with the windowed wave packet kappa",
          {"p0": ("num", 2.0)}, _pp("wave_packet")),
    Entry("soliton.sg1d", "field", "sine-Gordon kink 4 atan(exp(v - c2 x2 - c3 x3))",
          {"sign": ("int", 1), "c2": ("num", 0.0), "c3": ("num", 0.0)}, _sg),
    Entry("soliton.kdv-travel", "field", "KdV-type travelling wave 2B^2 sech^2(B(v + a x2 + b x3))",
          {"B": ("num", 0.5), "a": ("num", 0.5), "eps": ("num", 1.0)}, _kdv),
    Entry("schw.aux1", "metric", "Schwarzschild primary, trivial 5D embedding", dict(_SCHW), _schw("aux1")),
    Entry("schw.aux2", "metric", "conformally transformed Schwarzschild primary", dict(_SCHW), _schw("aux2")),
    Entry("schw.aux3", "metric", "conformal primary with time as anisotropic coordinate", dict(_SCHW), _schw("aux3")),
    Entry("schw.aux4", "metric", "aux1 with the y4/y5 slots exchanged", dict(_SCHW), _schw("aux4")),
    Entry("gen.string-soliton", "metric", "solitonic pp-wave metric with H-field source",
          {"lambda_H": ("num", 1.0), "eta": ("field", None), "wave": ("str", "plane"), "psi": ("field", "liouville"),
           "h5_0": ("field", 0.0), "n0": _PAIR0, "n1": ("pair", (0.1, 0.05)), "p_lo": ("num", 0.5)}, _string),
    Entry("gen.vacuum-soliton", "metric", "vacuum solitonic pp-wave metric",
          {"breve_b": ("field", "x2^2 - x3^2"), "h0": ("num", 2.0), "n0": _PAIR0, "q": ("field", None),
           "k": ("field", None)}, _vacuum),
    Entry("gen.stationary", "metric", "stationary deformation of the Schwarzschild primary",
          {"mu": ("num", 1.0), "eps": ("num", 0.0), "eta5": ("field", "(1 + 0.2*sin(x3))*(2 + sin(v))"),
           "h0": ("num", 2.0), "n": _PAIR0, "psi": ("field", 0.0), "r_lo": ("num", 2.5), "r_hi": ("num", 6.0)},
          _stationary),
    Entry("gen.extradim", "metric", "off-diagonal extra-dimension deformation", dict(_EXTRA), _extradim(False)),
    Entry("gen.time-anisotropic", "metric", "time-anisotropic deformation (y4 = t)", dict(_EXTRA), _extradim(True)),
    Entry("flow.exponential", "family", "vacuum solitonic family under normalized flow",
          {"b0sq": ("num", 1.0), "n0": ("num", 1.0), "lambda": ("num", 0.5), "chi0": ("num", 0.5),
           "h0": ("num", 2.0), "breve_b": ("field", None)}, _flow_exp),
    Entry("flow.static", "family", "chi-independent lift of any metric builder",
          {"base": ("builder", None), "lambda": ("num", None), "chi0": ("num", 1.0)}, _flow_static),
]
CATALOG = {e.id: e for e in ENTRIES}


def suggest(name, choices):
    return difflib.get_close_matches(name, list(choices), n=3, cutoff=0.5)


def lookup(entry_id):
    if entry_id not in CATALOG:
        raise UnknownIdentifierError(entry_id, suggest(entry_id, CATALOG))
    return CATALOG[entry_id]


def builtin_field(entry_id, **params):
    e = lookup(entry_id)
    if e.kind != "field":
        raise ScenarioError(f"{entry_id} is a {e.kind}, not a field")
    p = {k: d for k, (_, d) in e.params.items()}
    p.update(params)
    return e.build(p)[0]


def listing():
    return [(e.id, e.kind, e.summary) for e in sorted(ENTRIES, key=lambda e: e.id)]
