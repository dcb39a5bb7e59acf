"""Scenario files (JSON): loading, validation and execution.

{
  "name": "vacuum",
  "builder": {"id": "gen.vacuum-soliton", "params": {"h0": 2}},
  "constants": {"theta": 0.3},
  "polarizations": {"theta": 0.3, "eta4": "1 + 0.001*v"},
  "grid": {"n": 9, "h": 0.001, "fd_order": 4, "axes": {"x2": [1.55, 1.95, 9]}},
  "precision": "double",
  "suites": ["reduced", {"name": "lc", "components": ["c3", "c4"], "tolerance": 1e-10}],
  "tolerances": {"reduced": 1e-8},
  "lc": {"psi": "0", "eps2": 1, "eps3": 1, "lambda_sign": 1},
  "convergence": {"suite": "reduced", "h": [0.002, 0.001, 0.0005], "precision": "mp", "min_order": 3.5},
  "horizon": {"mu": 1, "eps": 0.001, "q0": 1, "omega0": 1, "phi0": 0, "n_phi": 360},
  "output": {"dir": "out", "formats": ["json", "csv"]}
}
Field-valued parameters are numbers, expression strings over x2, x3, v,
chi (and named constants), or ids of catalog fields.
"""
from dataclasses import dataclass, field as dc_field, replace
import hashlib
import json
import os

from . import fields as F
from .ansatz import GridSpec
from .catalog import CATALOG, lookup, suggest
from .errors import ScenarioError, UnknownIdentifierError, ExpressionError, ForgeError
from .expr import compile_expr

TOP_KEYS = ("name", "builder", "constants", "polarizations", "grid", "precision", "suites", "tolerances",
            "lc", "convergence", "horizon", "output")
SUITE_NAMES = ("reduced", "lc", "anholonomy", "evolution", "flow-constraints")


@dataclass
class Scenario:
    name: str
    builder_id: str = None
    params: dict = dc_field(default_factory=dict)
    target: object = None
    domain: dict = None
    polarizations: object = None
    grid: GridSpec = None
    precision: str = "double"
    suites: list = dc_field(default_factory=list)
    tolerances: dict = dc_field(default_factory=dict)
    lc: dict = dc_field(default_factory=dict)
    convergence: dict = None
    horizon: dict = None
    output: dict = dc_field(default_factory=lambda: {"dir": ".", "formats": ["json", "csv"]})
    sha256: str = ""
    path: str = None
    build_error: str = None


def _resolve_field(value, constants, where):
    if value is None or isinstance(value, F.ScalarField):
        return value
    if isinstance(value, bool):
        raise ScenarioError(f"{where}: boolean is not a field")
    if isinstance(value, (int, float)):
        return F.const(float(value))
    if isinstance(value, str):
        if value == "liouville":
            return value
        if value in CATALOG:
            e = CATALOG[value]
            if e.kind != "field":
                raise ScenarioError(f"{where}: {value} is a {e.kind}, not a field")
            return e.build({k: d for k, (_, d) in e.params.items()})[0]
        try:
            return compile_expr(value, constants, symbol=value)
        except ExpressionError as exc:
            exc.args = (f"{where}: {exc.args[0]}",)
            raise
    raise ScenarioError(f"{where}: expected a number or expression string")


def _resolve_params(entry, raw, constants, where):
    if not isinstance(raw, dict):
        raise ScenarioError(f"{where}: params must be an object")
    for k in raw:
        if k not in entry.params:
            raise UnknownIdentifierError(k, suggest(k, entry.params))
    out = {}
    for name, (kind, default) in entry.params.items():
        val = raw.get(name, default)
        loc = f"{where}.{name}"
        if kind == "num":
            if val is not None and (isinstance(val, bool) or not isinstance(val, (int, float))):
                raise ScenarioError(f"{loc}: expected a number")
            out[name] = None if val is None else float(val)
        elif kind == "int":
            if isinstance(val, bool) or not isinstance(val, (int, float)) or int(val) != val:
                raise ScenarioError(f"{loc}: expected an integer")
            out[name] = int(val)
        elif kind == "str":
            if not isinstance(val, str):
                raise ScenarioError(f"{loc}: expected a string")
            out[name] = val
        elif kind == "field":
            out[name] = _resolve_field(val, constants, loc)
        elif kind == "pair":
            if not isinstance(val, (list, tuple)) or len(val) != 2:
                raise ScenarioError(f"{loc}: expected a pair [i=2, i=3]")
            out[name] = tuple(_resolve_field(v, constants, f"{loc}[{i}]") for i, v in enumerate(val))
        elif kind == "builder":
            if not isinstance(val, dict) or "id" not in val:
                raise ScenarioError(f"{loc}: expected a builder object with an id")
            sub = lookup(val["id"])
            if sub.kind != "metric":
                raise ScenarioError(f"{loc}: base builder must produce a metric")
            subp = _resolve_params(sub, val.get("params", {}), constants, loc + ".params")
            out[name] = sub.build(subp)
    return out


def _grid(raw, domain, family):
    raw = dict(raw or {})
    for k in raw:
        if k not in ("n", "h", "fd_order", "axes", "chi_n"):
            raise UnknownIdentifierError(k, suggest(k, ("n", "h", "fd_order", "axes", "chi_n")))
    n = int(raw.get("n", 9))
    axes = {}
    for a in ("x2", "x3", "v"):
        if a in domain:
            lo, hi = domain[a]
            d = 0.05 * (hi - lo)
            axes[a] = (lo + d, hi - d, n)
    if family and "chi" in domain:
        axes["chi"] = (domain["chi"][0], domain["chi"][1], int(raw.get("chi_n", 5)))
    for a, spec in (raw.get("axes") or {}).items():
        if a not in F.AXES:
            raise ScenarioError(f"grid axis {a!r} is not one of {F.AXES}")
        if not isinstance(spec, (list, tuple)) or len(spec) != 3:
            raise ScenarioError(f"grid.axes.{a}: expected [lo, hi, count]")
        axes[a] = tuple(spec)
    h = raw.get("h", 1e-3)
    hd = {a: float(h) for a in F.AXES} if isinstance(h, (int, float)) else {a: float(v) for a, v in h.items()}
    try:
        return GridSpec(axes, hd, int(raw.get("fd_order", 4)))
    except ValueError as exc:
        raise ScenarioError(f"grid: {exc}") from None


def parse_scenario(text, path=None):
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"JSON parse error: {exc.msg} at line {exc.lineno}, column {exc.colno}") from None
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    for k in raw:
        if k not in TOP_KEYS:
            raise UnknownIdentifierError(k, suggest(k, TOP_KEYS))
    sc = Scenario(name=str(raw.get("name", "scenario")), path=path,
                  sha256=hashlib.sha256(text.encode("utf-8")).hexdigest())
    if not sc.name or any(c in sc.name for c in "/\\"):
        raise ScenarioError("name must be a plain file stem")
    constants = raw.get("constants", {})
    if not isinstance(constants, dict) or not all(isinstance(v, (int, float)) for v in constants.values()):
        raise ScenarioError("constants must map names to numbers")
    sc.precision = raw.get("precision", "double")
    if sc.precision not in ("double", "mp"):
        raise ScenarioError("precision must be 'double' or 'mp'")
    suites = raw.get("suites", ["reduced"])
    if not isinstance(suites, list):
        raise ScenarioError("suites must be a list")
    for s in suites:
        nm = s if isinstance(s, str) else (s.get("name") if isinstance(s, dict) else None)
        if nm not in SUITE_NAMES:
            raise UnknownIdentifierError(str(nm), suggest(str(nm), SUITE_NAMES))
    sc.suites = suites
    tol = raw.get("tolerances", {})
    for k in tol:
        if k not in SUITE_NAMES:
            raise UnknownIdentifierError(k, suggest(k, SUITE_NAMES))
    sc.tolerances = {k: float(v) for k, v in tol.items()}
    sc.lc = dict(raw.get("lc", {}))
    if "psi" in sc.lc:
        sc.lc["psi"] = _resolve_field(sc.lc["psi"], constants, "lc.psi")
    sc.convergence = raw.get("convergence")
    sc.horizon = raw.get("horizon")
    out = raw.get("output", {})
    sc.output = {"dir": out.get("dir", "."), "formats": list(out.get("formats", ["json", "csv"]))}
    b = raw.get("builder")
    if b is None:
        if sc.horizon is None:
            raise ScenarioError("scenario needs a builder (or a horizon block)")
        return sc
    if not isinstance(b, dict) or "id" not in b:
        raise ScenarioError("builder must be an object with an id")
    entry = lookup(b["id"])
    if entry.kind == "field":
        raise ScenarioError(f"{b['id']} is a field; scenarios need a metric or family builder")
    sc.builder_id = entry.id
    sc.params = _resolve_params(entry, b.get("params", {}), constants, "builder.params")
    try:
        sc.target, sc.domain = entry.build(sc.params)
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"builder {entry.id}: {exc}") from None
    except ForgeError as exc:
        sc.build_error = f"{type(exc).__name__}: {exc}"
        sc.domain = {}
    pol = raw.get("polarizations")
    if pol is not None:
        from .transforms import PolarizationSet
        pol = dict(pol)
        theta = float(pol.pop("theta", constants.get("theta", 0.0)))
        sc.polarizations = PolarizationSet.from_expressions(pol, theta, constants)
    sc.grid = _grid(raw.get("grid"), sc.domain or {}, entry.kind == "family")
    return sc


def load_scenario(path):
    if not os.path.exists(path):
        raise ScenarioError(f"scenario file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_scenario(text, path)


def apply_overrides(sc, grid_scale=None, fd_order=None, tolerances=None, out_dir=None):
    if grid_scale is not None:
        if not grid_scale > 0:
            raise ScenarioError("--grid-scale must be positive")
        sc.grid = sc.grid.scaled_h(grid_scale)
    if fd_order is not None:
        sc.grid = replace(sc.grid, fd_order=int(fd_order))
    if tolerances:
        for k in tolerances:
            if k not in SUITE_NAMES:
                raise UnknownIdentifierError(k, suggest(k, SUITE_NAMES))
        sc.tolerances.update(tolerances)
    if out_dir is not None:
        sc.output["dir"] = out_dir
    return sc


def run(sc):
    """Execute builder -> polarizations -> suites.  Returns the report."""
    from .dcalculus import DiffContext
    from .flows import FlowFamily
    from .report import run_suites, ResidualReport
    from . import __version__
    from .transforms import apply_polarizations
    prov = {"scenario": sc.name, "scenario_sha256": sc.sha256, "builder": sc.builder_id}
    if sc.build_error is not None:
        return ResidualReport(sc.name, {"artifact": "ricciforge", "version": __version__, **prov}, {},
                              build_error=sc.build_error)
    target = sc.target
    if sc.polarizations is not None:
        if isinstance(target, FlowFamily):
            target = replace(target, metric=apply_polarizations(target.metric, sc.polarizations))
        else:
            target = apply_polarizations(target, sc.polarizations)
    ctx = DiffContext.from_grid(sc.grid, precision=sc.precision)
    rep = run_suites(target, sc.grid, sc.suites, sc.tolerances, ctx, sc.name, sc.lc, prov, sc.convergence)
    metric = target.metric if isinstance(target, FlowFamily) else target
    verified = any(s.name == "reduced" and s.status == "pass" for s in rep.suites) and rep.passed
    rep.provenance["solution_status"] = "verified" if verified else "unverified"
    rep.provenance["tags"] = sorted(metric.tags)
    return rep
