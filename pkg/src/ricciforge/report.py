"""Residual reports: suite execution over a grid, norms, pass/fail, and
deterministic JSON / CSV output.

CSV schema (one file per suite, one row per grid point):
    point_index, x2, x3, v, chi, <component columns...>, norm
norm is the max-abs over the finite components of that row.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
import hashlib
import math
import os

import numpy as np

from . import __version__
from . import fields as F
from .ansatz import AnsatzMetric
from .dcalculus import (DiffContext, reduced_residuals, lc_residuals, anholonomy, evolution_residuals,
                        ReducedResiduals, LCResiduals, EvolutionResiduals, fit_order)
from .errors import ForgeError

SUITES = ("reduced", "lc", "anholonomy", "evolution", "flow-constraints")
DEFAULT_TOLERANCE = {"evolution": 1e-8, "flow-constraints": 1e-8, "anholonomy": None}


# ---------------------------------------------------------------- formatting

def fmt_float(x):
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def to_json(obj, indent=0):
    """Deterministic JSON: insertion-ordered keys, floats at 17 significant digits,
    NaN/inf as null."""
    pad, pad1 = "  " * indent, "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, str):
        import json
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad1}{to_json(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(to_json(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad1 + to_json(v, indent + 1) for v in seq) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ---------------------------------------------------------------- report types

@dataclass
class SuiteResult:
    name: str
    components: list
    tolerance: object
    values: dict = dc_field(default_factory=dict)
    error: str = None
    error_point: dict = None
    extra: dict = dc_field(default_factory=dict)

    def norms(self):
        out = {}
        for k in self.components:
            a = np.asarray(self.values.get(k, []), dtype=float).ravel()
            a = a[np.isfinite(a)]
            if a.size == 0:
                out[k] = {"max": None, "mean": None, "rms": None}
            else:
                aa = np.abs(a)
                out[k] = {"max": float(aa.max()), "mean": float(aa.mean()), "rms": float(np.sqrt(np.mean(a * a)))}
        return out

    @property
    def max_norm(self):
        vals = [n["max"] for n in self.norms().values() if n["max"] is not None]
        return max(vals) if vals else 0.0

    @property
    def status(self):
        if self.error is not None:
            return "error"
        if self.tolerance is None:
            return "info"
        return "pass" if self.max_norm <= self.tolerance else "fail"

    def row_norm(self):
        cols = [np.asarray(self.values[k], dtype=float) for k in self.components]
        if not cols:
            return np.zeros(0)
        with np.errstate(all="ignore"):
            st = np.abs(np.stack(cols))
            st = np.where(np.isfinite(st), st, -np.inf)
            n = st.max(axis=0)
        return np.where(np.isfinite(n), n, np.nan)


@dataclass
class ResidualReport:
    name: str
    provenance: dict
    grid: dict
    points: F.ChartPoint = None
    suites: list = dc_field(default_factory=list)
    convergence: dict = None
    notes: list = dc_field(default_factory=list)
    build_error: str = None

    @property
    def passed(self):
        return self.build_error is None and all(s.status in ("pass", "info") for s in self.suites) and self._conv_ok()

    def _conv_ok(self):
        c = self.convergence
        return c is None or c.get("status") in ("pass", "info")

    @property
    def exit_code(self):
        if self.build_error is not None or any(s.status == "error" for s in self.suites) or (self.convergence or {}).get("status") == "error":
            return 2
        return 0 if self.passed else 1

    def as_dict(self, include_samples=True):
        d = {"name": self.name, "provenance": self.provenance, "grid": self.grid, "suites": []}
        for s in self.suites:
            sd = {"name": s.name, "status": s.status, "tolerance": s.tolerance, "components": list(s.components),
                  "max_norm": s.max_norm if s.error is None else None, "norms": s.norms()}
            if s.error is not None:
                sd["error"] = s.error
                sd["error_point"] = s.error_point
            if s.extra:
                sd["extra"] = s.extra
            if include_samples and s.error is None and s.values:
                sd["samples"] = self._rows(s)
            d["suites"].append(sd)
        if self.convergence is not None:
            d["convergence"] = self.convergence
        if self.build_error is not None:
            d["build_error"] = self.build_error
        d["notes"] = list(self.notes)
        d["passed"] = self.passed
        d["exit_code"] = self.exit_code
        return d

    def _rows(self, s):
        p = self.points
        coords = [np.asarray(getattr(p, a), dtype=float).ravel() for a in F.AXES]
        vals = [np.asarray(s.values[k], dtype=float).ravel() for k in s.components]
        norm = s.row_norm().ravel()
        return [[i] + [c[i] for c in coords] + [v[i] for v in vals] + [norm[i]] for i in range(coords[0].size)]

    def to_json(self):
        return to_json(self.as_dict()) + "\n"

    def csv_text(self, suite):
        s = next(x for x in self.suites if x.name == suite)
        head = ["point_index", "x2", "x3", "v", "chi"] + list(s.components) + ["norm"]
        lines = [",".join(head)]
        if s.error is None and s.values:
            for row in self._rows(s):
                lines.append(",".join([str(row[0])] + [("nan" if not math.isfinite(x) else format(x, ".17g"))
                                                       for x in row[1:]]))
        return "\n".join(lines) + "\n"

    def write(self, out_dir, formats=("json", "csv")):
        os.makedirs(out_dir, exist_ok=True)
        written = []
        if "json" in formats:
            path = os.path.join(out_dir, f"{self.name}.json")
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(self.to_json())
            written.append(path)
        if "csv" in formats:
            for s in self.suites:
                path = os.path.join(out_dir, f"{self.name}.{s.name}.csv")
                with open(path, "w", encoding="utf-8", newline="\n") as fh:
                    fh.write(self.csv_text(s.name))
                written.append(path)
        return written


# ---------------------------------------------------------------- suite execution

def _family_of(target):
    from .flows import FlowFamily, static_family
    if isinstance(target, FlowFamily):
        return target
    return static_family(target)


def _metric_of(target):
    return target if isinstance(target, AnsatzMetric) else target.metric


def _evaluate(name, target, pts, ctx, lc_opts):
    from .flows import flow_constraint_residuals
    m = _metric_of(target)
    if name == "reduced":
        r = reduced_residuals(m, pts, ctx)
        return r.as_dict(), {}
    if name == "lc":
        o = dict(lc_opts or {})
        psi = o.get("psi", m.extras.get("psi", 0.0))
        r = lc_residuals(m, pts, psi, o.get("eps2", 1), o.get("eps3", 1), ctx, o.get("lambda_sign", 1))
        d = r.as_dict()
        d["c1_alt"] = r.c1_alt
        return d, {}
    if name == "anholonomy":
        a = anholonomy(m, pts, ctx)
        d = {f"W_{i}{a_}{b}": v for (i, a_, b), v in a.w_ia_b.items() if i != 1 and a_ == 4}
        d.update({f"Omega_{i}{j}^{a_}": v for (i, j, a_), v in a.omega_ij_a.items() if (i, j) in ((2, 3), (3, 2))})
        return d, {}
    if name == "evolution":
        e = evolution_residuals(_family_of(target), pts, ctx)
        return e.as_dict(), {"notes": list(e.notes)}
    if name == "flow-constraints":
        c = flow_constraint_residuals(_family_of(target), pts, ctx)
        return c.as_dict(), {}
    raise ValueError(f"unknown suite {name!r}")


DEFAULT_COMPONENTS = {
    "reduced": list(ReducedResiduals.COMPONENTS),
    "lc": list(LCResiduals.COMPONENTS),
    "evolution": ["e_h2", "e_h3", "e_v4", "e_v5", "eq1b_2", "eq1b_3", "r_w2", "r_w3", "r_n2", "r_n3"],
    "flow-constraints": ["c_eq1b_2", "c_eq1b_3", "c_5aux5e_2", "c_5aux5e_3", "c_5const5a_1", "c_5const5a_2"],
    "anholonomy": None,
}


def _chunks(n, k):
    k = max(1, min(k, n))
    bounds = np.linspace(0, n, k + 1).astype(int)
    return [(bounds[i], bounds[i + 1]) for i in range(k) if bounds[i + 1] > bounds[i]]


def _threads():
    try:
        return max(1, int(os.environ.get("FORGE_THREADS", "1")))
    except ValueError:
        return 1


def _error_point(exc, pts):
    return {"message": str(exc), "first_point": {a: float(np.asarray(getattr(pts, a)).ravel()[0]) for a in F.AXES}}


def run_suite(spec, target, grid, ctx, lc_opts=None):
    """Evaluate one suite over the grid points (chunked, index-ordered)."""
    name = spec["name"]
    pts = grid.points()
    tol = spec.get("tolerance")
    comps = spec.get("components")
    res = SuiteResult(name, comps or [], tol)
    n = pts.shape[0] if pts.shape else 1
    parts = _chunks(n, _threads())

    def work(bounds):
        lo, hi = bounds
        sub = pts.take(slice(lo, hi))
        return _evaluate(name, target, sub, ctx, lc_opts)

    try:
        if len(parts) == 1:
            results = [work(parts[0])]
        else:
            with ThreadPoolExecutor(max_workers=len(parts)) as ex:
                results = list(ex.map(work, parts))
    except ForgeError as exc:
        res.error = f"{type(exc).__name__}: {exc}"
        res.error_point = _error_point(exc, pts)
        return res
    vals = {k: np.concatenate([np.atleast_1d(np.asarray(r[0][k], dtype=float)) for r in results])
            for k in results[0][0]}
    if not comps:
        comps = list(vals)
        res.components = comps
    missing = [k for k in comps if k not in vals]
    if missing:
        raise ValueError(f"suite {name}: unknown components {missing}")
    res.values = {k: vals[k] for k in comps}
    res.extra = results[0][1]
    if name == "anholonomy":
        res.extra = {"holonomic": bool(res.max_norm <= 1e-10)}
    return res


def default_tolerance(name, ctx):
    if name in ("reduced", "lc"):
        return ctx.envelope("v")
    return DEFAULT_TOLERANCE.get(name)


def normalize_suites(suites, ctx, overrides=None):
    out = []
    for s in suites:
        d = {"name": s} if isinstance(s, str) else dict(s)
        if d["name"] not in SUITES:
            raise ValueError(f"unknown suite {d['name']!r}")
        d.setdefault("components", DEFAULT_COMPONENTS[d["name"]])
        if "tolerance" not in d:
            d["tolerance"] = default_tolerance(d["name"], ctx)
        if overrides and d["name"] in overrides:
            d["tolerance"] = overrides[d["name"]]
        out.append(d)
    return out


def grid_dict(grid):
    return {"axes": {a: list(grid.axes[a]) for a in F.AXES}, "h": {a: grid.h[a] for a in F.AXES},
            "fd_order": grid.fd_order}


def run_suites(target, grid, suites, tolerances=None, ctx=None, name="report", lc_opts=None,
               provenance=None, convergence=None, precision="double"):
    """Execute suites on a metric or family and collect a ResidualReport."""
    ctx = ctx or DiffContext.from_grid(grid, precision=precision)
    specs = normalize_suites(suites, ctx, tolerances)
    prov = {"artifact": "ricciforge", "version": __version__}
    prov.update(provenance or {})
    rep = ResidualReport(name, prov, grid_dict(grid), grid.points())
    for spec in specs:
        rep.suites.append(run_suite(spec, target, grid, ctx, lc_opts))
    if any(s.name == "evolution" for s in rep.suites):
        rep.notes.append("evolution: h_cc d_chi (N_i^c)^2 summed over c in {4,5}")
    if convergence:
        rep.convergence = convergence_table(target, grid, convergence, ctx, lc_opts)
    return rep


def convergence_table(target, grid, conv, ctx, lc_opts=None):
    """Max-norm of one suite for a sequence of FD steps, and the fitted order."""
    suite = conv.get("suite", "reduced")
    hs = [float(h) for h in conv.get("h", (2e-3, 1e-3, 5e-4))]
    prec = conv.get("precision", ctx.precision)
    comps = conv.get("components", DEFAULT_COMPONENTS.get(suite))
    min_order = conv.get("min_order")
    rows = []
    try:
        for h in hs:
            c = ctx.replace(h=h, precision=prec)
            r = run_suite({"name": suite, "components": comps, "tolerance": None}, target, grid, c, lc_opts)
            if r.error is not None:
                return {"suite": suite, "status": "error", "error": r.error, "rows": rows}
            rows.append({"h": h, "max_norm": r.max_norm})
    except ForgeError as exc:
        return {"suite": suite, "status": "error", "error": str(exc), "rows": rows}
    order = fit_order([r["h"] for r in rows], [r["max_norm"] for r in rows])
    status = "info" if min_order is None else ("pass" if order >= min_order else "fail")
    return {"suite": suite, "precision": prec, "rows": rows, "fitted_order": order,
            "min_order": min_order, "status": status}


def sha256_text(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
