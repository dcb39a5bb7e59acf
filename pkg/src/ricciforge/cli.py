"""forge: run scenario files, tabulate rotoid horizons, list the catalog.

Exit codes: 0 all suites pass, 1 some tolerance exceeded,
2 infrastructure or evaluator error (bad scenario, build or stencil failure).
"""
import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .errors import ForgeError, RootError


def _tol(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError("expected suite=value")
    k, v = text.split("=", 1)
    try:
        return k.strip(), float(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tolerance value {v!r}") from None


def _parser():
    p = argparse.ArgumentParser(prog="forge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"forge {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="build a scenario and run its residual suites")
    r.add_argument("scenario")
    r.add_argument("--grid-scale", type=float, help="multiply every FD step by this factor")
    r.add_argument("--fd-order", type=int, choices=(2, 4))
    r.add_argument("--tol", type=_tol, action="append", default=[], metavar="SUITE=VALUE")
    r.add_argument("--out-dir")
    h = sub.add_parser("horizon", help="tabulate the rotoid horizon r+(phi)")
    h.add_argument("scenario", nargs="?")
    h.add_argument("--mu", type=float)
    h.add_argument("--eps", type=float)
    h.add_argument("--n-phi", type=int)
    h.add_argument("--out-dir")
    c = sub.add_parser("catalog", help="list builtin ids")
    c.add_argument("--json", action="store_true")
    return p


def _err(msg):
    print(f"forge: error: {msg}", file=sys.stderr)


def cmd_run(args):
    from .scenario import load_scenario, apply_overrides, run
    try:
        sc = load_scenario(args.scenario)
        apply_overrides(sc, args.grid_scale, args.fd_order, dict(args.tol), args.out_dir)
    except ForgeError as exc:
        _err(exc)
        return 2
    if sc.builder_id is None:
        return write_horizon(sc.horizon, sc.name, sc.output["dir"])
    try:
        rep = run(sc)
    except ForgeError as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return 2
    paths = rep.write(sc.output["dir"], sc.output["formats"])
    for s in rep.suites:
        mx = "-" if s.error is not None else format(s.max_norm, ".3e")
        tol = "-" if s.tolerance is None else format(s.tolerance, ".1e")
        print(f"{s.name:18s} {s.status:5s} max={mx} tol={tol}" + (f"  [{s.error}]" if s.error else ""))
    if rep.convergence is not None:
        c = rep.convergence
        print(f"convergence        {c.get('status')} order={c.get('fitted_order')}")
    if rep.build_error:
        print(f"build              error  [{rep.build_error}]")
    for pth in paths:
        print(f"wrote {pth}")
    code = rep.exit_code
    if sc.horizon is not None:
        code = max(code, write_horizon(sc.horizon, sc.name, sc.output["dir"]))
    return code


def horizon_table(mu=1.0, eps=1e-3, q0=1.0, omega0=1.0, phi0=0.0, n_phi=360):
    """Rows (phi, root, formula, diff, first order, diff first order); NaN gaps where no root."""
    from .ansatz import SchwarzschildParams
    from .generators.schwarzschild import rotoid_horizon
    params = SchwarzschildParams(mu, eps)
    rows, gaps = [], []
    for ph in np.linspace(0.0, 2 * np.pi, int(n_phi), endpoint=False):
        try:
            h = rotoid_horizon(params, q0, omega0, phi0, ph)
            rows.append((ph, h.r_root[0], h.r_formula[0], h.difference[0], h.r_first_order[0],
                         h.difference_first_order[0]))
        except RootError as exc:
            rows.append((ph,) + (math.nan,) * 5)
            gaps.append({"phi": float(ph), "error": str(exc)})
    return rows, gaps


def _fmt(x):
    return "nan" if not math.isfinite(x) else format(x, ".17g")


def cmd_horizon(args):
    from .scenario import load_scenario
    opts, name, out_dir = {}, "horizon", "."
    if args.scenario:
        try:
            sc = load_scenario(args.scenario)
        except ForgeError as exc:
            _err(exc)
            return 2
        opts, name, out_dir = dict(sc.horizon or {}), sc.name, sc.output["dir"]
    for k in ("mu", "eps", "n_phi"):
        if getattr(args, k) is not None:
            opts[k] = getattr(args, k)
    if args.out_dir:
        out_dir = args.out_dir
    return write_horizon(opts, name, out_dir)


def write_horizon(opts, name, out_dir):
    """Write {name}.horizon.csv, .plot.dat and .json; 2 if any angle has no root."""
    opts = dict(opts or {})
    unknown = set(opts) - {"mu", "eps", "q0", "omega0", "phi0", "n_phi"}
    if unknown:
        _err(f"unknown horizon option(s): {sorted(unknown)}")
        return 2
    import warnings
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rows, gaps = horizon_table(**opts)
    os.makedirs(out_dir, exist_ok=True)
    head = "phi,r_plus_rootfind,r_plus_formula,difference,r_plus_first_order,difference_first_order"
    csv = os.path.join(out_dir, f"{name}.horizon.csv")
    with open(csv, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(head + "\n")
        for r in rows:
            fh.write(",".join(_fmt(x) for x in r) + "\n")
    plot = os.path.join(out_dir, f"{name}.horizon.plot.dat")
    with open(plot, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# phi r_plus\n")
        for r in rows:
            fh.write(f"{_fmt(r[0])} {_fmt(r[1])}\n")
    diffs = np.array([r[3] for r in rows], dtype=float)
    d1 = np.array([r[5] for r in rows], dtype=float)
    ok = np.isfinite(diffs)
    summary = {"name": name, "version": __version__, "options": opts,
               "max_abs_difference": float(np.max(np.abs(diffs[ok]))) if ok.any() else None,
               "max_abs_difference_first_order": float(np.max(np.abs(d1[ok]))) if ok.any() else None,
               "gaps": gaps, "warnings": list(dict.fromkeys(str(w.message) for w in caught))}
    from .report import to_json
    js = os.path.join(out_dir, f"{name}.horizon.json")
    with open(js, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(to_json(summary) + "\n")
    for w in summary["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    print(f"horizon: {len(rows)} angles, {len(gaps)} gaps, max |difference| = {summary['max_abs_difference']}")
    for pth in (csv, plot, js):
        print(f"wrote {pth}")
    return 2 if gaps else 0


def cmd_catalog(args):
    from .catalog import listing, CATALOG
    if args.json:
        data = [{"id": i, "kind": k, "summary": s,
                 "params": {n: kd for n, (kd, _) in CATALOG[i].params.items()}} for i, k, s in listing()]
        print(json.dumps(data, indent=1))
    else:
        for i, k, s in listing():
            print(f"{i:22s} {k:7s} {s}")
    return 0


def main(argv=None):
    args = _parser().parse_args(argv)
    fn = {"run": cmd_run, "horizon": cmd_horizon, "catalog": cmd_catalog}[args.cmd]
    try:
        return fn(args)
    except ForgeError as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
