"""Command line front end.

    kirillov-lab verify <suite[,suite...]|all> [--config FILE | --set key=value ...] [--out FILE] [--jobs N]
    kirillov-lab ingest <dataset>
    kirillov-lab eval <quantity> [key=value ...]
    kirillov-lab emit --csv PATH --grid {ap,moment-t,report} [key=value ...]

Exit status: 0 pass, 1 fail, 2 inconclusive (worst over the suites run).
The environment variable KIRILLOV_LAB_OUTDIR, if set, is prefixed to
relative output paths.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import coefficients, geometry, kirillov, moment, specfun
from .report import SCHEMA, exit_code, worst_status
from .suites import SUITES, ConfigError, SuiteConfig, load_config, make_table, parse_complex, run_suite, validate


def _out_path(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    root = os.environ.get("KIRILLOV_LAB_OUTDIR")
    return Path(root) / p if root and not p.is_absolute() else p


def _params(pairs) -> dict:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise ConfigError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _run_one(cfg: SuiteConfig):
    rep = run_suite(cfg)
    return rep


def cmd_verify(args) -> int:
    names = sorted(SUITES) if args.suite == "all" else sorted(n.strip() for n in args.suite.split(",") if n.strip())
    configs = []
    for name in names:
        if args.config:
            cfg = load_config(args.config, suite=name)
        else:
            raw = _params(args.set or [])
            tols = {k[4:]: v for k, v in raw.items() if k.startswith("tol.")}
            params = {k: v for k, v in raw.items() if not k.startswith("tol.")}
            cfg = SuiteConfig(name, params, tols)
            validate(cfg)
        configs.append(cfg)
    if args.jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_run_one, configs))
    else:
        reports = [_run_one(c) for c in configs]
    reports.sort(key=lambda r: r.suite)
    for r in reports:
        print(r.summary_line(), file=sys.stderr)
    status = worst_status(r.status for r in reports)
    if len(reports) == 1:
        doc = reports[0].to_dict(args.timing)
    else:
        doc = {"schema": SCHEMA, "status": status, "reports": [r.to_dict(args.timing) for r in reports]}
    text = json.dumps(doc, indent=2)
    out = _out_path(args.out or (configs[0].output if len(configs) == 1 else None))
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return exit_code(status)


def cmd_ingest(args) -> int:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        table = coefficients.ingest_maass(args.path)
    meta = table.meta
    print(f"dataset: {args.path}")
    print(f"R = {meta['R']!r}, parity {table.spectral.parity}, N = {table.N_max}, "
          f"claimed precision {meta['precision']:.3g}")
    pts = [geometry.GroupPoint(0.1, 0.6), geometry.GroupPoint(-0.3, 0.9), geometry.GroupPoint(0.45, 0.7)]
    auto = coefficients.automorphy_residual(table, pts, geometry.WEYL)
    resid, where = meta["hecke_residual"], meta["hecke_worst"]
    if meta["validated"]:
        print(f"validated, Hecke residual {resid:.3g}" + (f" at (m,n)={where}" if where else ""))
    else:
        first_resid, first_where = meta["hecke_first"]
        print(f"flagged: Hecke residual {first_resid:.3g} at (m,n)={first_where} "
              f"(first violated relation; max {resid:.3g} at {where})")
    print(f"automorphy residual under z -> -1/z: {auto:.3g}")
    return 0 if meta["validated"] else 1


def _get(p: dict, key: str, default=None, conv=float):
    if key in p:
        return conv(p[key])
    if default is None:
        raise ConfigError(f"missing parameter {key}")
    return default


def cmd_eval(args) -> int:
    p = _params(args.params)
    q = args.quantity
    if q == "ap":
        val = kirillov.ap_closed(_get(p, "nu", conv=parse_complex), _get(p, "alpha"), _get(p, "p", conv=int))
    elif q == "jacquet":
        val = specfun.jacquet_numeric(_get(p, "p", 0, int), _get(p, "nu", conv=parse_complex),
                                      _get(p, "delta", 1, int), _get(p, "u"))
    elif q == "l-series":
        tab = make_table(_get(p, "table", conv=str), _get(p, "N", 10_000, int))
        val = moment.l_series(tab, _get(p, "s", conv=parse_complex))
    elif q == "shifted-convolution":
        tab = make_table(_get(p, "table", conv=str), _get(p, "N", 10_000, int))
        val = moment.shifted_convolution_alpha(tab, _get(p, "m", 1, int), _get(p, "xi", conv=parse_complex),
                                               _get(p, "alpha", 0.5))
    elif q == "phi":
        tab = make_table(_get(p, "table", conv=str), _get(p, "N", 4000, int))
        val = kirillov.phi_capital_closed(tab, _get(p, "alpha"), _get(p, "x"), _get(p, "y"))
    else:
        raise ConfigError(f"unknown quantity {q!r}")
    val = complex(val)
    print(json.dumps({"schema": SCHEMA, "quantity": q, "params": p, "value": [val.real, val.imag]}, indent=2))
    return 0


def _grid_ap(p: dict):
    nu, alpha, P = _get(p, "nu", 0.5j, parse_complex), _get(p, "alpha", 4.0), _get(p, "P", 24, int)
    header = ["p", "re_a_p", "im_a_p", "abs_a_p"]
    rows = []
    for k in range(-P, P + 1):
        a = kirillov.ap_closed(nu, alpha, k)
        rows.append([k, repr(a.real), repr(a.imag), repr(abs(a))])
    return header, rows


def _grid_moment_t(p: dict):
    tab = make_table(_get(p, "table", "tau", str), _get(p, "N", 1000, int))
    s = _get(p, "u", 1.3 + 0j, parse_complex)
    w = specfun.WeightFunction(_get(p, "T", 2.0))
    npts = _get(p, "points", 201, int)
    t = np.linspace(-_get(p, "t_max", 12.0), _get(p, "t_max", 12.0), npts) if npts else np.zeros(0)
    vals = moment._dirichlet_poly(tab, s, t, tab.N_max) if npts else np.zeros(0)
    header = ["t", "abs_L_squared", "weight", "integrand"]
    rows = [[repr(float(tt)), repr(float(abs(v) ** 2)), repr(float(w(tt))), repr(float(abs(v) ** 2 * w(tt)))]
            for tt, v in zip(t, vals)]
    return header, rows


def _grid_report(p: dict):
    doc = json.loads(Path(_get(p, "report", conv=str)).read_text(encoding="utf-8"))
    reports = doc.get("reports", [doc])
    header = ["suite", "leg", "re", "im", "error_budget", "inconclusive"]
    rows = [[r["suite"], lg["name"], lg["value"][0], lg["value"][1], lg["error_budget"], lg["inconclusive"]]
            for r in reports for lg in r["legs"]]
    return header, rows


def cmd_emit(args) -> int:
    p = _params(args.params)
    header, rows = {"ap": _grid_ap, "moment-t": _grid_moment_t, "report": _grid_report}[args.grid](p)
    out = _out_path(args.csv)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        wr.writerows(rows)
    print(f"wrote {len(rows)} rows to {out}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kirillov-lab", description="Verification suites for Kirillov-model vectors and moments.")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a named suite (or 'all') and print a JSON report")
    v.add_argument("suite", help=f"'all', or a comma-separated list of: {', '.join(sorted(SUITES))}")
    v.add_argument("--config", help="flat key = value config file")
    v.add_argument("--set", nargs="*", metavar="KEY=VALUE", help="parameters when no config file is given")
    v.add_argument("--out", help="write the JSON report here instead of stdout")
    v.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identical reruns)")
    v.add_argument("--jobs", type=int, default=1, help="worker processes for 'all'")
    v.set_defaults(func=cmd_verify)

    i = sub.add_parser("ingest", help="validate a Maass dataset file")
    i.add_argument("path")
    i.set_defaults(func=cmd_ingest)

    e = sub.add_parser("eval", help="evaluate one quantity: ap, jacquet, l-series, shifted-convolution, phi")
    e.add_argument("quantity")
    e.add_argument("params", nargs="*", metavar="KEY=VALUE")
    e.set_defaults(func=cmd_eval)

    m = sub.add_parser("emit", help="write a plot-ready CSV")
    m.add_argument("--csv", required=True)
    m.add_argument("--grid", required=True, choices=["ap", "moment-t", "report"])
    m.add_argument("params", nargs="*", metavar="KEY=VALUE")
    m.set_defaults(func=cmd_emit)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration rejected: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
