"""Batch front end: ``yamabe-lab <command> [--config FILE] [flags]``.

Each run writes ``<outdir>/<command>-<hash>.csv`` and/or ``.json`` and updates
``<outdir>/manifest.json``. The hash is taken over the config minus the output
section. Exit codes: 0 ok, 2 precondition or hypothesis failure, 3 numerical
failure.

CSV columns per command
  constants       n, omega_n, T, K1, K2, K3, duplication_residual
  identity-check  n, h, max_rel_error, origin_value, origin_exact, observed_order
  quotient        convention, beta, grad_term, curvature_term, perturbation_term, lp_norm_sq, value, threshold, passed
  sweep-eps       eps, deficit
  sweep-d         d, lp_ratio, l2_ratio
  correct         branch, d, eps, beta0, gamma, value, threshold, passed, min_u_plus_v
  solve           q, sup_u, lp_norm, converged, residual, min_u, intervals
  conformal       mean_F, eps, eps_bound, sup_u_prime, u_min, u_max, H_at_P, bump_radius, C, passed
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict
from importlib import metadata

import numpy as np

from . import continuation, elliptic, functionals, pipelines
from .config import COMMANDS, RunConfig, config_from_dict, load_config
from .errors import PreconditionError, YamabeLabError
from .quadrature import gauss_radial_grid
from .special_functions import duplication_residual, k_moments
from .test_functions import AubinProfile, aubin_field


def library_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def fmt(x) -> str:
    """Shortest round-trip text for floats; plain text otherwise."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if x is None:
        return ""
    return str(x)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(rows[0]))
        for row in rows:
            w.writerow([fmt(v) for v in row.values()])
    return buf.getvalue()


def read_csv(path: str) -> list[dict]:
    """Inverse of rows_to_csv: numbers come back as float, flags as bool."""
    def parse(v: str):
        if v in ("true", "false"):
            return v == "true"
        if v == "":
            return None
        try:
            return float(v)
        except ValueError:
            return v

    with open(path, newline="") as fh:
        return [{k: parse(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def read_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _finite(x):
    """JSON has no inf/nan; encode them as strings."""
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    return x


# ---- commands ---------------------------------------------------------------

def cmd_constants(cfg: RunConfig):
    rows = []
    for n in cfg.sweep.n_values:
        m = k_moments(int(n))
        rows.append({"n": int(n), "omega_n": m.omega_n, "T": m.T, "K1": m.K1, "K2": m.K2,
                     "K3": m.K3, "duplication_residual": duplication_residual(int(n))})
    return rows, {"rows": rows}


def cmd_identity_check(cfg: RunConfig):
    rows = [asdict(elliptic.laplacian_identity_check(int(n), cfg.numeric.h))
            for n in cfg.sweep.n_values]
    return rows, {"rows": rows}


def cmd_quotient(cfg: RunConfig):
    jet = cfg.jet.build(cfg.n)
    eps, r = cfg.sweep.eps, cfg.numeric.radius
    grid = gauss_radial_grid(r, scale=math.sqrt(eps), breakpoints=(r / 2,))
    field_ = aubin_field(AubinProfile(cfg.n, eps, r), grid)
    reports = [functionals.yamabe_quotient(field_, jet, cfg.sweep.convention)]
    betas = [0.0]
    if cfg.sweep.beta > 0:
        reports.append(functionals.perturbed_quotient(field_, jet, cfg.sweep.beta))
        betas.append(cfg.sweep.beta)
    rows = [{"convention": rep.convention, "beta": b, **{k: v for k, v in rep.to_dict().items()
                                                         if k != "convention"}}
            for rep, b in zip(reports, betas)]
    return rows, {"eps": eps, "r": r, "reports": [rep.to_dict() for rep in reports]}


def cmd_sweep_eps(cfg: RunConfig):
    jet = cfg.jet.build(cfg.n)
    res = pipelines.epsilon_sweep(jet, cfg.numeric.radius, cfg.sweep.beta, cfg.sweep.eps_list,
                                  workers=cfg.numeric.workers)
    rows = [{"eps": e, "deficit": v} for e, v in zip(res.parameters, res.values)]
    return rows, res.to_dict()


def cmd_sweep_d(cfg: RunConfig):
    jet = cfg.jet.build(cfg.n)
    lp, l2 = pipelines.d_sweep(jet, cfg.sweep.gamma, cfg.sweep.d_list, eps=cfg.sweep.eps,
                               intervals=cfg.numeric.intervals, workers=cfg.numeric.workers)
    rows = [{"d": d, "lp_ratio": a, "l2_ratio": b}
            for d, a, b in zip(lp.parameters, lp.values, l2.values)]
    return rows, {"lp": lp.to_dict(), "l2": l2.to_dict()}


def cmd_correct(cfg: RunConfig):
    jet = cfg.jet.build(cfg.n)
    res = pipelines.corrected_test_function(jet, cfg.sweep.d, eps=cfg.sweep.eps,
                                            gamma=cfg.sweep.gamma, alpha=cfg.sweep.alpha,
                                            intervals=cfg.numeric.intervals)
    rows = [{"branch": res.branch, "d": res.d, "eps": res.eps, "beta0": res.beta0,
             "gamma": res.gamma, "value": res.report.value, "threshold": res.report.threshold,
             "passed": res.report.passed, "min_u_plus_v": res.positivity.min_value}]
    return rows, res.summary()


def cmd_solve(cfg: RunConfig):
    jet = None if cfg.jet.kind == "flat" else cfg.jet.build(cfg.n)
    tr = continuation.subcritical_continuation(
        jet, cfg.numeric.radius, cfg.sweep.lam, cfg.sweep.beta, n=cfg.n,
        newton_tol=cfg.numeric.newton_tol, max_intervals=cfg.numeric.max_intervals)
    rows = [{"q": q, "sup_u": s, "lp_norm": lp, "converged": c, "residual": res,
             "min_u": mn, "intervals": k}
            for q, s, lp, c, res, mn, k in zip(tr.exponents, tr.sup_values, tr.lp_norms,
                                               tr.converged_flags, tr.residuals,
                                               tr.min_values, tr.intervals)]
    return rows, tr.to_dict()


def cmd_conformal(cfg: RunConfig):
    res = pipelines.conformal_negativity(cfg.n, cfg.sweep.side, cfg.numeric.grid_shape,
                                         cfg.sweep.C, cfg.sweep.bump_radius)
    cert = res.certificate.to_dict()
    row = {k: v for k, v in cert.items() if k != "checks"}
    return [row], cert


HANDLERS = {
    "constants": cmd_constants,
    "identity-check": cmd_identity_check,
    "quotient": cmd_quotient,
    "sweep-eps": cmd_sweep_eps,
    "sweep-d": cmd_sweep_d,
    "correct": cmd_correct,
    "solve": cmd_solve,
    "conformal": cmd_conformal,
}


def run(cfg: RunConfig) -> dict:
    """Execute one command and write its artifacts; returns {format: path}."""
    cfg.validate()
    rows, payload = HANDLERS[cfg.command](cfg)
    outdir = cfg.output.resolved()
    os.makedirs(outdir, exist_ok=True)
    stem = f"{cfg.command}-{cfg.digest()}"
    paths = {}
    if "csv" in cfg.output.formats:
        paths["csv"] = os.path.join(outdir, stem + ".csv")
        with open(paths["csv"], "w", newline="") as fh:
            fh.write(rows_to_csv(rows))
    if "json" in cfg.output.formats:
        paths["json"] = os.path.join(outdir, stem + ".json")
        with open(paths["json"], "w") as fh:
            json.dump(_finite(payload), fh, indent=1, sort_keys=True)
            fh.write("\n")
    _update_manifest(outdir, stem, cfg, paths)
    return paths


def _update_manifest(outdir: str, stem: str, cfg: RunConfig, paths: dict) -> None:
    path = os.path.join(outdir, "manifest.json")
    manifest = {"runs": {}}
    if os.path.exists(path):
        try:
            manifest = read_json(path)
        except (OSError, json.JSONDecodeError):
            pass
    manifest.setdefault("runs", {})[stem] = {
        "command": cfg.command,
        "config_hash": cfg.digest(),
        "config": cfg.to_dict(),
        "seeds": {"jet": cfg.jet.seed if cfg.jet.kind == "synthetic" else None},
        "version": library_version(),
        "files": sorted(os.path.basename(p) for p in paths.values()),
    }
    with open(path, "w") as fh:
        json.dump(_finite(manifest), fh, indent=1, sort_keys=True)
        fh.write("\n")


# ---- argument parsing -------------------------------------------------------

def _int_range(text: str) -> list[int]:
    """'4..10' -> [4, ..., 10]; '4,6,8' -> [4, 6, 8]."""
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",")]


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="yamabe-lab")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON config file; flags override it")
    ap.add_argument("--n", type=str, help="dimension, or a range like 4..10 for table commands")
    ap.add_argument("--outdir")
    ap.add_argument("--formats", type=lambda s: s.split(","))
    jet = ap.add_argument_group("jet")
    jet.add_argument("--jet", dest="jet_kind", choices=("synthetic", "file", "flat"))
    jet.add_argument("--jet-file")
    jet.add_argument("--seed", type=int)
    jet.add_argument("--scalar0", type=float)
    jet.add_argument("--weyl-scale", type=float)
    num = ap.add_argument_group("numeric")
    num.add_argument("--intervals", type=int)
    num.add_argument("--h", type=float)
    num.add_argument("--radius", "--r", dest="radius", type=float)
    num.add_argument("--newton-tol", type=float)
    num.add_argument("--max-intervals", type=int)
    num.add_argument("--grid-shape", type=int)
    num.add_argument("--workers", type=int)
    sw = ap.add_argument_group("sweep")
    sw.add_argument("--eps", type=float)
    sw.add_argument("--eps-list", type=_floats)
    sw.add_argument("--d", type=float)
    sw.add_argument("--d-list", type=_floats)
    sw.add_argument("--beta", type=float)
    sw.add_argument("--gamma", type=float)
    sw.add_argument("--alpha", type=float)
    sw.add_argument("--lam", type=float)
    sw.add_argument("--C", dest="C", type=float)
    sw.add_argument("--bump-radius", type=float)
    sw.add_argument("--side", type=float)
    sw.add_argument("--convention", choices=("geometric", "normalized"))
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data = load_config(args.config) if args.config else {}
    data["command"] = args.command
    if args.n is not None:
        ns = _int_range(args.n)
        data.setdefault("sweep", {})["n_values"] = ns
        data["n"] = ns[0]
    groups = {
        "jet": {"jet_kind": "kind", "jet_file": "path", "seed": "seed", "scalar0": "scalar0",
                "weyl_scale": "weyl_scale"},
        "numeric": {k: k for k in ("intervals", "h", "radius", "newton_tol", "max_intervals",
                                   "grid_shape", "workers")},
        "sweep": {k: k for k in ("eps", "eps_list", "d", "d_list", "beta", "gamma", "alpha",
                                 "lam", "C", "bump_radius", "side", "convention")},
        "output": {"outdir": "directory", "formats": "formats"},
    }
    for group, mapping in groups.items():
        for flag, key in mapping.items():
            value = getattr(args, flag)
            if value is not None:
                data.setdefault(group, {})[key] = value
    return config_from_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        paths = run(cfg)
    except YamabeLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return PreconditionError.exit_code
    for p in paths.values():
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
