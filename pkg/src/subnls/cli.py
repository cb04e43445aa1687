"""Command-line entry point: strict INI config parsing, subcommand dispatch
(solve, sweep-rho, check, gn, threshold), parallel sweeps, and artifact
output.

Exit codes are stable for scripting: 0 converged/pass, 1 usage/IO/schema,
2 solver non-convergence or no ground state found, 3 assumption failure.
Identical config + seed reproduce bit-identical JSON apart from the
timestamp field, which is excluded from the digest.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import diagnostics as dg
from . import minimizer as mz
from . import nonlinearity as nl
from . import orlicz
from .grid import gn_constant, save_field

log = logging.getLogger("subnls.cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOCONV = 2
EXIT_ASSUMPTION = 3


class ConfigError(ValueError):
    pass


# section -> key -> (type, default); REQUIRED means no default
REQUIRED = object()

_SCHEMA = {
    "nonlinearity": {
        "family": (str, REQUIRED),
        "alpha": (float, 1.0),
        "mu": (float, 0.0),
        "p": (float, 0.0),
        "omega": (float, 0.0),
    },
    "grid": {
        "dim": (int, REQUIRED),
        "r_max": (float, 20.0),
        "n": (int, 2000),
    },
    "solver": {
        "rho": (float, REQUIRED),
        "eps_schedule": ("floats", list(mz.DEFAULT_EPS_SCHEDULE)),
        "tol_grad": (float, 1e-8),
        "tol_mass": (float, 1e-9),
        "max_iter": (int, 20000),
        "seed": (int, 0),
        "rearrange_every": (int, 0),
        "multistarts": (int, 1),
    },
    "orlicz": {
        "family": (str, ""),
        "alpha": (float, 1.0),
        "p": (float, 0.0),
        "q": (float, 0.0),
    },
    "output": {
        "directory": (str, "out"),
        "formats": (str, "both"),
    },
}

_NONLINEARITY_KEYS = {"log", "log_power", "saturation", "power_sublinear"}


@dataclass
class RunConfig:
    values: dict
    digest: str


def load_config(path) -> RunConfig:
    """Strictly-typed INI config: unknown sections or keys are errors."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    with open(path) as fh:
        raw = fh.read()
    parser.read_string(raw)
    values = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        values[section] = {}
        for key, text in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            typ = _SCHEMA[section][key][0]
            try:
                if typ == "floats":
                    values[section][key] = [float(tok) for tok in text.split(",") if tok.strip()]
                else:
                    values[section][key] = typ(text)
            except ValueError as exc:
                raise ConfigError(f"bad value for {section}.{key}: {text!r}") from exc
    for section, keys in _SCHEMA.items():
        values.setdefault(section, {})
        for key, (_, default) in keys.items():
            if key not in values[section]:
                if default is REQUIRED and section in ("nonlinearity", "grid", "solver"):
                    raise ConfigError(f"missing required key {section}.{key}")
                values[section][key] = default if default is not REQUIRED else None
    digest = hashlib.sha256(raw.encode()).hexdigest()[:16]
    return RunConfig(values=values, digest=digest)


def build_spec(cfg: RunConfig) -> nl.NonlinearitySpec:
    sec = cfg.values["nonlinearity"]
    dim = cfg.values["grid"]["dim"]
    family = sec["family"]
    if family not in _NONLINEARITY_KEYS:
        raise ConfigError(f"unknown nonlinearity family {family!r}")
    try:
        if family == "log":
            return nl.logarithmic(sec["alpha"], dim=dim)
        if family == "log_power":
            return nl.log_power(sec["alpha"], sec["mu"], sec["p"], dim=dim)
        if family == "saturation":
            return nl.saturation(dim=dim)
        return nl.power_sublinear(sec["omega"], dim=dim)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_solve_config(cfg: RunConfig) -> mz.SolveConfig:
    spec = build_spec(cfg)
    g, s = cfg.values["grid"], cfg.values["solver"]
    try:
        return mz.SolveConfig(
            spec=spec, rho=s["rho"], r_max=g["r_max"], n=g["n"],
            eps_schedule=tuple(s["eps_schedule"]), tol_grad=s["tol_grad"],
            tol_mass=s["tol_mass"], max_iter=s["max_iter"], seed=s["seed"],
            rearrange_every=s["rearrange_every"], multistarts=s["multistarts"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_nfunction(cfg: RunConfig):
    sec = cfg.values["orlicz"]
    family = sec["family"]
    if not family:
        return None
    if family == "log_matched":
        return orlicz.log_matched(sec["alpha"])
    if family == "log_matched_power_tail":
        return orlicz.log_matched_power_tail(sec["alpha"], sec["p"])
    if family == "pure_q":
        return orlicz.pure_q(sec["q"])
    raise ConfigError(f"unknown N-function family {family!r}")


def _atomic_write(path, text):
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _dump_json(payload, path):
    _atomic_write(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def result_payload(result, cfg: RunConfig, profile_csv_path):
    payload = result.to_json_dict()
    payload["profile_csv_path"] = profile_csv_path
    payload["config_digest"] = cfg.digest
    payload["version"] = __version__
    payload["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    return payload


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    solve_cfg = build_solve_config(cfg)
    out_dir = args.out or cfg.values["output"]["directory"]
    fmt = args.format or cfg.values["output"]["formats"]
    os.makedirs(out_dir, exist_ok=True)
    notes = []
    spec = solve_cfg.spec
    if spec.family == "log_power":
        verdict = dg.nonexistence_verdict(spec.alpha, spec.mu, spec.p_exp, spec.dim)
        if verdict != dg.EXISTS_LARGE_RHO:
            notes.append(f"analytic verdict: {verdict} "
                         f"(mu <= threshold {nl.mu_threshold(spec.alpha, spec.p_exp):.6g})")
    try:
        limits = mz.multistart(solve_cfg)
    except mz.StepFailure as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    if not limits:
        print("no stage produced a result", file=sys.stderr)
        return EXIT_NOCONV
    best = min(limits, key=lambda r: r.energy)
    profile_csv = os.path.join(out_dir, "profile.csv")
    if fmt in ("csv", "both"):
        save_field(best.u, profile_csv)
    payload = result_payload(best, cfg, profile_csv if fmt in ("csv", "both") else None)
    if notes:
        payload["notes"] = notes
    if fmt in ("json", "both"):
        _dump_json(payload, os.path.join(out_dir, "result.json"))
    ground_state = (best.converged and best.on_sphere and best.lam > 0
                    and best.energy < 0)
    for note in notes:
        print(note)
    print(f"energy={best.energy:.8g} lambda={best.lam:.8g} converged={best.converged} "
          f"on_sphere={best.on_sphere}")
    if not ground_state:
        print("no negative-energy sphere-saturating minimizer found", file=sys.stderr)
        return EXIT_NOCONV
    return EXIT_OK


def _sweep_point(packed):
    cfg_values, digest, rho = packed
    cfg = RunConfig(values=cfg_values, digest=digest)
    solve_cfg = build_solve_config(cfg)
    pts = mz.energy_map(solve_cfg, [rho])
    return pts[0]


def cmd_sweep_rho(args) -> int:
    if args.steps < 3:
        print("steps must be >= 3", file=sys.stderr)
        return EXIT_USAGE
    if not (0 < args.rho_min < args.rho_max):
        print("need 0 < rho_min < rho_max", file=sys.stderr)
        return EXIT_USAGE
    cfg = load_config(args.config)
    out_dir = args.out or cfg.values["output"]["directory"]
    os.makedirs(out_dir, exist_ok=True)
    rhos = np.geomspace(args.rho_min, args.rho_max, args.steps)
    packed = [(cfg.values, cfg.digest, float(r)) for r in rhos]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            points = list(pool.map(_sweep_point, packed))
    else:
        points = [_sweep_point(p) for p in packed]
    points.sort(key=lambda p: p.rho)
    csv_path = os.path.join(out_dir, "energy_map.csv")
    lines = ["rho,c_value,eps,converged"]
    for p in points:
        lines.append(f"{p.rho:.17g},{p.c_value:.17g},{p.eps:.17g},{str(p.converged).lower()}")
    _atomic_write(csv_path, "\n".join(lines) + "\n")
    try:
        checks = dg.energy_map_properties(points)
    except ValueError as exc:
        print(f"property checks skipped: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    _dump_json(dg.property_report_json(checks, points),
               os.path.join(out_dir, "energy_map_properties.json"))
    all_ok = all(c.passed for c in checks)
    for c in checks:
        print(f"{c.check_name}: {'pass' if c.passed else 'FAIL'} "
              f"(margin={c.margin:.3g}, tol={c.tolerance:.3g})")
    failed = [p for p in points if not p.converged]
    if failed:
        print(f"{len(failed)} point(s) did not converge", file=sys.stderr)
        return EXIT_NOCONV
    return EXIT_OK if all_ok else EXIT_NOCONV


def cmd_check(args) -> int:
    cfg = load_config(args.config)
    spec = build_spec(cfg)
    report = nl.check_assumptions(spec)
    payload = {"assumptions": report.verdicts(), "xi0": report.xi0,
               "details": report.details}
    if spec.family == "log_power":
        tr = nl.threshold_report(spec)
        payload["threshold"] = {
            "mu_star": tr.mu_star,
            "gtilde_max": None if math.isinf(tr.gtilde_max) else tr.gtilde_max,
            "g4_holds": tr.g4_holds,
            "eta": tr.eta,
            "verdict": dg.nonexistence_verdict(spec.alpha, spec.mu, spec.p_exp, spec.dim),
        }
    nfun = build_nfunction(cfg)
    orlicz_failed = False
    if nfun is not None:
        growth = orlicz.check_delta2_nabla2(nfun)
        payload["orlicz"] = {
            "delta2_nabla2_holds": growth.holds,
            "c_delta": growth.c_delta,
            "c_nabla": growth.c_nabla,
            "sampled_range": list(growth.sampled_range),
        }
        if nfun.family in ("log_matched", "log_matched_power_tail"):
            val, der = orlicz.knot_mismatch(nfun)
            payload["orlicz"]["knot_mismatch"] = [val, der]
        orlicz_failed = not growth.holds
    out_dir = args.out or cfg.values["output"]["directory"]
    os.makedirs(out_dir, exist_ok=True)
    payload["config_digest"] = cfg.digest
    payload["version"] = __version__
    _dump_json(payload, os.path.join(out_dir, "check.json"))
    for name, verdict in report.verdicts().items():
        print(f"({name}) {verdict}")
    if report.xi0 is not None:
        print(f"positive-primitive witness xi0 = {report.xi0:.6g}")
    if "threshold" in payload:
        print(f"mu_star = {payload['threshold']['mu_star']:.12g} "
              f"verdict = {payload['threshold']['verdict']}")
    if nfun is not None:
        print(f"N-function growth: holds={payload['orlicz']['delta2_nabla2_holds']} "
              f"C_delta={payload['orlicz']['c_delta']:.6g} "
              f"C_nabla={payload['orlicz']['c_nabla']:.6g}")
    return EXIT_ASSUMPTION if (report.any_fails or orlicz_failed) else EXIT_OK


def cmd_gn(args) -> int:
    dim, p = args.dim, args.p
    try:
        est = gn_constant(dim, p)
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    from .grid import RadialField, RadialGrid, kinetic, mass

    rng = np.random.default_rng(0)
    grid = RadialGrid(dim, 12.0, 300)
    theta = dim * (0.5 - 1.0 / p)
    worst = 0.0
    for _ in range(1000):
        vals = rng.normal(size=grid.n) * np.exp(-grid.r / rng.uniform(0.5, 4.0))
        u = RadialField(grid, vals)
        lp = float(np.dot(grid.w, np.abs(vals) ** p)) ** (1 / p)
        quot = lp / (kinetic(u) ** (theta / 2) * mass(u) ** ((1 - theta) / 2))
        worst = max(worst, quot - est.value)
    print(f"C_{{{dim},{p:g}}} ~= {est.value:.8g} "
          f"(+/- {est.rel_uncertainty:.0%}, estimate from {est.iterations} ascent steps)")
    print(f"validation: worst quotient excess over estimate on 1000 random fields: "
          f"{worst:.3e}")
    return EXIT_OK if worst <= 1e-10 else EXIT_NOCONV


def cmd_threshold(args) -> int:
    try:
        mu_star = nl.mu_threshold(args.alpha, args.p)
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"mu_star(alpha={args.alpha:g}, p={args.p:g}) = {mu_star:.15g}")
    if args.mu is not None:
        if args.mu < 0:
            print(f"gtilde_max = {nl.gtilde_max(args.alpha, args.mu, args.p):.15g}")
        dim = args.dim or 3
        print(f"verdict = {dg.nonexistence_verdict(args.alpha, args.mu, args.p, dim)}")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subnls",
        description="normalized ground states for strongly sublinear "
                    "Schrodinger nonlinearities")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run the continuation for one config")
    p_solve.add_argument("--config", required=True)
    p_solve.add_argument("--out", default=None)
    p_solve.add_argument("--format", choices=["json", "csv", "both"], default=None)
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep-rho", help="energy map over a range of mass radii")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("rho_min", type=float)
    p_sweep.add_argument("rho_max", type=float)
    p_sweep.add_argument("steps", type=int)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--out", default=None)
    p_sweep.set_defaults(func=cmd_sweep_rho)

    p_check = sub.add_parser("check", help="assumption and threshold report")
    p_check.add_argument("--config", required=True)
    p_check.add_argument("--out", default=None)
    p_check.set_defaults(func=cmd_check)

    p_gn = sub.add_parser("gn", help="Gagliardo-Nirenberg constant estimate")
    p_gn.add_argument("dim", type=int)
    p_gn.add_argument("p", type=float)
    p_gn.set_defaults(func=cmd_gn)

    p_thr = sub.add_parser("threshold", help="existence threshold for the log+power family")
    p_thr.add_argument("--alpha", type=float, required=True)
    p_thr.add_argument("--p", type=float, required=True)
    p_thr.add_argument("--mu", type=float, default=None)
    p_thr.add_argument("--dim", type=int, default=None)
    p_thr.set_defaults(func=cmd_threshold)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("SUBNLS_LOG", "warn").lower()
    logging.basicConfig(
        level={"error": logging.ERROR, "warn": logging.WARNING,
               "info": logging.INFO, "debug": logging.DEBUG}.get(level, logging.WARNING))
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
