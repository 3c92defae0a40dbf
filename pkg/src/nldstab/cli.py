"""Command-line front end.

    nldstab profile  --model GN --k 1 --omega 0.5
    nldstab sweep    --model MTM --k 0.5 --points 100
    nldstab critical --model GN --k 3
    nldstab jordan   --model GN --k 1 --omega 0.5 --omega 0.7
    nldstab reproduce fig1

Exit status: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import copy
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import PRESETS, RunConfig, config_from_dict, load_config
from .errors import (EigensolverFailure, GridMismatch, IntegrationDiverged, NoSignChange,
                     ParameterError, ParityDefect)
from .functionals import (CSV_COLUMNS, energy_terms, find_omega_E, find_omega_VK,
                          sign_change_brackets, write_sweep_csv)
from .grid import make_grid
from .io import ProfileCache, export_profile_csv, save_profile
from .jordan import jordan_report, write_report_json, write_reports_csv
from .linop import assemble_JL
from .profile import solve_resolved_profile
from .sweep import default_range, omega_grid, run_sweep, write_sweep_outputs

log = logging.getLogger("nldstab")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


class CliError(Exception):
    def __init__(self, code, kind, message):
        super().__init__(message)
        self.code, self.kind = code, kind


def _dump(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serialisable: {type(x)}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--model", choices=["MTM", "GN", "mtm", "gn"])
    common.add_argument("--k", type=float)
    common.add_argument("--m", type=float)
    common.add_argument("--omega", type=float, action="append", help="frequency (repeatable)")
    common.add_argument("--omega-range", type=float, nargs=2, metavar=("LO", "HI"))
    common.add_argument("--points", type=int)
    common.add_argument("--grid-m", type=int, help="number of grid nodes M")
    common.add_argument("--R", type=float, help="domain half-width override")
    common.add_argument("--stretch", help="'auto', 'none' or a stretch scale")
    common.add_argument("--scheme", choices=["fourier", "fd4"])
    common.add_argument("--out-dir")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--workers", type=int)
    common.add_argument("--no-adaptive", action="store_true")
    common.add_argument("--reproduce", choices=sorted(PRESETS))
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="nldstab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"nldstab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("profile", parents=[common], help="solve one profile and its functionals")
    sub.add_parser("sweep", parents=[common], help="functionals and spectra over a frequency sweep")
    sub.add_parser("critical", parents=[common], help="locate zero energy and stationary charge")
    sub.add_parser("jordan", parents=[common], help="kernel and Jordan-chain diagnostics")
    rp = sub.add_parser("reproduce", parents=[common], help="run a figure preset")
    rp.add_argument("figure", nargs="?", choices=sorted(PRESETS))
    return p


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.model:
        cfg.model.family = args.model.upper()
    if args.k is not None:
        cfg.model.k = args.k
    if args.m is not None:
        cfg.model.m = args.m
    if args.omega_range:
        cfg.sweep.omega_min, cfg.sweep.omega_max = args.omega_range
    if args.points is not None:
        cfg.sweep.count = args.points
    if args.no_adaptive:
        cfg.sweep.adaptive = False
    if args.grid_m is not None:
        cfg.numerics.M = args.grid_m
    if args.R is not None:
        cfg.numerics.R = args.R
    if args.stretch is not None:
        try:
            cfg.numerics.stretch = float(args.stretch)
        except ValueError:
            cfg.numerics.stretch = args.stretch
    if args.scheme:
        cfg.numerics.scheme = args.scheme
    if args.workers is not None:
        cfg.numerics.workers = args.workers
    if args.out_dir:
        cfg.output.directory = args.out_dir
    if args.format:
        cfg.output.formats = [args.format]
    return cfg.validate()


def _header(cfg: RunConfig, command: str, **extra) -> dict:
    return {"artifact": "nldstab", "version": __version__, "command": command,
            "config": json.dumps(cfg.as_dict(), sort_keys=True), **extra}


def _grid(cfg, model, omega):
    n = cfg.numerics
    if n.stretch == "auto":
        return solve_resolved_profile(model, omega, M=n.M, scheme=n.scheme, R=n.R).grid
    return make_grid(model, omega, M=n.M, scheme=n.scheme, R=n.R, stretch=n.stretch)


def _check_omegas(model, omegas):
    for w in omegas:
        model.check_omega(w)


def _cache(cfg):
    root = cfg.output.cache_dir or str(Path(cfg.output.directory) / "cache")
    return ProfileCache(root)


def cmd_profile(cfg: RunConfig, omegas) -> dict:
    if not omegas:
        raise ParameterError("profile needs --omega")
    model = cfg.make_model()
    _check_omegas(model, omegas)
    out = Path(cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    cache = _cache(cfg)
    summary = []
    for w in omegas:
        prof, hit = cache.solve(model, w, _grid(cfg, model, w))
        rep = energy_terms(prof)
        stem = f"profile_{model.family.value}_k{model.k:g}_w{w:+.6f}"
        head = _header(cfg, "profile", omega=w)
        save_profile(prof, out / f"{stem}.bin")
        if "csv" in cfg.output.formats:
            export_profile_csv(prof, out / f"{stem}.csv", head)
        if "json" in cfg.output.formats:
            _dump({"meta": head, "x": prof.x, "v": prof.v, "u": prof.u}, out / f"{stem}.json")
        _dump({"meta": head, "report": rep.as_dict(), "residual": prof.residual,
               "first_integral_drift": prof.first_integral_drift,
               "s_sign_changes": prof.s_sign_changes}, out / f"{stem}_functionals.json")
        print(f"omega={w:+.6f} Q={rep.Q:.10g} E={rep.E:.10g} |K+kV|={rep.defect_virial1:.2e} "
              f"|wQ-M-V|={rep.defect_virial2:.2e} |K+L|={rep.defect_KL:.2e} cache={'hit' if hit else 'miss'}")
        summary.append(rep.as_dict())
    return {"reports": summary}


def _sweep_omegas(cfg, model):
    lo, hi = default_range(model)
    lo = cfg.sweep.omega_min if cfg.sweep.omega_min is not None else lo
    hi = cfg.sweep.omega_max if cfg.sweep.omega_max is not None else hi
    return omega_grid(lo, hi, cfg.sweep.count)


def cmd_sweep(cfg: RunConfig, omegas=None, subdir=None) -> dict:
    model = cfg.make_model()
    ws = list(omegas) if omegas else list(_sweep_omegas(cfg, model))
    _check_omegas(model, ws)
    n = cfg.numerics
    res = run_sweep(model, ws, M=n.M, scheme=n.scheme, R=n.R, stretch=n.stretch,
                    adaptive=cfg.sweep.adaptive, radius=n.matching_radius, workers=n.workers)
    out = Path(cfg.output.directory) / (subdir or "")
    head = _header(cfg, "sweep", model=model.label)
    write_sweep_outputs(res, out, head)
    if "json" in cfg.output.formats:
        _dump({"meta": head, "columns": list(CSV_COLUMNS),
               "rows": [r.as_dict() for r in res.reports if r is not None]}, out / "functionals.json")
    print(f"{model.label}: {len(res.points)} frequencies, {len(res.failures)} failures, "
          f"{len(res.events)} origin events")
    for ev in res.events:
        print(f"  {ev.kind} at omega*={ev.omega_star:.6f} ({ev.parity}, emerging {ev.emerging}); "
              f"nearest {ev.crossref}={ev.crossref_omega} distance={ev.crossref_distance}")
    return {"events": [e.as_dict() for e in res.events], "failures": res.failures}


def cmd_critical(cfg: RunConfig) -> dict:
    model = cfg.make_model()
    n = cfg.numerics
    coarse = list(_sweep_omegas(cfg, model))
    res = run_sweep(model, coarse, M=n.M, scheme=n.scheme, R=n.R, stretch=n.stretch,
                    adaptive=False, radius=n.matching_radius, workers=n.workers)
    reps = [r for r in res.reports if r is not None]
    ws = [r.omega for r in reps]
    out = {"model": model.label, "coarse_points": len(coarse), "omega_E": [], "omega_VK": [],
           "errors": {}}
    opts = dict(M=n.M, scheme=n.scheme, R=n.R, stretch=n.stretch)
    for name, attr, finder, kw in (("omega_E", "E", find_omega_E, {"xtol": n.root_xtol}),
                                   ("omega_VK", "dQ_domega", find_omega_VK, {"delta": n.delta_omega})):
        brackets = sign_change_brackets(ws, [getattr(r, attr) for r in reps])
        if not brackets:
            out["errors"][name] = "NoSignChange: no sign change on the coarse sweep"
        for br in brackets:
            try:
                root = finder(model, br, **kw, **opts)
            except (NoSignChange, IntegrationDiverged, ParameterError) as exc:
                out["errors"].setdefault(name, []).append(f"{type(exc).__name__}: {exc}")
                continue
            near = [e for e in res.events if e.kind == "origin_collision"]
            dist = min((abs(e.omega_star - root) for e in near), default=None)
            out[name].append({"omega": root, "bracket": list(br), "bracket_source": "coarse sweep",
                              "collision_distance": dist})
    out["events"] = [e.as_dict() for e in res.events]
    dest = Path(cfg.output.directory)
    dest.mkdir(parents=True, exist_ok=True)
    _dump({"meta": _header(cfg, "critical"), **out}, dest / "critical.json")
    for name in ("omega_E", "omega_VK"):
        vals = ", ".join(f"{d['omega']:.6f}" for d in out[name]) or "absent"
        print(f"{name}: {vals}")
    return out


def cmd_jordan(cfg: RunConfig, omegas) -> dict:
    model = cfg.make_model()
    omegas = list(omegas or [])
    _check_omegas(model, omegas)
    dest = Path(cfg.output.directory)
    dest.mkdir(parents=True, exist_ok=True)
    cache = _cache(cfg)
    reports = []
    for w in omegas:
        prof, _ = cache.solve(model, w, _grid(cfg, model, w))
        rep = jordan_report(prof, delta=cfg.numerics.delta_omega, generalized=True,
                            op=assemble_JL(model, prof))
        write_report_json(rep, dest / f"jordan_w{w:+.6f}.json", _header(cfg, "jordan", omega=w))
        reports.append(rep)
        print(f"omega={w:+.6f} chain U1={rep.residual_chain_U1:.2e} chain tr={rep.residual_chain_tr:.2e} "
              f"c11={rep.c11:.10g} E={rep.energy:.10g} |c11-E|={rep.defect:.2e}")
    head = _header(cfg, "jordan")
    write_reports_csv(reports, dest / "jordan.csv", head)
    if "json" in cfg.output.formats:
        _dump({"meta": head, "reports": [r.as_dict() for r in reports]}, dest / "jordan.json")
    return {"reports": [r.as_dict() for r in reports]}


def cmd_reproduce(cfg: RunConfig, figure: str) -> dict:
    results = {}
    for preset in PRESETS[figure]:
        data = cfg.as_dict()
        for block, vals in preset.items():
            data[block] = {**data[block], **vals}
        sub = config_from_dict(data).validate()
        name = f"{sub.model.family}_k{sub.model.k:g}"
        sub.output.directory = str(Path(cfg.output.directory) / figure)
        results[name] = cmd_sweep(sub, subdir=name)
    return results


def _fail(code, kind, message, out_dir):
    err = {"error": kind, "message": message, "exit_code": code}
    print(json.dumps(err, sort_keys=True), file=sys.stderr)
    try:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        _dump(err, Path(out_dir) / "error.json")
    except OSError:
        pass
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out_dir = args.out_dir or "out"
    try:
        cfg = resolve_config(args)
        out_dir = cfg.output.directory
        figure = getattr(args, "figure", None) or args.reproduce
        if args.command == "reproduce" or (args.reproduce and args.command == "sweep"):
            if not figure:
                raise ParameterError("reproduce needs a figure name")
            cmd_reproduce(cfg, figure)
        elif args.command == "profile":
            cmd_profile(cfg, args.omega)
        elif args.command == "sweep":
            cmd_sweep(cfg, args.omega)
        elif args.command == "critical":
            cmd_critical(cfg)
        elif args.command == "jordan":
            cmd_jordan(cfg, args.omega)
    except (ParameterError, GridMismatch, ParityDefect) as exc:
        return _fail(EXIT_VALIDATION, type(exc).__name__, str(exc), out_dir)
    except (IntegrationDiverged, EigensolverFailure, NoSignChange, FloatingPointError,
            np.linalg.LinAlgError) as exc:
        return _fail(EXIT_NUMERICAL, type(exc).__name__, str(exc), out_dir)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
