"""Frequency sweeps: profiles, functionals and spectra over a set of
frequencies, followed by branch tracking and collision detection."""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EigensolverFailure, IntegrationDiverged, ParameterError
from .functionals import FunctionalReport, energy_terms, write_sweep_csv
from .grid import make_grid
from .linop import assemble_JL
from .model import Family, ModelSpec
from .profile import solve_profile, solve_resolved_profile
from .spectrum import (CollisionEvent, EigenTrajectory, SpectrumSlice, critical_points,
                       detect_origin_collisions, eigen_slice, filter_resolved, track)

log = logging.getLogger(__name__)


def default_range(model: ModelSpec) -> tuple[float, float]:
    """Open frequency interval swept by default: the whole gap for MTM, the
    positive half for GN (negative GN frequencies follow by sign flip)."""
    m = model.m
    return (-m, m) if model.family is Family.MTM else (0.0, m)


def omega_grid(lo: float, hi: float, count: int) -> np.ndarray:
    """Cell-centred points, so the open interval ends are never sampled."""
    if count < 1:
        return np.empty(0)
    return lo + (hi - lo) * (np.arange(count) + 0.5) / count


@dataclass
class PointResult:
    omega: float
    report: FunctionalReport | None
    slice: SpectrumSlice | None
    error: str | None = None


@dataclass
class SweepResult:
    model: ModelSpec
    points: list
    trajectories: list = field(default_factory=list)
    events: list = field(default_factory=list)
    options: dict = field(default_factory=dict)

    @property
    def omegas(self):
        return [p.omega for p in self.points]

    @property
    def reports(self):
        return [p.report for p in self.points]

    @property
    def slices(self):
        return [p.slice for p in self.points if p.slice is not None]

    @property
    def failures(self):
        return [(p.omega, p.error) for p in self.points if p.error]

    def critical(self):
        return critical_points(self.reports)


def analyse_point(model: ModelSpec, omega: float, *, M: int = 511, scheme: str = "fourier",
                  R=None, stretch="auto", spectrum: bool = True, refine: bool = False,
                  resolution_tol: float = 1e-4) -> PointResult:
    try:
        prof = solve_resolved_profile(model, omega, M=M, scheme=scheme, R=R, stretch=stretch)
        grid = prof.grid
        rep = energy_terms(prof)
        sl = None
        if spectrum:
            sl = eigen_slice(assemble_JL(model, prof), prof)
            if refine:
                g2 = make_grid(model, omega, M=2 * M, scheme=scheme, R=grid.R, stretch=grid.stretch)
                p2 = solve_profile(model, omega, g2)
                sl = filter_resolved(sl, eigen_slice(assemble_JL(model, p2), p2), resolution_tol)
        return PointResult(float(omega), rep, sl)
    except (IntegrationDiverged, ParameterError, EigensolverFailure, FloatingPointError) as exc:
        log.warning("sweep point omega=%g failed: %s", omega, exc)
        return PointResult(float(omega), None, None, f"{type(exc).__name__}: {exc}")


def _run_points(model, omegas, workers, options):
    if workers > 1 and len(omegas) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(workers) as pool:
            futs = [pool.submit(analyse_point, model, w, **options) for w in omegas]
            return [f.result() for f in futs]
    return [analyse_point(model, w, **options) for w in omegas]


def _fill_dq(points):
    reps = [p.report for p in points]
    for i, r in enumerate(reps):
        if r is None:
            continue
        lo = next((reps[j] for j in range(i - 1, -1, -1) if reps[j] is not None), None)
        hi = next((reps[j] for j in range(i + 1, len(reps)) if reps[j] is not None), None)
        if lo is not None and hi is not None:
            r.dQ_domega = (hi.Q - lo.Q) / (hi.omega - lo.omega)
        elif lo is not None or hi is not None:
            a, b = (lo, r) if hi is None else (r, hi)
            r.dQ_domega = (b.Q - a.Q) / (b.omega - a.omega)
        else:
            r.dQ_domega = None


def run_sweep(model: ModelSpec, omegas=None, *, count: int = 200, omega_range=None,
              M: int = 511, scheme: str = "fourier", R=None, stretch="auto",
              spectrum: bool = True, refine: bool = False, adaptive: bool = True,
              adaptive_width: float = 0.05, adaptive_factor: int = 3,
              radius: float = 0.05, workers: int = 1) -> SweepResult:
    """Sweep a set of frequencies (default: ``count`` cell-centred points on
    the model's default range) and track the retained spectrum.

    With ``adaptive`` the sampling density is raised ``adaptive_factor``
    times within ``adaptive_width`` of every detected collision, and tracking
    and detection are redone on the union of points.
    """
    if omegas is None:
        lo, hi = omega_range if omega_range is not None else default_range(model)
        omegas = omega_grid(lo, hi, count)
    omegas = sorted({float(w) for w in omegas})
    for w in omegas:
        model.check_omega(w)
    options = dict(M=M, scheme=scheme, R=R, stretch=stretch, spectrum=spectrum,
                   refine=refine)
    points = _run_points(model, omegas, workers, options)
    res = SweepResult(model, points, options={**options, "radius": radius,
                                              "adaptive": adaptive})
    _finish(res, radius)
    if adaptive and spectrum and res.events and len(omegas) > 1:
        step = float(np.median(np.diff(omegas)))
        extra = set()
        for ev in res.events:
            w = ev.omega_star
            fine = np.arange(w - adaptive_width, w + adaptive_width + 1e-12, step / adaptive_factor)
            extra.update(float(x) for x in fine if model.in_gap(x) and x > omegas[0] and x < omegas[-1])
        extra -= set(omegas)
        extra = sorted(x for x in extra if min(abs(x - w) for w in omegas) > 1e-9)
        if extra:
            points += _run_points(model, extra, workers, options)
            points.sort(key=lambda p: p.omega)
            res.points = points
            _finish(res, radius)
    return res


def _finish(res: SweepResult, radius: float):
    _fill_dq(res.points)
    slices = res.slices
    if not slices:
        res.trajectories, res.events = [], []
        return
    res.trajectories = track(slices, radius=radius)
    ws = [s.omega for s in slices]
    res.events = detect_origin_collisions(res.trajectories, res.reports,
                                          omega_range=(ws[0], ws[-1]))


# --- output -------------------------------------------------------------------

SPECTRUM_COLUMNS = ("re_lambda", "im_lambda", "parity", "retained", "near_band")


def write_spectrum_csv(sl: SpectrumSlice, path, header: dict | None = None):
    order = np.lexsort((sl.eigenvalues.real, sl.eigenvalues.imag, sl.parities))
    with open(path, "w", newline="") as fh:
        for key, val in {**(header or {}), "omega": repr(sl.omega)}.items():
            fh.write(f"# {key}: {val}\n")
        w = csv.writer(fh)
        w.writerow(SPECTRUM_COLUMNS)
        for i in order:
            z = sl.eigenvalues[i]
            w.writerow([repr(float(z.real)), repr(float(z.imag)), sl.parities[i],
                        int(sl.retained[i]), int(sl.near_band[i])])


def trajectories_json(trajectories, events, meta: dict | None = None) -> dict:
    return {"meta": meta or {},
            "branches": [t.as_dict() for t in trajectories],
            "events": [e.as_dict() for e in events]}


def write_plot_data(res: SweepResult, out_dir, header: dict | None = None) -> list[Path]:
    """Two CSV files mirroring the two panels of a figure: functionals
    against frequency, and the upper half of the retained spectrum (plus the
    band edges) against frequency."""
    out_dir = Path(out_dir)
    head = "".join(f"# {k}: {v}\n" for k, v in (header or {}).items())
    top = out_dir / "plot_functionals.csv"
    with open(top, "w", newline="") as fh:
        fh.write(head)
        w = csv.writer(fh)
        w.writerow(["omega", "E", "Q"])
        for r in res.reports:
            if r is not None:
                w.writerow([repr(r.omega), repr(r.E), repr(r.Q)])
    bottom = out_dir / "plot_spectrum.csv"
    with open(bottom, "w", newline="") as fh:
        fh.write(head)
        w = csv.writer(fh)
        w.writerow(["omega", "re_lambda", "im_lambda", "parity", "kind"])
        for sl in res.slices:
            lo, hi = sl.band_edges[2], sl.band_edges[3]
            w.writerow([repr(sl.omega), "0.0", repr(lo), "", "band_edge"])
            w.writerow([repr(sl.omega), "0.0", repr(hi), "", "band_edge"])
            mask = sl.retained & ~sl.zero_mode & ~sl.near_band
            for z, par in zip(sl.eigenvalues[mask], sl.parities[mask]):
                if z.imag < 0 or (abs(z.imag) < 1e-12 and z.real < 0):
                    continue
                kind = "real" if abs(z.imag) <= 1e-8 else ("imaginary" if abs(z.real) <= 1e-8 else "complex")
                w.writerow([repr(sl.omega), repr(float(z.real)), repr(float(z.imag)), par, kind])
    return [top, bottom]


def write_sweep_outputs(res: SweepResult, out_dir, header: dict | None = None,
                        spectra: bool = True) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    p = out_dir / "functionals.csv"
    write_sweep_csv(res.reports, p, header)
    written.append(p)
    if spectra:
        sdir = out_dir / "spectra"
        sdir.mkdir(exist_ok=True)
        for i, sl in enumerate(res.slices):
            q = sdir / f"spectrum_{i:04d}.csv"
            write_spectrum_csv(sl, q, header)
            written.append(q)
    q = out_dir / "trajectories.json"
    with open(q, "w") as fh:
        json.dump(trajectories_json(res.trajectories, res.events, header), fh, indent=1, sort_keys=True)
        fh.write("\n")
    written.append(q)
    q = out_dir / "events.json"
    with open(q, "w") as fh:
        json.dump({"meta": header or {}, "critical": res.critical(),
                   "failures": [{"omega": w, "error": e} for w, e in res.failures],
                   "events": [e.as_dict() for e in res.events]}, fh, indent=1, sort_keys=True)
        fh.write("\n")
    written.append(q)
    written += write_plot_data(res, out_dir, header)
    return written
