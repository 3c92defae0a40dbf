"""Conserved functionals on solitary waves, virial identities, and the two
critical frequencies (zero energy and stationary charge)."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy.optimize import brentq

from .errors import IntegrationDiverged, NoSignChange, ParameterError
from .grid import make_grid
from .model import ModelSpec, interaction_density
from .profile import WaveProfile, solve_profile, solve_resolved_profile

log = logging.getLogger(__name__)

CSV_COLUMNS = ("omega", "Q", "K", "M", "V", "E", "L", "dQ_domega",
               "defect_virial1", "defect_virial2", "defect_KL")


@dataclass
class FunctionalReport:
    omega: float
    Q: float
    K: float
    M: float
    V: float
    E: float
    L: float
    defect_virial1: float  # |K + k V|
    defect_virial2: float  # |omega Q - M - V|
    defect_KL: float  # |K + L|
    dQ_domega: float | None = None
    k: float = float("nan")

    def row(self) -> list:
        return [getattr(self, c) for c in CSV_COLUMNS]

    def virial_ok(self, tol: float = 1e-6) -> bool:
        return (self.defect_virial1 <= tol * max(abs(self.K), 1.0)
                and self.defect_virial2 <= tol * max(abs(self.omega * self.Q), 1.0)
                and self.defect_KL <= tol * max(abs(self.K), 1.0))

    def as_dict(self) -> dict:
        return asdict(self)


def charge(profile: WaveProfile) -> float:
    return float(profile.grid.integrate(profile.v ** 2 + profile.u ** 2))


def energy_terms(profile: WaveProfile) -> FunctionalReport:
    g, v, u = profile.grid, profile.v, profile.u
    model, omega = profile.model, profile.omega
    D = g.D
    Q = charge(profile)
    K = float(g.integrate(v * (D @ u) - u * (D @ v)))
    M = float(model.m * g.integrate(v ** 2 - u ** 2))
    y = profile.field.T
    V = -float(g.integrate(interaction_density(model, y)))
    E = K + M + V
    L = -E + omega * Q
    return FunctionalReport(
        omega=float(omega), Q=Q, K=K, M=M, V=V, E=E, L=L,
        defect_virial1=abs(K + model.k * V),
        defect_virial2=abs(omega * Q - M - V),
        defect_KL=abs(K + L), k=model.k,
    )


def virial_report(profile: WaveProfile) -> dict:
    r = energy_terms(profile)
    return {"K+kV": r.defect_virial1, "wQ-M-V": r.defect_virial2, "K+L": r.defect_KL}


def _profile(model, omega, M, grid_options):
    return solve_resolved_profile(model, omega, M=M, **grid_options)


def charge_at(model: ModelSpec, omega: float, *, M: int = 512, grid=None, **grid_options) -> float:
    if grid is None:
        grid = make_grid(model, omega, M=M, **grid_options)
    return charge(solve_profile(model, omega, grid))


def energy_at(model: ModelSpec, omega: float, *, M: int = 512, **grid_options) -> float:
    return energy_terms(_profile(model, omega, M, grid_options)).E


def dq_domega(model: ModelSpec, omega: float, delta: float = 1e-4, *,
              richardson: bool = True, M: int = 512, **grid_options) -> float:
    """Centred finite difference of ``Q`` on one fixed grid, optionally with a
    Richardson step ``(4 D(delta/2) - D(delta)) / 3``."""
    grid = solve_resolved_profile(model, omega, M=M, **grid_options).grid

    def centred(d):
        return (charge_at(model, omega + d, grid=grid) - charge_at(model, omega - d, grid=grid)) / (2 * d)

    if not richardson:
        return centred(delta)
    return (4.0 * centred(delta / 2) - centred(delta)) / 3.0


def _sweep_point(args):
    model, omega, M, grid_options = args
    try:
        return energy_terms(_profile(model, omega, M, grid_options))
    except (IntegrationDiverged, ParameterError, FloatingPointError) as exc:
        log.warning("functional sweep failed at omega=%g: %s", omega, exc)
        return None


def sweep_functionals(model: ModelSpec, omegas, *, M: int = 512, workers: int = 1,
                      **grid_options) -> list:
    """One report per frequency (``None`` where the profile solve failed);
    ``dQ_domega`` is filled by centred differences on the sweep grid."""
    omegas = [float(w) for w in omegas]
    jobs = [(model, w, M, grid_options) for w in omegas]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(workers) as pool:
            reports = list(pool.map(_sweep_point, jobs))
    else:
        reports = [_sweep_point(j) for j in jobs]
    n = len(reports)
    for i, r in enumerate(reports):
        if r is None or n < 2:
            continue
        lo = reports[i - 1] if i > 0 else None
        hi = reports[i + 1] if i + 1 < n else None
        if lo is not None and hi is not None:
            r.dQ_domega = (hi.Q - lo.Q) / (hi.omega - lo.omega)
        elif hi is not None:
            r.dQ_domega = (hi.Q - r.Q) / (hi.omega - r.omega)
        elif lo is not None:
            r.dQ_domega = (r.Q - lo.Q) / (r.omega - lo.omega)
    return reports


def write_sweep_csv(reports, path, header: dict | None = None):
    with open(path, "w", newline="") as fh:
        if header:
            for key, val in header.items():
                fh.write(f"# {key}: {val}\n")
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in reports:
            if r is None:
                continue
            w.writerow(["" if x is None else repr(float(x)) for x in r.row()])


def _root(fun, bracket, xtol, what):
    a, b = map(float, bracket)
    fa, fb = fun(a), fun(b)
    if not (np.isfinite(fa) and np.isfinite(fb)) or fa * fb > 0:
        raise NoSignChange(f"{what} has no sign change on [{a}, {b}] ({fa:.3g}, {fb:.3g})")
    if fa == 0:
        return a
    if fb == 0:
        return b
    return float(brentq(fun, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps))


def find_omega_E(model: ModelSpec, bracket, *, xtol: float = 1e-6, M: int = 512,
                 **grid_options) -> float:
    """Root of ``omega -> E(phi_omega)`` by Brent's method."""
    for w in bracket:
        model.check_omega(w)
    return _root(lambda w: energy_at(model, w, M=M, **grid_options), bracket, xtol, "E")


def find_omega_VK(model: ModelSpec, bracket, *, xtol: float = 1e-5, delta: float = 1e-4,
                  M: int = 512, **grid_options) -> float:
    """Root of ``omega -> dQ/domega`` (Richardson-refined centred differences)."""
    for w in bracket:
        model.check_omega(w)
        model.check_omega(w - delta)
        model.check_omega(w + delta)
    f = lambda w: dq_domega(model, w, delta, M=M, **grid_options)
    return _root(f, bracket, xtol, "dQ/domega")


def sign_change_brackets(omegas, values) -> list[tuple[float, float]]:
    """Adjacent sample pairs with a strict sign change (used for auto-bracketing)."""
    out = []
    pts = [(w, f) for w, f in zip(omegas, values) if f is not None and math.isfinite(f)]
    for (w0, f0), (w1, f1) in zip(pts, pts[1:]):
        if f0 * f1 < 0:
            out.append((w0, w1))
    return out
