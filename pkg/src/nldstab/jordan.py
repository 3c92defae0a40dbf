"""Kernel and Jordan-chain structure of ``J L`` at a solitary wave.

The kernel is spanned by ``J phi`` (phase) and ``d phi/dx`` (translation);
their Jordan partners are ``d phi/d omega`` and
``xi = omega x J phi - alpha phi / 2``.  The chain in the translation block
grows exactly when ``c11 = <alpha phi, J d phi/dx> + omega Q`` vanishes, and
``c11`` equals the energy on every solution.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, asdict

import numpy as np

from .functionals import charge, energy_terms
from .linop import LinearizedOperator, assemble_JL, parity_decompose, restrict_field
from .model import ALPHA4, J4
from .profile import WaveProfile, check_same_grid, d_omega_profile, spatial_derivative

CSV_COLUMNS = ("omega", "residual_kernel_U1", "residual_kernel_tr", "residual_chain_U1",
               "residual_chain_tr", "vk_pairing", "c11", "energy", "defect")


@dataclass
class JordanReport:
    omega: float
    residual_kernel_U1: float
    residual_kernel_tr: float
    residual_chain_U1: float
    residual_chain_tr: float
    vk_pairing: float = float("nan")
    c11: float = float("nan")
    energy: float = float("nan")
    cross_orthogonality: float = float("nan")
    xi_phi_overlap: float = float("nan")
    generalized_lsq_residual: float | None = None

    @property
    def defect(self) -> float:
        return abs(self.c11 - self.energy)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["defect"] = self.defect
        return d

    def row(self) -> list:
        d = self.as_dict()
        return [d[c] for c in CSV_COLUMNS]


def inner(a, b, grid) -> float:
    """Real ``L^2`` inner product of two ``(4, M)`` fields."""
    return float(np.sum(grid.integrate(np.asarray(a) * np.asarray(b))))


def _norm(a, grid) -> float:
    return float(np.sqrt(max(inner(a, a, grid), 0.0)))


def _rel(res, rhs, grid) -> float:
    n = _norm(rhs, grid)
    r = _norm(res, grid)
    return r / n if n > 0 else r


def build_xi(profile: WaveProfile) -> np.ndarray:
    phi = profile.field
    Jphi = np.einsum("ab,bm->am", J4, phi)
    return profile.omega * profile.x * Jphi - 0.5 * np.einsum("ab,bm->am", ALPHA4, phi)


def chain_residuals(op: LinearizedOperator, profile: WaveProfile, dphi) -> JordanReport:
    """Relative residuals of the kernel vectors and of both chain equations.

    Kernel residuals are normalised by the norm of the kernel vector, chain
    residuals by the norm of the right-hand side.
    """
    check_same_grid(op, profile)
    dphi = np.asarray(dphi)
    if dphi.shape != (4, op.grid.M):
        raise ValueError(f"d phi/d omega must have shape (4, {op.grid.M})")
    g = op.grid
    phi = profile.field
    Jphi = np.einsum("ab,bm->am", J4, phi)
    dx = spatial_derivative(profile)
    xi = build_xi(profile)
    return JordanReport(
        omega=float(profile.omega),
        residual_kernel_U1=_rel(op.apply(Jphi), Jphi, g),
        residual_kernel_tr=_rel(op.apply(dx), dx, g),
        residual_chain_U1=_rel(op.apply(dphi) - Jphi, Jphi, g),
        residual_chain_tr=_rel(op.apply(xi) - dx, dx, g),
        cross_orthogonality=inner(dphi, np.einsum("ab,bm->am", J4, dx), g),
        xi_phi_overlap=inner(xi, phi, g),
    )


def vk_pairing(profile: WaveProfile, dphi) -> float:
    """``<d phi/d omega, phi>``, one half of ``dQ/d omega``."""
    return inner(dphi, profile.field, profile.grid)


def c_matrix(profile: WaveProfile) -> tuple[float, float, float]:
    """``(c11, E, |c11 - E|)``."""
    g = profile.grid
    phi = profile.field
    Jdx = np.einsum("ab,bm->am", J4, spatial_derivative(profile))
    c11 = inner(np.einsum("ab,bm->am", ALPHA4, phi), Jdx, g) + profile.omega * charge(profile)
    E = energy_terms(profile).E
    return c11, E, abs(c11 - E)


def generalized_vector(op: LinearizedOperator, profile: WaveProfile, dphi):
    """Least-squares solution of ``J L u = d phi/d omega`` in the phase block.

    Returns ``(u, relative residual, relative normal-equation residual)``.
    Away from ``dQ/domega = 0`` the system is not solvable and the residual
    stays of order one; at the critical frequency it drops.
    """
    even, _ = parity_decompose(op, profile)
    b = restrict_field(dphi, "even")
    sol, *_ = np.linalg.lstsq(even, b, rcond=None)
    r = even @ sol - b
    normal = even.T @ r
    rel = np.linalg.norm(r) / max(np.linalg.norm(b), 1e-300)
    nrel = np.linalg.norm(normal) / max(np.linalg.norm(even.T @ b), 1e-300)
    return sol, float(rel), float(nrel)


def jordan_report(profile: WaveProfile, *, delta: float = 1e-4, richardson: bool = False,
                  generalized: bool = False, op: LinearizedOperator | None = None) -> JordanReport:
    if op is None:
        op = assemble_JL(profile.model, profile)
    dphi = d_omega_profile(profile.model, profile.omega, delta, profile.grid, richardson=richardson)
    rep = chain_residuals(op, profile, dphi)
    rep.vk_pairing = vk_pairing(profile, dphi)
    rep.c11, rep.energy, _ = c_matrix(profile)
    if generalized:
        rep.generalized_lsq_residual = generalized_vector(op, profile, dphi)[1]
    return rep


def write_report_json(report: JordanReport, path, meta: dict | None = None):
    with open(path, "w") as fh:
        json.dump({"meta": meta or {}, "report": report.as_dict()}, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_reports_csv(reports, path, header: dict | None = None):
    with open(path, "w", newline="") as fh:
        for key, val in (header or {}).items():
            fh.write(f"# {key}: {val}\n")
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in reports:
            w.writerow([repr(float(x)) for x in r.row()])
