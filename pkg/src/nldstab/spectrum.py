"""Spectra of the linearisation: slices, filtering, branch tracking and
detection of eigenvalue collisions at the origin."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import EigensolverFailure
from .linop import LinearizedOperator, expand_field, parity_decompose, restrict_field
from .model import J4
from .profile import WaveProfile, spatial_derivative

log = logging.getLogger(__name__)

BAND_TOL = 1e-3
LOCALIZATION_MIN = 0.9


@dataclass
class SpectrumSlice:
    """All eigenvalues of ``J L`` at one frequency, with per-eigenvalue labels.

    ``localization`` is the fraction of the (quadrature-weighted) eigenvector
    norm inside ``|x| <= R/2``; ``zero_mode`` marks the two smallest
    eigenvalues of each parity block (the kernel of ``J L`` and its Jordan
    partners); ``eps_disc`` is the square root of the relative kernel
    residual, the expected size of those split Jordan eigenvalues.
    """

    omega: float
    eigenvalues: np.ndarray
    parities: np.ndarray
    localization: np.ndarray
    near_band: np.ndarray
    zero_mode: np.ndarray
    retained: np.ndarray
    band_edges: tuple
    eps_disc: float = float("nan")
    lam_max: float = np.inf
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.eigenvalues.size

    @property
    def gap_threshold(self) -> float:
        return self.band_edges[2]

    def select(self, mask) -> np.ndarray:
        return self.eigenvalues[np.asarray(mask, dtype=bool)]

    def retained_eigenvalues(self, include_zero_modes=False) -> np.ndarray:
        mask = self.retained & (include_zero_modes | ~self.zero_mode)
        return self.eigenvalues[mask]

    def gap_eigenvalues(self) -> np.ndarray:
        """Retained, non-zero-mode eigenvalues strictly below the band threshold."""
        mask = (self.retained & ~self.zero_mode & ~self.near_band
                & (np.abs(self.eigenvalues.imag) < self.gap_threshold - BAND_TOL))
        return self.eigenvalues[mask]


def kernel_vectors(profile: WaveProfile) -> dict:
    """``J phi`` (phase rotation) and ``d phi/dx`` (translation), each ``(4, M)``."""
    phi = profile.field
    return {"even": np.einsum("ab,bm->am", J4, phi), "odd": spatial_derivative(profile)}


def _wnorm(field4, weights) -> float:
    return float(np.sqrt(np.sum(np.abs(field4) ** 2 * weights)))


def relative_kernel_residuals(op: LinearizedOperator, profile: WaveProfile) -> dict:
    w = op.grid.weights
    out = {}
    for name, vec in kernel_vectors(profile).items():
        n = _wnorm(vec, w)
        out[name] = _wnorm(op.apply(vec), w) / n if n > 0 else 0.0
    return out


def _localization(vecs: np.ndarray, M: int, block: str, grid) -> np.ndarray:
    inner = np.abs(grid.x) <= 0.5 * grid.R
    w = grid.weights
    loc = np.empty(vecs.shape[1])
    for j in range(vecs.shape[1]):
        f = np.abs(expand_field(vecs[:, j], M, block)) ** 2 * w
        tot = f.sum()
        loc[j] = f[:, inner].sum() / tot if tot > 0 else 0.0
    return loc


def resolved_frequency(grid, m: float) -> float:
    """``sqrt(xi_res^2 + m^2)`` for the wavenumber ``xi_res = pi / (2 h_max)``
    resolved on the coarsest cell of the grid."""
    hmax = float(np.max(np.diff(grid.x)))
    return float(np.hypot(np.pi / (2 * hmax), m))


def on_band(eigenvalues, band_edges, tol=BAND_TOL) -> np.ndarray:
    lam = np.asarray(eigenvalues)
    return (np.abs(lam.real) <= tol) & (np.abs(lam.imag) >= band_edges[2] - tol)


def eigen_slice(op: LinearizedOperator, profile: WaveProfile | None = None, *,
                use_parity: bool = True, lam_max: float | None = None,
                localization_min: float = LOCALIZATION_MIN) -> SpectrumSlice:
    """Complete dense eigendecomposition of ``J L`` (or its parity blocks).

    Eigenvalues above ``lam_max`` are kept in the slice but never retained.
    The default is the smaller of ``3 m + |omega|`` and the largest
    continuum frequency the coarsest grid cell can carry,
    ``sqrt(xi_res^2 + m^2) + |omega|`` with ``xi_res = pi / (2 h_max)``:
    beyond it, continuum waves cannot propagate into the (stretched) tails
    and get trapped in the fine core, mimicking localized eigenfunctions.
    """
    if lam_max is None:
        lam_max = min(3.0 * op.model.m, resolved_frequency(op.grid, op.model.m)) + abs(op.omega)
    M = op.grid.M
    blocks = parity_decompose(op, profile) if use_parity else (op.A,)
    names = ("even", "odd") if use_parity else ("full",)
    eps = {}
    if profile is not None:
        res = relative_kernel_residuals(op, profile)
        scale = np.finfo(float).eps * np.abs(op.A).max()
        eps = {k: float(np.sqrt(max(r, scale))) for k, r in res.items()}
    lam_all, par_all, loc_all, zero_all = [], [], [], []
    for name, B in zip(names, blocks):
        try:
            lam, vecs = sla.eig(B, check_finite=True)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise EigensolverFailure(op.omega, str(exc)) from exc
        if name == "full":
            loc = np.empty(lam.size)
            inner = np.abs(op.grid.x) <= 0.5 * op.grid.R
            w = op.grid.weights
            for j in range(lam.size):
                f = np.abs(vecs[:, j].reshape(4, M)) ** 2 * w
                loc[j] = f[:, inner].sum() / f.sum()
            nzero = 4
        else:
            loc = _localization(vecs, M, name, op.grid)
            nzero = 2
        zero = np.zeros(lam.size, dtype=bool)
        zero[np.argsort(np.abs(lam))[:nzero]] = True
        lam_all.append(lam)
        par_all.append(np.full(lam.size, name))
        loc_all.append(loc)
        zero_all.append(zero)
    lam = np.concatenate(lam_all)
    loc = np.concatenate(loc_all)
    near = on_band(lam, op.band_edges)
    retained = (loc >= localization_min) & (np.abs(lam) <= lam_max)
    eps_disc = max(eps.values()) if eps else float("nan")
    return SpectrumSlice(
        omega=op.omega, eigenvalues=lam, parities=np.concatenate(par_all),
        localization=loc, near_band=near, zero_mode=np.concatenate(zero_all),
        retained=retained, band_edges=op.band_edges, eps_disc=eps_disc,
        lam_max=lam_max, meta={"M": M, "eps_by_block": eps},
    )


def filter_resolved(coarse: SpectrumSlice, fine: SpectrumSlice, tol: float = 1e-4) -> SpectrumSlice:
    """Keep a retained eigenvalue of ``coarse`` only if ``fine`` (same model,
    frequency and domain, refined grid) has an eigenvalue of the same parity
    within ``tol``.  Zero modes are always kept."""
    if coarse.omega != fine.omega:
        raise ValueError("slices must share the frequency")
    keep = coarse.retained.copy()
    for i in np.flatnonzero(coarse.retained & ~coarse.zero_mode):
        same = fine.parities == coarse.parities[i]
        cand = fine.eigenvalues[same]
        if cand.size == 0 or np.min(np.abs(cand - coarse.eigenvalues[i])) > tol:
            keep[i] = False
    out = SpectrumSlice(**{**coarse.__dict__, "retained": keep})
    out.meta = {**coarse.meta, "refined_M": fine.meta.get("M"), "resolution_tol": tol}
    return out


def is_retained(slice_: SpectrumSlice, probe: complex, tol: float = 1e-4) -> bool:
    lam = slice_.eigenvalues[slice_.retained]
    return bool(lam.size and np.min(np.abs(lam - probe)) <= tol)


def real_pairs(slice_: SpectrumSlice, tol: float = 1e-3) -> list[float]:
    """Positive members of the retained real eigenvalue pairs ``+-x``."""
    lam = slice_.retained_eigenvalues()
    real = lam[(np.abs(lam.imag) <= tol) & (np.abs(lam.real) > tol)]
    pos = np.sort(real.real[real.real > 0])
    neg = np.sort(-real.real[real.real < 0])
    out = []
    used = np.zeros(neg.size, dtype=bool)
    for x in pos:
        d = np.abs(neg - x)
        d[used] = np.inf
        j = int(np.argmin(d)) if d.size else -1
        if j >= 0 and d[j] <= max(tol, 1e-6 * x):
            used[j] = True
            out.append(float(x))
        else:
            warnings.warn(f"unpaired real eigenvalue {x:.6g} at omega={slice_.omega}",
                          RuntimeWarning, stacklevel=2)
    for x in neg[~used]:
        warnings.warn(f"unpaired real eigenvalue {-x:.6g} at omega={slice_.omega}",
                      RuntimeWarning, stacklevel=2)
    return out


def symmetry_defect(eigenvalues) -> float:
    """Largest distance from an eigenvalue to the nearest member of its mirror
    images ``-lambda`` and ``conj(lambda)``."""
    lam = np.asarray(eigenvalues)
    if lam.size == 0:
        return 0.0
    d1 = np.min(np.abs(lam[:, None] + lam[None, :]), axis=1).max()
    d2 = np.min(np.abs(lam[:, None] - lam.conj()[None, :]), axis=1).max()
    return float(max(d1, d2))


# --- tracking -----------------------------------------------------------------

@dataclass
class CollisionEvent:
    omega_star: float
    kind: str  # "origin_collision" | "origin_birth"
    emerging: str  # type of the pair for omega below omega_star: "real" | "imaginary"
    parity: str
    branch_id: int
    crossref: str | None = None
    crossref_omega: float | None = None
    crossref_distance: float | None = None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class EigenTrajectory:
    branch_id: int
    parity: str
    omegas: list = field(default_factory=list)
    values: list = field(default_factory=list)
    events: list = field(default_factory=list)
    splits: list = field(default_factory=list)

    def __len__(self):
        return len(self.omegas)

    def as_dict(self) -> dict:
        return {
            "branch_id": self.branch_id,
            "parity": self.parity,
            "samples": [{"omega": float(w), "re": float(z.real), "im": float(z.imag)}
                        for w, z in zip(self.omegas, self.values)],
            "events": [e.as_dict() for e in self.events],
            "splits": [float(w) for w in self.splits],
        }


def snap_to_axes(eigenvalues, tol: float = 1e-7) -> np.ndarray:
    """Zero out real or imaginary parts below ``tol * max(1, |lambda|)``."""
    lam = np.asarray(eigenvalues, dtype=complex)
    scale = tol * np.maximum(1.0, np.abs(lam))
    re = np.where(np.abs(lam.real) <= scale, 0.0, lam.real)
    im = np.where(np.abs(lam.imag) <= scale, 0.0, lam.imag)
    return re + 1j * im


def origin_threshold(slice_: SpectrumSlice, factor: float = 5.0) -> float:
    eps = slice_.eps_disc
    return factor * eps if np.isfinite(eps) else 0.0


def representatives(slice_: SpectrumSlice, include_band=False, origin_factor: float = 5.0):
    """One eigenvalue per ``{+-lambda, +-conj(lambda)}`` orbit, in the closed
    first quadrant, with its parity.  Zero modes and everything inside the
    origin threshold ``origin_factor * eps_disc`` are excluded."""
    lam = snap_to_axes(slice_.eigenvalues)
    mask = slice_.retained & ~slice_.zero_mode
    mask &= np.abs(lam) > origin_threshold(slice_, origin_factor)
    if not include_band:
        mask &= ~slice_.near_band
    mask &= (lam.real >= 0) & (lam.imag >= 0)
    mask &= ~((lam.imag == 0) & (lam.real == 0))
    return lam[mask], slice_.parities[mask]


def track(slices, radius: float = 0.05, max_gap: int = 3, include_band=False,
          origin_factor: float = 5.0) -> list[EigenTrajectory]:
    """Greedy nearest-neighbour continuation of eigenvalue branches.

    ``slices`` must be sorted by frequency.  Each branch follows one
    representative of a symmetric eigenvalue orbit (so a branch and its
    mirror images are tracked jointly).  Distances are measured between the
    squares ``lambda**2``: a pair colliding at the origin moves like
    ``sqrt(omega - omega_star)`` in ``lambda`` but linearly in ``lambda**2``,
    and the real and imaginary sides join continuously there.  A branch may
    skip up to ``max_gap`` slices (e.g. while inside the origin threshold).
    Two candidates within ``radius`` of one branch are recorded as a split.
    """
    slices = sorted(slices, key=lambda s: s.omega)
    branches: list[EigenTrajectory] = []
    active: list[tuple[EigenTrajectory, int]] = []
    for n, sl in enumerate(slices):
        lam, par = representatives(sl, include_band, origin_factor)
        taken = np.zeros(lam.size, dtype=bool)
        pairs = []
        for b_idx, (br, last) in enumerate(active):
            for j in range(lam.size):
                if par[j] != br.parity:
                    continue
                d = abs(lam[j] ** 2 - br.values[-1] ** 2)
                if d <= radius * (1 + (n - last - 1)):
                    pairs.append((d, b_idx, j))
        pairs.sort()
        matched = set()
        hits = {}
        for d, b_idx, j in pairs:
            hits[b_idx] = hits.get(b_idx, 0) + 1
        new_active = []
        for d, b_idx, j in pairs:
            if b_idx in matched or taken[j]:
                continue
            br, _ = active[b_idx]
            if hits[b_idx] > 1:
                br.splits.append(float(sl.omega))
            br.omegas.append(float(sl.omega))
            br.values.append(complex(lam[j]))
            matched.add(b_idx)
            taken[j] = True
        for b_idx, (br, last) in enumerate(active):
            if b_idx in matched:
                new_active.append((br, n))
            elif n - last <= max_gap:
                new_active.append((br, last))
        for j in np.flatnonzero(~taken):
            br = EigenTrajectory(len(branches), str(par[j]), [float(sl.omega)], [complex(lam[j])])
            branches.append(br)
            new_active.append((br, n))
        active = new_active
    return branches


def _axis_square(z: complex, tol: float) -> float | None:
    """Signed square: ``+x^2`` on the real axis, ``-y^2`` on the imaginary axis."""
    if z.imag == 0 or abs(z.imag) <= tol * abs(z.real):
        return z.real ** 2
    if z.real == 0 or abs(z.real) <= tol * abs(z.imag):
        return -z.imag ** 2
    return None


def critical_points(table) -> dict:
    """Sign changes of ``E`` and ``dQ/domega`` in a functional sweep table,
    located by linear interpolation."""
    out = {"omega_E": [], "omega_VK": []}
    rows = [r for r in table if r is not None]
    for key, attr in (("omega_E", "E"), ("omega_VK", "dQ_domega")):
        pts = [(r.omega, getattr(r, attr)) for r in rows
               if getattr(r, attr) is not None and np.isfinite(getattr(r, attr))]
        for (w0, f0), (w1, f1) in zip(pts, pts[1:]):
            if f0 == 0:
                out[key].append(w0)
            elif f0 * f1 < 0:
                out[key].append(w0 - f0 * (w1 - w0) / (f1 - f0))
    return out


def detect_origin_collisions(trajectories, functional_table=None, *,
                             axis_tol: float = 1e-6, birth_radius: float = 0.02,
                             omega_range: tuple | None = None) -> list[CollisionEvent]:
    """Find branches that pass through ``lambda = 0`` changing between the
    real and the imaginary axis.

    ``omega_star`` is located by linear interpolation of the signed square of
    the eigenvalue, which is smooth through the collision.  A branch that
    starts or ends within ``birth_radius`` of the origin strictly inside the
    sweep range is reported as an ``origin_birth``.  Each event is
    cross-referenced to the nearest zero of ``E`` or ``dQ/domega``.
    """
    crit = critical_points(functional_table) if functional_table is not None else {}
    events = []
    for br in trajectories:
        mus = [_axis_square(z, axis_tol) for z in br.values]
        for i in range(len(mus) - 1):
            a, b = mus[i], mus[i + 1]
            if a is None or b is None or a * b >= 0:
                continue
            w0, w1 = br.omegas[i], br.omegas[i + 1]
            w_star = w0 - a * (w1 - w0) / (b - a)
            emerging = "real" if a > 0 else "imaginary"
            events.append(CollisionEvent(w_star, "origin_collision", emerging, br.parity, br.branch_id))
        if omega_range is not None and len(br) >= 2:
            lo, hi = omega_range
            for end, w, z, mu_next in ((0, br.omegas[0], br.values[0], mus[1]),
                                       (-1, br.omegas[-1], br.values[-1], mus[-2])):
                if abs(z) <= birth_radius and lo < w < hi and mu_next is not None:
                    kind_real = mu_next > 0
                    # branch exists only above w (end == 0) or only below it
                    emerging = ("none" if end == 0 else ("real" if kind_real else "imaginary"))
                    events.append(CollisionEvent(w, "origin_birth", emerging, br.parity, br.branch_id))
    for ev in events:
        best = None
        for name, roots in crit.items():
            for r in roots:
                d = abs(r - ev.omega_star)
                if best is None or d < best[2]:
                    best = (name, r, d)
        if best is not None:
            ev.crossref, ev.crossref_omega, ev.crossref_distance = best
        for br in trajectories:
            if br.branch_id == ev.branch_id:
                br.events.append(ev)
    events.sort(key=lambda e: e.omega_star)
    return events
