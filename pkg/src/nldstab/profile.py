"""Solitary-wave profiles ``phi = (v, i u)`` of the stationary equation.

The stationary system is a planar Hamiltonian flow in ``x`` whose first
integral vanishes on the soliton orbit.  The amplitude at ``x = 0`` follows in
closed form from that integral, so the profile is obtained by integrating
outward from ``(v0, 0)`` and projecting back onto the zero level set at every
grid node; the negative half-line follows from parity.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import GridMismatch, IntegrationDiverged
from .grid import Grid, make_grid
from .model import Family, ModelSpec

TAIL_STOP = 1e-14
TAIL_FLOOR = 1e-10


def _readonly(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class WaveProfile:
    model: ModelSpec
    omega: float
    grid: Grid
    v: np.ndarray
    u: np.ndarray
    residual: float = float("nan")
    first_integral_drift: float = float("nan")
    s_sign_changes: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "v", _readonly(self.v))
        object.__setattr__(self, "u", _readonly(self.u))

    @property
    def x(self):
        return self.grid.x

    @property
    def kappa(self) -> float:
        return float(np.sqrt(self.model.m ** 2 - self.omega ** 2))

    @property
    def field(self) -> np.ndarray:
        """Real 4-component field ``(v, 0, 0, u)``, shape ``(4, M)``."""
        z = np.zeros_like(self.v)
        return np.stack([self.v, z, z, self.u])

    @property
    def amplitude(self) -> float:
        return float(np.max(np.abs(self.v))) if self.v.size else 0.0

    def key(self) -> tuple:
        return (self.model.family.value, self.model.k, self.model.m,
                float(self.omega)) + self.grid.key()


def zero_profile(model: ModelSpec, omega: float, grid: Grid) -> WaveProfile:
    z = np.zeros(grid.M)
    return WaveProfile(model, float(omega), grid, z, z, 0.0, 0.0, 0)


def stationary_system(model: ModelSpec, omega: float):
    """Right-hand side ``(v', u')`` of the stationary equation."""
    omega = model.check_omega(omega)
    m, k = model.m, model.k

    if model.family is Family.GN:
        def rhs(x, y):
            v, u = y[0], y[1]
            f = model.f(v * v - u * u)
            return np.array([-(omega + m - f) * u, (omega - m + f) * v])
    else:
        def rhs(x, y):
            v, u = y[0], y[1]
            g = (v * v + u * u) ** k
            return np.array([-(omega + m + g) * u, (omega - m + g) * v])
    return rhs


def first_integral(model: ModelSpec, omega: float, v, u):
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    s = v * v - u * u
    rho = v * v + u * u
    if model.family is Family.GN:
        return omega * rho - model.m * s + model.F(s)
    return omega * rho + rho ** (model.k + 1) / (model.k + 1) - model.m * s


def _first_integral_gradient(model, omega, v, u):
    m, k = model.m, model.k
    if model.family is Family.GN:
        f = model.f(v * v - u * u)
        return np.array([2 * v * (omega - m + f), 2 * u * (omega + m - f)])
    g = (v * v + u * u) ** k
    return np.array([2 * v * (omega - m + g), 2 * u * (omega + m + g)])


def initial_amplitude(model: ModelSpec, omega: float) -> float:
    """``v(0)`` on the soliton orbit (``u(0) = 0``)."""
    omega = model.check_omega(omega)
    return float(((model.k + 1) * (model.m - omega)) ** (1.0 / (2.0 * model.k)))


def _project(model, omega, y):
    for _ in range(8):
        H = first_integral(model, omega, y[0], y[1])
        if abs(H) <= 1e-16 * (y @ y):
            break
        grad = _first_integral_gradient(model, omega, y[0], y[1])
        g2 = grad @ grad
        if g2 == 0.0:
            break
        y = y - H * grad / g2
    return y


def solve_profile(model: ModelSpec, omega: float, grid: Grid | None = None, *,
                  M: int = 512, scheme="fourier", R=None, stretch=None,
                  rtol: float = 1e-12) -> WaveProfile:
    """Solitary wave at frequency ``omega`` sampled on ``grid``.

    Raises
    ------
    ParameterError
        ``omega`` outside ``(-m, m)``.
    IntegrationDiverged
        The orbit leaves the zero level set or does not decay below the tail
        floor by ``x = R``.
    """
    omega = model.check_omega(omega)
    if grid is None:
        grid = make_grid(model, omega, M=M, scheme=scheme, R=R, stretch=stretch)
    rhs = stationary_system(model, omega)
    v0 = initial_amplitude(model, omega)
    half = grid.M // 2
    odd = grid.M % 2
    xs = grid.x[half + odd:]
    vals = np.zeros((xs.size, 2))

    y = np.array([v0, 0.0])
    x0 = 0.0
    bound = 10.0 * max(v0, 1.0)
    for i, x1 in enumerate(xs):
        sol = solve_ivp(rhs, (x0, x1), y, method="DOP853", rtol=rtol,
                        atol=1e-300 + 1e-18 * v0)
        if not sol.success:
            raise IntegrationDiverged(f"integrator failed at x={x1:.4g}: {sol.message}")
        y = _project(model, omega, sol.y[:, -1])
        if not np.all(np.isfinite(y)) or np.abs(y).max() > bound or y[0] < -TAIL_FLOOR * v0:
            raise IntegrationDiverged(
                f"profile left the soliton orbit at x={x1:.4g} (omega={omega})")
        vals[i] = y
        x0 = x1
        if abs(y[0]) + abs(y[1]) < TAIL_STOP * v0:
            break

    tail = abs(vals[-1, 0]) + abs(vals[-1, 1])
    if tail > TAIL_FLOOR * v0:
        raise IntegrationDiverged(
            f"profile has not decayed at R={grid.R:.4g}: |v|+|u|={tail:.3g} "
            f"(omega={omega} too close to the gap edge for this domain)")

    mid_v, mid_u = ([v0], [0.0]) if odd else ([], [])
    v = np.concatenate((vals[::-1, 0], mid_v, vals[:, 0]))
    u = np.concatenate((-vals[::-1, 1], mid_u, vals[:, 1]))
    s = v[half:] ** 2 - u[half:] ** 2
    nz = s[np.abs(s) > 1e-300]
    changes = int(np.count_nonzero(np.diff(np.sign(nz)))) if nz.size else 0
    prof = WaveProfile(model, omega, grid, v, u, s_sign_changes=2 * changes)
    object.__setattr__(prof, "residual", stationary_residual(prof))
    object.__setattr__(prof, "first_integral_drift", first_integral_residual(prof))
    return prof


def solve_resolved_profile(model: ModelSpec, omega: float, *, M: int = 512,
                           scheme="fourier", R=None, stretch="auto", tol: float = 1e-9,
                           max_halvings: int = 3) -> WaveProfile:
    """:func:`solve_profile` on an automatically sized grid, halving the
    stretch scale while the grid residual exceeds ``tol`` times the amplitude.

    Near the gap edge the core narrows much faster than the tail widens;
    the default stretch can then leave the core under-resolved.  Explicit
    (numeric or ``None``) stretches are used as given.
    """
    omega = model.check_omega(omega)
    grid = make_grid(model, omega, M=M, scheme=scheme, R=R, stretch=stretch)
    prof = solve_profile(model, omega, grid)
    if stretch != "auto":
        return prof
    for _ in range(max_halvings):
        if prof.residual <= tol * max(prof.amplitude, 1.0) or grid.stretch is None:
            break
        grid = Grid(grid.R, grid.M, grid.scheme, 0.5 * grid.stretch)
        prof = solve_profile(model, omega, grid)
    return prof


def stationary_residual(profile: WaveProfile) -> float:
    """Max-norm residual of the stationary system using the grid derivative."""
    D = profile.grid.D
    rhs = stationary_system(profile.model, profile.omega)
    dv, du = rhs(0.0, np.stack([profile.v, profile.u]))
    return float(max(np.abs(D @ profile.v - dv).max(), np.abs(D @ profile.u - du).max()))


def first_integral_residual(profile: WaveProfile) -> float:
    H = first_integral(profile.model, profile.omega, profile.v, profile.u)
    return float(np.max(np.abs(H))) if H.size else 0.0


def spatial_derivative(profile: WaveProfile) -> np.ndarray:
    """``d/dx`` of the real field, shape ``(4, M)``, with the grid matrix."""
    return profile.field @ profile.grid.D.T


def d_omega_profile(model: ModelSpec, omega: float, delta: float = 1e-4,
                    grid: Grid | None = None, *, richardson: bool = False,
                    **grid_options) -> np.ndarray:
    """Centred difference ``d phi / d omega`` on a fixed grid, shape ``(4, M)``."""
    omega = model.check_omega(omega)
    if grid is None:
        grid = make_grid(model, omega, **grid_options)

    def centred(d):
        hi = solve_profile(model, omega + d, grid)
        lo = solve_profile(model, omega - d, grid)
        return (hi.field - lo.field) / (2.0 * d)

    if not richardson:
        return centred(delta)
    return (4.0 * centred(delta / 2.0) - centred(delta)) / 3.0


def sign_flip(profile: WaveProfile) -> tuple[float, np.ndarray, np.ndarray]:
    """Map a GN wave at ``omega`` to ``-omega`` by swapping ``v`` and ``u``.

    The result ``(-omega, u, v)`` solves the stationary GN system with the
    nonlinearity ``s -> f(-s)``; parity of the components is exchanged.
    """
    return -profile.omega, profile.u.copy(), profile.v.copy()


def check_same_grid(*objs):
    grids = [o.grid if hasattr(o, "grid") else o for o in objs]
    for g in grids[1:]:
        if not g.same_as(grids[0]):
            raise GridMismatch(f"grid {g.key()} differs from {grids[0].key()}")
