"""Model families and the pointwise nonlinearity in real coordinates.

A spinor ``psi = (psi1, psi2)`` is stored as the real 4-vector
``y = (Re psi1, Re psi2, Im psi1, Im psi2)``.  The Dirac matrices are fixed to
``gamma0 = sigma3`` and ``gamma1 = i sigma2``, so that ``alpha = sigma1`` and
``beta = sigma3``; standing waves then take the form ``(v, i u)`` with ``v``
even and ``u`` odd, i.e. ``y = (v, 0, 0, u)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

# multiplication by -i
J4 = np.array(
    [[0.0, 0.0, 1.0, 0.0],
     [0.0, 0.0, 0.0, 1.0],
     [-1.0, 0.0, 0.0, 0.0],
     [0.0, -1.0, 0.0, 0.0]]
)
ALPHA4 = np.array(
    [[0.0, 1.0, 0.0, 0.0],
     [1.0, 0.0, 0.0, 0.0],
     [0.0, 0.0, 0.0, 1.0],
     [0.0, 0.0, 1.0, 0.0]]
)
BETA4 = np.diag([1.0, -1.0, 1.0, -1.0])

_SINGULAR_FLOOR = 1e-300


class Family(str, enum.Enum):
    MTM = "MTM"
    GN = "GN"

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ParameterError(f"unknown model family {value!r}; expected MTM or GN") from None


@dataclass(frozen=True)
class ModelSpec:
    """Pure-power self-interaction of order ``2k + 1``.

    GN: ``F(s) = |s|^(k+1) / (k+1)`` with ``s = psi^* beta psi``.
    MTM: ``||J||_g^(k+1) / (k+1)`` with ``J`` the charge-current 2-vector.
    """

    family: Family
    k: float
    m: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if not np.isfinite(self.k) or self.k <= 0:
            raise ParameterError(f"nonlinearity exponent k must be > 0, got {self.k}")
        if not np.isfinite(self.m) or self.m <= 0:
            raise ParameterError(f"mass m must be > 0, got {self.m}")
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "m", float(self.m))

    @property
    def label(self) -> str:
        return f"{self.family.value}_k{self.k:g}_m{self.m:g}"

    def in_gap(self, omega) -> bool:
        return bool(np.isfinite(omega) and -self.m < omega < self.m)

    def check_omega(self, omega) -> float:
        omega = float(omega)
        if not self.in_gap(omega):
            raise ParameterError(
                f"omega={omega} outside the spectral gap (-{self.m}, {self.m})")
        return omega

    def f(self, s):
        """Derivative of the scalar GN density, ``|s|^(k-1) s``."""
        s = np.asarray(s, dtype=float)
        return np.sign(s) * np.abs(s) ** self.k

    def F(self, s):
        s = np.asarray(s, dtype=float)
        return np.abs(s) ** (self.k + 1) / (self.k + 1)


def make_model(family, k, m=1.0) -> ModelSpec:
    return ModelSpec(Family.parse(family), k, m)


def charge_density(y):
    y = np.asarray(y, dtype=float)
    return np.einsum("...i,...i->...", y, y)


def scalar_density(y):
    """``psi^* beta psi`` (the GN invariant)."""
    y = np.asarray(y, dtype=float)
    return y[..., 0] ** 2 - y[..., 1] ** 2 + y[..., 2] ** 2 - y[..., 3] ** 2


def current_density(y):
    """Spatial current ``psi^* alpha psi``."""
    y = np.asarray(y, dtype=float)
    return 2.0 * (y[..., 0] * y[..., 1] + y[..., 2] * y[..., 3])


def interaction_density(model: ModelSpec, y):
    """Pointwise value of the self-interaction term of the Lagrangian."""
    if model.family is Family.GN:
        return model.F(scalar_density(y))
    rho = charge_density(y)
    j = current_density(y)
    w = np.maximum(rho ** 2 - j ** 2, 0.0)
    return w ** ((model.k + 1) / 2) / (model.k + 1)


def nonlinear_map(model: ModelSpec, y):
    """Real form of the nonlinear term, i.e. one half of the gradient of the
    interaction density.  ``y`` has shape ``(..., 4)``."""
    y = np.asarray(y, dtype=float)
    k = model.k
    if model.family is Family.GN:
        s = scalar_density(y)
        return model.f(s)[..., None] * (y @ BETA4)
    rho = charge_density(y)
    j = current_density(y)
    w = np.maximum(rho ** 2 - j ** 2, 0.0)
    g = rho[..., None] * y - j[..., None] * (y @ ALPHA4)
    return _safe_pow(w, (k - 1) / 2)[..., None] * g


def nonlinear_jacobian(model: ModelSpec, y):
    """Derivative of :func:`nonlinear_map`; shape ``(..., 4, 4)``, symmetric."""
    y = np.asarray(y, dtype=float)
    k = model.k
    eye = np.eye(4)
    if model.family is Family.GN:
        s = scalar_density(y)
        by = y @ BETA4
        fprime = _safe_pow(np.abs(s), k - 1) * k
        return (model.f(s)[..., None, None] * BETA4
                + 2.0 * fprime[..., None, None] * by[..., :, None] * by[..., None, :])
    rho = charge_density(y)
    j = current_density(y)
    w = np.maximum(rho ** 2 - j ** 2, 0.0)
    ay = y @ ALPHA4
    g = rho[..., None] * y - j[..., None] * ay
    base = (rho[..., None, None] * eye
            + 2.0 * y[..., :, None] * y[..., None, :]
            - j[..., None, None] * ALPHA4
            - 2.0 * ay[..., :, None] * ay[..., None, :])
    c1 = _safe_pow(w, (k - 1) / 2)
    c2 = 2.0 * (k - 1) * _safe_pow(w, (k - 3) / 2)
    return c1[..., None, None] * base + c2[..., None, None] * g[..., :, None] * g[..., None, :]


def _safe_pow(base, exponent):
    # zero where the base sits at the singular floor and the power is not finite
    base = np.asarray(base, dtype=float)
    if exponent > 0:
        return base ** exponent
    if exponent == 0:
        return np.ones_like(base)
    out = np.zeros_like(base)
    mask = base > _SINGULAR_FLOOR
    out[mask] = base[mask] ** exponent
    return out


def u1_rotation(theta):
    """``exp(theta J)``, the real form of multiplication by ``exp(-i theta)``."""
    return np.cos(theta) * np.eye(4) + np.sin(theta) * J4
